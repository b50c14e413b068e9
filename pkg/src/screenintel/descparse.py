"""Parse the model's sectioned free-text reply into a typed description.

The reply grammar is the six "###" headed sections from the prompt. Parsing
is total: unknown headings become their own segments, a reply with no
headings at all is kept as main content with a warning flag, and the "X"
placeholder always normalizes to empty collections.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date

from . import urlnorm

SECTION_MAIN = "Main Content"
SECTION_FILES = "Files/Programs"
SECTION_URL = "URL"
SECTION_TABS = "Browser Tabs Analysis"
SECTION_SUSPICIOUS = "Suspicious Elements"
SECTION_LANGDATE = "Language and Date"

SECTIONS = (SECTION_MAIN, SECTION_FILES, SECTION_URL, SECTION_TABS,
            SECTION_SUSPICIOUS, SECTION_LANGDATE)

# tolerated heading spellings, lowercased, colons stripped
_HEADING_ALIASES = {
    "main content": SECTION_MAIN,
    "files/programs": SECTION_FILES,
    "files / programs": SECTION_FILES,
    "files and programs": SECTION_FILES,
    "url": SECTION_URL,
    "urls": SECTION_URL,
    "browser tabs analysis": SECTION_TABS,
    "browser tabs": SECTION_TABS,
    "browser tab analysis": SECTION_TABS,
    "suspicious elements": SECTION_SUSPICIOUS,
    "suspicious element": SECTION_SUSPICIOUS,
    "language and date": SECTION_LANGDATE,
}

_HEADING_RE = re.compile(r"^\s*#{1,6}\s*(.+?)\s*$")
_ORDINAL_RE = re.compile(r"^\s*\d+[.)]\s*")
_BULLET_RE = re.compile(r"^\s*[-*•]\s*")
_TAB_RE = re.compile(
    r"^\s*[-*•]?\s*\[logo:\s*(?P<logo>[^\]]*)\]\s*\[text:\s*(?P<text>[^\]]*)\]"
    r"\s*(?:\((?P<context>[^)]*)\))?\s*$",
    re.IGNORECASE,
)
_URL_IN_TEXT_RE = re.compile(r"https?://[^\s\"'<>]+|www\.[^\s\"'<>]+")
_LANG_RE = re.compile(r"\*\*\s*LANGUAGE:?\s*\*\*:?\s*(.+)", re.IGNORECASE)
_DATE_RE = re.compile(r"\*\*\s*DATE:?\s*\*\*:?\s*(.+)", re.IGNORECASE)


@dataclass
class TabEntry:
    raw: str
    logo: str | None = None
    text: str | None = None
    context: str | None = None

    def to_dict(self) -> dict:
        return {"raw": self.raw, "logo": self.logo, "text": self.text,
                "context": self.context}

    @classmethod
    def from_dict(cls, d: dict) -> "TabEntry":
        return cls(raw=d["raw"], logo=d.get("logo"), text=d.get("text"),
                   context=d.get("context"))


@dataclass
class SuspiciousElement:
    raw: str
    embedded_urls: list[str] = field(default_factory=list)
    kind_hint: str | None = None  # Url | File | Video | Program | Other

    def to_dict(self) -> dict:
        return {"raw": self.raw, "embedded_urls": list(self.embedded_urls),
                "kind_hint": self.kind_hint}

    @classmethod
    def from_dict(cls, d: dict) -> "SuspiciousElement":
        return cls(raw=d["raw"], embedded_urls=list(d.get("embedded_urls", [])),
                   kind_hint=d.get("kind_hint"))


@dataclass
class ParsedDescription:
    screenshot_id: str
    main_content: str = ""
    installers: list[str] = field(default_factory=list)
    explorer_files: list[str] = field(default_factory=list)
    archive_members: list[str] = field(default_factory=list)
    url_entries: list[str] = field(default_factory=list)
    tabs: list[TabEntry] = field(default_factory=list)
    suspicious: list[SuspiciousElement] = field(default_factory=list)
    language: str = ""
    date_raw: str = ""
    date_parsed: str | None = None  # ISO date
    sections_present: set[str] = field(default_factory=set)
    no_sections_warning: bool = False
    # exact line-partition of the input, for lossless reconstruction
    segments: list[dict] = field(default_factory=list)

    def reconstruct(self) -> str:
        return "".join(seg["text"] for seg in self.segments)

    def to_dict(self) -> dict:
        return {
            "screenshot_id": self.screenshot_id,
            "main_content": self.main_content,
            "installers": list(self.installers),
            "explorer_files": list(self.explorer_files),
            "archive_members": list(self.archive_members),
            "url_entries": list(self.url_entries),
            "tabs": [t.to_dict() for t in self.tabs],
            "suspicious": [s.to_dict() for s in self.suspicious],
            "language": self.language,
            "date_raw": self.date_raw,
            "date_parsed": self.date_parsed,
            "sections_present": sorted(self.sections_present),
            "no_sections_warning": self.no_sections_warning,
            "segments": list(self.segments),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ParsedDescription":
        return cls(
            screenshot_id=d["screenshot_id"],
            main_content=d.get("main_content", ""),
            installers=list(d.get("installers", [])),
            explorer_files=list(d.get("explorer_files", [])),
            archive_members=list(d.get("archive_members", [])),
            url_entries=list(d.get("url_entries", [])),
            tabs=[TabEntry.from_dict(t) for t in d.get("tabs", [])],
            suspicious=[SuspiciousElement.from_dict(s) for s in d.get("suspicious", [])],
            language=d.get("language", ""),
            date_raw=d.get("date_raw", ""),
            date_parsed=d.get("date_parsed"),
            sections_present=set(d.get("sections_present", [])),
            no_sections_warning=d.get("no_sections_warning", False),
            segments=list(d.get("segments", [])),
        )


def _heading_for(line: str) -> str | None:
    m = _HEADING_RE.match(line)
    if not m:
        return None
    name = m.group(1).strip().rstrip(":").strip().lower()
    return _HEADING_ALIASES.get(name)


def _is_placeholder(text: str) -> bool:
    return text.strip() in ("X", "x", '"X"')


def parse_tab_line(line: str) -> TabEntry | None:
    """Parse one browser-tab line; None when it doesn't fit the grammar."""
    m = _TAB_RE.match(line)
    if not m:
        return None
    logo = (m.group("logo") or "").strip()
    text = (m.group("text") or "").strip()
    context = (m.group("context") or "").strip() or None
    if logo in ("", "?", "X"):
        logo = ""
    if not logo and not text:
        return None
    return TabEntry(raw=line, logo=logo or None, text=text or None, context=context)


def _split_names(blob: str) -> list[str]:
    if _is_placeholder(blob):
        return []
    names = [n.strip() for n in blob.split(",")]
    return [n for n in names if n and not _is_placeholder(n)]


_ARCHIVE_HINT_RE = re.compile(r"\b(archive|\.zip|\.rar|\.7z|winrar|7-zip)\b", re.IGNORECASE)


def _parse_files_section(body: str, main_content: str,
                         parsed: ParsedDescription) -> None:
    archive_context = bool(_ARCHIVE_HINT_RE.search(main_content))
    for line in body.splitlines():
        stripped = line.strip()
        if not stripped or _is_placeholder(stripped):
            continue
        low = stripped.lower()
        if low.startswith("installer:"):
            parsed.installers.extend(_split_names(stripped[len("installer:"):]))
        elif low.startswith("file explorer:"):
            names = _split_names(stripped[len("file explorer:"):])
            if archive_context:
                parsed.archive_members.extend(names)
            else:
                parsed.explorer_files.extend(names)
        else:
            # unlabeled continuation line: treat as explorer content
            parsed.explorer_files.extend(_split_names(stripped))


def _kind_hint(raw: str) -> str | None:
    low = raw.lower()
    if "video" in low or "youtube" in low:
        return "Video"
    if _URL_IN_TEXT_RE.search(raw) or "url" in low or "link" in low:
        return "Url"
    if re.search(r"\.(exe|zip|rar|dll|msi|7z)\b", low):
        return "File"
    if "program" in low or "installer" in low:
        return "Program"
    return "Other"


def _parse_suspicious_section(body: str, parsed: ParsedDescription) -> None:
    current: list[str] = []

    def flush():
        if not current:
            return
        raw = " ".join(current).strip()
        current.clear()
        if not raw or _is_placeholder(raw):
            return
        urls = []
        for cand in _URL_IN_TEXT_RE.findall(raw):
            norm = urlnorm.validate_url(cand)
            if norm:
                urls.append(norm)
        parsed.suspicious.append(
            SuspiciousElement(raw=raw, embedded_urls=urls, kind_hint=_kind_hint(raw)))

    for line in body.splitlines():
        stripped = line.strip()
        if not stripped:
            flush()
            continue
        if _BULLET_RE.match(stripped):
            flush()
            current.append(_BULLET_RE.sub("", stripped))
        else:
            current.append(stripped)
    flush()


def _parse_date(raw: str) -> str | None:
    """Day-first then month-first; ambiguous valid readings yield None."""
    m = re.match(r"^(\d{1,2})[/\-.](\d{1,2})[/\-.](\d{2,4})$", raw.strip())
    if not m:
        iso = re.match(r"^(\d{4})-(\d{2})-(\d{2})$", raw.strip())
        if iso:
            try:
                return date(int(iso.group(1)), int(iso.group(2)), int(iso.group(3))).isoformat()
            except ValueError:
                return None
        return None
    a, b, year = int(m.group(1)), int(m.group(2)), int(m.group(3))
    if year < 100:
        year += 2000
    day_first = None
    month_first = None
    try:
        day_first = date(year, b, a)
    except ValueError:
        pass
    try:
        month_first = date(year, a, b)
    except ValueError:
        pass
    if day_first and month_first and day_first != month_first:
        return None
    chosen = day_first or month_first
    return chosen.isoformat() if chosen else None


def _parse_langdate_section(body: str, parsed: ParsedDescription) -> None:
    for line in body.splitlines():
        lm = _LANG_RE.search(line)
        if lm and not parsed.language:
            val = lm.group(1).strip().strip("*").strip()
            if not _is_placeholder(val):
                parsed.language = val
        dm = _DATE_RE.search(line)
        if dm and not parsed.date_raw:
            val = dm.group(1).strip().strip("*").strip()
            if not _is_placeholder(val):
                parsed.date_raw = val
    if parsed.date_raw:
        parsed.date_parsed = _parse_date(parsed.date_raw)


def parse_description(screenshot_id: str, text: str) -> ParsedDescription:
    """Parse a raw model reply. Total: never raises on any input text."""
    parsed = ParsedDescription(screenshot_id=screenshot_id)

    # split into (section, exact-text) segments on heading lines
    segs: list[tuple[str | None, list[str]]] = [(None, [])]
    for line in text.splitlines(keepends=True):
        section = _heading_for(line)
        if section is not None:
            segs.append((section, [line]))
        else:
            segs[-1][1].append(line)
    parsed.segments = [{"section": s or "", "text": "".join(lines)}
                       for s, lines in segs if lines]

    seen_heading = any(s for s, _ in segs)
    if not seen_heading:
        parsed.main_content = text.strip()
        parsed.no_sections_warning = True
        return parsed

    # preamble before the first heading counts toward main content
    preamble = "".join(segs[0][1]).strip()
    main_parts = [preamble] if preamble else []

    for section, lines in segs[1:]:
        parsed.sections_present.add(section)
        body = "".join(lines[1:])  # drop the heading line
        if section == SECTION_MAIN:
            stripped = body.strip()
            if stripped and not _is_placeholder(stripped):
                main_parts.append(stripped)
        elif section == SECTION_FILES:
            _parse_files_section(body, "\n".join(main_parts), parsed)
        elif section == SECTION_URL:
            for line in body.splitlines():
                entry = _ORDINAL_RE.sub("", line.strip())
                entry = _BULLET_RE.sub("", entry)
                if entry and not _is_placeholder(entry):
                    parsed.url_entries.append(entry.strip())
        elif section == SECTION_TABS:
            for line in body.splitlines():
                stripped = line.strip()
                if not stripped or _is_placeholder(_BULLET_RE.sub("", stripped)):
                    continue
                tab = parse_tab_line(stripped)
                if tab is not None:
                    parsed.tabs.append(tab)
                else:
                    parsed.tabs.append(TabEntry(raw=stripped))
        elif section == SECTION_SUSPICIOUS:
            _parse_suspicious_section(body, parsed)
        elif section == SECTION_LANGDATE:
            _parse_langdate_section(body, parsed)

    parsed.main_content = "\n".join(main_parts).strip()
    return parsed


def classify_screenshot(parsed: ParsedDescription) -> tuple[str, bool]:
    """Return (category, low_confidence).

    Web signals: tabs or URL entries. File signals: any file list. Both ->
    Hybrid, neither -> WebContent flagged low confidence.
    """
    web = bool(parsed.tabs or parsed.url_entries)
    files = bool(parsed.installers or parsed.explorer_files or parsed.archive_members)
    if web and files:
        return "Hybrid", False
    if web:
        return "WebContent", False
    if files:
        return "FileSystem", False
    return "WebContent", True
