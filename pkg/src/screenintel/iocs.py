"""URL and file indicator extraction, normalization, and classification.

URLs are harvested from the URL section, suspicious elements, and main
content, deduplicated on normalized form, and binned into the benign /
video / distribution / other categories. Files go through the two-stage
filter: suspicious-section corroboration, then generic-name removal.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fnmatch import fnmatch
from importlib import resources
from pathlib import Path

from . import urlnorm
from .descparse import ParsedDescription

CAT_VIDEO = "VideoPlatform"
CAT_DISTRIBUTION = "FileDistribution"
CAT_OTHER = "OtherDomain"
CAT_BENIGN = "Benign"

EXT_CLASSES = ("Exe", "Zip", "Rar", "Dll", "Other", "None")

ROLE_INSTALLER = "Installer"
ROLE_EXPLORER = "ExplorerFile"
ROLE_ARCHIVE_MEMBER = "ArchiveMember"
ROLE_DOWNLOAD = "Download"

SRC_URL = "Url"
SRC_SUSPICIOUS = "Suspicious"
SRC_MAIN = "MainContent"

_URL_IN_TEXT_RE = re.compile(r"https?://[^\s\"'<>)]+|www\.[^\s\"'<>)]+")


@dataclass
class Lexicons:
    benign_hosts: set[str] = field(default_factory=set)
    video_hosts: set[str] = field(default_factory=set)
    distribution_hosts: set[str] = field(default_factory=set)
    content_delivery_hosts: set[str] = field(default_factory=set)
    generic_name_patterns: list[str] = field(default_factory=list)

    def __post_init__(self):
        pairs = [(self.benign_hosts, self.video_hosts),
                 (self.benign_hosts, self.distribution_hosts),
                 (self.video_hosts, self.distribution_hosts)]
        for a, b in pairs:
            clash = a & b
            if clash:
                raise ValueError(f"host sets overlap: {sorted(clash)}")

    @classmethod
    def from_json(cls, path: Path | str) -> "Lexicons":
        return cls._from_obj(json.loads(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def default(cls) -> "Lexicons":
        text = resources.files("screenintel.data").joinpath("lexicon_default.json").read_text()
        return cls._from_obj(json.loads(text))

    @classmethod
    def _from_obj(cls, obj: dict) -> "Lexicons":
        return cls(
            benign_hosts=set(obj.get("benign_hosts", [])),
            video_hosts=set(obj.get("video_hosts", [])),
            distribution_hosts=set(obj.get("distribution_hosts", [])),
            content_delivery_hosts=set(obj.get("content_delivery_hosts", [])),
            generic_name_patterns=list(obj.get("generic_name_patterns", [])),
        )


@dataclass
class UrlIoc:
    raw: str
    normalized: str
    host: str
    category: str
    truncated: bool = False
    source_ids: set[str] = field(default_factory=set)
    source_sections: set[str] = field(default_factory=set)
    suspicious_corroborated: bool = False

    def to_dict(self) -> dict:
        return {"raw": self.raw, "normalized": self.normalized, "host": self.host,
                "category": self.category, "truncated": self.truncated,
                "source_ids": sorted(self.source_ids),
                "source_sections": sorted(self.source_sections),
                "suspicious_corroborated": self.suspicious_corroborated}


@dataclass
class UrlStats:
    total_unique: int = 0
    benign_count: int = 0
    truncated_count: int = 0
    actionable: int = 0
    by_category: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"total_unique": self.total_unique, "benign_count": self.benign_count,
                "truncated_count": self.truncated_count, "actionable": self.actionable,
                "by_category": dict(self.by_category)}


def validate_url(candidate: str) -> str | None:
    return urlnorm.validate_url(candidate)


def detect_truncation(candidate: str) -> bool:
    return urlnorm.detect_truncation(candidate)


def _host_in(host: str, hosts: set[str]) -> bool:
    return host in hosts


def categorize_host(host: str, lex: Lexicons) -> str:
    # exact host entries take precedence over registered-domain entries
    for hosts, cat in ((lex.benign_hosts, CAT_BENIGN),
                       (lex.video_hosts, CAT_VIDEO),
                       (lex.distribution_hosts, CAT_DISTRIBUTION)):
        if _host_in(host, hosts):
            return cat
    reg = urlnorm.registered_domain(host)
    for hosts, cat in ((lex.benign_hosts, CAT_BENIGN),
                       (lex.video_hosts, CAT_VIDEO),
                       (lex.distribution_hosts, CAT_DISTRIBUTION)):
        if _host_in(reg, hosts):
            return cat
    return CAT_OTHER


def categorize_url(url: UrlIoc, lex: Lexicons) -> str:
    return categorize_host(url.host, lex)


def _candidates(parsed: ParsedDescription) -> list[tuple[str, str]]:
    """(candidate, section) pairs for one screenshot."""
    out = [(entry, SRC_URL) for entry in parsed.url_entries]
    for susp in parsed.suspicious:
        out.extend((u, SRC_SUSPICIOUS) for u in susp.embedded_urls)
    out.extend((u, SRC_MAIN) for u in _URL_IN_TEXT_RE.findall(parsed.main_content))
    return out


def extract_urls(corpus: list[ParsedDescription],
                 lex: Lexicons) -> tuple[list[UrlIoc], UrlStats]:
    by_norm: dict[str, UrlIoc] = {}
    for parsed in corpus:
        for cand, section in _candidates(parsed):
            norm = validate_url(cand)
            if norm is None:
                continue
            ioc = by_norm.get(norm)
            if ioc is None:
                host = urlnorm.url_host(norm)
                ioc = UrlIoc(raw=cand, normalized=norm, host=host,
                             category=CAT_OTHER, truncated=detect_truncation(norm))
                ioc.category = categorize_url(ioc, lex)
                by_norm[norm] = ioc
            ioc.source_ids.add(parsed.screenshot_id)
            ioc.source_sections.add(section)
            if section == SRC_SUSPICIOUS:
                ioc.suspicious_corroborated = True

    iocs = sorted(by_norm.values(), key=lambda u: u.normalized)
    stats = UrlStats(total_unique=len(iocs))
    stats.by_category = {CAT_VIDEO: 0, CAT_DISTRIBUTION: 0, CAT_OTHER: 0}
    for ioc in iocs:
        if ioc.truncated:
            stats.truncated_count += 1
        if ioc.category == CAT_BENIGN:
            stats.benign_count += 1
        else:
            stats.by_category[ioc.category] += 1
    stats.actionable = stats.total_unique - stats.benign_count
    return iocs, stats


@dataclass
class FileIoc:
    name: str
    stem: str
    extension_class: str
    roles: set[str] = field(default_factory=set)
    generic: bool = False
    suspicious_corroborated: bool = False
    corroboration_scope: str | None = None  # "screenshot" | "corpus"
    retained: bool = False
    source_ids: set[str] = field(default_factory=set)
    n_occurrences: int = 0

    def to_dict(self) -> dict:
        return {"name": self.name, "stem": self.stem,
                "extension_class": self.extension_class,
                "roles": sorted(self.roles), "generic": self.generic,
                "suspicious_corroborated": self.suspicious_corroborated,
                "corroboration_scope": self.corroboration_scope,
                "retained": self.retained, "source_ids": sorted(self.source_ids),
                "n_occurrences": self.n_occurrences}


@dataclass
class FileStats:
    total_occurrences: int = 0
    installer_occurrences: int = 0
    other_occurrences: int = 0

    def to_dict(self) -> dict:
        return {"total_occurrences": self.total_occurrences,
                "installer_occurrences": self.installer_occurrences,
                "other_occurrences": self.other_occurrences}


_EXT_MAP = {"exe": "Exe", "zip": "Zip", "rar": "Rar", "dll": "Dll"}


def split_extension(name: str) -> tuple[str, str]:
    """Return (stem, extension_class) from the final dot-suffix."""
    if "." not in name.strip("."):
        return name, "None"
    stem, _, suffix = name.rpartition(".")
    suffix = suffix.strip()
    if not suffix or len(suffix) > 5 or not suffix.isalnum():
        return name, "None"
    return stem, _EXT_MAP.get(suffix.lower(), "Other")


def extract_files(corpus: list[ParsedDescription]) -> tuple[list[FileIoc], FileStats]:
    by_name: dict[str, FileIoc] = {}
    stats = FileStats()

    def add(name: str, role: str, sid: str) -> None:
        ioc = by_name.get(name)
        if ioc is None:
            stem, ext_class = split_extension(name)
            ioc = FileIoc(name=name, stem=stem, extension_class=ext_class)
            by_name[name] = ioc
        ioc.roles.add(role)
        ioc.source_ids.add(sid)
        ioc.n_occurrences += 1

    for parsed in corpus:
        for name in parsed.installers:
            add(name, ROLE_INSTALLER, parsed.screenshot_id)
            stats.installer_occurrences += 1
        for name in parsed.explorer_files:
            add(name, ROLE_EXPLORER, parsed.screenshot_id)
            stats.other_occurrences += 1
        for name in parsed.archive_members:
            add(name, ROLE_ARCHIVE_MEMBER, parsed.screenshot_id)
            stats.other_occurrences += 1
    stats.total_occurrences = stats.installer_occurrences + stats.other_occurrences
    return sorted(by_name.values(), key=lambda f: f.name), stats


def _match_key(name: str) -> str:
    stem, ext_class = split_extension(name)
    return (stem if ext_class != "None" else name).lower()


def is_generic_name(name: str, lex: Lexicons) -> bool:
    low = name.lower()
    stem = _match_key(name)
    return any(fnmatch(low, pat.lower()) or fnmatch(stem, pat.lower())
               for pat in lex.generic_name_patterns)


def filter_files(files: list[FileIoc], corpus: list[ParsedDescription],
                 lex: Lexicons) -> list[FileIoc]:
    """Two-stage filter; annotates every FileIoc, returns the retained ones.

    Stage 1 corroborates a name against the suspicious section of the
    screenshots it occurs in (corpus-wide match is kept but marked weaker).
    Stage 2 drops generic names. retained = corroborated and not generic.
    """
    susp_by_id = {p.screenshot_id: " ".join(s.raw for s in p.suspicious).lower()
                  for p in corpus}
    all_susp = " ".join(susp_by_id.values())

    for ioc in files:
        key = _match_key(ioc.name)
        ioc.suspicious_corroborated = False
        ioc.corroboration_scope = None
        if key:
            if any(key in susp_by_id.get(sid, "") for sid in ioc.source_ids):
                ioc.suspicious_corroborated = True
                ioc.corroboration_scope = "screenshot"
            elif key in all_susp:
                ioc.suspicious_corroborated = True
                ioc.corroboration_scope = "corpus"
        ioc.generic = is_generic_name(ioc.name, lex)
        ioc.retained = ioc.suspicious_corroborated and not ioc.generic
    return [f for f in files if f.retained]


def extension_breakdown(retained: list[FileIoc]) -> dict[str, int]:
    """Counts by extension class over unique retained names."""
    counts = {cls: 0 for cls in EXT_CLASSES}
    for ioc in {f.name: f for f in retained}.values():
        counts[ioc.extension_class] += 1
    return counts


def export_urls_csv(iocs: list[UrlIoc], path: Path | str) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["normalized", "host", "category", "truncated", "n_sources",
                    "corroborated"])
        for u in iocs:
            w.writerow([u.normalized, u.host, u.category, u.truncated,
                        len(u.source_ids), u.suspicious_corroborated])


def export_files_csv(files: list[FileIoc], path: Path | str) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["name", "extension_class", "roles", "generic", "corroborated",
                    "retained", "n_sources", "n_occurrences"])
        for x in files:
            w.writerow([x.name, x.extension_class, "|".join(sorted(x.roles)),
                        x.generic, x.suspicious_corroborated, x.retained,
                        len(x.source_ids), x.n_occurrences])
