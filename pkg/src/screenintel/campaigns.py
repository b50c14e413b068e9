"""Lure-theme tagging and campaign clustering over shared indicators.

Clustering is single-link union-find over strong indicators: registered
domains of non-benign URLs (full URL for shared platforms like youtube or
file hosts), retained file stems, and distinctive lure terms matched
against indicator names. Auditable by construction: every cluster can be
re-checked by walking the shared-indicator graph.
"""

from __future__ import annotations

import json
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import datetime
from importlib import resources
from pathlib import Path

from . import urlnorm
from .descparse import ParsedDescription
from .iocs import CAT_BENIGN, CAT_DISTRIBUTION, CAT_VIDEO, FileIoc, Lexicons, UrlIoc

THEME_CRACKED = "CrackedSoftware"
THEME_GAMING = "GamingMods"
THEME_OTHER = "Other"

CONF_STRONG = "Strong"
CONF_WEAK = "Weak"

IND_DOMAIN = "Domain"
IND_FULL_URL = "FullUrl"
IND_FILE_STEM = "FileStem"
IND_THEME_TERM = "ThemeTerm"


@dataclass
class ThemeLexicon:
    cracked_terms: list[str] = field(default_factory=list)
    cracked_titles: list[str] = field(default_factory=list)
    gaming_terms: list[str] = field(default_factory=list)
    gaming_titles: list[str] = field(default_factory=list)
    distinctive_groups: list[dict] = field(default_factory=list)
    minecraft_terms: list[str] = field(default_factory=list)

    @classmethod
    def from_json(cls, path: Path | str) -> "ThemeLexicon":
        return cls(**json.loads(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def default(cls) -> "ThemeLexicon":
        text = resources.files("screenintel.data").joinpath(
            "theme_lexicon_default.json").read_text()
        return cls(**json.loads(text))


@dataclass
class ThemeTag:
    theme: str
    matched_terms: list[str] = field(default_factory=list)
    confidence: str = CONF_WEAK

    def to_dict(self) -> dict:
        return {"theme": self.theme, "matched_terms": list(self.matched_terms),
                "confidence": self.confidence}


def _term_re(term: str) -> re.Pattern:
    return re.compile(r"(?<![a-z0-9])" + re.escape(term.lower()) + r"(?![a-z0-9])")


def _matches(terms: list[str], text: str) -> list[str]:
    low = text.lower()
    return [t for t in terms if _term_re(t).search(low)]


def tag_theme(parsed: ParsedDescription, retained_files: list[FileIoc],
              url_iocs: list[UrlIoc], theme_lex: ThemeLexicon) -> ThemeTag:
    """Tag one screenshot's lure theme. Indicator-name hits outrank prose."""
    sid = parsed.screenshot_id
    strong_text = " ".join(
        parsed.installers + parsed.explorer_files + parsed.archive_members
        + [f.name for f in retained_files if sid in f.source_ids]
        + [u.normalized for u in url_iocs if sid in u.source_ids])
    weak_text = " ".join([t.text or "" for t in parsed.tabs] + [parsed.main_content])

    cracked = theme_lex.cracked_terms + theme_lex.cracked_titles
    gaming = theme_lex.gaming_terms + theme_lex.gaming_titles
    for text, conf in ((strong_text, CONF_STRONG), (weak_text, CONF_WEAK)):
        hits_c = _matches(cracked, text)
        hits_g = _matches(gaming, text)
        if hits_c:  # ties break toward the dominant cracked-software theme
            return ThemeTag(THEME_CRACKED, hits_c, conf)
        if hits_g:
            return ThemeTag(THEME_GAMING, hits_g, conf)
    return ThemeTag(THEME_OTHER, [], CONF_WEAK)


def theme_histogram(tags: list[ThemeTag]) -> dict[str, float]:
    """Percentage per theme over all screenshots, 2 decimals."""
    if not tags:
        return {}
    counts = Counter(t.theme for t in tags)
    return {theme: round(100.0 * n / len(tags), 2)
            for theme, n in sorted(counts.items())}


@dataclass
class ScreenshotBundle:
    """Everything clustering needs to know about one screenshot."""
    screenshot_id: str
    indicators: set[tuple[str, str]] = field(default_factory=set)
    captured_at: str | None = None
    language: str = ""
    theme: str = THEME_OTHER

    def captured_dt(self) -> datetime | None:
        if not self.captured_at:
            return None
        return datetime.fromisoformat(self.captured_at.replace("Z", "+00:00"))


def build_indicators(parsed: ParsedDescription, url_iocs: list[UrlIoc],
                     retained_files: list[FileIoc], lex: Lexicons,
                     theme_lex: ThemeLexicon) -> set[tuple[str, str]]:
    """Strong indicator set for one screenshot."""
    sid = parsed.screenshot_id
    out: set[tuple[str, str]] = set()
    shared_platform = lex.video_hosts | lex.distribution_hosts

    urls_here = [u for u in url_iocs if sid in u.source_ids and u.category != CAT_BENIGN]
    for u in urls_here:
        reg = urlnorm.registered_domain(u.host)
        if u.host in shared_platform or reg in shared_platform:
            out.add((IND_FULL_URL, u.normalized))
        else:
            out.add((IND_DOMAIN, reg))

    for f in retained_files:
        if sid in f.source_ids:
            out.add((IND_FILE_STEM, f.stem.lower()))

    name_text = " ".join(
        parsed.installers + parsed.explorer_files + parsed.archive_members
        + [u.normalized for u in urls_here]).lower()
    for group in theme_lex.distinctive_groups:
        if any(pat.lower() in name_text for pat in group.get("patterns", [])):
            out.add((IND_THEME_TERM, group["name"]))
    return out


@dataclass
class CampaignCluster:
    id: str
    label: str
    member_ids: set[str]
    shared_indicators: set[tuple[str, str]]
    window_start: str | None
    window_end: str | None
    languages: set[str]
    size: int

    def to_dict(self) -> dict:
        return {"id": self.id, "label": self.label,
                "member_ids": sorted(self.member_ids),
                "shared_indicators": sorted([list(i) for i in self.shared_indicators]),
                "window_start": self.window_start, "window_end": self.window_end,
                "languages": sorted(self.languages), "size": self.size}


class _UnionFind:
    def __init__(self):
        self.parent: dict[str, str] = {}

    def find(self, x: str) -> str:
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # deterministic: smaller id wins as root
            lo, hi = sorted((ra, rb))
            self.parent[hi] = lo


@dataclass
class ClusterParams:
    min_cluster_size: int = 3
    time_gap_max_s: float | None = None


def cluster_campaigns(bundles: list[ScreenshotBundle],
                      params: ClusterParams | None = None) -> list[CampaignCluster]:
    params = params or ClusterParams()
    by_id = {b.screenshot_id: b for b in bundles}

    index: dict[tuple[str, str], list[str]] = defaultdict(list)
    for b in sorted(bundles, key=lambda x: x.screenshot_id):
        for ind in b.indicators:
            index[ind].append(b.screenshot_id)

    uf = _UnionFind()
    for members in index.values():
        for other in members[1:]:
            uf.union(members[0], other)

    components: dict[str, list[str]] = defaultdict(list)
    for b in bundles:
        if b.indicators:
            components[uf.find(b.screenshot_id)].append(b.screenshot_id)

    groups: list[list[str]] = []
    for members in components.values():
        if params.time_gap_max_s is not None:
            groups.extend(_split_by_time(members, by_id, params.time_gap_max_s))
        else:
            groups.append(members)

    clusters: list[CampaignCluster] = []
    for members in groups:
        if len(members) < params.min_cluster_size:
            continue
        clusters.append(_make_cluster(members, by_id))
    clusters.sort(key=lambda c: (-c.size, c.label))
    for n, c in enumerate(clusters, 1):
        c.id = f"c{n:03d}"
    return clusters


def _split_by_time(members: list[str], by_id: dict[str, ScreenshotBundle],
                   gap_max_s: float) -> list[list[str]]:
    timed = sorted((m for m in members if by_id[m].captured_dt() is not None),
                   key=lambda m: by_id[m].captured_dt())
    untimed = [m for m in members if by_id[m].captured_dt() is None]
    if not timed:
        return [members]
    groups: list[list[str]] = [[timed[0]]]
    for prev, cur in zip(timed, timed[1:]):
        gap = (by_id[cur].captured_dt() - by_id[prev].captured_dt()).total_seconds()
        if gap > gap_max_s:
            groups.append([])
        groups[-1].append(cur)
    # members without timestamps ride along with the largest subgroup
    largest = max(groups, key=len)
    largest.extend(untimed)
    return groups


def _make_cluster(members: list[str], by_id: dict[str, ScreenshotBundle]) -> CampaignCluster:
    counts: Counter = Counter()
    for m in members:
        counts.update(by_id[m].indicators)
    shared = {ind for ind, n in counts.items() if n >= 2}
    label_ind = min(counts, key=lambda ind: (-counts[ind], ind[1], ind[0]))
    stamps = sorted(b.captured_dt() for m in members
                    if (b := by_id[m]).captured_dt() is not None)
    return CampaignCluster(
        id="", label=label_ind[1], member_ids=set(members),
        shared_indicators=shared,
        window_start=stamps[0].isoformat() if stamps else None,
        window_end=stamps[-1].isoformat() if stamps else None,
        languages={by_id[m].language for m in members if by_id[m].language},
        size=len(members),
    )


@dataclass
class CampaignReport:
    cluster: CampaignCluster
    playbook: list[str]
    duration: str | None
    duration_s: float | None
    theme_histogram: dict[str, float]

    def to_dict(self) -> dict:
        return {"cluster": self.cluster.to_dict(), "playbook": list(self.playbook),
                "duration": self.duration, "duration_s": self.duration_s,
                "theme_histogram": dict(self.theme_histogram)}


def _fmt_duration(seconds: float) -> str:
    mins = int(seconds // 60)
    return f"{mins // 60}h{mins % 60:02d}m"


def campaign_report(cluster: CampaignCluster, bundles: list[ScreenshotBundle],
                    parsed_by_id: dict[str, ParsedDescription],
                    url_iocs: list[UrlIoc], retained_files: list[FileIoc],
                    lex: Lexicons) -> CampaignReport:
    """Synthesize an ordered playbook from evidence present in the members."""
    members = cluster.member_ids
    urls = [u for u in url_iocs if u.source_ids & members]
    files = [f for f in retained_files if f.source_ids & members]
    themes = [b.theme for b in bundles if b.screenshot_id in members]

    has_theme = any(t != THEME_OTHER for t in themes)
    has_video = any(u.category == CAT_VIDEO for u in urls)
    cdn_hosts = lex.content_delivery_hosts
    has_redirect = any(u.host in cdn_hosts
                       or urlnorm.registered_domain(u.host) in cdn_hosts for u in urls)
    has_dist = any(u.category == CAT_DISTRIBUTION and u.host not in cdn_hosts
                   and urlnorm.registered_domain(u.host) not in cdn_hosts
                   for u in urls)
    has_archive = any(f.extension_class in ("Zip", "Rar") for f in files)
    has_exe = any(f.extension_class == "Exe" for f in files)

    playbook: list[str] = []
    if has_theme:
        playbook.append("Victim searches for the lure (cracked software / game mod)")
    if has_video:
        playbook.append("Victim lands on a video or sponsored result pushing the lure")
    if has_redirect:
        playbook.append("Link redirects through a content-delivery page")
    if has_dist:
        playbook.append("Payload fetched from a file-distribution platform")
    if has_archive:
        playbook.append("Victim downloads a compressed archive")
    if has_exe:
        playbook.append("Victim executes the payload; infostealer installs")

    duration_s = None
    duration = None
    if cluster.window_start and cluster.window_end:
        start = datetime.fromisoformat(cluster.window_start)
        end = datetime.fromisoformat(cluster.window_end)
        duration_s = (end - start).total_seconds()
        duration = _fmt_duration(duration_s)

    member_tags = [ThemeTag(t) for t in themes]
    return CampaignReport(cluster=cluster, playbook=playbook, duration=duration,
                          duration_s=duration_s,
                          theme_histogram=theme_histogram(member_tags))


def minecraft_correlation(cluster: CampaignCluster,
                          parsed_by_id: dict[str, ParsedDescription],
                          terms: list[str] | None = None,
                          theme_lex: ThemeLexicon | None = None) -> float:
    """Percent of members whose content matches the secondary term list."""
    terms = terms if terms is not None else (theme_lex or ThemeLexicon.default()).minecraft_terms
    if not cluster.member_ids:
        return 0.0
    hits = 0
    for sid in cluster.member_ids:
        parsed = parsed_by_id.get(sid)
        if parsed is None:
            continue
        text = " ".join([parsed.main_content]
                        + parsed.installers + parsed.explorer_files
                        + parsed.archive_members + parsed.url_entries
                        + [t.text or "" for t in parsed.tabs]
                        + [s.raw for s in parsed.suspicious])
        if _matches(terms, text):
            hits += 1
    return round(100.0 * hits / len(cluster.member_ids), 1)


def export_campaigns_json(clusters: list[CampaignCluster], path: Path | str) -> None:
    Path(path).write_text(json.dumps([c.to_dict() for c in clusters], indent=2),
                          encoding="utf-8")


def export_campaign_markdown(report: CampaignReport, out_dir: Path | str) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    c = report.cluster
    safe = re.sub(r"[^A-Za-z0-9._-]+", "_", c.label) or c.id
    lines = [f"# Campaign {c.label}", "",
             f"- members: {c.size}",
             f"- window: {c.window_start or 'n/a'} .. {c.window_end or 'n/a'}"
             + (f" ({report.duration})" if report.duration else ""),
             f"- languages: {', '.join(sorted(c.languages)) or 'n/a'}", "",
             "## Playbook", ""]
    lines += [f"{i}. {step}" for i, step in enumerate(report.playbook, 1)]
    lines += ["", "## Shared indicators", ""]
    lines += [f"- {kind}: {value}" for kind, value in sorted(c.shared_indicators,
                                                             key=lambda x: (x[0], x[1]))]
    path = out_dir / f"{safe}.md"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
