"""End-to-end orchestration: describe -> parse -> extract -> tag -> cluster
-> report, with resumable on-disk artifacts per stage."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .backend import (PASS_FULL, BackendConfig, DescriptionCache, FixtureBackend,
                      LiveBackend, describe)
from .campaigns import (ClusterParams, ScreenshotBundle, ThemeLexicon,
                        build_indicators, campaign_report, cluster_campaigns,
                        export_campaign_markdown, tag_theme, theme_histogram)
from .corpus import CorpusStore
from .descparse import ParsedDescription, classify_screenshot, parse_description
from .errors import ConfigError, ScreenIntelError, StageError
from .evalkit import ScoreStore, aggregate
from .iocs import (Lexicons, export_files_csv, export_urls_csv,
                   extension_breakdown, extract_files, extract_urls, filter_files)
from .prompt import build_prompt


@dataclass
class PipelineConfig:
    corpus_dir: str
    out_dir: str
    backend: str = "fixture"  # "fixture" | "live"
    fixture_dir: str | None = None
    backend_config: BackendConfig = field(default_factory=BackendConfig)
    prompt_version: str = "v1"
    lexicon_path: str | None = None
    theme_lexicon_path: str | None = None
    min_cluster_size: int = 3
    time_gap_max_s: float | None = None
    seed: int = 0
    base_n: int = 100
    min_per_aspect: int = 50
    tab_strip: bool = False
    allow_missing: bool = False
    scores_path: str | None = None

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2 ** 64):
            raise ConfigError("seed must be an unsigned 64-bit value")
        if self.backend not in ("fixture", "live"):
            raise ConfigError(f"unknown backend {self.backend!r}")

    @classmethod
    def from_json(cls, path: Path | str, **overrides) -> "PipelineConfig":
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        backend_cfg = BackendConfig(**obj.pop("backend_config", {}))
        obj.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(backend_config=backend_cfg, **obj)
        except TypeError as e:
            raise ConfigError(str(e)) from e

    def effective_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "backend_config"}
        d["backend_config"] = {
            "endpoint": self.backend_config.endpoint,
            "model": self.backend_config.model,
            "api_key_env": self.backend_config.api_key_env,
            "temperature": self.backend_config.temperature,
        }
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.effective_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass
class RunReport:
    corpus: dict
    url_stats: dict
    file_stats: dict
    theme_histogram: dict
    campaigns: list
    eval_aggregate: dict | None
    tool_version: str
    config_hash: str
    provenance: dict = field(default_factory=dict)

    def to_dict(self, with_provenance: bool = True) -> dict:
        d = {"corpus": self.corpus, "url_stats": self.url_stats,
             "file_stats": self.file_stats, "theme_histogram": self.theme_histogram,
             "campaigns": self.campaigns, "eval_aggregate": self.eval_aggregate,
             "tool_version": self.tool_version, "config_hash": self.config_hash}
        if with_provenance:
            d["provenance"] = self.provenance
        return d


def make_backend(config: PipelineConfig):
    if config.backend == "fixture":
        if not config.fixture_dir:
            raise ConfigError("fixture backend requires fixture_dir")
        return FixtureBackend(config.fixture_dir)
    return LiveBackend(config.backend_config)


def load_store(config: PipelineConfig) -> CorpusStore:
    return CorpusStore(Path(config.corpus_dir) / "store")


def stage_describe(config: PipelineConfig, store: CorpusStore, backend=None) -> int:
    """Describe every record (cache-first). Returns number of live calls."""
    template = build_prompt(config.prompt_version)
    backend = backend or make_backend(config)
    cache = DescriptionCache(Path(config.out_dir) / "cache")
    calls = 0
    for rec in store.records():
        try:
            raw = describe(rec, template, backend, cache, PASS_FULL)
            if not raw.from_cache:
                calls += 1
            if config.tab_strip:
                from .backend import describe_tab_strip
                describe_tab_strip(rec, template, backend, cache)
        except ScreenIntelError as e:
            raise StageError("describe", str(e), rec.id) from e
    return calls


def stage_parse(config: PipelineConfig, store: CorpusStore) -> list[ParsedDescription]:
    template = build_prompt(config.prompt_version)
    model_id = ("fixture" if config.backend == "fixture"
                else config.backend_config.model)
    cache = DescriptionCache(Path(config.out_dir) / "cache")
    parsed_dir = Path(config.out_dir) / "parsed"
    parsed_dir.mkdir(parents=True, exist_ok=True)
    out: list[ParsedDescription] = []
    for rec in store.records():
        text = cache.get(rec.sha256, template.version, model_id, PASS_FULL)
        if text is None:
            raise StageError("parse", "no cached description; run describe first",
                             rec.id)
        parsed = parse_description(rec.id, text)
        (parsed_dir / f"{rec.id}.json").write_text(
            json.dumps(parsed.to_dict(), ensure_ascii=False, sort_keys=True),
            encoding="utf-8")
        out.append(parsed)
    return out


def load_parsed(config: PipelineConfig) -> list[ParsedDescription]:
    parsed_dir = Path(config.out_dir) / "parsed"
    out = []
    for path in sorted(parsed_dir.glob("*.json")):
        out.append(ParsedDescription.from_dict(json.loads(path.read_text(encoding="utf-8"))))
    return out


def _lexicons(config: PipelineConfig) -> tuple[Lexicons, ThemeLexicon]:
    lex = (Lexicons.from_json(config.lexicon_path) if config.lexicon_path
           else Lexicons.default())
    theme_lex = (ThemeLexicon.from_json(config.theme_lexicon_path)
                 if config.theme_lexicon_path else ThemeLexicon.default())
    return lex, theme_lex


def analyze(config: PipelineConfig, store: CorpusStore,
            parsed: list[ParsedDescription]) -> dict:
    """Extraction + themes + clustering over already-parsed descriptions."""
    lex, theme_lex = _lexicons(config)
    out_dir = Path(config.out_dir)

    url_iocs, url_stats = extract_urls(parsed, lex)
    files, file_stats = extract_files(parsed)
    retained = filter_files(files, parsed, lex)
    breakdown = extension_breakdown(retained)

    tags = {p.screenshot_id: tag_theme(p, retained, url_iocs, theme_lex)
            for p in parsed}
    histogram = theme_histogram(list(tags.values()))

    bundles = []
    for p in parsed:
        rec = store.get(p.screenshot_id) if p.screenshot_id in store else None
        bundles.append(ScreenshotBundle(
            screenshot_id=p.screenshot_id,
            indicators=build_indicators(p, url_iocs, retained, lex, theme_lex),
            captured_at=rec.captured_at if rec else None,
            language=p.language or (rec.language_hint or "" if rec else ""),
            theme=tags[p.screenshot_id].theme,
        ))
    clusters = cluster_campaigns(bundles, ClusterParams(
        min_cluster_size=config.min_cluster_size,
        time_gap_max_s=config.time_gap_max_s))

    parsed_by_id = {p.screenshot_id: p for p in parsed}
    reports = [campaign_report(c, bundles, parsed_by_id, url_iocs, retained, lex)
               for c in clusters]

    export_urls_csv(url_iocs, out_dir / "iocs_urls.csv")
    export_files_csv(files, out_dir / "iocs_files.csv")
    for rep in reports:
        export_campaign_markdown(rep, out_dir / "reports" / "campaigns")

    retained_unique = len({f.name for f in retained})
    retained_occurrences = sum(f.n_occurrences for f in retained)
    return {
        "url_iocs": url_iocs, "url_stats": url_stats,
        "files": files, "file_stats": file_stats, "retained": retained,
        "extension_breakdown": breakdown,
        "retained_unique": retained_unique,
        "retained_occurrences": retained_occurrences,
        "tags": tags, "theme_histogram": histogram,
        "bundles": bundles, "clusters": clusters, "campaign_reports": reports,
        "parsed_by_id": parsed_by_id,
    }


def run_pipeline(config: PipelineConfig, backend=None) -> RunReport:
    store = load_store(config)
    stage_describe(config, store, backend=backend)
    parsed = stage_parse(config, store)
    results = analyze(config, store, parsed)

    eval_aggregate = None
    if config.scores_path and Path(config.scores_path).exists():
        score_store = ScoreStore()
        from .evalkit import import_consensus_csv
        import_consensus_csv(score_store, config.scores_path)
        eval_aggregate = aggregate(score_store.consensus_map()).to_dict()

    url_stats = results["url_stats"].to_dict()
    file_stats = results["file_stats"].to_dict()
    file_stats.update({
        "retained_occurrences": results["retained_occurrences"],
        "retained_unique": results["retained_unique"],
        "extension_breakdown": results["extension_breakdown"],
    })
    report = RunReport(
        corpus={"n_records": len(store),
                "families": sorted({r.family for r in store.records()})},
        url_stats=url_stats,
        file_stats=file_stats,
        theme_histogram=results["theme_histogram"],
        campaigns=[c.to_dict() for c in results["clusters"]],
        eval_aggregate=eval_aggregate,
        tool_version=__version__,
        config_hash=config.config_hash(),
        provenance={"generated_at": datetime.now(timezone.utc).isoformat()},
    )
    return report


def classify_all(parsed: list[ParsedDescription]) -> dict[str, str]:
    return {p.screenshot_id: classify_screenshot(p)[0] for p in parsed}


def check_report(report: RunReport) -> list[str]:
    """Internal consistency checks; returns a list of violations."""
    problems = []
    us = report.url_stats
    cat_sum = sum(us["by_category"].values())
    if us["actionable"] != us["total_unique"] - us["benign_count"]:
        problems.append("actionable != total_unique - benign_count")
    if cat_sum != us["actionable"]:
        problems.append("category counts do not partition actionable URLs")
    fs = report.file_stats
    if fs["total_occurrences"] != fs["installer_occurrences"] + fs["other_occurrences"]:
        problems.append("file occurrence totals inconsistent")
    if fs["retained_unique"] > fs["retained_occurrences"]:
        problems.append("unique retained exceeds retained occurrences")
    return problems


def emit_report(report: RunReport, out_dir: Path | str,
                formats: set[str] = frozenset({"json"})) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in formats:
        path = out_dir / "report.json"
        payload = report.to_dict(with_provenance=False)
        payload["provenance"] = report.provenance
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        written.append(path)
    if "csv" in formats:
        import csv

        path = out_dir / "report.csv"
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["metric", "value"])
            for key, value in _flat_metrics(report):
                w.writerow([key, value])
        written.append(path)
    if "markdown" in formats:
        path = out_dir / "report.md"
        path.write_text(_markdown(report), encoding="utf-8")
        written.append(path)
    return written


def _flat_metrics(report: RunReport):
    us, fs = report.url_stats, report.file_stats
    yield "corpus.n_records", report.corpus["n_records"]
    for k in ("total_unique", "benign_count", "truncated_count", "actionable"):
        yield f"urls.{k}", us[k]
    for cat, n in sorted(us["by_category"].items()):
        yield f"urls.category.{cat}", n
    for k in ("total_occurrences", "installer_occurrences", "other_occurrences",
              "retained_occurrences", "retained_unique"):
        yield f"files.{k}", fs[k]
    for cls, n in sorted(fs["extension_breakdown"].items()):
        yield f"files.extension.{cls}", n
    for theme, pct in sorted(report.theme_histogram.items()):
        yield f"themes.{theme}", f"{pct:.2f}"
    yield "campaigns.count", len(report.campaigns)


def _markdown(report: RunReport) -> str:
    us, fs = report.url_stats, report.file_stats
    lines = ["# Screenshot intelligence report", "",
             f"- corpus records: {report.corpus['n_records']}",
             f"- config hash: `{report.config_hash}`", "",
             "## URLs", "",
             "| metric | value |", "|---|---|",
             f"| unique | {us['total_unique']} |",
             f"| benign | {us['benign_count']} |",
             f"| actionable | {us['actionable']} |",
             f"| truncated | {us['truncated_count']} |"]
    for cat, n in sorted(us["by_category"].items()):
        lines.append(f"| {cat} | {n} |")
    lines += ["", "## Files", "",
              "| metric | value |", "|---|---|",
              f"| occurrences | {fs['total_occurrences']} |",
              f"| installer occurrences | {fs['installer_occurrences']} |",
              f"| other occurrences | {fs['other_occurrences']} |",
              f"| retained occurrences | {fs['retained_occurrences']} |",
              f"| retained unique | {fs['retained_unique']} |"]
    for cls, n in sorted(fs["extension_breakdown"].items()):
        lines.append(f"| ext {cls} | {n} |")
    lines += ["", "## Themes", "", "| theme | percent |", "|---|---|"]
    for theme, pct in sorted(report.theme_histogram.items()):
        lines.append(f"| {theme} | {pct:.2f}% |")
    lines += ["", f"## Campaigns ({len(report.campaigns)})", ""]
    for c in report.campaigns:
        lines.append(f"- **{c['label']}**: {c['size']} members, "
                     f"window {c['window_start']} .. {c['window_end']}")
    if report.eval_aggregate:
        lines += ["", "## Assessment", "",
                  "| aspect | score | count | pct |", "|---|---|---|---|"]
        for aspect, rows in report.eval_aggregate.items():
            for row in rows:
                lines.append(f"| {aspect} | {row['score']} | {row['count']} | "
                             f"{row['pct']:.1f}% |")
    return "\n".join(lines) + "\n"
