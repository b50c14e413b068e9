"""Command line surface.

Exit codes: 0 success, 2 configuration error, 3 stage failure,
4 consistency check failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .corpus import CorpusStore, ingest_manifest
from .errors import ConfigError, ScreenIntelError, StageError
from .evalkit import (ScoreStore, aggregate, import_consensus_csv,
                      import_scores_csv, intercoder_agreement,
                      select_assessment_sample)
from .pipeline import (PipelineConfig, analyze, check_report, emit_report,
                       load_parsed, load_store, run_pipeline, stage_describe,
                       stage_parse)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STAGE = 3
EXIT_CHECK = 4


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _build_config(config_path: str | None, **overrides) -> PipelineConfig:
    try:
        if config_path:
            return PipelineConfig.from_json(config_path, **overrides)
        overrides = {k: v for k, v in overrides.items() if v is not None}
        if "corpus_dir" not in overrides:
            raise ConfigError("--corpus is required without --config")
        overrides.setdefault("out_dir", str(Path(overrides["corpus_dir"]) / "out"))
        return PipelineConfig(**overrides)
    except ConfigError as e:
        _fail(EXIT_CONFIG, str(e))


def _common(fn):
    fn = click.option("--config", "config_path", type=click.Path(exists=True),
                      default=None, help="JSON config; flags override it.")(fn)
    fn = click.option("--corpus", "corpus_dir", type=click.Path(), default=None)(fn)
    fn = click.option("--out", "out_dir", type=click.Path(), default=None)(fn)
    fn = click.option("--backend", type=click.Choice(["live", "fixture"]),
                      default=None)(fn)
    fn = click.option("--fixture-dir", type=click.Path(), default=None)(fn)
    fn = click.option("--prompt-version", default=None)(fn)
    fn = click.option("--tab-strip", is_flag=True, default=None)(fn)
    fn = click.option("--seed", type=int, default=None)(fn)
    return fn


@click.group()
def main() -> None:
    """Screenshot-to-intelligence pipeline."""


@main.command()
@click.option("--corpus", "corpus_dir", type=click.Path(), required=True)
@click.option("--manifest", type=click.Path(exists=True), required=True)
@click.option("--image-root", type=click.Path(), default=None,
              help="Base directory for manifest paths (default: manifest's dir).")
@click.option("--allow-missing", is_flag=True)
def ingest(corpus_dir: str, manifest: str, image_root: str | None,
           allow_missing: bool) -> None:
    """Load a JSONL manifest into the corpus store."""
    store = CorpusStore(Path(corpus_dir) / "store")
    root = image_root or str(Path(manifest).parent)
    try:
        summary = ingest_manifest(store, manifest, root, allow_missing=allow_missing)
    except ScreenIntelError as e:
        _fail(EXIT_STAGE, str(e))
    click.echo(json.dumps(summary.to_dict(), indent=2))


@main.command()
@_common
def describe(config_path, **overrides) -> None:
    """Submit every screenshot to the vision backend (cache-first)."""
    config = _build_config(config_path, **overrides)
    try:
        calls = stage_describe(config, load_store(config))
    except StageError as e:
        _fail(EXIT_STAGE, str(e))
    click.echo(json.dumps({"live_calls": calls}))


@main.command()
@_common
def parse(config_path, **overrides) -> None:
    """Parse cached descriptions into structured records."""
    config = _build_config(config_path, **overrides)
    try:
        parsed = stage_parse(config, load_store(config))
    except StageError as e:
        _fail(EXIT_STAGE, str(e))
    warned = sum(1 for p in parsed if p.no_sections_warning)
    click.echo(json.dumps({"parsed": len(parsed), "no_sections": warned}))


@main.command()
@_common
def extract(config_path, **overrides) -> None:
    """Extract URL and file IOCs from parsed descriptions."""
    config = _build_config(config_path, **overrides)
    try:
        results = analyze(config, load_store(config), load_parsed(config))
    except ScreenIntelError as e:
        _fail(EXIT_STAGE, str(e))
    click.echo(json.dumps({
        "url_stats": results["url_stats"].to_dict(),
        "file_stats": results["file_stats"].to_dict(),
        "retained_unique": results["retained_unique"],
        "retained_occurrences": results["retained_occurrences"],
        "extension_breakdown": results["extension_breakdown"],
        "theme_histogram": results["theme_histogram"],
    }, indent=2))


@main.command()
@_common
@click.option("--min-cluster-size", type=int, default=None)
@click.option("--time-gap-max-s", type=float, default=None)
def cluster(config_path, **overrides) -> None:
    """Group screenshots into campaign clusters and emit reports."""
    config = _build_config(config_path, **overrides)
    try:
        results = analyze(config, load_store(config), load_parsed(config))
    except ScreenIntelError as e:
        _fail(EXIT_STAGE, str(e))
    click.echo(json.dumps([c.to_dict() for c in results["clusters"]], indent=2))


@main.command("eval")
@click.option("--scores", "scores_path", type=click.Path(), required=True,
              help="JSONL score event log (created if absent).")
@click.option("--import-scores", "import_scores", type=click.Path(exists=True),
              default=None, help="CSV of coder scores to append.")
@click.option("--import-consensus", "import_consensus", type=click.Path(exists=True),
              default=None, help="CSV of consensus decisions to append.")
@click.option("--aggregate", "do_aggregate", is_flag=True)
@click.option("--agreement", "do_agreement", is_flag=True)
@click.option("--sample", "do_sample", is_flag=True)
@click.option("--corpus", "corpus_dir", type=click.Path(), default=None)
@click.option("--out", "out_dir", type=click.Path(), default=None)
@click.option("--seed", type=int, default=0)
@click.option("--base-n", type=int, default=100)
@click.option("--min-per-aspect", type=int, default=50)
def eval_cmd(scores_path, import_scores, import_consensus, do_aggregate,
             do_agreement, do_sample, corpus_dir, out_dir, seed, base_n,
             min_per_aspect) -> None:
    """Score log maintenance, aggregation, agreement, and sampling."""
    store = ScoreStore(scores_path)
    out: dict = {}
    try:
        if import_scores:
            out["imported_scores"] = import_scores_csv(store, import_scores)
        if import_consensus:
            out["imported_consensus"] = import_consensus_csv(store, import_consensus)
        if do_aggregate:
            out["aggregate"] = aggregate(store.consensus_map()).to_dict()
        if do_agreement:
            coders = store.coders()
            if len(coders) < 2:
                _fail(EXIT_STAGE, "agreement needs at least two coders")
            report = intercoder_agreement(store.scores_for(coders[0]),
                                          store.scores_for(coders[1]),
                                          store.consensus_map())
            out["agreement"] = report.to_dict()
        if do_sample:
            if not (corpus_dir and out_dir):
                _fail(EXIT_CONFIG, "--sample requires --corpus and --out")
            config = _build_config(None, corpus_dir=corpus_dir, out_dir=out_dir)
            parsed = {p.screenshot_id: p for p in load_parsed(config)}
            out["sample"] = select_assessment_sample(parsed, seed, base_n,
                                                     min_per_aspect)
    except ScreenIntelError as e:
        _fail(EXIT_STAGE, str(e))
    click.echo(json.dumps(out, indent=2))


@main.command()
@_common
@click.option("--format", "formats", multiple=True,
              type=click.Choice(["json", "csv", "markdown"]), default=("json",))
@click.option("--check", "do_check", is_flag=True,
              help="Fail (exit 4) if internal consistency checks fail.")
@click.option("--scores", "scores_path", type=click.Path(exists=True), default=None)
@click.option("--allow-missing", is_flag=True, default=None)
def report(config_path, formats, do_check, **overrides) -> None:
    """Run the full pipeline and write report artifacts."""
    config = _build_config(config_path, **overrides)
    try:
        run = run_pipeline(config)
    except StageError as e:
        _fail(EXIT_STAGE, str(e))
    except ScreenIntelError as e:
        _fail(EXIT_STAGE, str(e))
    written = emit_report(run, config.out_dir, set(formats))
    if do_check:
        problems = check_report(run)
        if problems:
            for p in problems:
                click.echo(f"check: {p}", err=True)
            sys.exit(EXIT_CHECK)
    click.echo(json.dumps({"written": [str(p) for p in written]}))


@main.command()
@click.option("--corpus", "corpus_dir", type=click.Path(), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--scores", "scores_path", type=click.Path(), default=None)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
@click.option("--static", "static_dir", type=click.Path(), default=None,
              help="Built review console assets to serve at /.")
def serve(corpus_dir, out_dir, scores_path, host, port, static_dir) -> None:
    """Start the review console API."""
    from .review_api import serve as _serve

    try:
        _serve(corpus_dir, out_dir, scores_path, host=host, port=port,
               static_dir=static_dir)
    except (FileNotFoundError, ScreenIntelError) as e:
        _fail(EXIT_STAGE, str(e))


if __name__ == "__main__":
    main()
