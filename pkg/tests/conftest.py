import json
from pathlib import Path

import pytest

from screenintel.corpus import CorpusStore, ingest_manifest
from screenintel.evalkit import ScoreStore, import_consensus_csv
from screenintel.fixtures import (build_blitz_corpus, build_midjourney_corpus,
                                  build_paper_corpus, build_snow_corpus,
                                  write_table3_consensus_csv)
from screenintel.pipeline import (PipelineConfig, analyze, stage_describe,
                                  stage_parse)

FIXTURES = Path(__file__).parent / "fixtures"


class Env:
    """One fixture corpus, fully ingested, described, parsed, and analyzed."""

    def __init__(self, root: Path, builder):
        self.root = root
        self.fixture_dir = root / "fixture"
        self.manifest = builder(self.fixture_dir)
        self.corpus_dir = root / "corpus"
        self.store = CorpusStore(self.corpus_dir / "store")
        self.summary = ingest_manifest(self.store, self.manifest, self.fixture_dir)
        self.config = PipelineConfig(
            corpus_dir=str(self.corpus_dir), out_dir=str(root / "out"),
            backend="fixture", fixture_dir=str(self.fixture_dir / "replies"))
        stage_describe(self.config, self.store)
        self.parsed = stage_parse(self.config, self.store)
        self.parsed_by_id = {p.screenshot_id: p for p in self.parsed}
        self.results = analyze(self.config, self.store, self.parsed)


def _env(tmp_path_factory, name, builder):
    return Env(tmp_path_factory.mktemp(name), builder)


@pytest.fixture(scope="session")
def paper_env(tmp_path_factory):
    return _env(tmp_path_factory, "paper", build_paper_corpus)


@pytest.fixture(scope="session")
def blitz_env(tmp_path_factory):
    return _env(tmp_path_factory, "blitz", build_blitz_corpus)


@pytest.fixture(scope="session")
def midjourney_env(tmp_path_factory):
    return _env(tmp_path_factory, "midjourney", build_midjourney_corpus)


@pytest.fixture(scope="session")
def snow_env(tmp_path_factory):
    return _env(tmp_path_factory, "snow", build_snow_corpus)


@pytest.fixture(scope="session")
def consensus_store(tmp_path_factory):
    path = tmp_path_factory.mktemp("scores") / "consensus.csv"
    write_table3_consensus_csv(path)
    store = ScoreStore()
    import_consensus_csv(store, path)
    return store


@pytest.fixture(scope="session")
def example_reply():
    return (FIXTURES / "example_reply.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def golden_prompt():
    return (FIXTURES / "prompt_v1_golden.txt").read_text(encoding="utf-8")


def write_manifest(path: Path, entries: list[dict]) -> Path:
    path.write_text("\n".join(json.dumps(e) for e in entries) + "\n",
                    encoding="utf-8")
    return path
