import json

import pytest

from screenintel.corpus import (CorpusStore, encode_image_bytes, family_stats,
                                ingest_manifest, sniff_media_type)
from screenintel.errors import DuplicateId, InconsistentCounts, MissingImage
from screenintel.fixtures import make_png

from conftest import write_manifest


def _image(tmp_path, name, tag=None):
    data = make_png(tag or name)
    path = tmp_path / name
    path.write_bytes(data)
    return path


def test_ingest_roundtrip(tmp_path):
    _image(tmp_path, "a.png")
    _image(tmp_path, "b.png")
    manifest = write_manifest(tmp_path / "m.jsonl", [
        {"id": "a", "path": "a.png", "family": "aurora", "log_id": "l1",
         "captured_at": "2023-03-05T10:00:00+00:00"},
        {"id": "b", "path": "b.png", "family": "redline", "log_id": "l2"},
    ])
    store = CorpusStore(tmp_path / "store")
    summary = ingest_manifest(store, manifest, tmp_path)
    assert summary.ingested == 2 and summary.skipped == 0
    assert len(store) == 2
    rec = store.get("a")
    assert rec.family == "aurora"
    assert rec.captured_dt().year == 2023

    # a fresh store instance reads the same records back
    again = CorpusStore(tmp_path / "store")
    assert [r.id for r in again.records()] == ["a", "b"]
    assert again.get("b").sha256 == store.get("b").sha256


def test_ingest_skips_malformed_lines(tmp_path):
    _image(tmp_path, "a.png")
    manifest = tmp_path / "m.jsonl"
    manifest.write_text(
        json.dumps({"id": "a", "path": "a.png", "family": "aurora"}) + "\n"
        + "{not json\n"
        + json.dumps({"path": "a.png", "family": "aurora"}) + "\n"
        + json.dumps({"id": "x", "path": "a.png", "family": "aurora",
                      "captured_at": 12}) + "\n",
        encoding="utf-8")
    store = CorpusStore(tmp_path / "store")
    summary = ingest_manifest(store, manifest, tmp_path)
    assert summary.ingested == 1
    assert summary.skipped == 3
    assert len(summary.errors) == 3
    assert "line 2" in summary.errors[0]


def test_missing_image_fatal_unless_allowed(tmp_path):
    manifest = write_manifest(tmp_path / "m.jsonl", [
        {"id": "a", "path": "gone.png", "family": "aurora"}])
    store = CorpusStore(tmp_path / "store")
    with pytest.raises(MissingImage):
        ingest_manifest(store, manifest, tmp_path)

    store2 = CorpusStore(tmp_path / "store2")
    summary = ingest_manifest(store2, manifest, tmp_path, allow_missing=True)
    assert summary.ingested == 1


def test_duplicate_handling(tmp_path):
    _image(tmp_path, "a.png")
    _image(tmp_path, "c.png", tag="other-bytes")
    store = CorpusStore(tmp_path / "store")
    m1 = write_manifest(tmp_path / "m1.jsonl", [
        {"id": "a", "path": "a.png", "family": "aurora"},
        {"id": "a", "path": "a.png", "family": "aurora"},       # same id+sha
        {"id": "a2", "path": "a.png", "family": "aurora"},      # same sha, new id
    ])
    summary = ingest_manifest(store, m1, tmp_path)
    assert summary.ingested == 1 and summary.duplicates == 2

    m2 = write_manifest(tmp_path / "m2.jsonl", [
        {"id": "a", "path": "c.png", "family": "aurora"}])      # same id, new sha
    with pytest.raises(DuplicateId):
        ingest_manifest(store, m2, tmp_path)


def test_sniff_and_encode(tmp_path):
    png = make_png("x")
    assert sniff_media_type(png) == "image/png"
    assert sniff_media_type(b"\xff\xd8\xff\xe0rest") == "image/jpeg"
    assert sniff_media_type(b"GIF89a") is None
    b64, media = encode_image_bytes(png)
    import base64
    assert base64.b64decode(b64) == png
    assert media == "image/png"


TABLE1_ROWS = [
    ("Redline", 23364792, 10256776, 9977394),
    ("Unknown", 14083695, 1663249, 1621479),
    ("Vidar", 6858716, 2746922, 2706702),
    ("Lummac2", 7181395, 227680, 116358),
    ("Raccoon", 3212467, 378309, 378301),
    ("Stealc", 3789336, 382817, 322349),
    ("Risepro", 2609151, 572709, 546668),
    ("Nexus", 843693, 77451, 61813),
    ("Bradmax", 293259, 77631, 73817),
    ("Rhadamanthys", 52397, 15529, 14949),
    ("Aurora", 125079, 78271, 77916),
]


def test_family_stats_percentages():
    stats = {s.family: s for s in family_stats(TABLE1_ROWS)}
    assert stats["Redline"].pct_non_commercial == 42.70
    assert stats["Aurora"].pct_non_commercial == 62.29
    assert stats["Total"].n_with_screenshot == sum(r[2] for r in TABLE1_ROWS)


def test_family_stats_rejects_nonmonotonic_rows():
    with pytest.raises(InconsistentCounts):
        family_stats([("Bad", 10, 20, 5)])
    with pytest.raises(InconsistentCounts):
        family_stats([("Bad", 10, 5, 7)])


def test_family_stats_zero_logs():
    stats = family_stats([("Empty", 0, 0, 0)])
    assert stats[0].pct_non_commercial == 0.0
