"""Screenshot corpus: manifest ingest, append-only record store, family stats."""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

from .errors import (DuplicateId, InconsistentCounts, IoFailure,
                     MalformedManifestLine, MissingImage,
                     UnsupportedImageFormat)

CATEGORIES = ("WebContent", "FileSystem", "Hybrid")

_MANIFEST_REQUIRED = ("id", "path", "family")


@dataclass
class ScreenshotRecord:
    id: str
    path: str
    sha256: str
    family: str
    log_id: str = ""
    captured_at: str | None = None  # RFC 3339, stored as given
    language_hint: str | None = None
    category: str | None = None
    commercial_watermark: bool = False
    extra: dict = field(default_factory=dict)  # unknown manifest keys, verbatim

    def captured_dt(self) -> datetime | None:
        if not self.captured_at:
            return None
        return datetime.fromisoformat(self.captured_at.replace("Z", "+00:00"))

    def to_dict(self) -> dict:
        d = {
            "id": self.id, "path": self.path, "sha256": self.sha256,
            "family": self.family, "log_id": self.log_id,
            "captured_at": self.captured_at, "language_hint": self.language_hint,
            "category": self.category,
            "commercial_watermark": self.commercial_watermark,
        }
        if self.extra:
            d["extra"] = self.extra
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScreenshotRecord":
        return cls(
            id=d["id"], path=d["path"], sha256=d["sha256"], family=d["family"],
            log_id=d.get("log_id", ""), captured_at=d.get("captured_at"),
            language_hint=d.get("language_hint"), category=d.get("category"),
            commercial_watermark=bool(d.get("commercial_watermark", False)),
            extra=dict(d.get("extra", {})),
        )


@dataclass
class CorpusSummary:
    ingested: int = 0
    skipped: int = 0
    duplicates: int = 0
    errors: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"ingested": self.ingested, "skipped": self.skipped,
                "duplicates": self.duplicates, "errors": list(self.errors)}


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class CorpusStore:
    """Append-only store: one JSONL record file plus an id->offset index."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.records_path = self.root / "records.jsonl"
        self.index_path = self.root / "index.json"
        self._index: dict[str, int] = {}
        self._by_sha: dict[str, str] = {}  # sha256 -> id
        self._load()

    def _load(self) -> None:
        if not self.records_path.exists():
            return
        offset = 0
        with open(self.records_path, "rb") as f:
            for line in f:
                rec = ScreenshotRecord.from_dict(json.loads(line))
                self._index[rec.id] = offset
                self._by_sha.setdefault(rec.sha256, rec.id)
                offset += len(line)

    def __len__(self) -> int:
        return len(self._index)

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._index

    def ids(self) -> list[str]:
        return sorted(self._index)

    def get(self, record_id: str) -> ScreenshotRecord:
        offset = self._index[record_id]
        with open(self.records_path, "rb") as f:
            f.seek(offset)
            return ScreenshotRecord.from_dict(json.loads(f.readline()))

    def id_for_sha(self, sha256: str) -> str | None:
        return self._by_sha.get(sha256)

    def append(self, record: ScreenshotRecord) -> None:
        if record.id in self._index:
            raise DuplicateId(record.id)
        line = (json.dumps(record.to_dict(), ensure_ascii=False) + "\n").encode()
        with open(self.records_path, "ab") as f:
            offset = f.tell()
            f.write(line)
        self._index[record.id] = offset
        self._by_sha.setdefault(record.sha256, record.id)
        self._write_index()

    def _write_index(self) -> None:
        tmp = self.index_path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(self._index, sort_keys=True))
        tmp.replace(self.index_path)

    def records(self) -> list[ScreenshotRecord]:
        return [self.get(i) for i in self.ids()]


def ingest_manifest(store: CorpusStore, manifest_path: Path | str,
                    image_root: Path | str, allow_missing: bool = False) -> CorpusSummary:
    """Ingest a JSONL manifest into the store.

    Malformed lines are reported and skipped; a missing image is fatal unless
    allow_missing; a repeated id with identical content is a duplicate, a
    repeated id with different content is fatal.
    """
    manifest_path = Path(manifest_path)
    image_root = Path(image_root)
    summary = CorpusSummary()

    with open(manifest_path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("not a JSON object")
                for key in _MANIFEST_REQUIRED:
                    if key not in obj or not isinstance(obj[key], str) or not obj[key]:
                        raise ValueError(f"missing or invalid key {key!r}")
                captured = obj.get("captured_at")
                if captured is not None:
                    datetime.fromisoformat(str(captured).replace("Z", "+00:00"))
            except (json.JSONDecodeError, ValueError) as e:
                err = MalformedManifestLine(line_no, str(e))
                summary.errors.append(str(err))
                summary.skipped += 1
                continue

            img_path = image_root / obj["path"]
            if not img_path.exists():
                if allow_missing:
                    sha = hashlib.sha256(obj["path"].encode()).hexdigest()
                else:
                    raise MissingImage(str(img_path))
            else:
                sha = sha256_file(img_path)

            extra = {k: v for k, v in obj.items()
                     if k not in ("id", "path", "family", "log_id", "captured_at",
                                  "language_hint", "commercial_watermark")}

            if obj["id"] in store:
                existing = store.get(obj["id"])
                if existing.sha256 == sha:
                    summary.duplicates += 1
                    continue
                raise DuplicateId(f"id {obj['id']} re-used for different content")
            if store.id_for_sha(sha) is not None:
                summary.duplicates += 1
                continue

            record = ScreenshotRecord(
                id=obj["id"], path=str(img_path), sha256=sha, family=obj["family"],
                log_id=obj.get("log_id", ""), captured_at=obj.get("captured_at"),
                language_hint=obj.get("language_hint"),
                commercial_watermark=bool(obj.get("commercial_watermark", False)),
                extra=extra,
            )
            store.append(record)
            summary.ingested += 1
    return summary


_MAGIC = {
    b"\x89PNG\r\n\x1a\n": "image/png",
    b"\xff\xd8\xff": "image/jpeg",
}


def sniff_media_type(data: bytes) -> str | None:
    for magic, mtype in _MAGIC.items():
        if data.startswith(magic):
            return mtype
    return None


def encode_image(record: ScreenshotRecord) -> tuple[str, str]:
    """Return (base64 payload, media type) for the record's image."""
    return encode_image_bytes(_read_bytes(record.path))


def encode_image_bytes(data: bytes) -> tuple[str, str]:
    mtype = sniff_media_type(data)
    if mtype is None:
        raise UnsupportedImageFormat("unrecognized magic bytes")
    return base64.b64encode(data).decode("ascii"), mtype


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise IoFailure(str(e)) from e


@dataclass
class FamilyStats:
    family: str
    n_logs: int
    n_with_screenshot: int
    n_non_commercial: int
    pct_non_commercial: float

    def to_dict(self) -> dict:
        return {"family": self.family, "n_logs": self.n_logs,
                "n_with_screenshot": self.n_with_screenshot,
                "n_non_commercial": self.n_non_commercial,
                "pct_non_commercial": self.pct_non_commercial}


def _pct(numer: int, denom: int) -> float:
    return round(100.0 * numer / denom, 2) if denom > 0 else 0.0


def family_stats(rows: list[tuple[str, int, int, int]]) -> list[FamilyStats]:
    """Per-family percentage rows plus a trailing 'Total' row."""
    out: list[FamilyStats] = []
    tot_logs = tot_shot = tot_nc = 0
    for family, n_logs, n_shot, n_nc in rows:
        if not (0 <= n_nc <= n_shot <= n_logs):
            raise InconsistentCounts(f"{family}: {n_logs}/{n_shot}/{n_nc}")
        out.append(FamilyStats(family, n_logs, n_shot, n_nc, _pct(n_nc, n_logs)))
        tot_logs += n_logs
        tot_shot += n_shot
        tot_nc += n_nc
    out.append(FamilyStats("Total", tot_logs, tot_shot, tot_nc, _pct(tot_nc, tot_logs)))
    return out
