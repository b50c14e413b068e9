"""Human assessment framework: sampling, 0/1/2/99 scoring, aggregation,
intercoder agreement and consensus resolution.

Score storage is an append-only event log with supersede semantics: the
latest write per (screenshot, coder, aspect) wins, history is retained for
audit, and consensus records are a separate event kind.
"""

from __future__ import annotations

import csv
import json
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .descparse import ParsedDescription
from .errors import CorpusTooSmall, IllegalScoreValue, NoOverlap

ASPECT_GENERAL = "GeneralDescription"
ASPECT_TABS = "BrowserTabs"
ASPECT_FILES = "FileIdentification"
ASPECT_SUSPICIOUS = "SuspiciousElements"

ASPECTS = (ASPECT_GENERAL, ASPECT_TABS, ASPECT_FILES, ASPECT_SUSPICIOUS)

LEGAL_SCORES = (0, 1, 2, 99)
SCORE_ORDER = (2, 1, 0, 99)  # presentation order, best first

SCORE_DESCRIPTIONS = {
    0: "Missing critical elements",
    1: "Captured main elements but missed details",
    2: "Comprehensive capture of all relevant elements",
    99: "Not applicable to the specific screenshot",
}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class AspectScore:
    screenshot_id: str
    coder_id: str
    aspect: str
    score: int
    note: str = ""
    scored_at: str = field(default_factory=_now)

    def to_dict(self) -> dict:
        return {"screenshot_id": self.screenshot_id, "coder_id": self.coder_id,
                "aspect": self.aspect, "score": self.score, "note": self.note,
                "scored_at": self.scored_at}


def _check_score(score: int) -> None:
    if score not in LEGAL_SCORES:
        raise IllegalScoreValue(f"score must be one of {LEGAL_SCORES}, got {score!r}")


def _check_aspect(aspect: str) -> None:
    if aspect not in ASPECTS:
        raise IllegalScoreValue(f"unknown aspect {aspect!r}")


class ScoreStore:
    """Append-only score log; optionally persisted as JSONL."""

    def __init__(self, path: Path | str | None = None):
        self.path = Path(path) if path else None
        self.history: list[dict] = []
        self._latest: dict[tuple[str, str, str], AspectScore] = {}
        self._consensus: dict[tuple[str, str], dict] = {}
        if self.path and self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._apply(json.loads(line), persist=False)

    def _apply(self, event: dict, persist: bool) -> None:
        self.history.append(event)
        if event["kind"] == "score":
            s = AspectScore(event["screenshot_id"], event["coder_id"],
                            event["aspect"], event["score"], event.get("note", ""),
                            event["scored_at"])
            self._latest[(s.screenshot_id, s.coder_id, s.aspect)] = s
        else:
            self._consensus[(event["screenshot_id"], event["aspect"])] = event
        if persist and self.path:
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(json.dumps(event, ensure_ascii=False) + "\n")

    def record_score(self, score: AspectScore) -> None:
        _check_score(score.score)
        _check_aspect(score.aspect)
        self._apply({"kind": "score", **score.to_dict()}, persist=True)

    def resolve_consensus(self, screenshot_id: str, aspect: str, final_score: int,
                          rationale: str = "") -> None:
        _check_score(final_score)
        _check_aspect(aspect)
        self._apply({"kind": "consensus", "screenshot_id": screenshot_id,
                     "aspect": aspect, "score": final_score,
                     "rationale": rationale, "scored_at": _now()}, persist=True)

    def latest(self, screenshot_id: str, coder_id: str, aspect: str) -> AspectScore | None:
        return self._latest.get((screenshot_id, coder_id, aspect))

    def scores_for(self, coder_id: str) -> dict[tuple[str, str], int]:
        return {(sid, aspect): s.score
                for (sid, cid, aspect), s in self._latest.items() if cid == coder_id}

    def coders(self) -> list[str]:
        return sorted({cid for (_, cid, _) in self._latest})

    def consensus_score(self, screenshot_id: str, aspect: str) -> int | None:
        ev = self._consensus.get((screenshot_id, aspect))
        return ev["score"] if ev else None

    def consensus_map(self) -> dict[tuple[str, str], int]:
        return {k: v["score"] for k, v in self._consensus.items()}

    def scores_by_item(self, screenshot_id: str) -> dict:
        """All latest coder scores + consensus for one screenshot."""
        coders: dict[str, dict[str, int]] = defaultdict(dict)
        for (sid, cid, aspect), s in self._latest.items():
            if sid == screenshot_id:
                coders[cid][aspect] = s.score
        consensus = {aspect: ev["score"] for (sid, aspect), ev in self._consensus.items()
                     if sid == screenshot_id}
        return {"coders": dict(coders), "consensus": consensus}

    def history_for(self, screenshot_id: str, coder_id: str, aspect: str) -> list[dict]:
        return [e for e in self.history
                if e["kind"] == "score" and e["screenshot_id"] == screenshot_id
                and e["coder_id"] == coder_id and e["aspect"] == aspect]


@dataclass
class AggregateTable:
    # aspect -> list of (score, count, pct) in presentation order
    rows: dict[str, list[tuple[int, int, float]]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {aspect: [{"score": s, "count": c, "pct": p} for s, c, p in rows]
                for aspect, rows in self.rows.items()}

    def to_markdown(self) -> str:
        lines = ["| Assessment Category | Score | Occurrences | Percentage |",
                 "|---|---|---|---|"]
        for aspect, rows in self.rows.items():
            for s, c, p in rows:
                lines.append(f"| {aspect} | {s} | {c} | {p:.1f}% |")
        return "\n".join(lines)

    def to_csv(self, path: Path | str) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["aspect", "score", "count", "pct"])
            for aspect, rows in self.rows.items():
                for s, c, p in rows:
                    w.writerow([aspect, s, c, p])


def aggregate(consensus: dict[tuple[str, str], int],
              applicable_only: bool = False) -> AggregateTable:
    """Table-III-style per-aspect counts and percentages.

    The default denominator is the number of distinct scored screenshots,
    shared across aspects, with 99 rows kept in it. An aspect left unscored
    on some screenshots therefore yields percentages summing below 100,
    which is how the reference table reconciles. applicable_only switches
    to per-aspect non-99 denominators (prose-style accuracy claims).
    """
    table = AggregateTable()
    by_aspect: dict[str, Counter] = defaultdict(Counter)
    for (_, aspect), score in consensus.items():
        by_aspect[aspect][score] += 1
    n_screens = len({sid for sid, _ in consensus})
    for aspect in ASPECTS:
        counts = by_aspect.get(aspect)
        if not counts:
            continue
        if applicable_only:
            counts = Counter({s: n for s, n in counts.items() if s != 99})
            total = sum(counts.values())
        else:
            total = n_screens
        if not total:
            continue
        rows = [(s, counts[s], round(100.0 * counts[s] / total, 1))
                for s in SCORE_ORDER if counts.get(s)]
        table.rows[aspect] = rows
    return table


def cohen_kappa(pairs: list[tuple[int, int]]) -> tuple[float | None, bool]:
    """Nominal Cohen's kappa over the 0/1/2/99 scale.

    Returns (kappa, degenerate). Degenerate when chance agreement is 1
    (both marginals concentrated on a single identical category).
    """
    n = len(pairs)
    po = sum(1 for a, b in pairs if a == b) / n
    ma = Counter(a for a, _ in pairs)
    mb = Counter(b for _, b in pairs)
    pe = sum((ma.get(c, 0) / n) * (mb.get(c, 0) / n) for c in LEGAL_SCORES)
    if abs(1.0 - pe) < 1e-12:
        return None, True
    return (po - pe) / (1.0 - pe), False


@dataclass
class AspectAgreement:
    aspect: str
    n_double_coded: int
    percent_agreement: float
    cohen_kappa: float | None
    kappa_degenerate: bool

    def to_dict(self) -> dict:
        return {"aspect": self.aspect, "n_double_coded": self.n_double_coded,
                "percent_agreement": self.percent_agreement,
                "cohen_kappa": self.cohen_kappa,
                "kappa_degenerate": self.kappa_degenerate}


@dataclass
class AgreementReport:
    per_aspect: list[AspectAgreement]
    unresolved_ids: list[dict]  # {screenshot_id, aspect, scores}

    def to_dict(self) -> dict:
        return {"per_aspect": [a.to_dict() for a in self.per_aspect],
                "unresolved_ids": list(self.unresolved_ids)}


def intercoder_agreement(scores_a: dict[tuple[str, str], int],
                         scores_b: dict[tuple[str, str], int],
                         consensus: dict[tuple[str, str], int] | None = None) -> AgreementReport:
    overlap = sorted(set(scores_a) & set(scores_b))
    if not overlap:
        raise NoOverlap("coders share no (screenshot, aspect) pairs")
    consensus = consensus or {}

    per_aspect: list[AspectAgreement] = []
    unresolved: list[dict] = []
    for aspect in ASPECTS:
        keys = [k for k in overlap if k[1] == aspect]
        if not keys:
            continue
        pairs = [(scores_a[k], scores_b[k]) for k in keys]
        agree = sum(1 for a, b in pairs if a == b) / len(pairs)
        kappa, degenerate = cohen_kappa(pairs)
        per_aspect.append(AspectAgreement(aspect, len(keys), agree, kappa, degenerate))
        for k in keys:
            if scores_a[k] != scores_b[k] and k not in consensus:
                unresolved.append({"screenshot_id": k[0], "aspect": k[1],
                                   "scores": [scores_a[k], scores_b[k]]})
    return AgreementReport(per_aspect=per_aspect, unresolved_ids=unresolved)


def failure_breakdown(consensus: dict[tuple[str, str], int]) -> dict[int, int]:
    """For screenshots whose tab score is 0/1, tabulate suspicious outcomes."""
    failures = {sid for (sid, aspect), score in consensus.items()
                if aspect == ASPECT_TABS and score in (0, 1)}
    out: Counter = Counter()
    for sid in failures:
        susp = consensus.get((sid, ASPECT_SUSPICIOUS))
        if susp is not None:
            out[susp] += 1
    return dict(out)


def aspect_applicability(parsed: ParsedDescription) -> dict[str, bool]:
    return {
        ASPECT_GENERAL: True,
        ASPECT_TABS: bool(parsed.tabs or parsed.url_entries),
        ASPECT_FILES: bool(parsed.installers or parsed.explorer_files
                           or parsed.archive_members),
        ASPECT_SUSPICIOUS: True,
    }


def select_assessment_sample(parsed_by_id: dict[str, ParsedDescription],
                             seed: int, base_n: int,
                             min_per_aspect: int) -> list[str]:
    """Seeded uniform base draw plus targeted top-ups per under-covered aspect.

    Deterministic for a fixed seed: ids are processed in sorted order and the
    generator is Python's Mersenne Twister, which is stable across platforms.
    """
    ids = sorted(parsed_by_id)
    applicable = {aspect: {i for i in ids
                           if aspect_applicability(parsed_by_id[i])[aspect]}
                  for aspect in ASPECTS}
    for aspect in ASPECTS:
        if len(applicable[aspect]) < min_per_aspect:
            raise CorpusTooSmall(
                f"only {len(applicable[aspect])} screenshots applicable for {aspect}")

    rng = random.Random(seed)
    sample: list[str] = rng.sample(ids, min(base_n, len(ids))) if base_n else []
    chosen = set(sample)

    for aspect in ASPECTS:
        while len(chosen & applicable[aspect]) < min_per_aspect:
            pool = sorted(applicable[aspect] - chosen)
            if not pool:
                raise CorpusTooSmall(f"exhausted candidates for {aspect}")
            pick = rng.choice(pool)
            sample.append(pick)
            chosen.add(pick)
    return sample


def export_scores_csv(store: ScoreStore, path: Path | str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["screenshot_id", "coder_id", "aspect", "score", "note", "scored_at"])
        for (sid, cid, aspect), s in sorted(store._latest.items()):
            w.writerow([sid, cid, aspect, s.score, s.note, s.scored_at])


def import_scores_csv(store: ScoreStore, path: Path | str) -> int:
    n = 0
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            store.record_score(AspectScore(
                screenshot_id=row["screenshot_id"], coder_id=row["coder_id"],
                aspect=row["aspect"], score=int(row["score"]),
                note=row.get("note", ""),
                scored_at=row.get("scored_at") or _now()))
            n += 1
    return n


def import_consensus_csv(store: ScoreStore, path: Path | str) -> int:
    n = 0
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            store.resolve_consensus(row["screenshot_id"], row["aspect"],
                                    int(row["score"]), row.get("rationale", ""))
            n += 1
    return n
