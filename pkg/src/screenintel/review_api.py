"""Local HTTP review console backend.

Read-only corpus access plus the scoring workflow; all writes delegate to
the evalkit score store, so every response is reconstructible from the
on-disk state. Coder identity comes from the X-Coder-Id header (trusted
local deployment, no auth).
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, Header, HTTPException, Query
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .corpus import CorpusStore, sniff_media_type
from .descparse import ParsedDescription
from .errors import CorpusTooSmall, IllegalScoreValue, NoOverlap
from .evalkit import (ASPECTS, AspectScore, ScoreStore, aggregate,
                      aspect_applicability, intercoder_agreement,
                      select_assessment_sample)

STATUS_UNSCORED = "Unscored"
STATUS_PARTIAL = "PartiallyScored"
STATUS_DISAGREEMENT = "Disagreement"
STATUS_RESOLVED = "Resolved"


class ScoreBody(BaseModel):
    aspect: str
    score: int
    note: str = ""


class ConsensusBody(BaseModel):
    aspect: str
    score: int
    rationale: str = ""


def item_status(scores: dict) -> str:
    coders = scores["coders"]
    consensus = scores["consensus"]
    if not coders and not consensus:
        return STATUS_UNSCORED
    disagreement = False
    agreed_everywhere = True
    for aspect in ASPECTS:
        values = {cid: s[aspect] for cid, s in coders.items() if aspect in s}
        if not values:
            agreed_everywhere = False
            continue
        if len(set(values.values())) > 1:
            if aspect in consensus:
                continue
            disagreement = True
        elif len(values) < 2 and aspect not in consensus:
            agreed_everywhere = False
    if disagreement:
        return STATUS_DISAGREEMENT
    return STATUS_RESOLVED if agreed_everywhere else STATUS_PARTIAL


def create_app(corpus_dir: Path | str, out_dir: Path | str,
               scores_path: Path | str | None = None,
               static_dir: Path | str | None = None) -> FastAPI:
    store = CorpusStore(Path(corpus_dir) / "store")
    parsed_dir = Path(out_dir) / "parsed"
    if not parsed_dir.exists():
        raise FileNotFoundError(f"corpus not parsed: {parsed_dir} missing")
    scores = ScoreStore(scores_path)

    parsed_by_id: dict[str, ParsedDescription] = {}
    for path in sorted(parsed_dir.glob("*.json")):
        p = ParsedDescription.from_dict(json.loads(path.read_text(encoding="utf-8")))
        parsed_by_id[p.screenshot_id] = p

    app = FastAPI(title="screenintel review console")
    app.state.scores = scores

    def _item(sid: str) -> dict:
        parsed = parsed_by_id.get(sid)
        per_item = scores.scores_by_item(sid)
        return {
            "screenshot_id": sid,
            "image_url": f"/api/items/{sid}/image",
            "parsed": parsed.to_dict() if parsed else None,
            "applicability": aspect_applicability(parsed) if parsed else None,
            "scores": per_item["coders"],
            "consensus": per_item["consensus"],
            "status": item_status(per_item),
        }

    @app.get("/api/items")
    def list_items(status: str | None = None, aspect: str | None = None,
                   page: int = Query(1, ge=1), page_size: int = Query(50, ge=1, le=500)):
        items = [_item(sid) for sid in sorted(parsed_by_id)]
        if status:
            items = [i for i in items if i["status"] == status]
        if aspect:
            items = [i for i in items
                     if i["applicability"] and i["applicability"].get(aspect)]
        total = len(items)
        start = (page - 1) * page_size
        return {"total": total, "page": page, "page_size": page_size,
                "items": items[start:start + page_size]}

    @app.get("/api/items/{sid}")
    def get_item(sid: str):
        if sid not in parsed_by_id:
            raise HTTPException(404, detail=f"unknown screenshot {sid}")
        return _item(sid)

    @app.get("/api/items/{sid}/image")
    def get_image(sid: str):
        if sid not in store:
            raise HTTPException(404, detail=f"no image for {sid}")
        data = Path(store.get(sid).path).read_bytes()
        return Response(content=data,
                        media_type=sniff_media_type(data) or "application/octet-stream")

    @app.post("/api/items/{sid}/scores")
    def post_score(sid: str, body: ScoreBody,
                   x_coder_id: str = Header(default="anonymous")):
        if sid not in parsed_by_id:
            raise HTTPException(404, detail=f"unknown screenshot {sid}")
        try:
            scores.record_score(AspectScore(screenshot_id=sid, coder_id=x_coder_id,
                                            aspect=body.aspect, score=body.score,
                                            note=body.note))
        except IllegalScoreValue as e:
            raise HTTPException(422, detail={"error": "IllegalScoreValue",
                                             "message": str(e)})
        return _item(sid)

    @app.post("/api/items/{sid}/consensus")
    def post_consensus(sid: str, body: ConsensusBody):
        if sid not in parsed_by_id:
            raise HTTPException(404, detail=f"unknown screenshot {sid}")
        try:
            scores.resolve_consensus(sid, body.aspect, body.score, body.rationale)
        except IllegalScoreValue as e:
            raise HTTPException(422, detail={"error": "IllegalScoreValue",
                                             "message": str(e)})
        return _item(sid)

    @app.get("/api/agreement")
    def get_agreement():
        coders = scores.coders()
        if len(coders) < 2:
            return {"per_aspect": [], "unresolved_ids": []}
        try:
            report = intercoder_agreement(scores.scores_for(coders[0]),
                                          scores.scores_for(coders[1]),
                                          scores.consensus_map())
        except NoOverlap:
            return {"per_aspect": [], "unresolved_ids": []}
        return report.to_dict()

    @app.get("/api/aggregate")
    def get_aggregate():
        return aggregate(scores.consensus_map()).to_dict()

    @app.get("/api/sample")
    def get_sample(seed: int = 0, base_n: int = 100, min_per_aspect: int = 50):
        try:
            ids = select_assessment_sample(parsed_by_id, seed, base_n, min_per_aspect)
        except CorpusTooSmall as e:
            raise HTTPException(422, detail={"error": "CorpusTooSmall",
                                             "message": str(e)})
        return {"seed": seed, "base_n": base_n, "min_per_aspect": min_per_aspect,
                "ids": ids}

    if static_dir and Path(static_dir).exists():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="console")
    return app


def serve(corpus_dir: str, out_dir: str, scores_path: str | None,
          host: str = "127.0.0.1", port: int = 8000,
          static_dir: str | None = None) -> None:
    import uvicorn

    app = create_app(corpus_dir, out_dir, scores_path, static_dir)
    uvicorn.run(app, host=host, port=port)
