"""Vision-model backends, response cache, and the describe entry points.

Two interchangeable backends: a live OpenAI-compatible chat-completions
client (retries, rate limit, bounded in-flight) and a fixture backend that
replays canned replies keyed by the sha256 of the submitted image bytes, so
the whole pipeline runs offline and deterministically.
"""

from __future__ import annotations

import base64
import hashlib
import io
import json
import math
import os
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import httpx

from .corpus import ScreenshotRecord, encode_image_bytes
from .errors import (BackendUnavailable, EmptyReply, ImageTooSmall,
                     RateLimited)

PASS_FULL = "FullImage"
PASS_TABSTRIP = "TabStrip"

TAB_STRIP_FRACTION = 0.10


@dataclass
class BackendConfig:
    endpoint: str = "https://api.openai.com/v1"
    model: str = "gpt-4o-mini"
    api_key_env: str = "VLM_API_KEY"
    max_in_flight: int = 4
    requests_per_minute: int = 60
    max_attempts: int = 3
    backoff_base_s: float = 1.0
    temperature: float = 0.0

    def __post_init__(self):
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        if self.requests_per_minute < 1:
            raise ValueError("requests_per_minute must be >= 1")


@dataclass
class RawDescription:
    screenshot_id: str
    model_id: str
    prompt_version: str
    pass_kind: str
    text: str
    obtained_at: str
    from_cache: bool

    def to_dict(self) -> dict:
        return {"screenshot_id": self.screenshot_id, "model_id": self.model_id,
                "prompt_version": self.prompt_version, "pass_kind": self.pass_kind,
                "text": self.text, "obtained_at": self.obtained_at,
                "from_cache": self.from_cache}


class FixtureBackend:
    """Replays canned replies: <fixture_dir>/<sha256-of-image-bytes>.txt."""

    model_id = "fixture"

    def __init__(self, fixture_dir: Path | str):
        self.fixture_dir = Path(fixture_dir)

    def submit(self, prompt_text: str, image_b64: str, media_type: str) -> str:
        sha = hashlib.sha256(base64.b64decode(image_b64)).hexdigest()
        path = self.fixture_dir / f"{sha}.txt"
        if not path.exists():
            raise BackendUnavailable(f"no canned response for {sha}")
        return path.read_text(encoding="utf-8")


class _RateLimiter:
    """Sliding-window limiter shared across threads."""

    def __init__(self, per_minute: int):
        self.per_minute = per_minute
        self._lock = threading.Lock()
        self._stamps: list[float] = []

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                self._stamps = [t for t in self._stamps if now - t < 60.0]
                if len(self._stamps) < self.per_minute:
                    self._stamps.append(now)
                    return
                wait = 60.0 - (now - self._stamps[0])
            time.sleep(max(wait, 0.01))


class LiveBackend:
    """OpenAI-compatible chat-completions client with retry/backoff."""

    def __init__(self, config: BackendConfig, client: httpx.Client | None = None,
                 sleep=time.sleep):
        self.config = config
        self.model_id = config.model
        self._client = client or httpx.Client(timeout=120.0)
        self._sleep = sleep
        self._limiter = _RateLimiter(config.requests_per_minute)
        self._in_flight = threading.Semaphore(config.max_in_flight)

    def _headers(self) -> dict:
        key = os.environ.get(self.config.api_key_env, "")
        return {"Authorization": f"Bearer {key}", "Content-Type": "application/json"}

    def submit(self, prompt_text: str, image_b64: str, media_type: str) -> str:
        body = {
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [{
                "role": "user",
                "content": [
                    {"type": "text", "text": prompt_text},
                    {"type": "image_url",
                     "image_url": {"url": f"data:{media_type};base64,{image_b64}"}},
                ],
            }],
        }
        url = self.config.endpoint.rstrip("/") + "/chat/completions"
        last_err: Exception | None = None
        with self._in_flight:
            for attempt in range(self.config.max_attempts):
                if attempt:
                    self._sleep(self.config.backoff_base_s * (2 ** (attempt - 1)))
                self._limiter.acquire()
                try:
                    resp = self._client.post(url, json=body, headers=self._headers())
                except httpx.HTTPError as e:
                    last_err = e
                    continue
                if resp.status_code == 429:
                    last_err = RateLimited(resp.text[:200])
                    continue
                if resp.status_code >= 500:
                    last_err = BackendUnavailable(f"HTTP {resp.status_code}")
                    continue
                if resp.status_code != 200:
                    raise BackendUnavailable(f"HTTP {resp.status_code}: {resp.text[:200]}")
                data = resp.json()
                return data["choices"][0]["message"]["content"]
        if isinstance(last_err, RateLimited):
            raise last_err
        raise BackendUnavailable(str(last_err))


class DescriptionCache:
    """Content-addressed reply cache.

    Layout: cache/<sha256>/<prompt_version>/<model_id>/<pass_kind>.txt plus a
    .meta.json sidecar. Writes go to a temp file then atomic rename.
    """

    def __init__(self, root: Path | str):
        self.root = Path(root)

    def _entry(self, sha256: str, prompt_version: str, model_id: str,
               pass_kind: str) -> Path:
        return self.root / sha256 / prompt_version / model_id / f"{pass_kind}.txt"

    def get(self, sha256: str, prompt_version: str, model_id: str,
            pass_kind: str) -> str | None:
        path = self._entry(sha256, prompt_version, model_id, pass_kind)
        if path.exists():
            return path.read_text(encoding="utf-8")
        return None

    def put(self, sha256: str, prompt_version: str, model_id: str,
            pass_kind: str, text: str, meta: dict) -> None:
        path = self._entry(sha256, prompt_version, model_id, pass_kind)
        path.parent.mkdir(parents=True, exist_ok=True)
        for target, payload in ((path, text),
                                (path.with_suffix(".meta.json"),
                                 json.dumps(meta, sort_keys=True))):
            tmp = target.with_name(target.name + ".tmp")
            tmp.write_text(payload, encoding="utf-8")
            tmp.replace(target)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def crop_tab_strip(image_bytes: bytes, fraction: float = TAB_STRIP_FRACTION) -> bytes:
    """Crop the top `fraction` rows of the image (full width), re-encoded PNG."""
    from PIL import Image

    img = Image.open(io.BytesIO(image_bytes))
    if img.height < 10:
        raise ImageTooSmall(f"height {img.height} < 10")
    rows = math.ceil(fraction * img.height)
    cropped = img.crop((0, 0, img.width, rows))
    buf = io.BytesIO()
    cropped.save(buf, format="PNG")
    return buf.getvalue()


def describe(record: ScreenshotRecord, template, backend, cache: DescriptionCache,
             pass_kind: str = PASS_FULL,
             tab_strip_fraction: float = TAB_STRIP_FRACTION) -> RawDescription:
    """Cache-first description of one screenshot for the given pass."""
    cached = cache.get(record.sha256, template.version, backend.model_id, pass_kind)
    if cached is not None:
        return RawDescription(record.id, backend.model_id, template.version,
                              pass_kind, cached, _now(), from_cache=True)

    data = Path(record.path).read_bytes()
    if pass_kind == PASS_TABSTRIP:
        data = crop_tab_strip(data, tab_strip_fraction)
    image_b64, media_type = encode_image_bytes(data)
    reply = backend.submit(template.text, image_b64, media_type)
    if not reply or not reply.strip():
        raise EmptyReply(record.id)
    meta = {
        "screenshot_id": record.id, "sha256": record.sha256,
        "prompt_version": template.version, "model_id": backend.model_id,
        "pass_kind": pass_kind, "obtained_at": _now(),
        "temperature": getattr(getattr(backend, "config", None), "temperature", 0.0),
    }
    cache.put(record.sha256, template.version, backend.model_id, pass_kind,
              reply, meta)
    return RawDescription(record.id, backend.model_id, template.version,
                          pass_kind, reply, meta["obtained_at"], from_cache=False)


def describe_tab_strip(record: ScreenshotRecord, template, backend,
                       cache: DescriptionCache,
                       fraction: float = TAB_STRIP_FRACTION) -> RawDescription:
    return describe(record, template, backend, cache, PASS_TABSTRIP, fraction)
