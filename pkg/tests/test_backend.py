import hashlib
import io
import json

import httpx
import pytest

from screenintel.backend import (BackendConfig, DescriptionCache,
                                 FixtureBackend, LiveBackend, crop_tab_strip,
                                 describe, describe_tab_strip, PASS_FULL,
                                 PASS_TABSTRIP)
from screenintel.corpus import ScreenshotRecord
from screenintel.errors import (BackendUnavailable, EmptyReply, ImageTooSmall,
                                RateLimited)
from screenintel.fixtures import make_png
from screenintel.prompt import build_prompt


class CountingBackend:
    """Wraps another backend and counts submit calls."""

    def __init__(self, inner):
        self.inner = inner
        self.model_id = inner.model_id
        self.calls = 0

    def submit(self, prompt_text, image_b64, media_type):
        self.calls += 1
        return self.inner.submit(prompt_text, image_b64, media_type)


def _record(tmp_path, sid="r1", tag=None):
    png = make_png(tag or sid, width=64, height=48)
    path = tmp_path / f"{sid}.png"
    path.write_bytes(png)
    return ScreenshotRecord(id=sid, path=str(path),
                            sha256=hashlib.sha256(png).hexdigest(),
                            family="aurora", log_id="l1"), png


def test_fixture_backend_replays_by_sha(tmp_path):
    rec, png = _record(tmp_path)
    (tmp_path / f"{rec.sha256}.txt").write_text("### Main Content:\nhello\n")
    backend = FixtureBackend(tmp_path)
    cache = DescriptionCache(tmp_path / "cache")
    raw = describe(rec, build_prompt("v1"), backend, cache)
    assert raw.text.startswith("### Main Content:")
    assert not raw.from_cache


def test_fixture_backend_missing_reply(tmp_path):
    rec, _ = _record(tmp_path)
    backend = FixtureBackend(tmp_path)
    cache = DescriptionCache(tmp_path / "cache")
    with pytest.raises(BackendUnavailable, match=rec.sha256):
        describe(rec, build_prompt("v1"), backend, cache)


def test_cache_idempotence_zero_calls_on_rerun(tmp_path):
    rec, _ = _record(tmp_path)
    (tmp_path / f"{rec.sha256}.txt").write_text("reply text")
    backend = CountingBackend(FixtureBackend(tmp_path))
    cache = DescriptionCache(tmp_path / "cache")
    template = build_prompt("v1")

    first = describe(rec, template, backend, cache)
    assert backend.calls == 1 and not first.from_cache
    second = describe(rec, template, backend, cache)
    assert backend.calls == 1 and second.from_cache
    assert second.text == first.text


def test_cache_layout_and_meta(tmp_path):
    rec, _ = _record(tmp_path)
    (tmp_path / f"{rec.sha256}.txt").write_text("reply")
    cache = DescriptionCache(tmp_path / "cache")
    describe(rec, build_prompt("v1"), FixtureBackend(tmp_path), cache)
    entry = tmp_path / "cache" / rec.sha256 / "v1" / "fixture" / "FullImage.txt"
    assert entry.read_text() == "reply"
    meta = json.loads(entry.with_suffix(".meta.json").read_text())
    assert meta["sha256"] == rec.sha256
    assert meta["pass_kind"] == PASS_FULL


def test_empty_reply_raises(tmp_path):
    rec, _ = _record(tmp_path)
    (tmp_path / f"{rec.sha256}.txt").write_text("   \n")
    cache = DescriptionCache(tmp_path / "cache")
    with pytest.raises(EmptyReply):
        describe(rec, build_prompt("v1"), FixtureBackend(tmp_path), cache)


def test_crop_tab_strip_dimensions():
    png = make_png("crop-me", width=100, height=40)
    cropped = crop_tab_strip(png)
    from PIL import Image
    img = Image.open(io.BytesIO(cropped))
    assert img.width == 100
    assert img.height == 4  # ceil(0.10 * 40)


def test_crop_tab_strip_too_small():
    png = make_png("tiny", width=20, height=8)
    with pytest.raises(ImageTooSmall):
        crop_tab_strip(png)


def test_tab_strip_pass_cached_separately(tmp_path):
    rec, png = _record(tmp_path)
    strip_sha = hashlib.sha256(crop_tab_strip(png)).hexdigest()
    (tmp_path / f"{rec.sha256}.txt").write_text("full reply")
    (tmp_path / f"{strip_sha}.txt").write_text("strip reply")
    cache = DescriptionCache(tmp_path / "cache")
    backend = FixtureBackend(tmp_path)
    template = build_prompt("v1")

    full = describe(rec, template, backend, cache)
    strip = describe_tab_strip(rec, template, backend, cache)
    assert full.text == "full reply" and strip.text == "strip reply"
    assert strip.pass_kind == PASS_TABSTRIP
    assert cache.get(rec.sha256, "v1", "fixture", PASS_TABSTRIP) == "strip reply"


def _live_backend(handler, **cfg_kwargs):
    config = BackendConfig(endpoint="https://vlm.test/v1", **cfg_kwargs)
    client = httpx.Client(transport=httpx.MockTransport(handler))
    return LiveBackend(config, client=client, sleep=lambda s: None)


def _ok_response(text="the reply"):
    return httpx.Response(200, json={
        "choices": [{"message": {"content": text}}]})


def test_live_backend_submits_image_payload(monkeypatch):
    seen = {}

    def handler(request):
        seen["body"] = json.loads(request.content)
        seen["auth"] = request.headers.get("Authorization")
        return _ok_response()

    monkeypatch.setenv("VLM_API_KEY", "sekret")
    backend = _live_backend(handler)
    out = backend.submit("prompt here", "aW1n", "image/png")
    assert out == "the reply"
    assert seen["auth"] == "Bearer sekret"
    parts = seen["body"]["messages"][0]["content"]
    assert parts[0] == {"type": "text", "text": "prompt here"}
    assert parts[1]["image_url"]["url"] == "data:image/png;base64,aW1n"
    assert seen["body"]["temperature"] == 0.0


def test_live_backend_retries_then_succeeds():
    attempts = []

    def handler(request):
        attempts.append(1)
        if len(attempts) < 3:
            return httpx.Response(503, text="down")
        return _ok_response("recovered")

    backend = _live_backend(handler)
    assert backend.submit("p", "aW1n", "image/png") == "recovered"
    assert len(attempts) == 3


def test_live_backend_rate_limit_exhausts():
    def handler(request):
        return httpx.Response(429, text="slow down")

    backend = _live_backend(handler, max_attempts=2)
    with pytest.raises(RateLimited):
        backend.submit("p", "aW1n", "image/png")


def test_live_backend_client_error_is_fatal():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(400, text="bad request")

    backend = _live_backend(handler)
    with pytest.raises(BackendUnavailable):
        backend.submit("p", "aW1n", "image/png")
    assert len(calls) == 1  # 4xx (except 429) is not retried


def test_backend_config_validation():
    with pytest.raises(ValueError):
        BackendConfig(max_in_flight=0)
    with pytest.raises(ValueError):
        BackendConfig(requests_per_minute=0)
