"""URL validation, normalization and registered-domain extraction.

Validation is deliberately permissive about missing schemes (screenshots
often show bare hosts) but strict about free text: anything with internal
whitespace or an implausible host is rejected.
"""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources
from urllib.parse import urlsplit, urlunsplit

_STRIP_CHARS = "\"'()[]<>.,;:"
_ELLIPSIS = "…"

_HOST_RE = re.compile(r"^[a-z0-9]([a-z0-9\-]*[a-z0-9])?$")
_SCHEME_RE = re.compile(r"^(https?)://", re.IGNORECASE)


@lru_cache(maxsize=1)
def _suffixes() -> frozenset[str]:
    text = resources.files("screenintel.data").joinpath("psl_snapshot.txt").read_text()
    out = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.add(line)
    return frozenset(out)


def registered_domain(host: str) -> str:
    """Collapse a host to its registered domain using the bundled suffix snapshot.

    go.java-gapp.space -> java-gapp.space. Hosts with no matching suffix fall
    back to their last two labels.
    """
    labels = host.lower().strip(".").split(".")
    if len(labels) < 2:
        return host.lower()
    sufs = _suffixes()
    # longest matching suffix wins
    for k in range(1, len(labels)):
        cand = ".".join(labels[k:])
        if cand in sufs:
            return ".".join(labels[k - 1:])
    return ".".join(labels[-2:])


def _plausible_host(host: str) -> bool:
    if not host or " " in host:
        return False
    labels = host.split(".")
    if len(labels) < 2:
        return False
    return all(_HOST_RE.match(lbl) for lbl in labels if lbl)


def validate_url(candidate: str) -> str | None:
    """Normalize a URL candidate, or return None for free text.

    Trims surrounding punctuation, lowercases scheme and host, preserves
    path/query case. A trailing ellipsis is kept (truncation is judged
    separately).
    """
    s = candidate.strip()
    # peel wrapping punctuation without eating path characters
    while s and s[0] in _STRIP_CHARS:
        s = s[1:]
    while s and s[-1] in _STRIP_CHARS and not s.endswith(_ELLIPSIS):
        s = s[:-1]
    if not s or any(ch.isspace() for ch in s):
        return None

    m = _SCHEME_RE.match(s)
    scheme = m.group(1).lower() if m else ""
    rest = s[m.end():] if m else s
    try:
        parts = urlsplit(("http://" if not scheme else scheme + "://") + rest)
    except ValueError:
        return None
    host = (parts.hostname or "").lower()
    # allow an ellipsized tail inside the path, but never inside the host
    if _ELLIPSIS in host or not _plausible_host(host):
        return None
    netloc = host
    if parts.port:
        netloc += f":{parts.port}"
    rebuilt = urlunsplit((scheme or "https", netloc, parts.path, parts.query, parts.fragment))
    if not scheme:
        # no scheme seen on screen: keep the bare form, normalized host
        rebuilt = rebuilt[len("https://"):]
    return rebuilt


def url_host(normalized: str) -> str:
    m = _SCHEME_RE.match(normalized)
    target = normalized if m else "http://" + normalized
    return (urlsplit(target).hostname or "").lower()


_PCT_TAIL_RE = re.compile(r"%[0-9a-fA-F]?$")


def detect_truncation(candidate: str) -> bool:
    """True when a URL string looks cut off mid-write.

    Triggers: terminal ellipsis, a dangling percent-escape, or a host with no
    TLD label at all.
    """
    s = candidate.strip()
    if s.endswith(_ELLIPSIS) or s.endswith("..."):
        return True
    if _PCT_TAIL_RE.search(s):
        return True
    m = _SCHEME_RE.match(s)
    rest = s[m.end():] if m else s
    host = rest.split("/")[0].split("?")[0]
    if host and "." not in host:
        return True
    return False
