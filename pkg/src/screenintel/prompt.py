"""Prompt templates for the vision model."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .descparse import SECTIONS
from .errors import UnknownPromptVersion


@dataclass(frozen=True)
class PromptTemplate:
    version: str
    text: str
    required_sections: tuple[str, ...]


_VERSIONS = {"v1": "prompt_v1.txt"}


def build_prompt(version: str) -> PromptTemplate:
    """Load a shipped prompt version. v1 is the production prompt."""
    if version not in _VERSIONS:
        raise UnknownPromptVersion(version)
    text = resources.files("screenintel.data").joinpath(_VERSIONS[version]).read_text(encoding="utf-8")
    return PromptTemplate(version=version, text=text, required_sections=SECTIONS)
