"""Access to the bundled example specs and their expected labels."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .model import MetricSpec


def corpus_dir() -> Path:
    return Path(str(resources.files("lolight3") / "corpus"))


def manifest() -> dict:
    with open(corpus_dir() / "manifest.json", encoding="utf-8") as fh:
        return json.load(fh)


def corpus_path(name: str) -> Path:
    entry = manifest().get(name)
    if entry is None:
        raise KeyError(f"no bundled spec named {name!r}")
    return corpus_dir() / entry["file"]


def load_corpus() -> dict[str, tuple[MetricSpec, dict]]:
    """name -> (spec, expected labels), in manifest order."""
    out = {}
    for name, entry in manifest().items():
        out[name] = (MetricSpec.load(corpus_dir() / entry["file"]), entry)
    return out


__all__ = ["corpus_dir", "corpus_path", "load_corpus", "manifest"]
