"""Bundled canonical inputs used by the acceptance suite and the docs."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

NAMES = ("trivial", "dinf", "z2z3", "f2", "zxz2", "z2z2", "zz")


def path(name: str) -> Path:
    """Filesystem path of a bundled .gog input (e.g. ``path("dinf")``)."""
    name = name.removesuffix(".gog")
    if name not in NAMES:
        raise KeyError(f"unknown corpus input {name!r}; available: {', '.join(NAMES)}")
    return Path(str(resources.files(__package__).joinpath(f"{name}.gog")))


def text(name: str) -> str:
    return path(name).read_text()
