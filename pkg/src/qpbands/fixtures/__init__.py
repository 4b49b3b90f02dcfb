"""Bundled integral fixtures for tests, examples, and the acceptance suite."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

__all__ = ["fixture_path", "available_fixtures"]


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled fixture (e.g. ``hchain_gamma.kfcidump``)."""
    base = resources.files(__name__)
    path = Path(str(base / name))
    if not path.exists():
        raise FileNotFoundError(f"no bundled fixture named {name!r}")
    return path


def available_fixtures() -> list[str]:
    base = Path(str(resources.files(__name__)))
    return sorted(p.name for p in base.glob("*.kfcidump"))
