"""Bundled oil-spill corpus: model, findings variants, query, snapshots."""

from __future__ import annotations

from importlib.resources import files
from pathlib import Path

MODEL = "oil_spill.mtheory"
QUERY = "severity.query"
FINDINGS = {
    "one_spill": "one_spill.findings",
    "two_spills": "two_spills.findings",
    "three_spills": "three_spills.findings",
}


def corpus_path(name: str) -> Path:
    """Filesystem path of a corpus file by name."""
    path = Path(str(files(__name__).joinpath(name)))
    if not path.exists():
        raise FileNotFoundError(f"no corpus file named {name!r}")
    return path


def model_path() -> Path:
    return corpus_path(MODEL)


def findings_path(variant: str = "two_spills") -> Path:
    return corpus_path(FINDINGS[variant])


def query_text() -> str:
    return corpus_path(QUERY).read_text(encoding="utf-8").strip()


def snapshot_path(variant: str = "two_spills") -> Path:
    # no existence check: the regeneration flow writes this path
    return Path(str(files(__name__).joinpath(f"{variant}.posterior.snapshot")))
