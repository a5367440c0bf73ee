from __future__ import annotations

from contextlib import contextmanager
from pathlib import Path

import pytest

from mebnkit import (
    FindingSet,
    MTheory,
    Query,
    SSBN,
    build_ssbn,
    entity_pool,
    parse_findings,
    parse_model,
    parse_query,
)
from mebnkit import corpus as corpus_pkg

FIXTURE_DIR = Path(__file__).parent / "fixtures"

#: Hand-authored small networks used for oracle cross-checks.
FIXTURE_NETWORKS = (
    "chain2",
    "chain3",
    "vstructure",
    "diamond",
    "rules_multi",
    "prior_only",
    "patrol",
    "cascade",
)


def pytest_addoption(parser):
    parser.addoption(
        "--regen-snapshots",
        action="store_true",
        default=False,
        help="rewrite the corpus posterior snapshots from the enumeration oracle",
    )


def load_fixture(name: str) -> tuple[MTheory, FindingSet, Query]:
    theory = parse_model(
        (FIXTURE_DIR / f"{name}.mtheory").read_text(), file=f"{name}.mtheory"
    )
    findings = parse_findings(
        (FIXTURE_DIR / f"{name}.findings").read_text(), theory, file=f"{name}.findings"
    )
    query = parse_query(
        (FIXTURE_DIR / f"{name}.query").read_text(),
        theory,
        entity_pool(findings, theory),
    )
    return theory, findings, query


def fixture_ssbn(name: str, **kwargs) -> SSBN:
    theory, findings, query = load_fixture(name)
    return build_ssbn(theory, findings, query, **kwargs)


@pytest.fixture(scope="session")
def corpus_theory() -> MTheory:
    path = corpus_pkg.model_path()
    return parse_model(path.read_text(encoding="utf-8"), file=str(path))


@pytest.fixture(scope="session")
def corpus_findings(corpus_theory) -> FindingSet:
    path = corpus_pkg.findings_path("two_spills")
    return parse_findings(path.read_text(encoding="utf-8"), corpus_theory, file=str(path))


@pytest.fixture(scope="session")
def corpus_query(corpus_theory, corpus_findings) -> Query:
    pool = entity_pool(corpus_findings, corpus_theory)
    return parse_query(corpus_pkg.query_text(), corpus_theory, pool)


@pytest.fixture()
def corpus_ssbn(corpus_theory, corpus_findings, corpus_query) -> SSBN:
    return build_ssbn(corpus_theory, corpus_findings, corpus_query)


def corpus_variant(corpus_theory, variant: str) -> tuple[FindingSet, Query]:
    path = corpus_pkg.findings_path(variant)
    findings = parse_findings(path.read_text(encoding="utf-8"), corpus_theory, file=str(path))
    query = parse_query(
        corpus_pkg.query_text(), corpus_theory, entity_pool(findings, corpus_theory)
    )
    return findings, query


def spill_findings(k: int, region: str = "region_1") -> str:
    """Structure-only findings text for k spills located in one region."""
    lines = [f"isA({region}, Region)=True"]
    for i in range(1, k + 1):
        lines.append(f"isA(spill_{i}, Spill)=True")
    for i in range(1, k + 1):
        lines.append(f"Location(spill_{i})={region}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Acceptance reporting: one PASS/FAIL line per criterion in the terminal
# summary, regardless of capture settings.

_ACCEPTANCE_RESULTS: list[tuple[int, str, bool]] = []


@contextmanager
def criterion(number: int, description: str):
    try:
        yield
    except BaseException:
        _ACCEPTANCE_RESULTS.append((number, description, False))
        raise
    _ACCEPTANCE_RESULTS.append((number, description, True))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, description, ok in sorted(_ACCEPTANCE_RESULTS):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {description}")
