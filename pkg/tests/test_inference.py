"""Exact inference: factor algebra, elimination, and both engines."""

from __future__ import annotations

import itertools
from array import array

import pytest
from hypothesis import given, settings, strategies as st

from mebnkit import (
    EnumerationTooLargeError,
    Factor,
    ImpossibleEvidenceError,
    Query,
    SSBN,
    SSBNNode,
    apply_evidence,
    build_ssbn,
    elimination_order,
    parse_findings,
    parse_model,
    posterior_enumerate,
    posterior_ve,
)
from mebnkit.inference import factor_product, factor_sum_out
from mebnkit.model import RVInstance

from conftest import FIXTURE_NETWORKS, fixture_ssbn


def rv(name: str) -> RVInstance:
    return RVInstance(name, ("x",))


def chain_ssbn() -> SSBN:
    """A -> B -> C with uniform CPTs; used for ordering tests."""
    a, b, c = rv("A"), rv("B"), rv("C")
    nodes = (
        SSBNNode(a, ("T", "F"), (), array("d", [0.5, 0.5])),
        SSBNNode(b, ("T", "F"), (a,), array("d", [0.7, 0.3, 0.4, 0.6])),
        SSBNNode(c, ("T", "F"), (b,), array("d", [0.9, 0.1, 0.2, 0.8])),
    )
    return SSBN(nodes, {}, c)


# --------------------------------------------------------------------------
# apply_evidence.


def test_apply_evidence_slices_to_scalar():
    a = rv("A")
    factor = Factor((a,), (2,), array("d", [0.3, 0.7]))
    sliced = apply_evidence(factor, {a: 0})
    assert sliced.scope == ()
    assert list(sliced.table) == [0.3]


def test_apply_evidence_ignores_outside_scope():
    a = rv("A")
    factor = Factor((a,), (2,), array("d", [0.3, 0.7]))
    assert apply_evidence(factor, {rv("B"): 1}) == factor


def test_apply_evidence_selects_cpt_row():
    a, b = rv("A"), rv("B")
    cpt = Factor((a, b), (2, 2), array("d", [0.9, 0.1, 0.2, 0.8]))
    sliced = apply_evidence(cpt, {a: 1})
    assert sliced.scope == (b,)
    assert list(sliced.table) == [0.2, 0.8]


# --------------------------------------------------------------------------
# Elimination order.


def test_min_fill_on_chain():
    ssbn = chain_ssbn()
    assert [v.text() for v in elimination_order(ssbn, {rv("C")})] == ["A(x)", "B(x)"]


def test_single_node_order_is_empty():
    node = SSBNNode(rv("Solo"), ("T", "F"), (), array("d", [0.5, 0.5]))
    ssbn = SSBN((node,), {}, node.rv)
    assert elimination_order(ssbn, {node.rv}) == []


def test_order_is_deterministic(corpus_ssbn):
    keep = {corpus_ssbn.query} | set(corpus_ssbn.evidence)
    first = elimination_order(corpus_ssbn, keep)
    second = elimination_order(corpus_ssbn, keep)
    assert first == second
    assert len(first) == corpus_ssbn.n_nodes - len(keep)


# --------------------------------------------------------------------------
# Engines on the hand-built two-node chain (prior 0.3; likelihoods
# 0.8/0.1; positive evidence): P(cause | observation) = 24/31.


@pytest.mark.parametrize("engine", [posterior_ve, posterior_enumerate])
def test_two_node_chain_hand_value(engine):
    posterior = engine(fixture_ssbn("chain2"))
    assert abs(posterior.probabilities[0] - 24 / 31) <= 1e-9
    assert abs(posterior.probabilities[1] - 7 / 31) <= 1e-9


@pytest.mark.parametrize("engine", [posterior_ve, posterior_enumerate])
def test_three_node_chain_hand_value(engine):
    # P(A=T, C=T) = 0.3*(0.8*0.9 + 0.2*0.2) = 0.228
    # P(A=F, C=T) = 0.7*(0.1*0.9 + 0.9*0.2) = 0.189
    posterior = engine(fixture_ssbn("chain3"))
    assert abs(posterior.probabilities[0] - 76 / 139) <= 1e-9


@pytest.mark.parametrize("engine", [posterior_ve, posterior_enumerate])
def test_collider_hand_value(engine):
    # P(Left=T | Joint=T) = 0.4375 / 0.6 = 35/48
    posterior = engine(fixture_ssbn("vstructure"))
    assert abs(posterior.probabilities[0] - 35 / 48) <= 1e-9


@pytest.mark.parametrize("engine", [posterior_ve, posterior_enumerate])
def test_rules_network_hand_value(engine):
    # item_1 observed Heavy; items 2 and 3 latent with P(Heavy)=0.4 each.
    # COUNT >= 2 needs one more heavy item: 1 - 0.6^2 = 0.64.
    # P(High) = 0.64*0.95 + 0.36*0.6 = 0.824
    posterior = engine(fixture_ssbn("rules_multi"))
    assert abs(posterior.probabilities[0] - 0.824) <= 1e-9


@pytest.mark.parametrize("engine", [posterior_ve, posterior_enumerate])
def test_root_without_evidence_returns_prior(engine):
    posterior = engine(fixture_ssbn("prior_only"))
    assert posterior.probabilities == pytest.approx((0.35, 0.4, 0.25), abs=1e-12)


# --------------------------------------------------------------------------
# Error paths.

CONTRADICTION_MODEL = """
entity Thing
states Bool { T, F }
random Src(Thing) -> Bool
random Copy(Thing) -> Bool

mfrag Src {
  ovar x: Thing
  resident Src(x) { prior [1.0, 0.0] }
}

mfrag Copy {
  ovar x: Thing
  input Src(x)
  resident Copy(x) {
    table [Src(x)] {
      (T): [1.0, 0.0]
      (F): [0.0, 1.0]
    }
  }
}
"""


@pytest.mark.parametrize("engine", [posterior_ve, posterior_enumerate])
def test_contradictory_evidence_is_impossible(engine):
    theory = parse_model(CONTRADICTION_MODEL)
    findings = parse_findings("isA(x1, Thing)=True\nCopy(x1)=F", theory)
    ssbn = build_ssbn(theory, findings, Query("Src", ("x1",)))
    with pytest.raises(ImpossibleEvidenceError):
        engine(ssbn)


def test_enumeration_refuses_large_state_spaces():
    nodes = tuple(
        SSBNNode(RVInstance(f"N{i}", ("x",)), ("T", "F"), (), array("d", [0.5, 0.5]))
        for i in range(30)
    )
    ssbn = SSBN(nodes, {}, nodes[0].rv)
    with pytest.raises(EnumerationTooLargeError):
        posterior_enumerate(ssbn)
    # VE has no such cap: thirty independent roots are trivial for it
    assert posterior_ve(ssbn).probabilities == pytest.approx((0.5, 0.5))


# --------------------------------------------------------------------------
# Cross-engine and order-invariance properties.


@pytest.mark.parametrize("name", FIXTURE_NETWORKS)
def test_oracle_equivalence_on_fixture(name):
    ssbn = fixture_ssbn(name)
    ve = posterior_ve(ssbn).probabilities
    enum = posterior_enumerate(ssbn).probabilities
    assert max(abs(a - b) for a, b in zip(ve, enum)) <= 1e-9
    assert abs(sum(ve) - 1.0) <= 1e-9
    assert abs(sum(enum) - 1.0) <= 1e-9


def test_oracle_equivalence_on_corpus(corpus_ssbn):
    ve = posterior_ve(corpus_ssbn).probabilities
    enum = posterior_enumerate(corpus_ssbn).probabilities
    assert max(abs(a - b) for a, b in zip(ve, enum)) <= 1e-9


@pytest.mark.parametrize("name", FIXTURE_NETWORKS)
def test_order_invariance_on_fixture(name):
    ssbn = fixture_ssbn(name)
    keep = {ssbn.query} | set(ssbn.evidence)
    lex = posterior_ve(ssbn, order=elimination_order(ssbn, keep, "lex"))
    rev = posterior_ve(ssbn, order=elimination_order(ssbn, keep, "revlex"))
    assert max(
        abs(a - b) for a, b in zip(lex.probabilities, rev.probabilities)
    ) <= 1e-12


def test_order_invariance_on_corpus(corpus_ssbn):
    keep = {corpus_ssbn.query} | set(corpus_ssbn.evidence)
    lex = posterior_ve(corpus_ssbn, order=elimination_order(corpus_ssbn, keep, "lex"))
    rev = posterior_ve(corpus_ssbn, order=elimination_order(corpus_ssbn, keep, "revlex"))
    assert max(
        abs(a - b) for a, b in zip(lex.probabilities, rev.probabilities)
    ) <= 1e-12


@pytest.mark.parametrize("engine", [posterior_ve, posterior_enumerate])
def test_evidenced_query_returns_indicator(corpus_theory, corpus_findings, engine):
    ssbn = build_ssbn(corpus_theory, corpus_findings, Query("Weather", ("region_1",)))
    posterior = engine(ssbn)
    assert posterior.states == ("Clement", "Inclement")
    assert posterior.probabilities == (0.0, 1.0)


def test_irrelevant_evidence_leaves_posterior_unchanged(corpus_theory, corpus_findings, corpus_ssbn):
    from mebnkit import corpus as corpus_pkg

    base = posterior_ve(corpus_ssbn).probabilities
    text = corpus_pkg.findings_path("two_spills").read_text(encoding="utf-8") + (
        "isA(region_2, Region)=True\nWeather(region_2)=Clement\n"
    )
    findings = parse_findings(text, corpus_theory)
    ssbn = build_ssbn(corpus_theory, findings, Query("SeverityLevel", ("region_1",)))
    assert RVInstance("Weather", ("region_2",)) in ssbn.evidence
    extra = posterior_ve(ssbn).probabilities
    assert max(abs(a - b) for a, b in zip(base, extra)) <= 1e-12


# --------------------------------------------------------------------------
# Factor algebra against a brute-force reference.


def brute_product(a: Factor, b: Factor) -> dict[tuple, float]:
    scope = list(dict.fromkeys(a.scope + b.scope))
    cards = {}
    for f in (a, b):
        cards.update(zip(f.scope, f.cards))
    out = {}
    for combo in itertools.product(*(range(cards[v]) for v in scope)):
        assign = dict(zip(scope, combo))

        def value(f):
            idx = 0
            for v, c in zip(f.scope, f.cards):
                idx = idx * c + assign[v]
            return f.table[idx]

        out[tuple(sorted((v.text(), s) for v, s in assign.items()))] = value(a) * value(b)
    return out


def factor_entries(f: Factor) -> dict[tuple, float]:
    out = {}
    for combo in itertools.product(*(range(c) for c in f.cards)):
        idx = 0
        for c, s in zip(f.cards, combo):
            idx = idx * c + s
        key = tuple(sorted((v.text(), s) for v, s in zip(f.scope, combo)))
        out[key] = f.table[idx]
    return out


# one cardinality per variable so any two generated factors are consistent
_CARD_OF = {"A": 2, "B": 3, "C": 2}


def _size(cards) -> int:
    n = 1
    for c in cards:
        n *= c
    return n


def _factor_from_scope(names: list[str]):
    scope = tuple(rv(n) for n in names)
    cards = tuple(_CARD_OF[n] for n in names)
    return st.lists(
        st.floats(0.0, 1.0, allow_nan=False),
        min_size=_size(cards),
        max_size=_size(cards),
    ).map(lambda vals: Factor(scope, cards, array("d", vals)))


_small_factors = (
    st.integers(1, 3)
    .flatmap(lambda n: st.permutations(["A", "B", "C"]).map(lambda p: list(p)[:n]))
    .flatmap(_factor_from_scope)
)


@settings(max_examples=60, deadline=None)
@given(a=_small_factors, b=_small_factors)
def test_factor_product_matches_bruteforce(a, b):
    product = factor_product(a, b)
    assert factor_entries(product) == brute_product(a, b)
    # commutativity up to scope order
    flipped = factor_product(b, a)
    assert factor_entries(flipped) == factor_entries(product)


@settings(max_examples=60, deadline=None)
@given(f=_small_factors)
def test_sum_out_matches_bruteforce(f):
    var = f.scope[0]
    summed = factor_sum_out(f, var)
    entries = factor_entries(f)
    expected = {}
    for key, value in entries.items():
        reduced = tuple(kv for kv in key if kv[0] != var.text())
        expected[reduced] = expected.get(reduced, 0.0) + value
    got = factor_entries(summed)
    assert set(got) == set(expected)
    for key in got:
        assert got[key] == pytest.approx(expected[key], abs=1e-12)


def test_elimination_order_rejects_unknown_tie_break(corpus_ssbn):
    with pytest.raises(ValueError):
        elimination_order(corpus_ssbn, {corpus_ssbn.query}, tie_break="random")


def test_cpt_row_helper(corpus_ssbn):
    severity = corpus_ssbn.node_map[RVInstance("SeverityLevel", ("region_1",))]
    assert severity.n_rows == 64
    for i in range(severity.n_rows):
        row = severity.cpt_row(i)
        assert len(row) == 3
        assert abs(sum(row) - 1.0) <= 1e-9


def test_concurrent_queries_on_shared_ssbn(corpus_ssbn):
    from concurrent.futures import ThreadPoolExecutor

    expected = posterior_ve(corpus_ssbn).probabilities
    with ThreadPoolExecutor(max_workers=4) as pool:
        results = list(pool.map(lambda _: posterior_ve(corpus_ssbn).probabilities, range(16)))
    assert all(r == expected for r in results)


@pytest.mark.parametrize("engine", [posterior_ve, posterior_enumerate])
def test_binary_functor_hand_value(engine):
    # Battery observed Low; Hazard latent with P(Present)=0.2.
    # P(High) = 0.2*0.9 + 0.8*0.3 = 0.42
    ssbn = fixture_ssbn("patrol")
    assert ssbn.query.text() == "MissionRisk(robot_1,zone_1)"
    assert (ssbn.n_nodes, ssbn.n_edges) == (3, 2)
    posterior = engine(ssbn)
    assert abs(posterior.probabilities[0] - 0.42) <= 1e-9


@pytest.mark.parametrize("engine", [posterior_ve, posterior_enumerate])
def test_same_mfrag_resident_parent_hand_value(engine):
    # P(B=T) = 0.3*0.9 + 0.7*0.2 = 0.41, no evidence
    ssbn = fixture_ssbn("cascade")
    assert (ssbn.n_nodes, ssbn.n_edges) == (2, 1)
    posterior = engine(ssbn)
    assert abs(posterior.probabilities[0] - 0.41) <= 1e-9
