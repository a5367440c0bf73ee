"""Local distributions: first-match rules and CPT synthesis."""

from __future__ import annotations

import itertools
from array import array

import pytest
from hypothesis import given, strategies as st

from mebnkit import ArityMismatchError, RowCoverageError, match_rule, synthesize_cpt
from mebnkit.model import (
    AllAtom,
    And,
    AnyAtom,
    CountAtom,
    Or,
    ResidentNodeSpec,
    RVInstance,
    Rule,
    RulesDistribution,
    resident_spec,
)

V_HIGH = (0.9, 0.08, 0.02)
V_ELSE = (0.05, 0.25, 0.7)

THICK_AND_LARGE = RulesDistribution(
    (
        Rule(
            And((AnyAtom("Thickness", "Thick"), AnyAtom("EstimatedSize", "Large"))),
            V_HIGH,
        ),
    ),
    V_ELSE,
)


def rv(functor: str, *args: str) -> RVInstance:
    return RVInstance(functor, args)


def test_match_rule_two_spill_configuration():
    config = {
        rv("Thickness", "spill_1"): "Thick",
        rv("EstimatedSize", "spill_1"): "Large",
        rv("Thickness", "spill_2"): "Thin",
        rv("EstimatedSize", "spill_2"): "Small",
    }
    assert match_rule(THICK_AND_LARGE, config) == V_HIGH


def test_match_rule_empty_parent_set_any_is_false():
    assert match_rule(THICK_AND_LARGE, {}) == V_ELSE


def test_match_rule_empty_parent_set_all_is_true():
    dist = RulesDistribution((Rule(AllAtom("Thickness", "Thick"), V_HIGH),), V_ELSE)
    assert match_rule(dist, {}) == V_HIGH


def test_match_rule_count_over_empty_set_is_zero():
    dist = RulesDistribution(
        (
            Rule(CountAtom("Thickness", "Thick", 0), V_HIGH),
            Rule(CountAtom("Thickness", "Thick", 1), (1.0, 0.0, 0.0)),
        ),
        V_ELSE,
    )
    assert match_rule(dist, {}) == V_HIGH  # COUNT >= 0 holds vacuously


def test_match_rule_first_match_wins():
    dist = RulesDistribution(
        (
            Rule(AnyAtom("Thickness", "Thick"), (1.0, 0.0, 0.0)),
            Rule(AnyAtom("Thickness", "Thick"), (0.0, 1.0, 0.0)),
        ),
        V_ELSE,
    )
    assert match_rule(dist, {rv("Thickness", "s"): "Thick"}) == (1.0, 0.0, 0.0)


# --------------------------------------------------------------------------
# CPT synthesis.


def severity_parents(k: int) -> list[RVInstance]:
    spills = [f"spill_{i}" for i in range(1, k + 1)]
    return (
        [rv("Thickness", s) for s in spills]
        + [rv("EstimatedSize", s) for s in spills]
        + [rv("SpreadSpeed", s) for s in spills]
    )


def rows_of(cpt: array, n_states: int) -> list[tuple[float, ...]]:
    return [
        tuple(cpt[i * n_states:(i + 1) * n_states]) for i in range(len(cpt) // n_states)
    ]


def naive_rule_sweep(theory, dist, parents) -> list[tuple[float, ...]]:
    """Independent re-evaluation: enumerate configurations directly (last
    parent fastest) and apply first-match semantics via match_rule."""
    spaces = [theory.signature(p.functor).state_space.states for p in parents]
    out = []
    for combo in itertools.product(*spaces):
        out.append(match_rule(dist, dict(zip(parents, combo))))
    return out


def test_spreadspeed_table_passthrough(corpus_theory):
    res = resident_spec(corpus_theory, "SpreadSpeed")
    parents = [rv("Weather", "region_1"), rv("Currents", "region_1")]
    cpt = synthesize_cpt(corpus_theory, res, parents)
    assert rows_of(cpt, 2) == [
        (0.6, 0.4),
        (0.2, 0.8),
        (0.9, 0.1),
        (0.5, 0.5),
    ]


def test_severity_rules_two_spills_has_64_rows(corpus_theory):
    res = resident_spec(corpus_theory, "SeverityLevel")
    parents = severity_parents(2)
    cpt = synthesize_cpt(corpus_theory, res, parents)
    rows = rows_of(cpt, 3)
    assert len(rows) == 64
    assert rows == naive_rule_sweep(corpus_theory, res.distribution, parents)


def test_severity_rules_empty_parent_set(corpus_theory):
    res = resident_spec(corpus_theory, "SeverityLevel")
    cpt = synthesize_cpt(corpus_theory, res, [])
    assert rows_of(cpt, 3) == [(0.05, 0.25, 0.7)]  # vacuous ANY -> ELSE


def test_table_arity_mismatch(corpus_theory):
    res = resident_spec(corpus_theory, "SpreadSpeed")
    parents = [rv("Weather", "region_1"), rv("Currents", "region_1"), rv("Weather", "region_2")]
    with pytest.raises(ArityMismatchError):
        synthesize_cpt(corpus_theory, res, parents)


def test_table_row_coverage_error(corpus_theory):
    from mebnkit.model import TableDistribution

    res = resident_spec(corpus_theory, "SpreadSpeed")
    partial = TableDistribution(res.distribution.parents, res.distribution.rows[:3])
    broken = ResidentNodeSpec(res.term, res.parents, partial)
    with pytest.raises(RowCoverageError):
        synthesize_cpt(corpus_theory, broken, [rv("Weather", "r"), rv("Currents", "r")])


def test_synthesized_rows_are_normalized(corpus_theory):
    res = resident_spec(corpus_theory, "SeverityLevel")
    cpt = synthesize_cpt(corpus_theory, res, severity_parents(3))
    for row in rows_of(cpt, 3):
        assert abs(sum(row) - 1.0) <= 1e-9
        assert all(p >= 0.0 for p in row)


def assignments(parents, spaces):
    """Map each joint assignment (as a frozenset of pairs) to its row index."""
    index = {}
    for i, combo in enumerate(itertools.product(*spaces)):
        index[frozenset(zip(parents, combo))] = i
    return index


def test_rules_synthesis_is_permutation_stable(corpus_theory):
    res = resident_spec(corpus_theory, "SeverityLevel")
    order_a = severity_parents(2)
    order_b = [order_a[i] for i in (1, 0, 3, 2, 5, 4)]  # swap instances per functor
    cpt_a = rows_of(synthesize_cpt(corpus_theory, res, order_a), 3)
    cpt_b = rows_of(synthesize_cpt(corpus_theory, res, order_b), 3)
    spaces_a = [corpus_theory.signature(p.functor).state_space.states for p in order_a]
    spaces_b = [corpus_theory.signature(p.functor).state_space.states for p in order_b]
    index_a = assignments(order_a, spaces_a)
    index_b = assignments(order_b, spaces_b)
    for key, ia in index_a.items():
        assert cpt_a[ia] == cpt_b[index_b[key]]


def test_rules_and_table_agree_for_single_instances():
    """With one grounded instance per parent functor, a rule list encoding
    a two-parent boolean function equals the equivalent table."""
    from mebnkit import parse_model

    theory = parse_model(
        """
        entity Thing
        states Bool { T, F }
        random A(Thing) -> Bool
        random B(Thing) -> Bool
        random ViaTable(Thing) -> Bool
        random ViaRules(Thing) -> Bool

        mfrag A {
          ovar x: Thing
          resident A(x) { prior [0.5, 0.5] }
        }
        mfrag B {
          ovar x: Thing
          resident B(x) { prior [0.5, 0.5] }
        }
        mfrag ViaTable {
          ovar x: Thing
          input A(x)
          input B(x)
          resident ViaTable(x) {
            table [A(x), B(x)] {
              (T, T): [0.9, 0.1]
              (T, F): [0.8, 0.2]
              (F, T): [0.3, 0.7]
              (F, F): [0.2, 0.8]
            }
          }
        }
        mfrag ViaRules {
          ovar x: Thing
          input A(x)
          input B(x)
          resident ViaRules(x) {
            rules {
              if ALL(A, T) AND ALL(B, T): [0.9, 0.1]
              if ALL(A, T): [0.8, 0.2]
              if ALL(B, T): [0.3, 0.7]
              else: [0.2, 0.8]
            }
          }
        }
        """
    )
    parents = [rv("A", "x1"), rv("B", "x1")]
    via_table = synthesize_cpt(theory, resident_spec(theory, "ViaTable"), parents)
    via_rules = synthesize_cpt(theory, resident_spec(theory, "ViaRules"), parents)
    assert list(via_table) == list(via_rules)


# --------------------------------------------------------------------------
# Totality: every configuration yields exactly one vector.

_atoms = st.builds(
    lambda kind, functor, state, k: (
        AnyAtom(functor, state)
        if kind == 0
        else AllAtom(functor, state)
        if kind == 1
        else CountAtom(functor, state, k)
    ),
    st.integers(0, 2),
    st.sampled_from(["P", "Q"]),
    st.sampled_from(["T", "F"]),
    st.integers(0, 3),
)

_conditions = st.recursive(
    _atoms,
    lambda sub: st.builds(
        lambda op, parts: And(tuple(parts)) if op else Or(tuple(parts)),
        st.booleans(),
        st.lists(sub, min_size=2, max_size=3),
    ),
    max_leaves=6,
)


@given(
    rules=st.lists(
        st.builds(Rule, _conditions, st.just((1.0, 0.0))), min_size=0, max_size=4
    ),
    states=st.lists(st.sampled_from(["T", "F"]), min_size=0, max_size=5),
)
def test_match_rule_is_total(rules, states):
    dist = RulesDistribution(tuple(rules), (0.0, 1.0))
    config = {rv("P", f"i{n}"): s for n, s in enumerate(states)}
    result = match_rule(dist, config)
    assert result in [r.probabilities for r in rules] + [dist.otherwise]
