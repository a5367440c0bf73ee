"""Local probability distribution evaluation and CPT synthesis.

Resident nodes declare either a TABLE (one authored row per joint
parent-state configuration) or RULES (an ordered first-match list whose
conditions quantify over the grounded parent instances).  RULES is what
makes variable parent counts well-defined: the same rule list produces a
CPT for one spill or for twenty.

Synthesized CPTs are flat ``array('d')`` tables, row-major over
(parent_1, ..., parent_k, node) with the node state varying fastest --
equivalently one probability row per parent configuration, where the
last parent varies fastest between consecutive rows.  That convention is
fixed globally so serialized output and oracle comparisons are stable.
"""

from __future__ import annotations

from array import array
from collections import defaultdict
from typing import Mapping, Sequence

from . import _kernels
from .errors import ArityMismatchError, RowCoverageError
from .model import (
    NORMALIZATION_TOL,
    AllAtom,
    And,
    AnyAtom,
    Condition,
    CountAtom,
    MFrag,
    MTheory,
    Or,
    ResidentNodeSpec,
    RulesDistribution,
    RVInstance,
    TableDistribution,
    Violation,
)

# RPN opcodes used when compiling conditions for the kernel sweep
_OP_AND = -1
_OP_OR = -2


def condition_atoms(condition: Condition) -> list[AnyAtom | AllAtom | CountAtom]:
    """All quantified atoms in the condition, left to right."""
    if isinstance(condition, (And, Or)):
        atoms: list[AnyAtom | AllAtom | CountAtom] = []
        for part in condition.parts:
            atoms.extend(condition_atoms(part))
        return atoms
    return [condition]


def _eval_condition(condition: Condition, by_functor: Mapping[str, list[str]]) -> bool:
    if isinstance(condition, And):
        return all(_eval_condition(p, by_functor) for p in condition.parts)
    if isinstance(condition, Or):
        return any(_eval_condition(p, by_functor) for p in condition.parts)
    states = by_functor.get(condition.functor, [])
    if isinstance(condition, AnyAtom):
        return condition.state in states
    if isinstance(condition, AllAtom):
        return all(s == condition.state for s in states)
    return sum(1 for s in states if s == condition.state) >= condition.minimum


def match_rule(
    dist: RulesDistribution, config: Mapping[RVInstance, str]
) -> tuple[float, ...]:
    """First-match rule semantics over one joint parent configuration.

    ``config`` assigns a state to every grounded parent instance.  Over an
    empty instance set ANY is false, ALL is true, and COUNT(...) is 0.
    Total: every configuration yields exactly one vector (ELSE catches
    the rest).
    """
    by_functor: dict[str, list[str]] = defaultdict(list)
    for rv, state in config.items():
        by_functor[rv.functor].append(state)
    for rule in dist.rules:
        if _eval_condition(rule.condition, by_functor):
            return rule.probabilities
    if dist.otherwise is None:
        raise ValueError("rules distribution has no ELSE vector; validate the theory first")
    return dist.otherwise


def _compile_rpn(condition: Condition, atom_ids: dict[tuple, int]) -> list[int]:
    if isinstance(condition, (And, Or)):
        op = _OP_AND if isinstance(condition, And) else _OP_OR
        tokens = _compile_rpn(condition.parts[0], atom_ids)
        for part in condition.parts[1:]:
            tokens.extend(_compile_rpn(part, atom_ids))
            tokens.append(op)
        return tokens
    key = _atom_key(condition)
    return [atom_ids[key]]


def _atom_key(atom: AnyAtom | AllAtom | CountAtom) -> tuple:
    kind = 0 if isinstance(atom, AnyAtom) else 1 if isinstance(atom, AllAtom) else 2
    minimum = atom.minimum if isinstance(atom, CountAtom) else 0
    return (kind, atom.functor, atom.state, minimum)


def _synthesize_rules(
    theory: MTheory,
    dist: RulesDistribution,
    grounded_parents: Sequence[RVInstance],
    n_states: int,
) -> array:
    group_order: list[str] = []
    for rv in grounded_parents:
        if rv.functor not in group_order:
            group_order.append(rv.functor)
    # declared-but-unpopulated parent functors still form (empty) groups so
    # that ALL stays vacuously true and ANY false for them
    for rule in dist.rules:
        for atom in condition_atoms(rule.condition):
            if atom.functor not in group_order:
                group_order.append(atom.functor)
    gid = {f: i for i, f in enumerate(group_order)}
    spaces = {f: theory.signature(f).state_space for f in group_order}

    cards = array("q", [len(spaces[rv.functor].states) for rv in grounded_parents])
    group_of = array("q", [gid[rv.functor] for rv in grounded_parents])
    group_sizes = array("q", [0] * len(group_order))
    for rv in grounded_parents:
        group_sizes[gid[rv.functor]] += 1
    max_card = max((len(s.states) for s in spaces.values()), default=1)

    atom_ids: dict[tuple, int] = {}
    for rule in dist.rules:
        for atom in condition_atoms(rule.condition):
            atom_ids.setdefault(_atom_key(atom), len(atom_ids))
    atom_kind = array("q", [0] * len(atom_ids))
    atom_group = array("q", [0] * len(atom_ids))
    atom_state = array("q", [0] * len(atom_ids))
    atom_min = array("q", [0] * len(atom_ids))
    for (kind, functor, state, minimum), idx in atom_ids.items():
        atom_kind[idx] = kind
        atom_group[idx] = gid[functor]
        atom_state[idx] = spaces[functor].index_of(state)
        atom_min[idx] = minimum

    rpn: list[int] = []
    rpn_offsets = array("q", [0] * (len(dist.rules) + 1))
    for i, rule in enumerate(dist.rules):
        rpn.extend(_compile_rpn(rule.condition, atom_ids))
        rpn_offsets[i + 1] = len(rpn)

    vectors = array("d")
    for rule in dist.rules:
        vectors.extend(rule.probabilities)
    if dist.otherwise is None:
        raise ValueError("rules distribution has no ELSE vector; validate the theory first")
    vectors.extend(dist.otherwise)

    return _kernels.rule_rows(
        cards,
        group_of,
        group_sizes,
        max_card,
        atom_kind,
        atom_group,
        atom_state,
        atom_min,
        array("q", rpn),
        rpn_offsets,
        vectors,
        n_states,
    )


def _synthesize_table(
    theory: MTheory,
    dist: TableDistribution,
    grounded_parents: Sequence[RVInstance],
    n_states: int,
    where: str,
) -> array:
    if len(grounded_parents) != len(dist.parents):
        raise ArityMismatchError(
            f"{where}: table declares {len(dist.parents)} parents but "
            f"{len(grounded_parents)} grounded parent instances were supplied"
        )
    for rv, term in zip(grounded_parents, dist.parents):
        if rv.functor != term.functor:
            raise ArityMismatchError(
                f"{where}: grounded parent {rv.text()} does not match declared parent {term.text()}"
            )
    spaces = [theory.signature(t.functor).state_space for t in dist.parents]
    cards = [len(s.states) for s in spaces]

    by_key: dict[tuple[str, ...], tuple[float, ...]] = {}
    for key, vec in dist.rows:
        by_key.setdefault(key, vec)  # first wins on (invalid) duplicates

    n_rows = 1
    for c in cards:
        n_rows *= c
    out = array("d", bytes(8 * n_rows * n_states))
    digits = [0] * len(cards)
    for row in range(n_rows):
        key = tuple(space.states[d] for space, d in zip(spaces, digits))
        try:
            vec = by_key[key]
        except KeyError:
            raise RowCoverageError(
                f"{where}: no row for parent configuration ({', '.join(key)})"
            ) from None
        out[row * n_states:(row + 1) * n_states] = array("d", vec)
        for ax in reversed(range(len(cards))):
            digits[ax] += 1
            if digits[ax] < cards[ax]:
                break
            digits[ax] = 0
    return out


def synthesize_cpt(
    theory: MTheory,
    resident: ResidentNodeSpec,
    grounded_parents: Sequence[RVInstance],
) -> array:
    """Concrete CPT for one resident-node instance over its actual parents.

    TABLE requires the grounded parents to correspond one-to-one, in
    order, with the declared parent terms; RULES accepts any number of
    instances per declared parent functor.
    """
    sig = theory.signature(resident.term.functor)
    if sig.state_space is None:
        raise ArityMismatchError(f"{resident.term.text()}: entity-valued functors have no CPT")
    n_states = len(sig.state_space.states)
    dist = resident.distribution
    where = resident.term.text()
    if isinstance(dist, TableDistribution):
        return _synthesize_table(theory, dist, grounded_parents, n_states, where)
    if isinstance(dist, RulesDistribution):
        return _synthesize_rules(theory, dist, grounded_parents, n_states)
    raise ArityMismatchError(f"{where}: resident node has no local distribution")


def _check_vector(
    vec: Sequence[float], n_states: int, where: str, out: list[Violation]
) -> None:
    if len(vec) != n_states:
        out.append(
            Violation(
                "bad-vector-length",
                f"probability vector has {len(vec)} entries, node has {n_states} states",
                where,
            )
        )
        return
    total = 0.0
    for p in vec:
        if p < 0.0:
            out.append(Violation("negative-probability", f"negative probability {p!r}", where))
        total += p
    if abs(total - 1.0) > NORMALIZATION_TOL:
        out.append(Violation("non-normalized-row", f"row sums to {total!r}", where))


def validate_distribution(
    theory: MTheory, mfrag: MFrag, resident: ResidentNodeSpec
) -> list[Violation]:
    """Structural checks for one resident node's local distribution."""
    out: list[Violation] = []
    where = f"mfrag {mfrag.name}, resident {resident.term.text()}"
    sig = theory.signature(resident.term.functor)
    if sig.state_space is None:
        return out
    n_states = len(sig.state_space.states)
    dist = resident.distribution

    if isinstance(dist, TableDistribution):
        spaces = []
        for term in dist.parents:
            if not theory.has_functor(term.functor) or theory.signature(term.functor).state_space is None:
                out.append(
                    Violation("bad-parent", f"table parent {term.text()} has no state space", where)
                )
                return out
            spaces.append(theory.signature(term.functor).state_space)
        seen: set[tuple[str, ...]] = set()
        for key, vec in dist.rows:
            if len(key) != len(spaces):
                out.append(
                    Violation(
                        "bad-row-key",
                        f"row key ({', '.join(key)}) has {len(key)} states, table has {len(spaces)} parents",
                        where,
                    )
                )
                continue
            ok = True
            for state, space in zip(key, spaces):
                if state not in space.states:
                    out.append(
                        Violation(
                            "unknown-row-state",
                            f"state {state!r} is not in state space {space.name!r}",
                            where,
                        )
                    )
                    ok = False
            if not ok:
                continue
            if key in seen:
                out.append(Violation("duplicate-row", f"row ({', '.join(key)}) given twice", where))
            seen.add(key)
            _check_vector(vec, n_states, where, out)
        expected = 1
        for space in spaces:
            expected *= len(space.states)
        if len(seen) < expected:
            out.append(
                Violation(
                    "missing-row",
                    f"table covers {len(seen)} of {expected} parent configurations",
                    where,
                )
            )
    elif isinstance(dist, RulesDistribution):
        parent_functors = {t.functor for t in resident.parents}
        for i, rule in enumerate(dist.rules):
            rwhere = f"{where}, rule {i + 1}"
            for atom in condition_atoms(rule.condition):
                if atom.functor not in parent_functors:
                    out.append(
                        Violation(
                            "non-parent-condition",
                            f"condition references {atom.functor!r}, which is not a declared parent",
                            rwhere,
                        )
                    )
                elif theory.has_functor(atom.functor):
                    space = theory.signature(atom.functor).state_space
                    if space is not None and atom.state not in space.states:
                        out.append(
                            Violation(
                                "unknown-atom-state",
                                f"state {atom.state!r} is not in state space {space.name!r}",
                                rwhere,
                            )
                        )
                if isinstance(atom, CountAtom) and atom.minimum < 0:
                    out.append(Violation("negative-count", "COUNT threshold must be >= 0", rwhere))
            _check_vector(rule.probabilities, n_states, rwhere, out)
        if dist.otherwise is None:
            out.append(Violation("missing-else", "rules list must end with an ELSE vector", where))
        else:
            _check_vector(dist.otherwise, n_states, f"{where}, else", out)
    return out
