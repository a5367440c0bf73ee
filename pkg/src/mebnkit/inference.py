"""Exact inference on an SSBN.

Two engines answer the same question:

* :func:`posterior_ve` -- sum-product variable elimination over the
  CPT factors with evidence applied, normalized once at the end.
* :func:`posterior_enumerate` -- full joint enumeration, refused above
  a configurable configuration cap.  Slower, but so simple it serves as
  the verification oracle for the VE engine.

Factor tables are dense, row-major over the scope (last variable
fastest), which makes every operation bit-reproducible.  All operations
are pure over immutable SSBNs; independent queries may run concurrently.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from typing import Iterable, Mapping

from . import _kernels
from .errors import EnumerationTooLargeError, ImpossibleEvidenceError
from .grounding import SSBN, SSBNNode
from .model import RVInstance

#: Normalizers at or below this are treated as impossible evidence.
MIN_NORMALIZER = 1e-300

#: Largest joint state space posterior_enumerate will sweep.
DEFAULT_ENUMERATION_CAP = 1 << 24


@dataclass(frozen=True)
class Factor:
    """Nonnegative table over the joint state space of ``scope``."""

    scope: tuple[RVInstance, ...]
    cards: tuple[int, ...]
    table: array  # 'd', row-major, len == prod(cards)


@dataclass(frozen=True)
class Posterior:
    rv: RVInstance
    states: tuple[str, ...]
    probabilities: tuple[float, ...]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.states, self.probabilities))

    @property
    def argmax_state(self) -> str:
        best = max(range(len(self.states)), key=lambda i: self.probabilities[i])
        return self.states[best]


def _strides(cards: Iterable[int]) -> list[int]:
    cards = list(cards)
    strides = [0] * len(cards)
    acc = 1
    for i in reversed(range(len(cards))):
        strides[i] = acc
        acc *= cards[i]
    return strides


def node_factor(ssbn: SSBN, node: SSBNNode) -> Factor:
    """The node's CPT as a factor over (parents..., node)."""
    scope = node.parents + (node.rv,)
    cards = tuple(len(ssbn.node_map[p].states) for p in node.parents) + (len(node.states),)
    return Factor(scope, cards, node.cpt)


def factor_product(a: Factor, b: Factor) -> Factor:
    """Pointwise product on the union scope (a's variables first)."""
    in_a = set(a.scope)
    scope = a.scope + tuple(v for v in b.scope if v not in in_a)
    card_of = dict(zip(a.scope, a.cards))
    card_of.update(zip(b.scope, b.cards))
    cards = tuple(card_of[v] for v in scope)
    stride_a = dict(zip(a.scope, _strides(a.cards)))
    stride_b = dict(zip(b.scope, _strides(b.cards)))
    table = _kernels.product(
        array("q", cards),
        array("q", [stride_a.get(v, 0) for v in scope]),
        array("q", [stride_b.get(v, 0) for v in scope]),
        a.table,
        b.table,
    )
    return Factor(scope, cards, table)


def _axis_split(cards: tuple[int, ...], axis: int) -> tuple[int, int]:
    n_major = 1
    for c in cards[:axis]:
        n_major *= c
    n_minor = 1
    for c in cards[axis + 1:]:
        n_minor *= c
    return n_major, n_minor


def factor_sum_out(factor: Factor, var: RVInstance) -> Factor:
    axis = factor.scope.index(var)
    n_major, n_minor = _axis_split(factor.cards, axis)
    table = _kernels.sum_axis(n_major, factor.cards[axis], n_minor, factor.table)
    return Factor(
        factor.scope[:axis] + factor.scope[axis + 1:],
        factor.cards[:axis] + factor.cards[axis + 1:],
        table,
    )


def factor_reduce(factor: Factor, var: RVInstance, state: int) -> Factor:
    axis = factor.scope.index(var)
    n_major, n_minor = _axis_split(factor.cards, axis)
    table = _kernels.slice_axis(n_major, factor.cards[axis], n_minor, state, factor.table)
    return Factor(
        factor.scope[:axis] + factor.scope[axis + 1:],
        factor.cards[:axis] + factor.cards[axis + 1:],
        table,
    )


def apply_evidence(factor: Factor, evidence: Mapping[RVInstance, int]) -> Factor:
    """Slice every evidenced variable out of the factor's scope.

    ``evidence`` maps instances to state indices; variables outside the
    scope are ignored, so the same map can be applied to every factor.
    """
    out = factor
    for var in factor.scope:
        if var in evidence:
            out = factor_reduce(out, var, evidence[var])
    return out


def moral_graph(ssbn: SSBN) -> dict[RVInstance, set[RVInstance]]:
    """Undirected adjacency: parent-child edges plus married parents."""
    neighbors: dict[RVInstance, set[RVInstance]] = {n.rv: set() for n in ssbn.nodes}
    for node in ssbn.nodes:
        family = node.parents + (node.rv,)
        for i, u in enumerate(family):
            for v in family[i + 1:]:
                neighbors[u].add(v)
                neighbors[v].add(u)
    return neighbors


def elimination_order(
    ssbn: SSBN, keep: set[RVInstance], tie_break: str = "lex"
) -> list[RVInstance]:
    """Greedy min-fill order over the moral graph, excluding ``keep``.

    Ties break on the lexicographic canonical node name; pass
    ``tie_break="revlex"`` to break them on the reversed name instead
    (used to exercise order-invariance of the VE engine).
    """
    if tie_break == "lex":
        name_key = lambda rv: rv.text()  # noqa: E731
    elif tie_break == "revlex":
        name_key = lambda rv: rv.text()[::-1]  # noqa: E731
    else:
        raise ValueError(f"unknown tie_break {tie_break!r}")

    neighbors = moral_graph(ssbn)
    candidates = {n.rv for n in ssbn.nodes} - keep

    def fill_cost(rv: RVInstance) -> int:
        around = list(neighbors[rv])
        cost = 0
        for i, u in enumerate(around):
            for v in around[i + 1:]:
                if v not in neighbors[u]:
                    cost += 1
        return cost

    order: list[RVInstance] = []
    while candidates:
        best = min(candidates, key=lambda rv: (fill_cost(rv), name_key(rv)))
        around = list(neighbors[best])
        for i, u in enumerate(around):
            for v in around[i + 1:]:
                neighbors[u].add(v)
                neighbors[v].add(u)
        for u in around:
            neighbors[u].discard(best)
        del neighbors[best]
        candidates.remove(best)
        order.append(best)
    return order


def _evidence_indices(ssbn: SSBN) -> dict[RVInstance, int]:
    return {
        rv: ssbn.node_map[rv].states.index(state) for rv, state in ssbn.evidence.items()
    }


def _normalized(ssbn: SSBN, values: Iterable[float]) -> Posterior:
    vec = list(values)
    total = 0.0
    for v in vec:
        total += v
    if total <= MIN_NORMALIZER:
        raise ImpossibleEvidenceError(
            "evidence has zero probability under the model (normalizer underflow)"
        )
    node = ssbn.node_map[ssbn.query]
    return Posterior(ssbn.query, node.states, tuple(v / total for v in vec))


def posterior_ve(
    ssbn: SSBN, *, order: list[RVInstance] | None = None, tie_break: str = "lex"
) -> Posterior:
    """Query posterior by sum-product variable elimination.

    The result is invariant (to floating-point noise) under any valid
    elimination order; ``order`` overrides the default min-fill order.
    """
    ev_idx = _evidence_indices(ssbn)
    sliced = {rv: i for rv, i in ev_idx.items() if rv != ssbn.query}
    factors = [apply_evidence(node_factor(ssbn, n), sliced) for n in ssbn.nodes]
    if order is None:
        keep = {ssbn.query} | set(ssbn.evidence)
        order = elimination_order(ssbn, keep, tie_break)
    for var in order:
        bucket = [f for f in factors if var in f.scope]
        factors = [f for f in factors if var not in f.scope]
        combined = bucket[0]
        for f in bucket[1:]:
            combined = factor_product(combined, f)
        factors.append(factor_sum_out(combined, var))
    result = factors[0]
    for f in factors[1:]:
        result = factor_product(result, f)
    if result.scope != (ssbn.query,):
        leftover = [v.text() for v in result.scope if v != ssbn.query]
        raise ValueError(
            f"elimination order does not cover {', '.join(leftover)}; "
            "pass an order over every non-query, non-evidence node"
        )
    vec = list(result.table)
    if ssbn.query in ev_idx:
        observed = ev_idx[ssbn.query]
        vec = [v if i == observed else 0.0 for i, v in enumerate(vec)]
    return _normalized(ssbn, vec)


def posterior_enumerate(
    ssbn: SSBN, *, max_configs: int = DEFAULT_ENUMERATION_CAP
) -> Posterior:
    """Query posterior by full joint enumeration (the oracle engine).

    Sums the product of all CPT entries over every configuration of the
    unobserved variables; refuses when that space exceeds
    ``max_configs``.
    """
    index_of = {n.rv: i for i, n in enumerate(ssbn.nodes)}
    cards = array("q", [len(n.states) for n in ssbn.nodes])
    ev_idx = _evidence_indices(ssbn)

    free = [i for i, n in enumerate(ssbn.nodes) if n.rv not in ev_idx]
    total = 1
    for i in free:
        total *= cards[i]
        if total > max_configs:
            raise EnumerationTooLargeError(
                f"joint state space exceeds the enumeration cap of {max_configs} configurations"
            )

    base_config = array("q", [0] * len(ssbn.nodes))
    for rv, state in ev_idx.items():
        base_config[index_of[rv]] = state

    scope_vars: list[int] = []
    scope_strides: list[int] = []
    scope_offsets = array("q", [0] * (len(ssbn.nodes) + 1))
    tables = array("d")
    table_offsets = array("q", [0] * (len(ssbn.nodes) + 1))
    for i, node in enumerate(ssbn.nodes):
        scope = [index_of[p] for p in node.parents] + [i]
        local_cards = [cards[j] for j in scope]
        scope_vars.extend(scope)
        scope_strides.extend(_strides(local_cards))
        scope_offsets[i + 1] = len(scope_vars)
        tables.extend(node.cpt)
        table_offsets[i + 1] = len(tables)

    raw = _kernels.joint_marginal(
        cards,
        base_config,
        array("q", free),
        index_of[ssbn.query],
        array("q", scope_vars),
        array("q", scope_strides),
        scope_offsets,
        tables,
        table_offsets,
    )
    return _normalized(ssbn, raw)
