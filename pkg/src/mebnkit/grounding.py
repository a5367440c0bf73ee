"""Grounding: instantiate an MTheory against findings into an SSBN.

Construction chains backward from the query instance and from every
evidence instance: each random-variable instance is bound to its home
MFrag, the remaining ordinary variables are enumerated over the entity
pool subject to the context constraints, the parents that enumeration
produces are instantiated recursively, and the node's CPT is synthesized
over those actual parents.  Barren nodes (neither query, nor evidence,
nor an ancestor of either) are pruned at the end; pruning never changes
the query posterior.

The result is deterministic: identical inputs produce identical SSBNs,
including node order (a recorded topological order: parents always
precede children) and CPT row order.  Everything here is a pure
function of immutable inputs, so concurrent grounding jobs are safe.
"""

from __future__ import annotations

import itertools
from array import array
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Callable, Mapping

from . import lpd
from .errors import (
    DependencyCycleError,
    GroundingError,
    GroundingExplosionError,
    UnresolvedQueryError,
)
from .model import (
    ContextSpec,
    EntityInstance,
    EntityPool,
    FindingSet,
    IsAContext,
    MFrag,
    MTheory,
    Query,
    ResidentNodeSpec,
    RVInstance,
    entity_pool,
    home_mfrag,
)

#: Hard ceiling on instantiated nodes; grounding fails loudly beyond it.
DEFAULT_NODE_CAP = 10_000


class ContextValue(Enum):
    TRUE = "True"
    FALSE = "False"
    ABSURD = "Absurd"


#: Assignment of entity instances to an MFrag's ordinary variables.
Binding = dict[str, EntityInstance]

WarnSink = Callable[[str], None]


@dataclass(frozen=True)
class SSBNNode:
    """One grounded random variable with its synthesized CPT.

    ``cpt`` is flat and row-major over (parents..., self) with the own
    state varying fastest: one probability row per joint parent-state
    configuration, last parent fastest between rows.
    """

    rv: RVInstance
    states: tuple[str, ...]
    parents: tuple[RVInstance, ...]
    cpt: array

    def cpt_row(self, index: int) -> tuple[float, ...]:
        n = len(self.states)
        return tuple(self.cpt[index * n:(index + 1) * n])

    @property
    def n_rows(self) -> int:
        return len(self.cpt) // len(self.states)


@dataclass(frozen=True)
class SSBN:
    """A grounded, situation-specific Bayesian network.

    ``nodes`` is a recorded topological order; ``evidence`` maps node
    instances to observed state names; ``warnings`` collects soft
    grounding diagnostics (e.g. context constraints that no finding
    resolves).
    """

    nodes: tuple[SSBNNode, ...]
    evidence: dict[RVInstance, str]
    query: RVInstance
    warnings: tuple[str, ...] = ()

    @cached_property
    def node_map(self) -> dict[RVInstance, SSBNNode]:
        return {n.rv: n for n in self.nodes}

    def edges(self) -> list[tuple[RVInstance, RVInstance]]:
        return [(p, n.rv) for n in self.nodes for p in n.parents]

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return sum(len(n.parents) for n in self.nodes)


def evaluate_context_node(
    spec: ContextSpec,
    binding: Mapping[str, EntityInstance],
    findings: FindingSet,
    theory: MTheory,
    pool: EntityPool | None = None,
    warn: WarnSink | None = None,
) -> ContextValue:
    """Three-valued context evaluation under a complete binding.

    isA constraints are True or False (the closed-world pool always
    knows instance types, so Absurd cannot arise).  Equality constraints
    are Absurd on type errors, True/False against a recorded finding,
    and False -- with an "unresolved context" warning -- when no finding
    resolves them.
    """
    if pool is None:
        pool = entity_pool(findings, theory)
    if isinstance(spec, IsAContext):
        inst = binding.get(spec.var)
        if inst is None:
            raise GroundingError(f"context variable {spec.var!r} is unbound")
        return ContextValue.TRUE if inst.type.name == spec.type_name else ContextValue.FALSE

    sig = theory.signature(spec.functor)
    if len(spec.args) != len(sig.arg_types):
        return ContextValue.ABSURD
    arg_names: list[str] = []
    for arg, expected in zip(spec.args, sig.arg_types):
        inst = binding.get(arg)
        if inst is None:
            raise GroundingError(f"context variable {arg!r} is unbound")
        if inst.type.name != expected.name:
            return ContextValue.ABSURD
        arg_names.append(inst.name)

    # the right-hand token may be a bound variable, a pool instance, or a
    # state literal; bindings win over same-named instances
    rhs = spec.rhs
    target = binding.get(rhs)
    if target is None:
        target = pool.get(rhs)
    if sig.is_entity_valued:
        if not isinstance(target, EntityInstance):
            return ContextValue.ABSURD
        if target.type.name != sig.range_type.name:
            return ContextValue.ABSURD
        expected_value = target.name
    else:
        if isinstance(target, EntityInstance) or rhs not in sig.state_space.states:
            return ContextValue.ABSURD
        expected_value = rhs

    recorded = findings.value_of(spec.functor, tuple(arg_names))
    if recorded is None:
        if warn is not None:
            warn(
                f"unresolved context {spec.functor}({','.join(arg_names)}) = {rhs}; treated as False"
            )
        return ContextValue.FALSE
    return ContextValue.TRUE if recorded == expected_value else ContextValue.FALSE


def enumerate_bindings(
    mfrag: MFrag,
    fixed: Mapping[str, EntityInstance],
    findings: FindingSet,
    theory: MTheory,
    pool: EntityPool | None = None,
    warn: WarnSink | None = None,
) -> list[Binding]:
    """All completions of ``fixed`` under which every context node is True.

    Deterministic order: candidates per variable sorted by instance
    name, with ordinary-variable declaration order as the major key.
    """
    if pool is None:
        pool = entity_pool(findings, theory)
    free = [ov for ov in mfrag.ovars if ov.name not in fixed]
    candidates = [pool.of_type(ov.type.name) for ov in free]
    results: list[Binding] = []
    for combo in itertools.product(*candidates):
        binding: Binding = dict(fixed)
        for ov, inst in zip(free, combo):
            binding[ov.name] = inst
        if all(
            evaluate_context_node(ctx, binding, findings, theory, pool, warn)
            is ContextValue.TRUE
            for ctx in mfrag.contexts
        ):
            results.append(binding)
    return results


def _resident_in(mfrag: MFrag, functor: str) -> ResidentNodeSpec:
    for res in mfrag.residents:
        if res.term.functor == functor:
            return res
    raise GroundingError(f"functor {functor!r} has no resident declaration")  # pragma: no cover


def build_ssbn(
    theory: MTheory,
    findings: FindingSet,
    query: Query,
    *,
    node_cap: int = DEFAULT_NODE_CAP,
    prune: bool = True,
) -> SSBN:
    """Ground the theory against the findings for one query.

    Raises :class:`UnresolvedQueryError` when the query does not resolve
    against the pool, :class:`DependencyCycleError` on grounded cycles,
    and :class:`GroundingExplosionError` past ``node_cap`` nodes.
    """
    pool = entity_pool(findings, theory)
    warnings: list[str] = []

    def warn(message: str) -> None:
        if message not in warnings:
            warnings.append(message)

    if not theory.has_functor(query.functor):
        raise UnresolvedQueryError(f"unknown functor {query.functor!r}")
    qsig = theory.signature(query.functor)
    if qsig.is_entity_valued:
        raise UnresolvedQueryError(f"{query.functor!r} is entity-valued and cannot be queried")
    if len(query.args) != len(qsig.arg_types):
        raise UnresolvedQueryError(
            f"{query.functor!r} expects {len(qsig.arg_types)} arguments, got {len(query.args)}"
        )
    for arg, expected in zip(query.args, qsig.arg_types):
        inst = pool.get(arg)
        if inst is None:
            raise UnresolvedQueryError(f"unknown entity instance {arg!r}")
        if inst.type.name != expected.name:
            raise UnresolvedQueryError(
                f"argument {arg!r} has type {inst.type.name!r}, "
                f"{query.functor!r} expects {expected.name!r}"
            )
    query_rv = RVInstance(query.functor, query.args)

    nodes: dict[RVInstance, SSBNNode] = {}  # insertion order is topological
    in_progress: set[RVInstance] = set()

    def instantiate(rv: RVInstance) -> None:
        if rv in nodes:
            return
        if rv in in_progress:
            raise DependencyCycleError(f"grounded dependency cycle through {rv.text()}")
        if len(nodes) + len(in_progress) >= node_cap:
            raise GroundingExplosionError(
                f"grounding exceeds the node cap of {node_cap} instances"
            )
        in_progress.add(rv)
        try:
            mfrag = home_mfrag(theory, rv.functor)
            res = _resident_in(mfrag, rv.functor)
            sig = theory.signature(rv.functor)
            fixed: Binding = {}
            for ovar_name, inst_name, expected in zip(res.term.args, rv.args, sig.arg_types):
                inst = pool.get(inst_name)
                if inst is None:
                    raise GroundingError(f"{rv.text()}: unknown entity instance {inst_name!r}")
                if inst.type.name != expected.name:
                    raise GroundingError(
                        f"{rv.text()}: argument {inst_name!r} has type {inst.type.name!r}, "
                        f"expected {expected.name!r}"
                    )
                fixed[ovar_name] = inst
            completions = enumerate_bindings(mfrag, fixed, findings, theory, pool, warn)
            parents: list[RVInstance] = []
            for term in res.parents:
                for binding in completions:
                    parent = RVInstance(term.functor, tuple(binding[a].name for a in term.args))
                    if parent not in parents:
                        parents.append(parent)
            for parent in parents:
                instantiate(parent)
            cpt = lpd.synthesize_cpt(theory, res, parents)
            nodes[rv] = SSBNNode(rv, sig.state_space.states, tuple(parents), cpt)
        finally:
            in_progress.discard(rv)

    instantiate(query_rv)

    evidence: dict[RVInstance, str] = {}
    for finding in findings:
        if finding.is_isa:
            continue
        sig = theory.signature(finding.functor)
        if sig.is_entity_valued:
            continue
        if finding.value not in sig.state_space.states:
            raise GroundingError(
                f"finding {finding.text()}: unknown state {finding.value!r}"
            )
        rv = RVInstance(finding.functor, finding.args)
        instantiate(rv)
        evidence.setdefault(rv, finding.value)

    ssbn = SSBN(tuple(nodes.values()), evidence, query_rv, tuple(warnings))
    return prune_barren(ssbn) if prune else ssbn


def prune_barren(ssbn: SSBN) -> SSBN:
    """Drop every node that is neither query, nor evidence, nor an
    ancestor of either; the query posterior is unchanged."""
    keep: set[RVInstance] = set()
    stack: list[RVInstance] = [ssbn.query, *ssbn.evidence]
    while stack:
        rv = stack.pop()
        if rv in keep:
            continue
        keep.add(rv)
        stack.extend(ssbn.node_map[rv].parents)
    nodes = tuple(n for n in ssbn.nodes if n.rv in keep)
    return SSBN(nodes, dict(ssbn.evidence), ssbn.query, ssbn.warnings)
