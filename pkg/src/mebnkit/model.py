"""Object model for MEBN theories, findings, and queries.

An MTheory is a set of template fragments (MFrags) over typed entities.
Each MFrag declares ordinary variables (typed placeholders), context
constraints, input nodes (random variables resident elsewhere), and
resident nodes with local distributions.  Everything here is immutable
after construction and safe to share across threads; validation never
mutates.

Structural well-formedness is checked by :func:`validate_mtheory`, which
returns a report of violations rather than raising -- malformed models
are data to be reported, not programming errors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Union

from .errors import ConflictingTypeError, UnknownFunctorError

IDENTIFIER_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

#: Tolerance for "this probability vector sums to one" everywhere.
NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True, slots=True)
class EntityType:
    name: str


@dataclass(frozen=True, slots=True)
class EntityInstance:
    name: str
    type: EntityType


@dataclass(frozen=True, slots=True)
class StateSpace:
    name: str
    states: tuple[str, ...]

    def index_of(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise KeyError(f"state {state!r} not in state space {self.name!r}") from None


@dataclass(frozen=True, slots=True)
class RandomVariableSignature:
    """Functor declaration: argument entity types plus a range.

    The range is either a state space (chance variable) or an entity type
    (deterministic relation such as a location link, resolved from
    findings and never instantiated as a network node).
    """

    functor: str
    arg_types: tuple[EntityType, ...]
    state_space: StateSpace | None = None
    range_type: EntityType | None = None

    @property
    def is_entity_valued(self) -> bool:
        return self.range_type is not None


@dataclass(frozen=True, slots=True)
class OrdinaryVariable:
    name: str
    type: EntityType


@dataclass(frozen=True, slots=True)
class NodeTerm:
    """A functor applied to ordinary variables, e.g. ``Weather(r)``."""

    functor: str
    args: tuple[str, ...]

    def text(self) -> str:
        return f"{self.functor}({','.join(self.args)})"


@dataclass(frozen=True, slots=True)
class IsAContext:
    """Context constraint ``isA(var, Type)``."""

    var: str
    type_name: str


@dataclass(frozen=True, slots=True)
class EqualityContext:
    """Context constraint ``Functor(vars...) = rhs``.

    ``rhs`` is kept as a raw token: it may name an ordinary variable,
    an entity instance, or a state, and is resolved during grounding.
    """

    functor: str
    args: tuple[str, ...]
    rhs: str


ContextSpec = Union[IsAContext, EqualityContext]


# --------------------------------------------------------------------------
# Local distributions.  A TABLE enumerates one probability row per joint
# parent-state configuration; RULES is an ordered first-match list whose
# conditions quantify over however many parent instances grounding produces.

@dataclass(frozen=True, slots=True)
class AnyAtom:
    """True iff at least one grounded instance of ``functor`` is in ``state``."""

    functor: str
    state: str


@dataclass(frozen=True, slots=True)
class AllAtom:
    """True iff every grounded instance of ``functor`` is in ``state``.

    Vacuously true over an empty instance set.
    """

    functor: str
    state: str


@dataclass(frozen=True, slots=True)
class CountAtom:
    """True iff at least ``minimum`` instances of ``functor`` are in ``state``."""

    functor: str
    state: str
    minimum: int


@dataclass(frozen=True, slots=True)
class And:
    parts: tuple["Condition", ...]


@dataclass(frozen=True, slots=True)
class Or:
    parts: tuple["Condition", ...]


Condition = Union[AnyAtom, AllAtom, CountAtom, And, Or]


@dataclass(frozen=True, slots=True)
class Rule:
    condition: Condition
    probabilities: tuple[float, ...]


@dataclass(frozen=True, slots=True)
class RulesDistribution:
    rules: tuple[Rule, ...]
    otherwise: tuple[float, ...] | None  # mandatory; None is flagged by validation


@dataclass(frozen=True, slots=True)
class TableDistribution:
    """Rows keyed by parent-state names, in declared parent order.

    A prior (no parents) is the single row keyed by the empty tuple.
    Duplicate keys are preserved so validation can report them; consumers
    resolve first-wins.
    """

    parents: tuple[NodeTerm, ...]
    rows: tuple[tuple[tuple[str, ...], tuple[float, ...]], ...]

    @property
    def is_prior(self) -> bool:
        return not self.parents


LocalDistribution = Union[TableDistribution, RulesDistribution]


@dataclass(frozen=True, slots=True)
class ResidentNodeSpec:
    term: NodeTerm
    parents: tuple[NodeTerm, ...]
    distribution: LocalDistribution | None  # None only for entity-valued functors


@dataclass(frozen=True, slots=True)
class MFrag:
    name: str
    ovars: tuple[OrdinaryVariable, ...]
    contexts: tuple[ContextSpec, ...]
    inputs: tuple[NodeTerm, ...]
    residents: tuple[ResidentNodeSpec, ...]

    def ovar(self, name: str) -> OrdinaryVariable | None:
        for ov in self.ovars:
            if ov.name == name:
                return ov
        return None


@dataclass(frozen=True)
class MTheory:
    entity_types: tuple[EntityType, ...]
    state_spaces: tuple[StateSpace, ...]
    signatures: tuple[RandomVariableSignature, ...]
    mfrags: tuple[MFrag, ...]

    @cached_property
    def _sig_index(self) -> dict[str, RandomVariableSignature]:
        return {s.functor: s for s in self.signatures}

    @cached_property
    def _space_index(self) -> dict[str, StateSpace]:
        return {s.name: s for s in self.state_spaces}

    @cached_property
    def _type_index(self) -> dict[str, EntityType]:
        return {t.name: t for t in self.entity_types}

    def signature(self, functor: str) -> RandomVariableSignature:
        try:
            return self._sig_index[functor]
        except KeyError:
            raise UnknownFunctorError(f"unknown functor {functor!r}") from None

    def has_functor(self, functor: str) -> bool:
        return functor in self._sig_index

    def state_space(self, name: str) -> StateSpace:
        return self._space_index[name]

    def entity_type(self, name: str) -> EntityType | None:
        return self._type_index.get(name)


# --------------------------------------------------------------------------
# Ground-level data: findings, queries, random-variable instances.

ISA_FUNCTOR = "isA"
TRUE_TOKEN = "True"


@dataclass(frozen=True, slots=True)
class Finding:
    """One observed ground fact, e.g. ``Thickness(spill_1)=Thick``.

    Instance declarations use the reserved functor ``isA`` with
    ``args = (instance, type)`` and value ``True``.
    """

    functor: str
    args: tuple[str, ...]
    value: str

    @property
    def is_isa(self) -> bool:
        return self.functor == ISA_FUNCTOR

    def text(self) -> str:
        return f"{self.functor}({', '.join(self.args)})={self.value}"


@dataclass(frozen=True)
class FindingSet:
    findings: tuple[Finding, ...]

    @cached_property
    def _value_index(self) -> dict[tuple[str, tuple[str, ...]], str]:
        # first-wins so lookups stay deterministic even on duplicates
        index: dict[tuple[str, tuple[str, ...]], str] = {}
        for f in self.findings:
            index.setdefault((f.functor, f.args), f.value)
        return index

    def value_of(self, functor: str, args: tuple[str, ...]) -> str | None:
        return self._value_index.get((functor, args))

    def __iter__(self):
        return iter(self.findings)

    def __len__(self) -> int:
        return len(self.findings)


@dataclass(frozen=True, slots=True)
class Query:
    functor: str
    args: tuple[str, ...]

    def text(self) -> str:
        return f"{self.functor}({','.join(self.args)})"


@dataclass(frozen=True, slots=True)
class RVInstance:
    """A random variable grounded with concrete entity instances."""

    functor: str
    args: tuple[str, ...]

    def text(self) -> str:
        return f"{self.functor}({','.join(self.args)})"

    def __str__(self) -> str:  # convenient in error messages and DOT labels
        return self.text()


class EntityPool:
    """Typed entity instances declared by isA findings (closed world)."""

    def __init__(self, instances: Iterable[EntityInstance]):
        self._by_name: dict[str, EntityInstance] = {}
        by_type: dict[str, list[EntityInstance]] = {}
        for inst in instances:
            prior = self._by_name.get(inst.name)
            if prior is not None and prior.type != inst.type:
                raise ConflictingTypeError(
                    f"instance {inst.name!r} declared both as "
                    f"{prior.type.name!r} and {inst.type.name!r}"
                )
            if prior is None:
                self._by_name[inst.name] = inst
                by_type.setdefault(inst.type.name, []).append(inst)
        self._by_type = {
            t: tuple(sorted(members, key=lambda i: i.name)) for t, members in by_type.items()
        }

    def get(self, name: str) -> EntityInstance | None:
        return self._by_name.get(name)

    def of_type(self, type_name: str) -> tuple[EntityInstance, ...]:
        return self._by_type.get(type_name, ())

    def by_type(self) -> dict[str, tuple[EntityInstance, ...]]:
        return dict(self._by_type)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __len__(self) -> int:
        return len(self._by_name)


# --------------------------------------------------------------------------
# Validation.

@dataclass(frozen=True, slots=True)
class Violation:
    code: str
    message: str
    where: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.where}: {self.message}"


ValidationReport = list[Violation]


def entity_pool(findings: FindingSet, theory: MTheory | None = None) -> EntityPool:
    """Collect the entity instances declared by isA findings.

    Only isA-declared instances exist (closed world).  Raises
    :class:`ConflictingTypeError` if one name is declared with two types.
    When a theory is supplied, the declared type must exist in it.
    """
    instances = []
    for f in findings:
        if not f.is_isa:
            continue
        name, type_name = f.args
        etype = theory.entity_type(type_name) if theory is not None else None
        if etype is None:
            if theory is not None:
                raise ConflictingTypeError(
                    f"isA({name}, {type_name}): unknown entity type {type_name!r}"
                )
            etype = EntityType(type_name)
        instances.append(EntityInstance(name, etype))
    return EntityPool(instances)


def home_mfrag(theory: MTheory, functor: str) -> MFrag:
    """Return the unique MFrag in which ``functor`` is resident."""
    for mfrag in theory.mfrags:
        for res in mfrag.residents:
            if res.term.functor == functor:
                return mfrag
    raise UnknownFunctorError(f"no MFrag declares {functor!r} as resident")


def resident_spec(theory: MTheory, functor: str) -> ResidentNodeSpec:
    mfrag = home_mfrag(theory, functor)
    for res in mfrag.residents:
        if res.term.functor == functor:
            return res
    raise UnknownFunctorError(f"no MFrag declares {functor!r} as resident")  # pragma: no cover


def _check_identifier(name: str, kind: str, where: str, out: ValidationReport) -> None:
    if not IDENTIFIER_RE.match(name):
        out.append(Violation("bad-identifier", f"invalid {kind} name {name!r}", where))


def _check_term(
    theory: MTheory,
    mfrag: MFrag,
    term: NodeTerm,
    where: str,
    out: ValidationReport,
) -> None:
    if not theory.has_functor(term.functor):
        out.append(Violation("unknown-functor", f"functor {term.functor!r} not declared", where))
        return
    sig = theory.signature(term.functor)
    if len(term.args) != len(sig.arg_types):
        out.append(
            Violation(
                "arity-mismatch",
                f"{term.text()} has {len(term.args)} arguments, "
                f"signature declares {len(sig.arg_types)}",
                where,
            )
        )
        return
    for arg, expected in zip(term.args, sig.arg_types):
        ov = mfrag.ovar(arg)
        if ov is None:
            out.append(
                Violation("undeclared-ovar", f"ordinary variable {arg!r} not declared", where)
            )
        elif ov.type != expected:
            out.append(
                Violation(
                    "type-mismatch",
                    f"{term.text()}: variable {arg!r} has type {ov.type.name!r}, "
                    f"signature expects {expected.name!r}",
                    where,
                )
            )


def _mfrag_parent_cycle(mfrag: MFrag) -> list[str] | None:
    """Return a cycle (as node texts) in the within-MFrag parent graph, if any."""
    edges: dict[str, list[str]] = {}
    for res in mfrag.residents:
        edges.setdefault(res.term.text(), [])
        for parent in res.parents:
            edges[res.term.text()].append(parent.text())
    state: dict[str, int] = {}  # 0 visiting, 1 done
    stack: list[str] = []

    def visit(node: str) -> list[str] | None:
        state[node] = 0
        stack.append(node)
        for nxt in edges.get(node, ()):
            if state.get(nxt) == 0:
                return stack[stack.index(nxt):] + [nxt]
            if nxt not in state and nxt in edges:
                found = visit(nxt)
                if found:
                    return found
        stack.pop()
        state[node] = 1
        return None

    for node in list(edges):
        if node not in state:
            found = visit(node)
            if found:
                return found
    return None


def validate_mtheory(theory: MTheory) -> ValidationReport:
    """Report every structural violation in the theory; empty means valid.

    Pure and idempotent: repeated calls on the same object return equal
    reports.
    """
    from . import lpd  # local import; lpd depends on this module

    out: ValidationReport = []

    seen_types: set[str] = set()
    for etype in theory.entity_types:
        _check_identifier(etype.name, "entity type", "declarations", out)
        if etype.name in seen_types:
            out.append(Violation("duplicate-entity", f"entity {etype.name!r} declared twice", "declarations"))
        seen_types.add(etype.name)

    seen_spaces: set[str] = set()
    for space in theory.state_spaces:
        where = f"states {space.name}"
        _check_identifier(space.name, "state space", where, out)
        if space.name in seen_spaces:
            out.append(Violation("duplicate-state-space", f"state space {space.name!r} declared twice", where))
        seen_spaces.add(space.name)
        if len(space.states) < 2:
            out.append(Violation("too-few-states", "a state space needs at least 2 states", where))
        dup = {s for s in space.states if space.states.count(s) > 1}
        for s in sorted(dup):
            out.append(Violation("duplicate-state", f"state {s!r} repeated", where))
        for s in space.states:
            _check_identifier(s, "state", where, out)

    seen_functors: set[str] = set()
    for sig in theory.signatures:
        where = f"random {sig.functor}"
        _check_identifier(sig.functor, "functor", where, out)
        if sig.functor in seen_functors:
            out.append(Violation("duplicate-functor", f"functor {sig.functor!r} declared twice", where))
        seen_functors.add(sig.functor)
        if len(sig.arg_types) < 1:
            out.append(Violation("bad-arity", "functor arity must be >= 1", where))
        for t in sig.arg_types:
            if theory.entity_type(t.name) != t:
                out.append(Violation("unknown-type", f"argument type {t.name!r} not declared", where))
        if (sig.state_space is None) == (sig.range_type is None):
            out.append(
                Violation("bad-range", "exactly one of state space / entity range required", where)
            )
        elif sig.state_space is not None and theory._space_index.get(sig.state_space.name) != sig.state_space:
            out.append(Violation("unknown-state-space", f"range {sig.state_space.name!r} not declared", where))
        elif sig.range_type is not None and theory.entity_type(sig.range_type.name) != sig.range_type:
            out.append(Violation("unknown-type", f"range type {sig.range_type.name!r} not declared", where))

    # home-MFrag uniqueness across the whole theory
    homes: dict[str, list[str]] = {}
    for mfrag in theory.mfrags:
        for res in mfrag.residents:
            homes.setdefault(res.term.functor, []).append(mfrag.name)
    for functor, where_list in sorted(homes.items()):
        if len(where_list) > 1:
            out.append(
                Violation(
                    "duplicate-home",
                    f"functor {functor!r} is resident in more than one MFrag: "
                    + ", ".join(where_list),
                    f"mfrags {', '.join(where_list)}",
                )
            )
    for sig in theory.signatures:
        if sig.functor not in homes:
            out.append(
                Violation(
                    "missing-home",
                    f"functor {sig.functor!r} is resident in no MFrag",
                    f"random {sig.functor}",
                )
            )

    seen_mfrags: set[str] = set()
    for mfrag in theory.mfrags:
        where = f"mfrag {mfrag.name}"
        _check_identifier(mfrag.name, "mfrag", where, out)
        if mfrag.name in seen_mfrags:
            out.append(Violation("duplicate-mfrag", f"mfrag {mfrag.name!r} declared twice", where))
        seen_mfrags.add(mfrag.name)

        seen_ovars: set[str] = set()
        for ov in mfrag.ovars:
            _check_identifier(ov.name, "ordinary variable", where, out)
            if ov.name in seen_ovars:
                out.append(Violation("duplicate-ovar", f"ordinary variable {ov.name!r} declared twice", where))
            seen_ovars.add(ov.name)
            if theory.entity_type(ov.type.name) != ov.type:
                out.append(Violation("unknown-type", f"ovar {ov.name!r} has undeclared type {ov.type.name!r}", where))

        for ctx in mfrag.contexts:
            cwhere = f"{where}, context"
            if isinstance(ctx, IsAContext):
                if mfrag.ovar(ctx.var) is None:
                    out.append(Violation("undeclared-ovar", f"ordinary variable {ctx.var!r} not declared", cwhere))
                if theory.entity_type(ctx.type_name) is None:
                    out.append(Violation("unknown-type", f"entity type {ctx.type_name!r} not declared", cwhere))
            else:
                _check_term(theory, mfrag, NodeTerm(ctx.functor, ctx.args), cwhere, out)

        for term in mfrag.inputs:
            iwhere = f"{where}, input {term.text()}"
            _check_term(theory, mfrag, term, iwhere, out)
            if theory.has_functor(term.functor):
                if theory.signature(term.functor).is_entity_valued:
                    out.append(
                        Violation("entity-valued-input", "entity-valued functors cannot be input nodes", iwhere)
                    )
                elif term.functor not in homes:
                    out.append(
                        Violation(
                            "orphan-input",
                            f"input functor {term.functor!r} is resident in no MFrag",
                            iwhere,
                        )
                    )

        local_terms = {t.text() for t in mfrag.inputs} | {r.term.text() for r in mfrag.residents}
        for res in mfrag.residents:
            rwhere = f"{where}, resident {res.term.text()}"
            _check_term(theory, mfrag, res.term, rwhere, out)
            for parent in res.parents:
                if parent.text() not in local_terms:
                    out.append(
                        Violation(
                            "unknown-parent",
                            f"parent {parent.text()} is neither an input nor a resident of this MFrag",
                            rwhere,
                        )
                    )
            if not theory.has_functor(res.term.functor):
                continue
            sig = theory.signature(res.term.functor)
            if sig.is_entity_valued:
                if res.distribution is not None:
                    out.append(
                        Violation(
                            "unexpected-distribution",
                            "entity-valued residents are finding-resolved and take no distribution",
                            rwhere,
                        )
                    )
                continue
            if res.distribution is None:
                out.append(Violation("missing-distribution", "resident node needs a local distribution", rwhere))
                continue
            out.extend(lpd.validate_distribution(theory, mfrag, res))

        cycle = _mfrag_parent_cycle(mfrag)
        if cycle:
            out.append(
                Violation("cyclic-parents", "parent structure is cyclic: " + " -> ".join(cycle), where)
            )

    return out
