"""The modeling language: parsing and serialization.

Three textual formats live here:

* model files -- entity/state/functor declarations followed by MFrag
  blocks (grammar below),
* findings files -- one ``Functor(args)=Value`` ground fact per line,
  with ``isA(instance, Type)=True`` declaring entity instances,
* queries -- a single ``Functor(args)?`` expression.

Model file grammar (terminals quoted)::

    model      := { decl } { mfrag }
    decl       := "entity" ID
                | "states" ID "{" ID { "," ID } "}"
                | "random" ID "(" ID { "," ID } ")" "->" (ID | "entity" ID)
    mfrag      := "mfrag" ID "{" { ovar } { context } { input } { resident } "}"
    ovar       := "ovar" ID ":" ID
    context    := "context" ( "isA" "(" ID "," ID ")" | term "=" ID )
    input      := "input" term
    resident   := "resident" term [ "{" ( table | rules ) "}" ]
    table      := "table" "[" term { "," term } "]" "{" { row } "}"
                | "prior" probvec
    row        := "(" ID { "," ID } ")" ":" probvec
    probvec    := "[" NUMBER { "," NUMBER } "]"
    rules      := "rules" [ "[" term { "," term } "]" ]
                  "{" { "if" condition ":" probvec } "else" ":" probvec "}"
    condition  := conj { "OR" conj }
    conj       := atom { "AND" atom }
    atom       := "ANY" "(" ID "," ID ")" | "ALL" "(" ID "," ID ")"
                | "COUNT" "(" ID "," ID ")" ">=" NUMBER | "(" condition ")"
    term       := ID "(" ID { "," ID } ")" | ID

Entity-valued residents (finding-resolved relations) take no
distribution block; a ``rules`` block without an explicit parent list
defaults to the MFrag's input nodes in declaration order.  ``#`` starts
a comment in every format; identifiers are case-sensitive.

Parsing is pure: the same text always yields the same result.  Errors
raise :class:`~mebnkit.errors.ParseError` carrying diagnostics with
1-based source spans; query resolution failures raise grounding-domain
errors instead so callers can tell syntax from unresolvable references.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError, UnknownFunctorError, UnresolvedQueryError
from .model import (
    And,
    AnyAtom,
    AllAtom,
    Condition,
    CountAtom,
    EntityPool,
    EntityType,
    EqualityContext,
    Finding,
    FindingSet,
    IsAContext,
    ISA_FUNCTOR,
    MFrag,
    MTheory,
    NodeTerm,
    Or,
    OrdinaryVariable,
    Query,
    RandomVariableSignature,
    ResidentNodeSpec,
    Rule,
    RulesDistribution,
    StateSpace,
    TableDistribution,
    TRUE_TOKEN,
)


@dataclass(frozen=True, slots=True)
class SourceSpan:
    file: str
    line: int  # 1-based
    column: int  # 1-based

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True, slots=True)
class ParseDiagnostic:
    severity: str  # "error" | "warning"
    message: str
    span: SourceSpan

    def __str__(self) -> str:
        return f"{self.span}: {self.severity}: {self.message}"


_KEYWORDS = frozenset(
    {
        "entity", "states", "random", "mfrag", "ovar", "context", "input",
        "resident", "table", "prior", "rules", "if", "else", "isA",
        "ANY", "ALL", "COUNT", "AND", "OR",
    }
)

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r\n]+)
    | (?P<comment>\#[^\n]*)
    | (?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
    | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<arrow>->)
    | (?P<ge>>=)
    | (?P<punct>[{}\[\](),:=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


class _Halt(Exception):
    """Internal: aborts parsing with one diagnostic."""

    def __init__(self, diagnostic: ParseDiagnostic):
        self.diagnostic = diagnostic
        super().__init__(str(diagnostic))


def _lex(text: str, file: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise _Halt(
                ParseDiagnostic(
                    "error", f"unexpected character {text[pos]!r}", SourceSpan(file, line, col)
                )
            )
        kind, tok_text = m.lastgroup, m.group()
        if kind == "id":
            tokens.append(_Token(tok_text if tok_text in _KEYWORDS else "ID", tok_text, line, col))
        elif kind == "number":
            tokens.append(_Token("NUMBER", tok_text, line, col))
        elif kind == "arrow":
            tokens.append(_Token("->", tok_text, line, col))
        elif kind == "ge":
            tokens.append(_Token(">=", tok_text, line, col))
        elif kind == "punct":
            tokens.append(_Token(tok_text, tok_text, line, col))
        newlines = tok_text.count("\n")
        if newlines:
            line += newlines
            col = len(tok_text) - tok_text.rfind("\n")
        else:
            col += len(tok_text)
        pos = m.end()
    tokens.append(_Token("EOF", "", line, col))
    return tokens


class _ModelParser:
    def __init__(self, text: str, file: str):
        self.file = file
        self.tokens = _lex(text, file)
        self.pos = 0
        self.entity_types: dict[str, EntityType] = {}
        self.spaces: dict[str, StateSpace] = {}
        self.sigs: dict[str, RandomVariableSignature] = {}
        self.mfrags: list[MFrag] = []

    # -- token plumbing ----------------------------------------------------

    def _peek(self) -> _Token:
        return self.tokens[self.pos]

    def _next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def _accept(self, kind: str) -> _Token | None:
        if self.tokens[self.pos].kind == kind:
            return self._next()
        return None

    def _error(self, message: str, tok: _Token | None = None):
        tok = tok or self._peek()
        raise _Halt(
            ParseDiagnostic("error", message, SourceSpan(self.file, tok.line, tok.col))
        )

    def _expect(self, kind: str, what: str | None = None) -> _Token:
        tok = self._peek()
        if tok.kind != kind:
            found = repr(tok.text) if tok.text else "end of file"
            self._error(f"expected {what or repr(kind)}, found {found}", tok)
        return self._next()

    # -- declarations ------------------------------------------------------

    def parse(self) -> MTheory:
        while self._peek().kind in ("entity", "states", "random"):
            kind = self._next().kind
            if kind == "entity":
                self._entity_decl()
            elif kind == "states":
                self._states_decl()
            else:
                self._random_decl()
        while self._peek().kind == "mfrag":
            self.mfrags.append(self._mfrag())
        if self._peek().kind != "EOF":
            self._error(
                "expected 'entity', 'states', 'random', 'mfrag', or end of file"
            )
        return MTheory(
            tuple(self.entity_types.values()),
            tuple(self.spaces.values()),
            tuple(self.sigs.values()),
            tuple(self.mfrags),
        )

    def _entity_decl(self) -> None:
        tok = self._expect("ID", "an entity type name")
        if tok.text in self.entity_types:
            self._error(f"duplicate entity type {tok.text!r}", tok)
        self.entity_types[tok.text] = EntityType(tok.text)

    def _states_decl(self) -> None:
        name = self._expect("ID", "a state space name")
        if name.text in self.spaces:
            self._error(f"duplicate state space {name.text!r}", name)
        self._expect("{")
        states = [self._expect("ID", "a state name")]
        while self._accept(","):
            states.append(self._expect("ID", "a state name"))
        self._expect("}")
        seen: set[str] = set()
        for tok in states:
            if tok.text in seen:
                self._error(f"duplicate state {tok.text!r} in state space {name.text!r}", tok)
            seen.add(tok.text)
        self.spaces[name.text] = StateSpace(name.text, tuple(t.text for t in states))

    def _entity_type_ref(self, tok: _Token) -> EntityType:
        etype = self.entity_types.get(tok.text)
        if etype is None:
            self._error(f"unknown entity type {tok.text!r}", tok)
        return etype

    def _random_decl(self) -> None:
        name = self._expect("ID", "a functor name")
        if name.text in self.sigs:
            self._error(f"duplicate functor {name.text!r}", name)
        self._expect("(")
        arg_types = [self._entity_type_ref(self._expect("ID", "an entity type name"))]
        while self._accept(","):
            arg_types.append(self._entity_type_ref(self._expect("ID", "an entity type name")))
        self._expect(")")
        self._expect("->")
        if self._accept("entity"):
            range_type = self._entity_type_ref(self._expect("ID", "an entity type name"))
            sig = RandomVariableSignature(name.text, tuple(arg_types), range_type=range_type)
        else:
            space_tok = self._expect("ID", "a state space name")
            space = self.spaces.get(space_tok.text)
            if space is None:
                self._error(f"unknown state space {space_tok.text!r}", space_tok)
            sig = RandomVariableSignature(name.text, tuple(arg_types), state_space=space)
        self.sigs[name.text] = sig

    # -- MFrags ------------------------------------------------------------

    def _node_term(self, ovars: dict[str, OrdinaryVariable]) -> NodeTerm:
        functor = self._expect("ID", "a functor name")
        if functor.text not in self.sigs:
            self._error(f"unknown functor {functor.text!r}", functor)
        self._expect("(")
        args = [self._ovar_ref(ovars)]
        while self._accept(","):
            args.append(self._ovar_ref(ovars))
        self._expect(")")
        return NodeTerm(functor.text, tuple(args))

    def _ovar_ref(self, ovars: dict[str, OrdinaryVariable]) -> str:
        tok = self._expect("ID", "an ordinary variable")
        if tok.text not in ovars:
            self._error(f"undeclared ordinary variable {tok.text!r}", tok)
        return tok.text

    def _probvec(self) -> tuple[float, ...]:
        self._expect("[")
        values = [float(self._expect("NUMBER", "a probability").text)]
        while self._accept(","):
            values.append(float(self._expect("NUMBER", "a probability").text))
        self._expect("]")
        return tuple(values)

    def _state_space_of(self, functor_tok: _Token) -> StateSpace:
        sig = self.sigs[functor_tok.text]
        if sig.state_space is None:
            self._error(
                f"entity-valued functor {functor_tok.text!r} has no states", functor_tok
            )
        return sig.state_space

    def _table(self, ovars: dict[str, OrdinaryVariable]) -> TableDistribution:
        self._expect("[")
        header_start = self._peek()
        parents = [self._node_term(ovars)]
        parent_toks = [header_start]
        while self._accept(","):
            parent_toks.append(self._peek())
            parents.append(self._node_term(ovars))
        self._expect("]")
        spaces = [self._state_space_of(tok) for tok, term in zip(parent_toks, parents)]
        self._expect("{")
        rows: list[tuple[tuple[str, ...], tuple[float, ...]]] = []
        while self._peek().kind == "(":
            self._next()
            key_toks = [self._expect("ID", "a state name")]
            while self._accept(","):
                key_toks.append(self._expect("ID", "a state name"))
            self._expect(")")
            if len(key_toks) != len(parents):
                self._error(
                    f"row key has {len(key_toks)} states, table declares {len(parents)} parents",
                    key_toks[0],
                )
            for tok, space in zip(key_toks, spaces):
                if tok.text not in space.states:
                    self._error(f"unknown state {tok.text!r}", tok)
            self._expect(":")
            rows.append((tuple(t.text for t in key_toks), self._probvec()))
        self._expect("}")
        return TableDistribution(tuple(parents), tuple(rows))

    def _atom(self) -> Condition:
        if self._accept("("):
            cond = self._condition()
            self._expect(")")
            return cond
        tok = self._next()
        if tok.kind not in ("ANY", "ALL", "COUNT"):
            self._error("expected a condition (ANY, ALL, COUNT, or '(')", tok)
        self._expect("(")
        functor = self._expect("ID", "a parent functor name")
        if functor.text not in self.sigs:
            self._error(f"unknown functor {functor.text!r}", functor)
        space = self._state_space_of(functor)
        self._expect(",")
        state = self._expect("ID", "a state name")
        if state.text not in space.states:
            self._error(f"unknown state {state.text!r}", state)
        self._expect(")")
        if tok.kind == "ANY":
            return AnyAtom(functor.text, state.text)
        if tok.kind == "ALL":
            return AllAtom(functor.text, state.text)
        self._expect(">=")
        num = self._expect("NUMBER", "a count threshold")
        if not re.fullmatch(r"\d+", num.text):
            self._error("COUNT threshold must be an integer", num)
        return CountAtom(functor.text, state.text, int(num.text))

    def _conjunction(self) -> Condition:
        parts = [self._atom()]
        while self._accept("AND"):
            parts.append(self._atom())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def _condition(self) -> Condition:
        parts = [self._conjunction()]
        while self._accept("OR"):
            parts.append(self._conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def _rules(
        self,
        ovars: dict[str, OrdinaryVariable],
        default_parents: tuple[NodeTerm, ...],
    ) -> tuple[tuple[NodeTerm, ...], RulesDistribution]:
        if self._accept("["):
            parents = [self._node_term(ovars)]
            while self._accept(","):
                parents.append(self._node_term(ovars))
            self._expect("]")
            parent_terms = tuple(parents)
        else:
            parent_terms = default_parents
        self._expect("{")
        rules: list[Rule] = []
        while self._accept("if"):
            cond = self._condition()
            self._expect(":")
            rules.append(Rule(cond, self._probvec()))
        self._expect("else", "'if' or 'else'")
        self._expect(":")
        otherwise = self._probvec()
        self._expect("}")
        return parent_terms, RulesDistribution(tuple(rules), otherwise)

    def _resident(
        self, ovars: dict[str, OrdinaryVariable], inputs: tuple[NodeTerm, ...]
    ) -> ResidentNodeSpec:
        term = self._node_term(ovars)
        if not self._accept("{"):
            return ResidentNodeSpec(term, (), None)
        kw = self._next()
        if kw.kind == "table":
            dist: TableDistribution | RulesDistribution = self._table(ovars)
            parents = dist.parents
        elif kw.kind == "prior":
            dist = TableDistribution((), (((), self._probvec()),))
            parents = ()
        elif kw.kind == "rules":
            parents, dist = self._rules(ovars, inputs)
        else:
            self._error("expected 'table', 'prior', or 'rules'", kw)
        self._expect("}")
        return ResidentNodeSpec(term, parents, dist)

    def _mfrag(self) -> MFrag:
        self._expect("mfrag")
        name = self._expect("ID", "an MFrag name")
        if any(m.name == name.text for m in self.mfrags):
            self._error(f"duplicate mfrag {name.text!r}", name)
        self._expect("{")

        ovars: dict[str, OrdinaryVariable] = {}
        while self._accept("ovar"):
            ov_name = self._expect("ID", "an ordinary variable name")
            self._expect(":")
            ov_type = self._entity_type_ref(self._expect("ID", "an entity type name"))
            if ov_name.text in ovars:
                self._error(f"duplicate ordinary variable {ov_name.text!r}", ov_name)
            ovars[ov_name.text] = OrdinaryVariable(ov_name.text, ov_type)

        contexts: list[IsAContext | EqualityContext] = []
        while self._accept("context"):
            if self._accept("isA"):
                self._expect("(")
                var = self._ovar_ref(ovars)
                self._expect(",")
                type_tok = self._expect("ID", "an entity type name")
                self._entity_type_ref(type_tok)
                self._expect(")")
                contexts.append(IsAContext(var, type_tok.text))
            else:
                term = self._node_term(ovars)
                self._expect("=")
                rhs = self._expect("ID", "a variable or entity name")
                contexts.append(EqualityContext(term.functor, term.args, rhs.text))

        inputs: list[NodeTerm] = []
        while self._accept("input"):
            inputs.append(self._node_term(ovars))

        residents: list[ResidentNodeSpec] = []
        while self._accept("resident"):
            residents.append(self._resident(ovars, tuple(inputs)))

        self._expect("}", "'ovar', 'context', 'input', 'resident', or '}'")
        return MFrag(
            name.text,
            tuple(ovars.values()),
            tuple(contexts),
            tuple(inputs),
            tuple(residents),
        )


def parse_model(text: str, file: str = "<model>") -> MTheory:
    """Parse a model file into an MTheory.

    Raises :class:`ParseError` on syntax errors, unknown references, and
    duplicate declarations.  Structural validation (row normalization,
    home-MFrag uniqueness, ...) is separate: run
    :func:`mebnkit.model.validate_mtheory` on the result.
    """
    try:
        return _ModelParser(text, file).parse()
    except _Halt as halt:
        raise ParseError([halt.diagnostic]) from None


# --------------------------------------------------------------------------
# Canonical serialization.


def _float_text(x: float) -> str:
    return repr(float(x))


def _probvec_text(vec) -> str:
    return "[" + ", ".join(_float_text(p) for p in vec) + "]"


def _term_text(term: NodeTerm) -> str:
    return f"{term.functor}({', '.join(term.args)})"


def _condition_text(cond: Condition, min_prec: int = 1) -> str:
    # precedence: OR = 1, AND = 2, atoms = 3; children bind one level
    # tighter than their parent, so same-operator nesting keeps its
    # parentheses and survives a round trip unchanged
    if isinstance(cond, Or):
        text = " OR ".join(_condition_text(p, 2) for p in cond.parts)
        return f"({text})" if min_prec > 1 else text
    if isinstance(cond, And):
        text = " AND ".join(_condition_text(p, 3) for p in cond.parts)
        return f"({text})" if min_prec > 2 else text
    if isinstance(cond, AnyAtom):
        return f"ANY({cond.functor}, {cond.state})"
    if isinstance(cond, AllAtom):
        return f"ALL({cond.functor}, {cond.state})"
    return f"COUNT({cond.functor}, {cond.state}) >= {cond.minimum}"


def serialize_model(theory: MTheory) -> str:
    """Canonical text for a theory; deterministic, and parseable back to a
    structurally equal MTheory."""
    lines: list[str] = []
    for etype in theory.entity_types:
        lines.append(f"entity {etype.name}")
    for space in theory.state_spaces:
        lines.append(f"states {space.name} {{ {', '.join(space.states)} }}")
    for sig in theory.signatures:
        args = ", ".join(t.name for t in sig.arg_types)
        if sig.is_entity_valued:
            rng = f"entity {sig.range_type.name}"
        else:
            rng = sig.state_space.name
        lines.append(f"random {sig.functor}({args}) -> {rng}")
    for mfrag in theory.mfrags:
        lines.append("")
        lines.append(f"mfrag {mfrag.name} {{")
        for ov in mfrag.ovars:
            lines.append(f"  ovar {ov.name}: {ov.type.name}")
        for ctx in mfrag.contexts:
            if isinstance(ctx, IsAContext):
                lines.append(f"  context isA({ctx.var}, {ctx.type_name})")
            else:
                lines.append(
                    f"  context {_term_text(NodeTerm(ctx.functor, ctx.args))} = {ctx.rhs}"
                )
        for term in mfrag.inputs:
            lines.append(f"  input {_term_text(term)}")
        for res in mfrag.residents:
            lines.extend(_resident_lines(res))
        lines.append("}")
    return "\n".join(lines) + "\n"


def _resident_lines(res: ResidentNodeSpec) -> list[str]:
    head = f"  resident {_term_text(res.term)}"
    dist = res.distribution
    if dist is None:
        return [head]
    if isinstance(dist, TableDistribution):
        if dist.is_prior:
            return [f"{head} {{ prior {_probvec_text(dist.rows[0][1])} }}"]
        out = [f"{head} {{"]
        out.append(f"    table [{', '.join(_term_text(t) for t in dist.parents)}] {{")
        for key, vec in dist.rows:
            out.append(f"      ({', '.join(key)}): {_probvec_text(vec)}")
        out.append("    }")
        out.append("  }")
        return out
    out = [f"{head} {{"]
    out.append(f"    rules [{', '.join(_term_text(t) for t in res.parents)}] {{")
    for rule in dist.rules:
        out.append(f"      if {_condition_text(rule.condition)}: {_probvec_text(rule.probabilities)}")
    otherwise = dist.otherwise if dist.otherwise is not None else ()
    out.append(f"      else: {_probvec_text(otherwise)}")
    out.append("    }")
    out.append("  }")
    return out


# --------------------------------------------------------------------------
# Findings and queries.

_GROUND_RE = re.compile(
    r"(?P<functor>[A-Za-z_][A-Za-z0-9_]*)\s*\(\s*"
    r"(?P<args>[A-Za-z_][A-Za-z0-9_]*(?:\s*,\s*[A-Za-z_][A-Za-z0-9_]*)*)\s*\)"
)
_FINDING_RE = re.compile(_GROUND_RE.pattern + r"\s*=\s*(?P<value>[A-Za-z_][A-Za-z0-9_]*)\s*\Z")
_QUERY_RE = re.compile(_GROUND_RE.pattern + r"\s*(?P<mark>\?)?\s*\Z")


def _split_args(args_text: str) -> tuple[str, ...]:
    return tuple(a.strip() for a in args_text.split(","))


def parse_findings(text: str, theory: MTheory, file: str = "<findings>") -> FindingSet:
    """Parse a findings file against a theory.

    One finding per line; blank lines and ``#`` comments are ignored;
    whitespace between tokens is free.  isA lines must precede any use
    of the instance they declare (the entity pool is closed-world).
    All offending lines are reported together.
    """
    diagnostics: list[ParseDiagnostic] = []
    findings: list[Finding] = []
    declared: dict[str, str] = {}  # instance name -> entity type name
    seen: set[tuple[str, tuple[str, ...]]] = set()

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        col = len(line) - len(line.lstrip()) + 1
        span = SourceSpan(file, lineno, col)

        def bad(message: str) -> None:
            diagnostics.append(ParseDiagnostic("error", message, span))

        m = _FINDING_RE.match(stripped)
        if m is None:
            bad("syntax error: expected Functor(arg, ...)=Value")
            continue
        functor = m.group("functor")
        args = _split_args(m.group("args"))
        value = m.group("value")

        if functor == ISA_FUNCTOR:
            if len(args) != 2:
                bad(f"isA takes (instance, Type), got {len(args)} arguments")
                continue
            name, type_name = args
            if theory.entity_type(type_name) is None:
                bad(f"unknown entity type {type_name!r}")
                continue
            if value != TRUE_TOKEN:
                bad(f"isA findings must have value {TRUE_TOKEN}, got {value!r}")
                continue
            prior = declared.get(name)
            if prior == type_name:
                bad(f"duplicate finding for isA({name}, {type_name})")
                continue
            if prior is not None:
                bad(f"instance {name!r} already declared with type {prior!r}")
                continue
            declared[name] = type_name
            findings.append(Finding(ISA_FUNCTOR, args, TRUE_TOKEN))
            continue

        if not theory.has_functor(functor):
            bad(f"unknown functor {functor!r}")
            continue
        sig = theory.signature(functor)
        if len(args) != len(sig.arg_types):
            bad(f"{functor!r} expects {len(sig.arg_types)} arguments, got {len(args)}")
            continue
        ok = True
        for arg, expected in zip(args, sig.arg_types):
            got = declared.get(arg)
            if got is None:
                bad(f"unknown entity instance {arg!r} (declare it with isA before use)")
                ok = False
            elif got != expected.name:
                bad(f"argument {arg!r} has type {got!r}, {functor!r} expects {expected.name!r}")
                ok = False
        if not ok:
            continue
        if sig.is_entity_valued:
            got = declared.get(value)
            if got is None:
                bad(f"unknown entity instance {value!r} (declare it with isA before use)")
                continue
            if got != sig.range_type.name:
                bad(f"value {value!r} has type {got!r}, {functor!r} ranges over {sig.range_type.name!r}")
                continue
        else:
            if value not in sig.state_space.states:
                bad(f"unknown state {value!r} for functor {functor!r}")
                continue
        key = (functor, args)
        if key in seen:
            bad(f"duplicate finding for {functor}({', '.join(args)})")
            continue
        seen.add(key)
        findings.append(Finding(functor, args, value))

    if diagnostics:
        raise ParseError(diagnostics)
    return FindingSet(tuple(findings))


def parse_query(
    text: str, theory: MTheory, pool: EntityPool, file: str = "<query>"
) -> Query:
    """Parse a query expression (trailing ``?`` optional).

    Syntax problems raise :class:`ParseError`; references that do not
    resolve against the theory or the entity pool raise
    :class:`UnknownFunctorError` / :class:`UnresolvedQueryError`.
    """
    stripped = text.split("#", 1)[0].strip()
    m = _QUERY_RE.match(stripped)
    if m is None:
        raise ParseError(
            [
                ParseDiagnostic(
                    "error",
                    "syntax error: expected Functor(arg, ...)?",
                    SourceSpan(file, 1, 1),
                )
            ]
        )
    functor = m.group("functor")
    args = _split_args(m.group("args"))
    if not theory.has_functor(functor):
        raise UnknownFunctorError(f"unknown functor {functor!r}")
    sig = theory.signature(functor)
    if sig.is_entity_valued:
        raise UnresolvedQueryError(f"{functor!r} is entity-valued and cannot be queried")
    if len(args) != len(sig.arg_types):
        raise UnresolvedQueryError(
            f"{functor!r} expects {len(sig.arg_types)} arguments, got {len(args)}"
        )
    for arg, expected in zip(args, sig.arg_types):
        inst = pool.get(arg)
        if inst is None:
            raise UnresolvedQueryError(f"unknown entity instance {arg!r}")
        if inst.type.name != expected.name:
            raise UnresolvedQueryError(
                f"argument {arg!r} has type {inst.type.name!r}, "
                f"{functor!r} expects {expected.name!r}"
            )
    return Query(functor, args)
