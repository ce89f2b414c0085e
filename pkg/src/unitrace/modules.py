"""Reactive modules: parsing, printing, flattening to automata, and step semantics.

Supported surface syntax::

    // comment
    module timer
      t : [0..1] init 0;
      [tic] t=0 -> t'=1;
      [tac] t=1 -> t'=0;
    endmodule

Guards combine comparisons (``= != < <= > >=``) of integer expressions with
``& | !``. An action is ``true`` or one or more updates ``v'=expr`` joined by
``&``; alternatives are separated by ``+``. Integer expressions use ``+ - *``.
"""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterator, Mapping, Sequence, Union

from .automaton import Automaton, Letter, Transition

__all__ = [
    "ModelSyntaxError",
    "ModelError",
    "Const",
    "Var",
    "Unary",
    "Binary",
    "Expr",
    "Variable",
    "Update",
    "GuardedCommand",
    "Module",
    "ModuleSystem",
    "GlobalState",
    "parse_system",
    "parse_expression",
    "format_system",
    "format_expr",
    "flatten_module",
    "flatten_system",
    "sync_letter",
    "successors",
]


class ModelSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class ModelError(ValueError):
    """Well-formed source describing an ill-formed model (ranges, scoping, sync use)."""


# --- syntax tree -------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: int | bool


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Var, Unary, Binary]

_BOOL_OPS = {"&", "|"}
_REL_OPS = {"=", "!=", "<", "<=", ">", ">="}
_ARITH_OPS = {"+", "-", "*"}


def expr_vars(e: Expr) -> Iterator[str]:
    if isinstance(e, Var):
        yield e.name
    elif isinstance(e, Unary):
        yield from expr_vars(e.operand)
    elif isinstance(e, Binary):
        yield from expr_vars(e.left)
        yield from expr_vars(e.right)


def _is_bool(e: Expr) -> bool:
    if isinstance(e, Const):
        return isinstance(e.value, bool)
    if isinstance(e, Var):
        return False
    if isinstance(e, Unary):
        return e.op == "!"
    return e.op in _BOOL_OPS or e.op in _REL_OPS


@dataclass(frozen=True)
class Variable:
    name: str
    lo: int
    hi: int
    init: int

    def __contains__(self, value: int) -> bool:
        return self.lo <= value <= self.hi


@dataclass(frozen=True)
class Update:
    target: str
    expr: Expr


@dataclass(frozen=True)
class GuardedCommand:
    sync: str | None
    guard: Expr
    actions: tuple[tuple[Update, ...], ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Module:
    name: str
    variables: tuple[Variable, ...]
    commands: tuple[GuardedCommand, ...]

    @property
    def labels(self) -> frozenset[str]:
        return frozenset(c.sync for c in self.commands if c.sync is not None)


GlobalState = tuple[int, ...]

_Compiled = Callable[[Sequence[int]], Union[int, bool]]


@dataclass(frozen=True)
class ModuleSystem:
    modules: tuple[Module, ...]

    @property
    def sync_labels(self) -> frozenset[str]:
        return frozenset().union(*(m.labels for m in self.modules))

    @cached_property
    def variables(self) -> tuple[Variable, ...]:
        return tuple(v for m in self.modules for v in m.variables)

    @cached_property
    def index(self) -> dict[str, int]:
        return {v.name: i for i, v in enumerate(self.variables)}

    @cached_property
    def owner(self) -> dict[str, int]:
        return {v.name: mi for mi, m in enumerate(self.modules) for v in m.variables}

    def initial_state(self) -> GlobalState:
        return tuple(v.init for v in self.variables)

    def participants(self, label: str) -> list[int]:
        """Modules declaring at least one command synchronised on ``label``."""
        return [i for i, m in enumerate(self.modules) if label in m.labels]

    def module_index(self, name: str) -> int:
        for i, m in enumerate(self.modules):
            if m.name == name:
                return i
        raise KeyError(name)

    def compile(self, e: Expr) -> _Compiled:
        return _compile(e, self.index)

    @cached_property
    def _compiled(self) -> list[list[tuple[_Compiled, list[list[tuple[int, _Compiled]]]]]]:
        out = []
        for m in self.modules:
            cmds = []
            for c in m.commands:
                actions = [[(self.index[u.target], self.compile(u.expr)) for u in act] for act in c.actions]
                cmds.append((self.compile(c.guard), actions))
            out.append(cmds)
        return out


# --- lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\.\.|->|<=|>=|!=|[=<>&|!+\-*()\[\]:;'])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"module", "endmodule", "init", "true", "false"}


@dataclass(frozen=True)
class _Token:
    kind: str  # "int", "name", "kw", "op", "eof"
    text: str
    line: int
    column: int


def _lex(source: str) -> list[_Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ModelSyntaxError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        column = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "name":
            tokens.append(_Token("kw" if text in _KEYWORDS else "name", text, line, column))
        elif kind in ("int", "op"):
            tokens.append(_Token(kind, text, line, column))
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


# --- parser ------------------------------------------------------------------


class _Parser:
    def __init__(self, source: str) -> None:
        self.tokens = _lex(source)
        self.pos = 0
        self.refs: list[tuple[str, _Token]] = []

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> _Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def error(self, message: str, tok: _Token | None = None) -> ModelSyntaxError:
        tok = tok or self.tok
        found = tok.text or "end of input"
        return ModelSyntaxError(f"{message} (found {found!r})", tok.line, tok.column)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text == text

    def accept(self, text: str) -> _Token | None:
        if self.at(text):
            tok = self.tok
            self.pos += 1
            return tok
        return None

    def expect(self, text: str) -> _Token:
        tok = self.accept(text)
        if tok is None:
            raise self.error(f"expected {text!r}")
        return tok

    def name(self) -> _Token:
        if self.tok.kind != "name":
            raise self.error("expected identifier")
        tok = self.tok
        self.pos += 1
        return tok

    def integer(self) -> int:
        sign = -1 if self.accept("-") else 1
        if self.tok.kind != "int":
            raise self.error("expected integer")
        value = int(self.tok.text)
        self.pos += 1
        return sign * value

    # system structure

    def system(self) -> tuple[ModuleSystem, list[tuple[Module, list]]]:
        modules = []
        located = []
        while self.tok.kind != "eof":
            module, info = self.module()
            modules.append(module)
            located.append((module, info))
        return ModuleSystem(tuple(modules)), located

    def module(self) -> tuple[Module, dict]:
        self.expect("module")
        name_tok = self.name()
        variables: list[Variable] = []
        var_tokens: list[_Token] = []
        commands: list[GuardedCommand] = []
        targets: list[tuple[str, _Token, int]] = []
        while not self.at("endmodule"):
            if self.tok.kind == "eof":
                raise self.error(f"missing 'endmodule' for module {name_tok.text!r}")
            if self.at("["):
                commands.append(self.command(targets, len(commands)))
            else:
                var_tok = self.name()
                self.expect(":")
                self.expect("[")
                lo = self.integer()
                self.expect("..")
                hi = self.integer()
                self.expect("]")
                self.expect("init")
                init_tok = self.tok
                init = self.integer()
                self.expect(";")
                if lo > hi:
                    raise ModelSyntaxError(f"empty range [{lo}..{hi}] for {var_tok.text!r}", var_tok.line, var_tok.column)
                if not lo <= init <= hi:
                    raise ModelSyntaxError(
                        f"init value {init} of {var_tok.text!r} outside range [{lo}..{hi}]",
                        init_tok.line,
                        init_tok.column,
                    )
                variables.append(Variable(var_tok.text, lo, hi, init))
                var_tokens.append(var_tok)
        self.expect("endmodule")
        module = Module(name_tok.text, tuple(variables), tuple(commands))
        return module, {"name": name_tok, "vars": var_tokens, "targets": targets}

    def command(self, targets: list, number: int) -> GuardedCommand:
        open_tok = self.expect("[")
        sync = None
        if self.tok.kind == "name":
            sync = self.name().text
        self.expect("]")
        guard_tok = self.tok
        guard = self.expression()
        if not _is_bool(guard):
            raise self.error("guard must be a boolean expression", guard_tok)
        self.expect("->")
        actions = [self.action(targets, number)]
        while self.accept("+"):
            actions.append(self.action(targets, number))
        self.expect(";")
        return GuardedCommand(sync, guard, tuple(actions), open_tok.line)

    def _update_starts(self, k: int = 0) -> bool:
        """Whether an update ``v'=`` or ``(v'=`` begins ``k`` tokens ahead."""
        a, b, c = self.peek(k), self.peek(k + 1), self.peek(k + 2)
        if a.kind == "name" and b.text == "'":
            return True
        return a.text == "(" and b.kind == "name" and c.text == "'"

    def action(self, targets: list, number: int) -> tuple[Update, ...]:
        if self.accept("true"):
            return ()
        updates = [self.update(targets, number)]
        while self.accept("&"):
            updates.append(self.update(targets, number))
        seen = set()
        for u in updates:
            if u.target in seen:
                raise self.error(f"variable {u.target!r} assigned twice in one action")
            seen.add(u.target)
        return tuple(updates)

    def update(self, targets: list, number: int) -> Update:
        if self.accept("("):
            u = self.update(targets, number)
            self.expect(")")
            return u
        target = self.name()
        self.expect("'")
        self.expect("=")
        expr_tok = self.tok
        expr = self.additive(stop_at_update=True)
        if _is_bool(expr):
            raise self.error("assigned value must be an integer expression", expr_tok)
        targets.append((target.text, target, number))
        return Update(target.text, expr)

    # expressions, loosest binding first

    def expression(self) -> Expr:
        left = self.conjunction()
        while self.at("|"):
            tok = self.tok
            self.pos += 1
            left = self._binary("|", left, self.conjunction(), tok)
        return left

    def conjunction(self) -> Expr:
        left = self.negation()
        while self.at("&"):
            tok = self.tok
            self.pos += 1
            left = self._binary("&", left, self.negation(), tok)
        return left

    def negation(self) -> Expr:
        tok = self.accept("!")
        if tok:
            operand = self.negation()
            if not _is_bool(operand):
                raise self.error("'!' needs a boolean operand", tok)
            return Unary("!", operand)
        return self.relation()

    def relation(self) -> Expr:
        left = self.additive()
        if self.tok.kind == "op" and self.tok.text in _REL_OPS:
            tok = self.tok
            self.pos += 1
            return self._binary(tok.text, left, self.additive(), tok)
        return left

    def additive(self, stop_at_update: bool = False) -> Expr:
        left = self.term()
        while self.at("+") or self.at("-"):
            if stop_at_update and self.at("+") and (self._update_starts(1) or self.peek().text == "true"):
                break
            tok = self.tok
            self.pos += 1
            left = self._binary(tok.text, left, self.term(), tok)
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.at("*"):
            tok = self.tok
            self.pos += 1
            left = self._binary("*", left, self.unary(), tok)
        return left

    def unary(self) -> Expr:
        tok = self.accept("-")
        if tok:
            if self.tok.kind == "int":
                value = int(self.tok.text)
                self.pos += 1
                return Const(-value)
            operand = self.unary()
            if _is_bool(operand):
                raise self.error("'-' needs an integer operand", tok)
            return Unary("-", operand)
        return self.primary()

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "int":
            self.pos += 1
            return Const(int(tok.text))
        if tok.kind == "name":
            self.pos += 1
            self.refs.append((tok.text, tok))
            return Var(tok.text)
        if self.accept("true"):
            return Const(True)
        if self.accept("false"):
            return Const(False)
        if self.accept("("):
            inner = self.expression()
            self.expect(")")
            return inner
        raise self.error("expected expression")

    def _binary(self, op: str, left: Expr, right: Expr, tok: _Token) -> Binary:
        want_bool = op in _BOOL_OPS
        for side in (left, right):
            if _is_bool(side) != want_bool:
                kind = "boolean" if want_bool else "integer"
                raise self.error(f"operator {op!r} needs {kind} operands", tok)
        return Binary(op, left, right)


def parse_system(source: str) -> ModuleSystem:
    """Parse module source text; raises :class:`ModelSyntaxError` with a line and column."""
    parser = _Parser(source)
    system, located = parser.system()
    declared: dict[str, _Token] = {}
    module_names: set[str] = set()
    for module, info in located:
        if module.name in module_names:
            tok = info["name"]
            raise ModelSyntaxError(f"duplicate module {module.name!r}", tok.line, tok.column)
        module_names.add(module.name)
        for var, tok in zip(module.variables, info["vars"]):
            if var.name in declared:
                raise ModelSyntaxError(f"duplicate variable {var.name!r}", tok.line, tok.column)
            declared[var.name] = tok
    for name, tok in parser.refs:
        if name not in declared:
            raise ModelSyntaxError(f"undeclared variable {name!r}", tok.line, tok.column)
    for module, info in located:
        local = {v.name for v in module.variables}
        for name, tok, _ in info["targets"]:
            if name not in declared:
                raise ModelSyntaxError(f"undeclared variable {name!r}", tok.line, tok.column)
            if name not in local:
                raise ModelSyntaxError(
                    f"module {module.name!r} assigns non-local variable {name!r}", tok.line, tok.column
                )
    return system


def parse_expression(text: str, system: ModuleSystem | None = None) -> Expr:
    """Parse a standalone expression, checking names against ``system`` when given."""
    parser = _Parser(text)
    expr = parser.expression()
    if parser.tok.kind != "eof":
        raise parser.error("unexpected trailing input")
    if system is not None:
        for name, tok in parser.refs:
            if name not in system.index:
                raise ModelSyntaxError(f"undeclared variable {name!r}", tok.line, tok.column)
    return expr


# --- printing ----------------------------------------------------------------


def format_expr(e: Expr) -> str:
    if isinstance(e, Const):
        if isinstance(e.value, bool):
            return "true" if e.value else "false"
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        return f"{e.op}({format_expr(e.operand)})"
    return f"({format_expr(e.left)} {e.op} {format_expr(e.right)})"


def _format_action(action: tuple[Update, ...]) -> str:
    if not action:
        return "true"
    return " & ".join(f"({u.target}'={format_expr(u.expr)})" for u in action)


def format_system(system: ModuleSystem) -> str:
    out = []
    for m in system.modules:
        out.append(f"module {m.name}")
        out.extend(f"  {v.name} : [{v.lo}..{v.hi}] init {v.init};" for v in m.variables)
        for c in m.commands:
            label = c.sync or ""
            actions = " + ".join(_format_action(a) for a in c.actions)
            out.append(f"  [{label}] {format_expr(c.guard)} -> {actions};")
        out.append("endmodule")
        out.append("")
    return "\n".join(out)


# --- evaluation --------------------------------------------------------------

_PY_OPS: dict[str, Callable] = {
    "&": lambda a, b: a and b,
    "|": lambda a, b: a or b,
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
}


def _compile(e: Expr, index: Mapping[str, int]) -> _Compiled:
    if isinstance(e, Const):
        value = e.value
        return lambda s: value
    if isinstance(e, Var):
        i = index[e.name]
        return lambda s: s[i]
    if isinstance(e, Unary):
        inner = _compile(e.operand, index)
        if e.op == "!":
            return lambda s: not inner(s)
        return lambda s: -inner(s)
    left, right = _compile(e.left, index), _compile(e.right, index)
    if e.op == "&":
        return lambda s: left(s) and right(s)
    if e.op == "|":
        return lambda s: left(s) or right(s)
    fn = _PY_OPS[e.op]
    return lambda s: fn(left(s), right(s))


# --- flattening --------------------------------------------------------------


def sync_letter(label: str) -> Letter:
    """The single letter shared by every module's ``label``-synchronised transition."""
    return Letter(label, None, label)


def _valuation_text(module: Module, values: Sequence[int]) -> str:
    return ",".join(f"{v.name}={x}" for v, x in zip(module.variables, values))


def flatten_module(
    system: ModuleSystem,
    i: int,
    read_view: Mapping[str, int] | None = None,
    sync_label: str | None = None,
) -> Automaton:
    """Automaton of the reachable local valuations of module ``i``.

    Each (state, command, alternative) transition gets its own letter, shown
    as ``module.cmdJ.actK``. With ``sync_label`` every command carrying that
    label is mapped to the shared :func:`sync_letter` and any other label is
    rejected; without it labels are ignored. All states are final.
    """
    module = system.modules[i]
    read_view = dict(read_view or {})
    local = [system.index[v.name] for v in module.variables]
    local_names = {v.name for v in module.variables}
    for cmd in module.commands:
        exprs = [cmd.guard] + [u.expr for act in cmd.actions for u in act]
        for e in exprs:
            for name in expr_vars(e):
                if name not in local_names and name not in read_view:
                    raise ModelError(
                        f"module {module.name!r} reads foreign variable {name!r}; supply it in read_view"
                    )
    if sync_label is not None:
        others = module.labels - {sync_label}
        if others:
            raise ModelError(
                f"module {module.name!r} uses sync labels {sorted(others)} besides {sync_label!r}"
            )
    alpha = sync_letter(sync_label) if sync_label is not None else None
    base = list(system.initial_state())
    for name, value in read_view.items():
        if name not in system.index:
            raise ModelError(f"read_view names unknown variable {name!r}")
        base[system.index[name]] = value
    compiled = system._compiled[i]
    bounds = [(v.lo, v.hi) for v in module.variables]

    def full(values: tuple[int, ...]) -> list[int]:
        s = list(base)
        for idx, x in zip(local, values):
            s[idx] = x
        return s

    start = tuple(v.init for v in module.variables)
    index = {start: 0}
    order = [start]
    queue = deque([start])
    transitions: list[Transition] = []
    while queue:
        values = queue.popleft()
        env = full(values)
        for ci, (guard, actions) in enumerate(compiled):
            if not guard(env):
                continue
            cmd = module.commands[ci]
            for ai, updates in enumerate(actions):
                nxt = list(values)
                for target, fn in updates:
                    pos = local.index(target)
                    value = fn(env)
                    lo, hi = bounds[pos]
                    if not lo <= value <= hi:
                        raise ModelError(
                            f"{module.name}.cmd{ci + 1}.act{ai + 1} (line {cmd.line}) sets "
                            f"{module.variables[pos].name}={value} outside [{lo}..{hi}]"
                        )
                    nxt[pos] = value
                nxt_t = tuple(nxt)
                if nxt_t not in index:
                    index[nxt_t] = len(order)
                    order.append(nxt_t)
                    queue.append(nxt_t)
                if alpha is not None and cmd.sync == sync_label:
                    letter = alpha
                else:
                    display = f"{module.name}.cmd{ci + 1}.act{ai + 1}"
                    letter = Letter(f"{display}@{_valuation_text(module, values)}", i, display)
                transitions.append(Transition(index[values], letter, index[nxt_t]))
    return Automaton(len(order), 0, frozenset(range(len(order))), tuple(transitions))


def flatten_system(system: ModuleSystem, sync_label: str | None = None) -> list[Automaton]:
    return [flatten_module(system, i, sync_label=sync_label) for i in range(len(system.modules))]


# --- global step semantics ---------------------------------------------------


def _apply(
    system: ModuleSystem,
    s: GlobalState,
    updates: Sequence[tuple[int, _Compiled]],
    what: str,
) -> GlobalState:
    nxt = list(s)
    for idx, fn in updates:
        value = fn(s)
        var = system.variables[idx]
        if value not in var:
            raise ModelError(f"{what} sets {var.name}={value} outside [{var.lo}..{var.hi}]")
        nxt[idx] = value
    return tuple(nxt)


def successors(system: ModuleSystem, s: GlobalState) -> list[tuple[str, GlobalState]]:
    """Every one-step move from ``s``, as ``(action description, next state)``.

    Unsynchronised commands contribute one move per enabled action
    alternative. A label fires when every module declaring it has an enabled
    command with that label; it then contributes one move per combination of
    (command, alternative) choices across those modules. Equal target states
    reached by different moves are kept apart. An empty list is a deadlock.
    """
    moves: list[tuple[str, GlobalState]] = []
    enabled: dict[str, dict[int, list[tuple[str, list[tuple[int, _Compiled]]]]]] = {}
    for mi, (module, compiled) in enumerate(zip(system.modules, system._compiled)):
        for ci, (guard, actions) in enumerate(compiled):
            if not guard(s):
                continue
            cmd = module.commands[ci]
            for ai, updates in enumerate(actions):
                what = f"{module.name}.cmd{ci + 1}.act{ai + 1}"
                if cmd.sync is None:
                    moves.append((what, _apply(system, s, updates, what)))
                else:
                    enabled.setdefault(cmd.sync, {}).setdefault(mi, []).append((what, updates))
    for label in sorted(enabled):
        per_module = enabled[label]
        participants = system.participants(label)
        if not all(mi in per_module for mi in participants):
            continue
        for combo in itertools.product(*(per_module[mi] for mi in participants)):
            what = f"[{label}] " + " & ".join(w for w, _ in combo)
            updates = [u for _, ups in combo for u in ups]
            moves.append((what, _apply(system, s, updates, what)))
    return moves
