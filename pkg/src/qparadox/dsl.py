"""Line-oriented scenario language (``.scn`` files).

Grammar::

    scenario  := "scenario" STRING NEWLINE decl+
    decl      := telegraph | mirror | agent | order | shots
    telegraph := "telegraph" IDENT "active" ANGLE "passive" ANGLE
    mirror    := "mirror" IDENT ("gate" IDENT)?
    agent     := "agent" "policy" (IDENT | matrix2)
    matrix2   := "[" complex "," complex ";" complex "," complex "]"
    order     := "order" IDENT ("<" IDENT)+
    shots     := "shots" INTEGER

Each declaration sits on its own line. ``#`` starts a comment that runs to
the end of the line. ANGLE is a decimal number of radians or the literal
``pi``. A complex literal is a real number, an imaginary number such as
``-0.5i`` or ``i``, or a real part followed by a signed imaginary part
(``0.5+0.5i``). Line breaks are ``\\n``, ``\\r\\n`` or ``\\r``; lines and
columns are 1-based and count code points.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from . import operators
from .epr import DEFAULT_ORDER, LoopScenario, Mirror, TelegraphConfig, check_event_order
from .errors import NotUnitaryError, ScenarioError, UnknownGateError

DEFAULT_SHOTS = 10_000
KEYWORDS = ("telegraph", "mirror", "agent", "order", "shots")

_NUMBER = re.compile(
    r"[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?i?|[+-]i(?![A-Za-z0-9_'])"
)
_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_INTEGER = re.compile(r"[0-9]+")
_IDENT_CHAR = re.compile(r"[A-Za-z0-9_'.]")
_PUNCT = "[],;<"
_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


class ParseError(Exception):
    def __init__(self, line: int, column: int, message: str, expected=()):
        self.line = line
        self.column = column
        self.message = message
        self.expected = list(expected)
        detail = f" (expected {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{column}: {message}{detail}")


@dataclass(frozen=True)
class Token:
    kind: str  # WORD, NUMBER, STRING, PUNCT, NEWLINE, EOF
    text: str
    line: int
    column: int
    value: object = None

    def describe(self) -> str:
        if self.kind == "EOF":
            return "end of input"
        if self.kind == "NEWLINE":
            return "end of line"
        return repr(self.text)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col, n = 0, 1, 1, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t":
            i += 1
            col += 1
        elif ch == "#":
            while i < n and text[i] not in "\r\n":
                i += 1
                col += 1
        elif ch in "\r\n":
            width = 2 if text.startswith("\r\n", i) else 1
            tokens.append(Token("NEWLINE", text[i : i + width], line, col))
            i += width
            line, col = line + 1, 1
        elif ch == '"':
            j, out = i + 1, []
            while True:
                if j >= n or text[j] in "\r\n":
                    raise ParseError(line, col, "unterminated string")
                c = text[j]
                if c == '"':
                    break
                if c == "\\":
                    esc = text[j + 1] if j + 1 < n else ""
                    if esc not in _ESCAPES:
                        raise ParseError(line, col + (j - i), "bad escape in string")
                    out.append(_ESCAPES[esc])
                    j += 2
                else:
                    out.append(c)
                    j += 1
            tokens.append(Token("STRING", text[i : j + 1], line, col, "".join(out)))
            col += j + 1 - i
            i = j + 1
        elif m := _NUMBER.match(text, i):
            s = m.group()
            end = m.end()
            if end < n and _IDENT_CHAR.match(text, end):
                raise ParseError(line, col, f"malformed number {text[i:end + 1]!r}")
            if s.endswith("i"):
                body = s[:-1]
                value = complex(0, float(body + "1" if body in ("", "+", "-") else body))
            else:
                value = float(s)
            tokens.append(Token("NUMBER", s, line, col, value))
            col += end - i
            i = end
        elif m := _WORD.match(text, i):
            tokens.append(Token("WORD", m.group(), line, col))
            col += m.end() - i
            i = m.end()
        elif ch in _PUNCT:
            tokens.append(Token("PUNCT", ch, line, col))
            i += 1
            col += 1
        else:
            raise ParseError(line, col, f"unexpected character {ch!r}")
    tokens.append(Token("EOF", "", line, col))
    return tokens


Pos = tuple[int, int]


@dataclass(frozen=True)
class TelegraphDecl:
    name: str
    active: float
    passive: float
    pos: Pos


@dataclass(frozen=True)
class MirrorDecl:
    name: str
    gate: str | None
    pos: Pos


@dataclass(frozen=True)
class AgentDecl:
    policy: str | tuple[tuple[complex, complex], tuple[complex, complex]]
    pos: Pos


@dataclass(frozen=True)
class OrderDecl:
    events: tuple[str, ...]
    pos: Pos


@dataclass(frozen=True)
class ShotsDecl:
    count: int
    pos: Pos


@dataclass(frozen=True)
class ScenarioAst:
    name: str
    declarations: tuple = ()

    def of(self, kind) -> list:
        return [d for d in self.declarations if isinstance(d, kind)]


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "EOF":
            self.i += 1
        return t

    def fail(self, expected, what: str | None = None):
        t = self.tok
        raise ParseError(t.line, t.column, what or f"unexpected {t.describe()}", expected)

    def keyword(self, word: str) -> Token:
        if self.tok.kind == "WORD" and self.tok.text == word:
            return self.advance()
        self.fail([word])

    def ident(self) -> Token:
        if self.tok.kind == "WORD":
            return self.advance()
        self.fail(["IDENT"])

    def punct(self, p: str) -> Token:
        if self.tok.kind == "PUNCT" and self.tok.text == p:
            return self.advance()
        self.fail([p])

    def skip_newlines(self):
        while self.tok.kind == "NEWLINE":
            self.advance()

    def end_of_line(self):
        if self.tok.kind in ("NEWLINE", "EOF"):
            self.advance()
        else:
            self.fail(["NEWLINE"])

    def scenario(self) -> ScenarioAst:
        self.skip_newlines()
        self.keyword("scenario")
        if self.tok.kind != "STRING":
            self.fail(["STRING"])
        name = self.advance().value
        if self.tok.kind != "NEWLINE":
            self.fail(["NEWLINE"])
        decls = []
        while True:
            self.skip_newlines()
            if self.tok.kind == "EOF":
                if not decls:
                    self.fail(list(KEYWORDS), "scenario has no declarations")
                break
            decls.append(self.decl())
            self.end_of_line()
        return ScenarioAst(name, tuple(decls))

    def decl(self):
        t = self.tok
        if t.kind == "WORD" and t.text in KEYWORDS:
            return getattr(self, f"decl_{t.text}")()
        self.fail(list(KEYWORDS))

    def decl_telegraph(self) -> TelegraphDecl:
        pos = self._pos(self.advance())
        name = self.ident().text
        self.keyword("active")
        active = self.angle()
        self.keyword("passive")
        passive = self.angle()
        return TelegraphDecl(name, active, passive, pos)

    def decl_mirror(self) -> MirrorDecl:
        pos = self._pos(self.advance())
        name = self.ident().text
        gate = None
        if self.tok.kind == "WORD" and self.tok.text == "gate":
            self.advance()
            gate = self.ident().text
        return MirrorDecl(name, gate, pos)

    def decl_agent(self) -> AgentDecl:
        pos = self._pos(self.advance())
        self.keyword("policy")
        if self.tok.kind == "WORD":
            return AgentDecl(self.advance().text, pos)
        if self.tok.kind == "PUNCT" and self.tok.text == "[":
            return AgentDecl(self.matrix2(), pos)
        self.fail(["IDENT", "["])

    def decl_order(self) -> OrderDecl:
        pos = self._pos(self.advance())
        events = [self.ident().text]
        self.punct("<")
        events.append(self.ident().text)
        while self.tok.kind == "PUNCT" and self.tok.text == "<":
            self.advance()
            events.append(self.ident().text)
        return OrderDecl(tuple(events), pos)

    def decl_shots(self) -> ShotsDecl:
        pos = self._pos(self.advance())
        t = self.tok
        if t.kind == "NUMBER" and _INTEGER.fullmatch(t.text):
            self.advance()
            return ShotsDecl(int(t.text), pos)
        self.fail(["INTEGER"])

    def angle(self) -> float:
        t = self.tok
        if t.kind == "WORD" and t.text == "pi":
            self.advance()
            return math.pi
        if t.kind == "NUMBER" and isinstance(t.value, float):
            self.advance()
            return t.value
        self.fail(["ANGLE"])

    def complex_(self) -> complex:
        t = self.tok
        if t.kind == "WORD" and t.text == "i":
            self.advance()
            return 1j
        if t.kind != "NUMBER":
            self.fail(["COMPLEX"])
        self.advance()
        if isinstance(t.value, complex):
            return t.value
        nxt = self.tok
        if nxt.kind == "NUMBER" and isinstance(nxt.value, complex) and nxt.text[0] in "+-":
            self.advance()
            return complex(t.value, nxt.value.imag)
        return complex(t.value, 0.0)

    def matrix2(self):
        self.punct("[")
        a = self.complex_()
        self.punct(",")
        b = self.complex_()
        self.punct(";")
        c = self.complex_()
        self.punct(",")
        d = self.complex_()
        self.punct("]")
        return ((a, b), (c, d))

    @staticmethod
    def _pos(t: Token) -> Pos:
        return (t.line, t.column)


def _decode(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        head = data[: exc.start].decode("utf-8")
        lines = re.split(r"\r\n|\r|\n", head)
        raise ParseError(len(lines), len(lines[-1]) + 1, "invalid UTF-8") from None


def parse(text: str | bytes) -> ScenarioAst:
    """Parse scenario text; raises :class:`ParseError` at the first failure."""
    if isinstance(text, (bytes, bytearray)):
        text = _decode(bytes(text))
    return _Parser(tokenize(text)).scenario()


def parse_matrix(text: str):
    """Parse a standalone ``[a, b; c, d]`` matrix literal."""
    p = _Parser(tokenize(text))
    m = p.matrix2()
    if p.tok.kind != "EOF":
        p.fail(["end of input"])
    return [list(row) for row in m]


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    message: str
    line: int
    column: int

    def __str__(self):
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class ValidationError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


def _total_order(decls: list[OrderDecl]) -> tuple[tuple[str, ...] | None, str | None]:
    nodes: list[str] = []
    succ: dict[str, set[str]] = {}
    for d in decls:
        for e in d.events:
            if e not in succ:
                nodes.append(e)
                succ[e] = set()
        for a, b in zip(d.events, d.events[1:]):
            succ[a].add(b)
    indeg = {e: 0 for e in nodes}
    for e in nodes:
        for b in succ[e]:
            indeg[b] += 1
    out = []
    ready = [e for e in nodes if indeg[e] == 0]
    while ready:
        if len(ready) > 1:
            return None, f"incomplete order: {' and '.join(sorted(ready))} are unordered"
        e = ready.pop()
        out.append(e)
        for b in sorted(succ[e]):
            indeg[b] -= 1
            if indeg[b] == 0:
                ready.append(b)
    if len(out) != len(nodes):
        return None, "cyclic order"
    return tuple(out), None


def validate(ast: ScenarioAst, catalog=None) -> tuple[LoopScenario, list[Diagnostic]]:
    """Resolve gate names and check structure.

    Returns the scenario and any warnings; raises :class:`ValidationError`
    with every error found.
    """
    catalog = operators.CATALOG if catalog is None else catalog
    errors: list[Diagnostic] = []
    warnings: list[Diagnostic] = []

    def err(msg, pos):
        errors.append(Diagnostic("error", msg, *pos))

    def resolve(name, pos):
        if name not in catalog:
            err(f"unknown gate {name!r}", pos)
            return None
        return catalog[name]

    telegraphs = []
    for d in ast.of(TelegraphDecl):
        t = TelegraphConfig(d.name, d.active, d.passive)
        if any(x.name == d.name for x in telegraphs):
            err(f"duplicate telegraph {d.name!r}", d.pos)
        elif not t.perfect:
            warnings.append(
                Diagnostic(
                    "warning",
                    f"imperfect correlation on telegraph {d.name!r}: relative angle "
                    f"{t.relative_angle:.6g} rad is not pi (E = {-math.cos(t.relative_angle):.6g})",
                    *d.pos,
                )
            )
        telegraphs.append(t)
    if not 1 <= len(telegraphs) <= 2:
        err(f"expected one or two telegraphs, found {len(telegraphs)}", (1, 1))

    agents = ast.of(AgentDecl)
    policy = None
    if not agents:
        err("missing agent declaration", (1, 1))
    for extra in agents[1:]:
        err("duplicate agent", extra.pos)
    if agents:
        a = agents[0]
        if isinstance(a.policy, str):
            policy = resolve(a.policy, a.pos)
        else:
            try:
                policy = operators.gate_from_matrix("custom", a.policy)
            except NotUnitaryError:
                err("agent policy matrix is not unitary", a.pos)

    mirrors = ast.of(MirrorDecl)
    mirror = None
    for extra in mirrors[1:]:
        err("duplicate mirror", extra.pos)
    if mirrors:
        m = mirrors[0]
        gate = operators.identity_gate() if m.gate is None else resolve(m.gate, m.pos)
        if gate is not None:
            mirror = Mirror(m.name, gate)
    elif len(telegraphs) == 2:
        mirror = Mirror()

    orders = ast.of(OrderDecl)
    event_order = DEFAULT_ORDER
    if orders:
        merged, problem = _total_order(orders)
        if problem:
            err(problem, orders[-1].pos)
        else:
            try:
                check_event_order(merged)
                event_order = merged
            except ScenarioError as exc:
                err(str(exc), orders[0].pos)

    shots_decls = ast.of(ShotsDecl)
    shots = DEFAULT_SHOTS
    for extra in shots_decls[1:]:
        err("duplicate shots", extra.pos)
    if shots_decls:
        shots = shots_decls[0].count
        if shots < 1:
            err("shots must be positive", shots_decls[0].pos)

    if errors:
        raise ValidationError(errors)
    scenario = LoopScenario(
        name=ast.name,
        telegraphs=tuple(telegraphs),
        agent_policy=policy,
        mirror=mirror,
        event_order=event_order,
        shots=shots,
    )
    return scenario, warnings


def load(text: str | bytes) -> tuple[LoopScenario, list[Diagnostic]]:
    return validate(parse(text))


def _fmt_real(x: float) -> str:
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _fmt_angle(x: float) -> str:
    return "pi" if x == math.pi else _fmt_real(x)


def _fmt_complex(z: complex) -> str:
    z = complex(z)
    if z.imag == 0:
        return _fmt_real(z.real)
    im = _fmt_real(z.imag) + "i"
    if z.real == 0:
        return im
    return _fmt_real(z.real) + ("" if im.startswith("-") else "+") + im


def _fmt_string(s: str) -> str:
    inverse = {v: k for k, v in _ESCAPES.items()}
    body = "".join("\\" + inverse[c] if c in inverse else c for c in s)
    if "\r" in body:
        raise ValueError("scenario names cannot contain carriage returns")
    return f'"{body}"'


def _gate_text(g: operators.Gate) -> str:
    if operators.CATALOG.get(g.name) == g:
        return g.name
    if g.dim != 2:
        raise ValueError(f"gate {g.name!r} is not a named 2x2 gate")
    (a, b), (c, d) = g.matrix
    return f"[{_fmt_complex(a)}, {_fmt_complex(b)}; {_fmt_complex(c)}, {_fmt_complex(d)}]"


def serialize(s: LoopScenario) -> str:
    """Canonical text form; parsing and validating it gives back an equal scenario."""
    lines = [f"scenario {_fmt_string(s.name)}"]
    for t in s.telegraphs:
        lines.append(
            f"telegraph {t.name} active {_fmt_angle(t.active_angle)} "
            f"passive {_fmt_angle(t.passive_angle)}"
        )
    if s.mirror is not None:
        line = f"mirror {s.mirror.name}"
        if s.mirror.gate != operators.identity_gate():
            name = _gate_text(s.mirror.gate)
            if name.startswith("["):
                raise ValueError("mirror gates must be catalog gates")
            line += f" gate {name}"
        lines.append(line)
    lines.append(f"agent policy {_gate_text(s.agent_policy)}")
    lines.append("order " + " < ".join(s.event_order))
    lines.append(f"shots {s.shots}")
    return "\n".join(lines) + "\n"
