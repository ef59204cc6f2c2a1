"""Lexer, parser and renderer for the scenario language.

Example::

    scenario "three-box-X" {
      space dim = 3 basis = [X, Y, Z]
      state A = 1/sqrt(3), 1/sqrt(3), 1/sqrt(3)
      state B = 1/sqrt(3), 1/sqrt(3), -1/sqrt(3)
      measure { blocks = [[X], [Y, Z]] mode = coarse }
      preselect { basis = A index = 0 }
      postselect { basis = B index = 0 }
      options { look = X }
    }

Amplitudes are ``re``, ``im i``, ``re+im i`` or ``re-im i`` where each part is
a number, ``sqrt(N)``, ``pi`` or a fraction of two of those.  Numbers are
rendered with 17 significant digits, so ``parse(render(s)) == s``.
"""

import math
import re
from dataclasses import dataclass

from ..errors import ParseError
from .spec import (
    MODES,
    OPTION_KEYS,
    Hamiltonian,
    Level,
    Measure,
    ScenarioSpec,
    Selection,
)

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?([A-Za-z_]\w*)?")
_IDENT = re.compile(r"[A-Za-z_]\w*")
_PUNCT = set("{}[](),;=:/+-")


@dataclass(frozen=True)
class Token:
    kind: str  # NUMBER, IDENT, STRING, PUNCT, EOF
    text: str
    line: int
    col: int
    value: object = None
    imag: bool = False

    @property
    def end(self):
        return self.col + len(self.text)


def tokenize(text):
    """Split scenario text into tokens; comments run from ``#`` to end of line."""
    tokens = []
    for lineno, line in enumerate(text.replace("\r", "").split("\n"), start=1):
        i = 0
        while i < len(line):
            ch = line[i]
            col = i + 1
            if ch in " \t":
                i += 1
            elif ch == "#":
                break
            elif ch == '"':
                j, buf = i + 1, []
                while j < len(line) and line[j] != '"':
                    if line[j] == "\\" and j + 1 < len(line):
                        j += 1
                    buf.append(line[j])
                    j += 1
                if j >= len(line):
                    raise ParseError(lineno, col, "unterminated string", line[i:])
                tokens.append(Token("STRING", line[i:j + 1], lineno, col, "".join(buf)))
                i = j + 1
            elif ch.isdigit() or (ch == "." and i + 1 < len(line) and line[i + 1].isdigit()):
                m = _NUMBER.match(line, i)
                suffix = m.group(1)
                if suffix is not None and suffix != "i":
                    raise ParseError(lineno, col, "bad number suffix (imaginary unit is 'i')",
                                     m.group(0))
                body = m.group(0)[:-1] if suffix else m.group(0)
                tokens.append(Token("NUMBER", m.group(0), lineno, col, float(body), suffix == "i"))
                i = m.end()
            elif ch.isalpha() or ch == "_":
                m = _IDENT.match(line, i)
                tokens.append(Token("IDENT", m.group(0), lineno, col, m.group(0)))
                i = m.end()
            elif ch in _PUNCT:
                tokens.append(Token("PUNCT", ch, lineno, col))
                i += 1
            else:
                raise ParseError(lineno, col, "unexpected character", ch)
    last = len(text.replace("\r", "").split("\n"))
    tokens.append(Token("EOF", "", last, 1))
    return tokens


class Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.pos = 0
        self.locations = {}

    # token helpers
    @property
    def tok(self):
        return self.toks[self.pos]

    def advance(self):
        t = self.tok
        self.pos += 1
        return t

    def error(self, message, tok=None):
        t = tok or self.tok
        return ParseError(t.line, t.col, message, t.text if t.kind != "EOF" else "<end of input>")

    def at(self, text):
        return self.tok.kind in ("PUNCT", "IDENT") and self.tok.text == text

    def expect(self, text):
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        return self.advance()

    def ident(self, what="identifier"):
        if self.tok.kind != "IDENT":
            raise self.error(f"expected {what}")
        return self.advance()

    def integer(self):
        t = self.tok
        if t.kind != "NUMBER" or t.imag or not re.fullmatch(r"\d+", t.text):
            raise self.error("expected a non-negative integer")
        self.advance()
        return int(t.text)

    # numbers
    def atom(self):
        t = self.tok
        if t.kind == "NUMBER":
            self.advance()
            return t.value, t.imag
        if t.kind == "IDENT" and t.text == "pi":
            self.advance()
            return math.pi, self._adjacent_i(t)
        if t.kind == "IDENT" and t.text == "sqrt":
            self.advance()
            self.expect("(")
            arg = self.tok
            if arg.kind != "NUMBER" or arg.imag:
                raise self.error("sqrt takes a real number")
            self.advance()
            close = self.expect(")")
            return math.sqrt(arg.value), self._adjacent_i(close)
        raise self.error("expected a number")

    def _adjacent_i(self, prev):
        t = self.tok
        if t.kind == "IDENT" and t.text == "i" and t.line == prev.line and t.col == prev.end:
            self.advance()
            return True
        return False

    def term(self):
        value, imag = self.atom()
        if self.at("/"):
            self.advance()
            den_tok = self.tok
            den, den_imag = self.atom()
            if imag and den_imag:
                raise self.error("imaginary unit on both sides of a fraction", den_tok)
            if den == 0:
                raise self.error("division by zero", den_tok)
            value, imag = value / den, imag or den_imag
        return value, imag

    def real(self):
        sign = 1.0
        if self.at("-") or self.at("+"):
            sign = -1.0 if self.advance().text == "-" else 1.0
        start = self.tok
        value, imag = self.term()
        if imag:
            raise self.error("expected a real number", start)
        return sign * value

    def amp(self):
        sign = 1.0
        if self.at("-") or self.at("+"):
            sign = -1.0 if self.advance().text == "-" else 1.0
        value, imag = self.term()
        if imag:
            return complex(0.0, sign * value)
        re_part = sign * value
        if self.at("+") or self.at("-"):
            s2 = -1.0 if self.advance().text == "-" else 1.0
            start = self.tok
            im, imag = self.term()
            if not imag:
                raise self.error("expected an imaginary part ending in 'i'", start)
            return complex(re_part, s2 * im)
        return complex(re_part, 0.0)

    def amps(self):
        out = [self.amp()]
        while self.at(","):
            self.advance()
            out.append(self.amp())
        return tuple(out)

    def matrix(self):
        self.expect("[")
        rows = [self.amps()]
        while self.at(";"):
            self.advance()
            rows.append(self.amps())
        self.expect("]")
        return tuple(rows)

    def ident_list(self):
        self.expect("[")
        items = [self.ident().text]
        while self.at(","):
            self.advance()
            items.append(self.ident().text)
        self.expect("]")
        return tuple(items)

    # sections
    def parse(self):
        start = self.expect("scenario")
        if self.tok.kind != "STRING":
            raise self.error("expected the scenario name as a string")
        name = self.advance().value
        self.expect("{")
        basis, states, unitaries = None, [], []
        hamiltonian = measure = pre = post = None
        options = []
        while not self.at("}"):
            t = self.tok
            if t.kind == "EOF":
                raise self.error("missing '}' at end of scenario")
            word = self.ident("section keyword").text
            if word == "space":
                if basis is not None:
                    raise self.error("duplicate space section", t)
                basis = self.space(t)
            elif word == "state":
                n = self.ident("state name")
                self.expect("=")
                self.locations[("state", n.text)] = (n.line, n.col)
                states.append((n.text, self.amps()))
            elif word == "unitary":
                n = self.ident("matrix name")
                self.expect("=")
                self.locations[("unitary", n.text)] = (n.line, n.col)
                unitaries.append((n.text, self.matrix()))
            elif word == "hamiltonian":
                if hamiltonian is not None:
                    raise self.error("duplicate hamiltonian section", t)
                self.locations["hamiltonian"] = (t.line, t.col)
                hamiltonian = self.hamiltonian()
            elif word == "measure":
                if measure is not None:
                    raise self.error("duplicate measure section", t)
                self.locations["measure"] = (t.line, t.col)
                measure = self.measure()
            elif word in ("preselect", "postselect"):
                if (pre if word == "preselect" else post) is not None:
                    raise self.error(f"duplicate {word} section", t)
                self.locations[word] = (t.line, t.col)
                sel = self.selection()
                if word == "preselect":
                    pre = sel
                else:
                    post = sel
            elif word == "options":
                self.locations["options"] = (t.line, t.col)
                options.extend(self.options())
            else:
                raise self.error("unknown section", t)
        close = self.expect("}")
        if self.tok.kind != "EOF":
            raise self.error("unexpected text after the scenario")
        for what, value in (("space", basis), ("measure", measure),
                            ("preselect", pre), ("postselect", post)):
            if value is None:
                raise ParseError(close.line, close.col, f"missing {what} section", "}")
        self.locations["scenario"] = (start.line, start.col)
        return ScenarioSpec(name, basis, tuple(states), tuple(unitaries), measure, pre, post,
                            hamiltonian, tuple(options), self.locations)

    def space(self, t):
        self.expect("dim")
        self.expect("=")
        dim_tok = self.tok
        dim = self.integer()
        self.expect("basis")
        self.expect("=")
        labels = self.ident_list()
        self.locations["space"] = (t.line, t.col)
        if dim != len(labels):
            from ..errors import SemanticError

            raise SemanticError(dim_tok.line, dim_tok.col,
                                f"dim = {dim} but the basis lists {len(labels)} labels",
                                dim_tok.text, "DimensionMismatch")
        return labels

    def hamiltonian(self):
        self.expect("{")
        levels = []
        while self.at("level"):
            self.advance()
            energy = self.real()
            self.expect(":")
            vectors, complement = [], False
            while self.at("[") or self.at("complement"):
                if self.at("complement"):
                    if complement:
                        raise self.error("complement listed twice in one level")
                    self.advance()
                    complement = True
                else:
                    vectors.append(self.joint_vector())
            if not vectors and not complement:
                raise self.error("a level needs at least one vector")
            levels.append(Level(energy, tuple(vectors), complement))
        if not levels:
            raise self.error("expected 'level'")
        self.expect("}")
        self.expect("duration")
        self.expect("=")
        return Hamiltonian(tuple(levels), self.real())

    def joint_vector(self):
        self.expect("[")
        entries = []
        while True:
            s = self.ident("system label").text
            p = self.ident("pointer label").text
            self.expect("=")
            entries.append((s, p, self.amp()))
            if not self.at(","):
                break
            self.advance()
        self.expect("]")
        return tuple(entries)

    def measure(self):
        self.expect("{")
        self.expect("blocks")
        self.expect("=")
        self.expect("[")
        blocks = [self.ident_list()]
        while self.at(","):
            self.advance()
            blocks.append(self.ident_list())
        self.expect("]")
        self.expect("mode")
        self.expect("=")
        mode_tok = self.ident("mode")
        if mode_tok.text not in MODES:
            raise self.error(f"mode must be one of {', '.join(MODES)}", mode_tok)
        ds = []
        while self.at("d"):
            d_tok = self.advance()
            k = self.integer()
            self.expect("=")
            self.locations[("d", k)] = (d_tok.line, d_tok.col)
            ds.append((k, self.matrix()))
        self.expect("}")
        return Measure(tuple(blocks), mode_tok.text, tuple(ds))

    def selection(self):
        self.expect("{")
        self.expect("basis")
        self.expect("=")
        basis = self.ident("basis name").text
        self.expect("index")
        self.expect("=")
        index = self.integer()
        self.expect("}")
        return Selection(basis, index)

    def options(self):
        self.expect("{")
        out = []
        while not self.at("}"):
            key = self.ident("option name")
            if key.text not in OPTION_KEYS:
                raise self.error(f"unknown option; expected one of {', '.join(OPTION_KEYS)}", key)
            self.expect("=")
            self.locations[("option", key.text)] = (key.line, key.col)
            out.append((key.text, self.option_value()))
        self.expect("}")
        return out

    def option_value(self):
        t = self.tok
        if self.at("["):
            return self.ident_list()
        if t.kind == "IDENT" and t.text in ("true", "false"):
            self.advance()
            return t.text == "true"
        if t.kind == "IDENT" and t.text not in ("pi", "sqrt"):
            self.advance()
            return t.text
        return self.real()


def parse(text):
    """Parse scenario text into a :class:`ScenarioSpec` and check it semantically."""
    spec = Parser(text).parse()
    from .runner import build

    build(spec)
    return spec


def parse_syntax(text):
    """Parse without the semantic pass."""
    return Parser(text).parse()


# --- rendering ----------------------------------------------------------------------


def fmt_real(x):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot render non-finite number {x}")
    return format(x, ".17g")


def fmt_amp(z):
    z = complex(z)
    re_, im = z.real, z.imag
    if im == 0:
        return fmt_real(re_)
    if re_ == 0:
        return fmt_real(im) + "i"
    sign = "-" if math.copysign(1.0, im) < 0 else "+"
    return f"{fmt_real(re_)}{sign}{fmt_real(abs(im))}i"


def fmt_matrix(rows):
    return "[" + "; ".join(", ".join(fmt_amp(z) for z in row) for row in rows) + "]"


def fmt_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return v
    if isinstance(v, tuple):
        return "[" + ", ".join(v) + "]"
    return fmt_real(v)


def render(spec):
    """Canonical text for ``spec``; sections always come out in the same order."""
    name = spec.name.replace("\\", "\\\\").replace('"', '\\"')
    out = [f'scenario "{name}" {{']
    out.append(f"  space dim = {spec.dim} basis = [{', '.join(spec.basis)}]")
    for n, amps in spec.states:
        out.append(f"  state {n} = {', '.join(fmt_amp(z) for z in amps)}")
    for n, rows in spec.unitaries:
        out.append(f"  unitary {n} = {fmt_matrix(rows)}")
    if spec.hamiltonian is not None:
        out.append("  hamiltonian {")
        for lev in spec.hamiltonian.levels:
            parts = ["[" + ", ".join(f"{s} {p} = {fmt_amp(z)}" for s, p, z in vec) + "]"
                     for vec in lev.vectors]
            if lev.complement:
                parts.append("complement")
            out.append(f"    level {fmt_real(lev.energy)}: " + " ".join(parts))
        out.append(f"  }} duration = {fmt_real(spec.hamiltonian.duration)}")
    m = spec.measure
    blocks = ", ".join("[" + ", ".join(b) + "]" for b in m.blocks)
    ds = "".join(f" d {k} = {fmt_matrix(rows)}" for k, rows in m.d)
    out.append(f"  measure {{ blocks = [{blocks}] mode = {m.mode}{ds} }}")
    out.append(f"  preselect {{ basis = {spec.preselect.basis} index = {spec.preselect.index} }}")
    out.append(f"  postselect {{ basis = {spec.postselect.basis} index = {spec.postselect.index} }}")
    if spec.options:
        opts = " ".join(f"{k} = {fmt_value(v)}" for k, v in spec.options)
        out.append(f"  options {{ {opts} }}")
    out.append("}")
    return "\n".join(out) + "\n"
