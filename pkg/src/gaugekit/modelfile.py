"""Model-definition files (``.gk``): tokenizer, LL(1) parser and canonical printer.

Example::

    model "gws" {
      group U SU(2) coupling 0.65
      group V U(1) coupling 0.35
      fermion L rep bifundamental chirality left charge -1
      scalar phi rep bifundamental charge 1 vev 1
      set points 128
    }
"""
import math
import re
from dataclasses import dataclass

from . import gauge as G
from .liealg import su_basis

GRAMMAR = """\
document  := "model" STRING "{" item* "}"
item      := group | fermion | scalar | option
group     := "group" ("U"|"V") gtype "coupling" NUMBER
gtype     := "SU" "(" INT ")" | "U" "(" "1" ")" ["charge" NUMBER]
fermion   := "fermion" IDENT "rep" rep ["chirality" ("left"|"right")] ["charge" NUMBER]
scalar    := "scalar" IDENT "rep" rep ["charge" NUMBER] ["vev" NUMBER]
rep       := "bifundamental" | "fundamental_U" | "fundamental_V" | "singlet"
option    := "set" IDENT NUMBER
comments  := "#" to end of line
options   : seed, points, modes (integers); amplitude, tol (positive);
            v_commutator_sign (+1 or -1, overrides the fitted sign)
"""

OPTION_NAMES = ("seed", "points", "modes", "amplitude", "tol", "v_commutator_sign")
INT_OPTIONS = ("seed", "points", "modes")


class ModelFileError(ValueError):
    def __init__(self, message, line=None, col=None):
        self.line, self.col = line, col
        where = f"line {line}, col {col}: " if line is not None else ""
        super().__init__(where + message)


class ParseError(ModelFileError):
    """Syntax error: the token stream does not match the grammar."""

    def __init__(self, found, expected, line, col):
        self.found, self.expected = found, tuple(expected)
        super().__init__(f"expected {' or '.join(self.expected)}, got {found}", line, col)


class SemanticError(ModelFileError):
    """Well-formed document with inconsistent content."""


# ------------------------------------------------------------------ lexer

@dataclass(frozen=True)
class Token:
    kind: str  # WORD, STRING, NUMBER, PUNCT, EOF
    text: str
    line: int
    col: int

    def describe(self):
        return "end of input" if self.kind == "EOF" else repr(self.text)


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<STRING>"(?:[^"\\\n]|\\["\\])*")
  | (?P<NUMBER>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<WORD>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<PUNCT>[{}()])
""", re.VERBOSE)


def tokenize(text):
    toks, pos, line, start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - start + 1
        if m is None:
            raise ParseError(repr(text[pos]), ["a token"], line, col)
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            toks.append(Token(kind, m.group(), line, col))
        pos = m.end()
    toks.append(Token("EOF", "", line, pos - start + 1))
    return toks


# ------------------------------------------------------------------ document

@dataclass(frozen=True)
class GroupDecl:
    sector: str
    kind: str  # "SU" or "U1"
    n: int
    coupling: float
    charge: float | None = None


@dataclass(frozen=True)
class FieldSpec:
    kind: str
    name: str
    rep: str
    chirality: str = "none"
    charge: float | None = None
    vev: float | None = None


@dataclass(frozen=True)
class ModelDocument:
    name: str
    groups: tuple  # (U, V)
    fields: tuple
    options: tuple  # ((name, value), ...) in file order

    def option(self, name, default=None):
        return dict(self.options).get(name, default)


# ------------------------------------------------------------------ parser

class _Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def fail(self, *expected):
        raise ParseError(self.tok.describe(), expected, self.tok.line, self.tok.col)

    def accept(self, text):
        if self.tok.kind in ("WORD", "PUNCT") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text):
        t = self.tok
        if not self.accept(text):
            self.fail(repr(text))
        return t

    def expect_kind(self, kind, label):
        t = self.tok
        if t.kind != kind:
            self.fail(label)
        self.i += 1
        return t

    def choice(self, options):
        t = self.tok
        if t.kind == "WORD" and t.text in options:
            self.i += 1
            return t
        self.fail(*(repr(o) for o in options))

    def number(self):
        t = self.expect_kind("NUMBER", "NUMBER")
        v = float(t.text)
        if not math.isfinite(v):
            raise SemanticError(f"number {t.text!r} is not finite", t.line, t.col)
        return v, t

    def document(self):
        self.expect("model")
        name = _unquote(self.expect_kind("STRING", "STRING").text)
        self.expect("{")
        groups, fields, options = {}, [], []
        while not self.accept("}"):
            t = self.tok
            if self.accept("group"):
                g = self.group()
                if g.sector in groups:
                    raise SemanticError(f"duplicate group declaration for sector {g.sector}", t.line, t.col)
                groups[g.sector] = g
            elif self.accept("fermion"):
                fields.append((self.fermion(), t))
            elif self.accept("scalar"):
                fields.append((self.scalar(), t))
            elif self.accept("set"):
                key = self.expect_kind("WORD", "IDENT")
                value, vt = self.number()
                options.append((_check_option(key, value, vt, options), value))
            else:
                self.fail("'group'", "'fermion'", "'scalar'", "'set'", "'}'")
        self.expect_kind("EOF", "end of input")
        close = self.toks[self.i - 2]
        for s in "UV":
            if s not in groups:
                raise SemanticError(f"missing group declaration for sector {s}", close.line, close.col)
        groups = (groups["U"], groups["V"])
        seen = set()
        for f, t in fields:
            if f.name in seen:
                raise SemanticError(f"duplicate field name {f.name!r}", t.line, t.col)
            seen.add(f.name)
            for g in groups:
                touches = f.rep in ("bifundamental", f"fundamental_{g.sector}")
                if touches and g.kind == "U1" and f.charge is None and g.charge is None:
                    raise SemanticError(f"field {f.name!r} couples to U(1) sector {g.sector} "
                                        "but neither the field nor the group gives a charge", t.line, t.col)
        return ModelDocument(name, groups, tuple(f for f, _ in fields), tuple(options))

    def group(self):
        sector = self.choice(("U", "V")).text
        t = self.choice(("SU", "U"))
        self.expect("(")
        nt = self.expect_kind("NUMBER", "INT")
        self.expect(")")
        if t.text == "SU":
            if not re.fullmatch(r"\d+", nt.text) or int(nt.text) < 2:
                raise SemanticError(f"SU(n) needs an integer n >= 2, got {nt.text!r}", nt.line, nt.col)
            kind, n, charge = "SU", int(nt.text), None
        else:
            if nt.text != "1":
                raise SemanticError(f"only U(1) is supported, got U({nt.text})", nt.line, nt.col)
            kind, n, charge = "U1", 1, None
            if self.accept("charge"):
                charge = self.number()[0]
        self.expect("coupling")
        g, gt = self.number()
        if g <= 0:
            raise SemanticError(f"coupling must be positive, got {gt.text}", gt.line, gt.col)
        return GroupDecl(sector, kind, n, g, charge)

    def rep(self):
        self.expect("rep")
        t = self.expect_kind("WORD", "representation")
        if t.text not in G.REPS:
            raise SemanticError(f"unknown representation {t.text!r} (known: {', '.join(G.REPS)})", t.line, t.col)
        return t.text

    def fermion(self):
        name = self.expect_kind("WORD", "IDENT").text
        rep = self.rep()
        chirality, charge = "none", None
        if self.accept("chirality"):
            chirality = self.choice(("left", "right")).text
        if self.accept("charge"):
            charge = self.number()[0]
        return FieldSpec("fermion", name, rep, chirality, charge)

    def scalar(self):
        name = self.expect_kind("WORD", "IDENT").text
        rep = self.rep()
        charge = vev = None
        if self.accept("charge"):
            charge = self.number()[0]
        if self.accept("vev"):
            vev = self.number()[0]
        return FieldSpec("scalar", name, rep, "none", charge, vev)


def _check_option(key, value, vt, seen):
    name = key.text
    if name not in OPTION_NAMES:
        raise SemanticError(f"unknown option {name!r} (known: {', '.join(OPTION_NAMES)})", key.line, key.col)
    if any(n == name for n, _ in seen):
        raise SemanticError(f"option {name!r} set twice", key.line, key.col)
    if name in INT_OPTIONS and not float(value).is_integer():
        raise SemanticError(f"option {name!r} needs an integer, got {vt.text}", vt.line, vt.col)
    if name in ("points",) and value < 1 or name == "modes" and value < 0:
        raise SemanticError(f"option {name!r} out of range: {vt.text}", vt.line, vt.col)
    if name in ("amplitude", "tol") and value <= 0:
        raise SemanticError(f"option {name!r} must be positive, got {vt.text}", vt.line, vt.col)
    if name == "v_commutator_sign" and value not in (1.0, -1.0):
        raise SemanticError(f"v_commutator_sign must be 1 or -1, got {vt.text}", vt.line, vt.col)
    return name


def _unquote(s):
    return re.sub(r"\\(.)", r"\1", s[1:-1])


def _quote(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def parse_model_spec(text):
    return _Parser(text).document()


# ------------------------------------------------------------------ printer

def format_number(v):
    v = float(v)
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def print_model(doc):
    """Canonical text: groups U then V, fields and options in document order."""
    out = [f"model {_quote(doc.name)} {{"]
    for g in doc.groups:
        if g.kind == "SU":
            gtype = f"SU({g.n})"
        else:
            gtype = "U(1)" + ("" if g.charge is None else f" charge {format_number(g.charge)}")
        out.append(f"  group {g.sector} {gtype} coupling {format_number(g.coupling)}")
    for f in doc.fields:
        line = f"  {f.kind} {f.name} rep {f.rep}"
        if f.chirality != "none":
            line += f" chirality {f.chirality}"
        if f.charge is not None:
            line += f" charge {format_number(f.charge)}"
        if f.vev is not None:
            line += f" vev {format_number(f.vev)}"
        out.append(line)
    for k, v in doc.options:
        out.append(f"  set {k} {format_number(v)}")
    out.append("}")
    return "\n".join(out) + "\n"


# ------------------------------------------------------------------ conversion

def to_model_spec(doc):
    """ModelSpec for the document, validated."""
    bases = [G.make_basis("U1", 1, g.coupling, g.charge) if g.kind == "U1" else su_basis(g.n, g.coupling)
             for g in doc.groups]
    fields = tuple(G.FieldDecl(f.name, f.kind, f.rep, f.chirality, f.charge, f.vev) for f in doc.fields)
    sign = doc.option("v_commutator_sign")
    return G.ModelSpec(doc.name, bases[0], bases[1], fields, sign).validate()


def option_overrides(doc):
    """File options usable as VerifyOptions fields."""
    out = {}
    for k, v in doc.options:
        if k == "v_commutator_sign":
            continue
        out[k] = int(v) if k in INT_OPTIONS else float(v)
    return out


def load_model_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse_model_spec(fh.read())
