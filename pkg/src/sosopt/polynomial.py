"""Exact multivariate polynomials and polynomial matrices.

Coefficients are stored as :class:`fractions.Fraction`.  A monomial is kept
in sparse form, a sorted tuple of ``(name, exponent)`` pairs, so arithmetic
never has to realign variable tables.  The ``vars`` tuple of a polynomial only
fixes the column order of :attr:`Polynomial.degmat` and the term order.

Canonical term order is graded lexicographic: ascending total degree, and
within a degree the exponent of the first variable descending, then the
second, and so on (``x^2, x*y, y^2``).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from itertools import combinations_with_replacement, product
from numbers import Rational, Real
from typing import Iterable, Mapping, Sequence

import numpy as np

Mono = tuple  # tuple[tuple[str, int], ...], sorted by name

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class PolynomialError(ValueError):
    """Raised for malformed polynomial input or invalid operations."""


@dataclass(frozen=True)
class VarTable:
    """An ordered table of distinct variable names."""

    names: tuple

    def __init__(self, names: Iterable):
        names = tuple(_as_name(n) for n in names)
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise PolynomialError(f"duplicate variable names: {dup}")
        object.__setattr__(self, "names", names)

    def __iter__(self):
        return iter(self.names)

    def __len__(self):
        return len(self.names)

    def __getitem__(self, i):
        return self.names[i]

    def __contains__(self, name):
        return name in self.names

    def index(self, name: str) -> int:
        return self.names.index(name)

    def polys(self) -> list:
        return [Polynomial.var(n) for n in self.names]


def _as_name(v) -> str:
    if isinstance(v, Polynomial):
        if len(v._terms) != 1:
            raise PolynomialError(f"not a variable: {v}")
        (mono, c), = v._terms.items()
        if c != 1 or len(mono) != 1 or mono[0][1] != 1:
            raise PolynomialError(f"not a variable: {v}")
        return mono[0][0]
    if not isinstance(v, str) or not _NAME_RE.match(v):
        raise PolynomialError(f"invalid variable name: {v!r}")
    return v


def _to_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (bool, np.bool_)):
        return Fraction(int(c))
    if isinstance(c, (int, np.integer, Rational)):
        return Fraction(int(c)) if isinstance(c, (int, np.integer)) else Fraction(c)
    if isinstance(c, (float, np.floating)):
        if not math.isfinite(c):
            raise PolynomialError(f"non-finite coefficient {c}")
        return Fraction(float(c))
    if isinstance(c, Real):
        return Fraction(float(c))
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


def mono_mul(a: Mono, b: Mono) -> Mono:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def mono_degree(m: Mono) -> int:
    return sum(e for _, e in m)


def mono_from_exps(names: Sequence[str], exps: Sequence[int]) -> Mono:
    return tuple(sorted((n, int(e)) for n, e in zip(names, exps) if e))


def mono_to_exps(m: Mono, index: Mapping[str, int], n: int) -> tuple:
    out = [0] * n
    for v, e in m:
        out[index[v]] = e
    return tuple(out)


def grlex_key(exps: Sequence[int]):
    return (sum(exps), tuple(-e for e in exps))


def _merge_vars(*tables) -> tuple:
    seen = {}
    for t in tables:
        for n in t:
            seen.setdefault(n, None)
    return tuple(seen)


class Polynomial:
    """Immutable polynomial with exact rational coefficients."""

    __slots__ = ("vars", "_terms", "_digits")

    def __init__(self, terms: Mapping | None = None, vars: Iterable[str] | None = None):
        clean = {}
        used = []
        for mono, c in (terms or {}).items():
            c = _to_fraction(c)
            if c == 0:
                continue
            mono = tuple(sorted((v, int(e)) for v, e in mono if e))
            for v, e in mono:
                if e < 0:
                    raise PolynomialError("negative exponent")
            clean[mono] = clean.get(mono, Fraction(0)) + c
            if clean[mono] == 0:
                del clean[mono]
        for mono in clean:
            used.extend(v for v, _ in mono)
        if vars is None:
            vars = _merge_vars(sorted(set(used)))
        else:
            vars = _merge_vars(tuple(vars), sorted(set(used) - set(vars)))
        self.vars = vars
        self._terms = clean
        self._digits = None

    # construction helpers
    @classmethod
    def var(cls, name: str) -> "Polynomial":
        name = _as_name(name)
        return cls({((name, 1),): 1}, (name,))

    @classmethod
    def const(cls, c) -> "Polynomial":
        return cls({(): c})

    @classmethod
    def from_degmat(cls, vars: Sequence[str], degmat, coeffs) -> "Polynomial":
        vars = VarTable(vars).names
        degmat = np.asarray(degmat, dtype=int).reshape(-1, len(vars))
        coeffs = list(coeffs)
        if len(coeffs) != degmat.shape[0]:
            raise PolynomialError("degmat/coefficient length mismatch")
        if (degmat < 0).any():
            raise PolynomialError("negative exponent")
        terms = {}
        for row, c in zip(degmat, coeffs):
            m = mono_from_exps(vars, row)
            terms[m] = terms.get(m, Fraction(0)) + _to_fraction(c)
        return cls(terms, vars)

    @classmethod
    def monomial(cls, vars: Sequence[str], exps: Sequence[int]) -> "Polynomial":
        return cls({mono_from_exps(vars, exps): 1}, vars)

    # views
    @property
    def terms(self) -> list:
        """List of ``(exponent tuple over vars, coefficient)`` in canonical order."""
        idx = {v: i for i, v in enumerate(self.vars)}
        n = len(self.vars)
        rows = [(mono_to_exps(m, idx, n), c) for m, c in self._terms.items()]
        rows.sort(key=lambda t: grlex_key(t[0]))
        return rows

    @property
    def degmat(self) -> np.ndarray:
        rows = [e for e, _ in self.terms]
        return np.array(rows, dtype=int).reshape(len(rows), len(self.vars))

    @property
    def coeffs(self) -> list:
        return [c for _, c in self.terms]

    def coeff_dict(self) -> dict:
        """Sparse monomial -> coefficient mapping (shared, do not mutate)."""
        return self._terms

    def coefficient(self, mono) -> Fraction:
        if isinstance(mono, Polynomial):
            (mono, _), = mono._terms.items()
        return self._terms.get(tuple(mono), Fraction(0))

    @property
    def nterms(self) -> int:
        return len(self._terms)

    @property
    def degree(self) -> int:
        return max((mono_degree(m) for m in self._terms), default=0)

    def degree_in(self, names: Iterable[str]) -> int:
        names = set(names)
        return max((sum(e for v, e in m if v in names) for m in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not m for m in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get((), Fraction(0))

    def used_vars(self) -> set:
        return {v for m in self._terms for v, _ in m}

    def with_vars(self, vars: Sequence[str]) -> "Polynomial":
        p = Polynomial.__new__(Polynomial)
        p.vars = _merge_vars(tuple(vars), [v for v in self.vars if v in self.used_vars()])
        p._terms = self._terms
        p._digits = self._digits
        return p

    # arithmetic
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        return Polynomial.const(_to_fraction(other))

    def _new(self, terms, vars) -> "Polynomial":
        p = Polynomial.__new__(Polynomial)
        p._terms = {m: c for m, c in terms.items() if c != 0}
        p.vars = vars
        p._digits = None
        return p

    def __add__(self, other):
        if isinstance(other, (PolyMatrix, np.ndarray)):
            return NotImplemented
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        terms = dict(self._terms)
        for m, c in other._terms.items():
            terms[m] = terms.get(m, 0) + c
        return self._new(terms, _merge_vars(self.vars, other.vars))

    __radd__ = __add__

    def __neg__(self):
        return self._new({m: -c for m, c in self._terms.items()}, self.vars)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, (PolyMatrix, np.ndarray)):
            return NotImplemented
        try:
            return self + (-self._coerce(other))
        except TypeError:
            return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (PolyMatrix, np.ndarray)):
            return NotImplemented
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        terms = {}
        for ma, ca in self._terms.items():
            for mb, cb in other._terms.items():
                m = mono_mul(ma, mb)
                terms[m] = terms.get(m, 0) + ca * cb
        return self._new(terms, _merge_vars(self.vars, other.vars))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Polynomial):
            if not other.is_constant() or other.is_zero():
                raise PolynomialError("division by a non-constant polynomial is not supported")
            other = other.constant_term()
        c = _to_fraction(other)
        if c == 0:
            raise ZeroDivisionError("polynomial division by zero")
        return self._new({m: v / c for m, v in self._terms.items()}, self.vars)

    def __pow__(self, k):
        if isinstance(k, Polynomial) and k.is_constant():
            k = k.constant_term()
        if isinstance(k, Fraction) and k.denominator == 1:
            k = int(k)
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise PolynomialError(f"exponent must be a non-negative integer, got {k!r}")
        result = Polynomial.const(1).with_vars(self.vars)
        base = self
        k = int(k)
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self._terms == other._terms
        try:
            return self._terms == Polynomial.const(_to_fraction(other))._terms
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    # calculus and evaluation
    def diff(self, var) -> "Polynomial":
        var = _as_name(var)
        terms = {}
        for m, c in self._terms.items():
            d = dict(m)
            e = d.get(var, 0)
            if not e:
                continue
            d[var] = e - 1
            nm = tuple(sorted((v, k) for v, k in d.items() if k))
            terms[nm] = terms.get(nm, 0) + c * e
        return self._new(terms, self.vars)

    def gradient(self, vars) -> list:
        return [self.diff(v) for v in vars]

    def evaluate(self, point) -> Fraction:
        """Exact value at ``point`` (mapping name -> number, or sequence over vars)."""
        if not isinstance(point, Mapping):
            point = dict(zip(self.vars, point))
        vals = {k: _to_fraction(v) for k, v in point.items()}
        missing = self.used_vars() - set(vals)
        if missing:
            raise PolynomialError(f"no value for variables {sorted(missing)}")
        total = Fraction(0)
        for m, c in self._terms.items():
            t = c
            for v, e in m:
                t *= vals[v] ** e
            total += t
        return total

    def evaluate_float(self, point) -> float:
        if not isinstance(point, Mapping):
            point = dict(zip(self.vars, point))
        total = 0.0
        for m, c in self._terms.items():
            t = float(c)
            for v, e in m:
                t *= float(point[v]) ** e
            total += t
        return total

    def subs(self, values: Mapping) -> "Polynomial":
        """Substitute numbers or polynomials for some variables."""
        values = {_as_name(k) if not isinstance(k, str) else k: v for k, v in values.items()}
        out = Polynomial({}, [v for v in self.vars if v not in values])
        cache = {}
        for m, c in self._terms.items():
            keep = tuple((v, e) for v, e in m if v not in values)
            t = Polynomial({keep: c})
            for v, e in m:
                if v in values:
                    key = (v, e)
                    if key not in cache:
                        val = values[v]
                        cache[key] = (val if isinstance(val, Polynomial) else Polynomial.const(val)) ** e
                    t = t * cache[key]
            out = out + t
        return out.with_vars([v for v in self.vars if v not in values])

    def coefficients_in(self, names: Iterable[str]) -> dict:
        """Split into ``{monomial in names: polynomial in the other variables}``."""
        names = set(names)
        groups = {}
        for m, c in self._terms.items():
            inner = tuple((v, e) for v, e in m if v in names)
            rest = tuple((v, e) for v, e in m if v not in names)
            groups.setdefault(inner, {})[rest] = c
        return {k: Polynomial(v) for k, v in groups.items()}

    # display
    def __str__(self):
        return format_poly(self, self._digits)

    def __repr__(self):
        return f"Polynomial({format_poly(self)!r})"

    def to_float_dict(self) -> dict:
        return {m: float(c) for m, c in self._terms.items()}

    def round_display(self, digits: int) -> "Polynomial":
        """Same polynomial, printed with ``digits`` significant digits."""
        p = self._new(self._terms, self.vars)
        p._digits = digits
        return p


def _format_coeff(c: Fraction, digits: int | None) -> str:
    if digits is None:
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return format_number(c, digits)


def format_number(c, digits: int) -> str:
    """Round to ``digits`` significant digits, half to even."""
    c = Fraction(c)
    if c.denominator == 1 and abs(c.numerator) < 10 ** digits:
        return str(c.numerator)
    d = Decimal(c.numerator) / Decimal(c.denominator)
    if d == 0:
        return "0"
    exp = d.adjusted() - digits + 1
    q = d.quantize(Decimal(1).scaleb(exp), rounding=ROUND_HALF_EVEN)
    if q == q.to_integral_value():
        return str(int(q))
    q = q.normalize()
    if q.adjusted() < -4:
        return format(q, "e").replace("e-0", "e-").replace("E", "e")
    return format(q, "f")


def format_poly(p: Polynomial, digits: int | None = None) -> str:
    terms = p.terms
    if not terms:
        return "0"
    parts = []
    for exps, c in terms:
        factors = []
        for v, e in zip(p.vars, exps):
            if e == 1:
                factors.append(v)
            elif e > 1:
                factors.append(f"{v}^{e}")
        mag = _format_coeff(abs(c), digits)
        if not factors:
            body = mag
        elif mag == "1":
            body = "*".join(factors)
        else:
            body = mag + "*" + "*".join(factors)
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


# parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+(?:[eE][-+]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>\*\*|[-+*/^()]))"
)


def _tokenize(text: str) -> list:
    pos = 0
    toks = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise PolynomialError(f"unexpected character {text[pos:].strip()[:1]!r} at position {pos}")
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return toks


class _Parser:
    def __init__(self, text, table):
        self.toks = _tokenize(text)
        self.i = 0
        self.table = table

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, None)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def parse(self):
        if not self.toks:
            raise PolynomialError("empty polynomial text")
        p = self.sum()
        if self.i != len(self.toks):
            _, val, pos = self.peek()
            raise PolynomialError(f"unexpected token {val!r} at position {pos}")
        return p

    def sum(self):
        sign = 1
        kind, val, _ = self.peek()
        if val in ("+", "-"):
            self.take()
            sign = -1 if val == "-" else 1
        p = self.product() * sign
        while True:
            kind, val, _ = self.peek()
            if val not in ("+", "-"):
                return p
            self.take()
            t = self.product()
            p = p + t if val == "+" else p - t
        return p

    def product(self):
        p = self.power()
        while True:
            kind, val, pos = self.peek()
            if val == "*":
                self.take()
                p = p * self.power()
            elif val == "/":
                self.take()
                d = self.power()
                if not d.is_constant() or d.is_zero():
                    raise PolynomialError(f"division by a non-constant or zero at position {pos}")
                p = p / d.constant_term()
            elif kind in ("name", "num") or val == "(":
                p = p * self.power()
            else:
                return p

    def power(self):
        base = self.atom()
        kind, val, pos = self.peek()
        if val in ("^", "**"):
            self.take()
            k, v, p2 = self.take()
            if k != "num" or not v.isdigit():
                shown = v if v is not None else "end of input"
                raise PolynomialError(f"exponent must be a non-negative integer, got {shown!r} at position {p2 if p2 is not None else pos}")
            return base ** int(v)
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Polynomial.const(Fraction(val))
        if kind == "name":
            if self.table is not None and val not in self.table:
                raise PolynomialError(f"unknown variable {val!r} at position {pos}")
            return Polynomial.var(val)
        if val == "(":
            p = self.sum()
            k, v, p2 = self.take()
            if v != ")":
                raise PolynomialError(f"missing ')' at position {p2 if p2 is not None else pos}")
            return p
        if kind is None:
            raise PolynomialError("unexpected end of input")
        raise PolynomialError(f"unexpected token {val!r} at position {pos}")


def poly_parse(text: str, vars=None) -> Polynomial:
    """Parse polynomial text.  With ``vars`` given, other names are errors.

    Accepts sums of terms such as ``2*x^2 - 3/4 x*y + 0.5``; parentheses and
    ``**`` are also understood.
    """
    if not isinstance(text, str):
        raise TypeError("polynomial text must be a string")
    table = None if vars is None else VarTable(vars)
    p = _Parser(text, table).parse()
    if table is not None:
        return p.with_vars(table.names)
    names = [v for k, v, _ in _tokenize(text) if k == "name"]
    return p.with_vars(_merge_vars(names))


def infer_vars(text: str) -> tuple:
    return _merge_vars(v for k, v, _ in _tokenize(text) if k == "name")


# monomial generation

def _names(vars) -> tuple:
    if isinstance(vars, VarTable):
        return vars.names
    if isinstance(vars, (str, Polynomial)):
        vars = [vars]
    return VarTable(vars).names


def exponents_of_degree(n: int, d: int) -> list:
    """All exponent tuples of length ``n`` and total degree ``d``, grlex order."""
    out = []
    for combo in combinations_with_replacement(range(n), d):
        e = [0] * n
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return out


def monomials(vars, degrees) -> list:
    """All monomials in ``vars`` with total degree in ``degrees``.

    Ordered by degree ascending, then grlex within a degree.
    """
    names = _names(vars)
    if isinstance(degrees, (int, np.integer)):
        degrees = [int(degrees)]
    degrees = sorted(set(int(d) for d in degrees))
    if any(d < 0 for d in degrees):
        raise PolynomialError("degrees must be non-negative")
    out = []
    for d in degrees:
        for e in exponents_of_degree(len(names), d):
            out.append(Polynomial.monomial(names, e))
    return out


def mpmonomials(partitions, degrees) -> list:
    """Products of per-partition monomials.

    ``degrees[i]`` (an int or a collection) gives the allowed total degrees
    in partition ``i``.  The first partition varies fastest.
    """
    parts = [_names(p) for p in partitions]
    flat = [n for p in parts for n in p]
    if len(set(flat)) != len(flat):
        raise PolynomialError("partitions must be disjoint")
    if len(degrees) != len(parts):
        raise PolynomialError("one degree specification per partition is required")
    per = [monomials(p, d) for p, d in zip(parts, degrees)]
    out = []
    for combo in product(*reversed(per)):
        m = Polynomial.const(1)
        for f in reversed(combo):
            m = m * f
        out.append(m.with_vars(flat))
    return out


def monomial_exps(p: Polynomial, names: Sequence[str]) -> tuple:
    """Exponent tuple of a monomial ``p`` (coefficient one) over ``names``."""
    if p.nterms != 1:
        raise PolynomialError(f"not a monomial: {p}")
    (m, c), = p._terms.items()
    if c != 1:
        raise PolynomialError(f"monomial must have coefficient 1: {p}")
    idx = {v: i for i, v in enumerate(names)}
    for v, _ in m:
        if v not in idx:
            raise PolynomialError(f"monomial {p} uses variable {v!r} outside the table")
    return mono_to_exps(m, idx, len(names))


def as_poly(x) -> Polynomial:
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, str):
        return poly_parse(x)
    return Polynomial.const(x)


class PolyMatrix:
    """Dense matrix of polynomials (full storage)."""

    __slots__ = ("entries", "shape", "symmetric")

    def __init__(self, entries, symmetric: bool | None = None):
        rows = [[as_poly(e) for e in row] for row in entries]
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise PolynomialError("matrix rows must be non-empty and of equal length")
        self.entries = rows
        self.shape = (len(rows), len(rows[0]))
        if symmetric is None:
            symmetric = self.is_symmetric()
        elif symmetric and not self.is_symmetric():
            raise PolynomialError("matrix marked symmetric but entries differ")
        self.symmetric = bool(symmetric)

    @classmethod
    def from_array(cls, arr) -> "PolyMatrix":
        arr = np.atleast_2d(np.asarray(arr, dtype=object))
        return cls([[as_poly(v) if not isinstance(v, Polynomial) else v for v in row] for row in arr])

    @classmethod
    def identity(cls, n: int) -> "PolyMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def column(cls, polys) -> "PolyMatrix":
        return cls([[p] for p in polys])

    def is_symmetric(self) -> bool:
        r, c = self.shape
        if r != c:
            return False
        return all(self.entries[i][j] == self.entries[j][i] for i in range(r) for j in range(i + 1, r))

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    @property
    def T(self) -> "PolyMatrix":
        r, c = self.shape
        return PolyMatrix([[self.entries[i][j] for i in range(r)] for j in range(c)])

    def _other(self, other):
        if isinstance(other, PolyMatrix):
            return other
        if isinstance(other, np.ndarray):
            return PolyMatrix.from_array(other)
        return None

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if o.shape != self.shape:
            raise PolynomialError(f"shape mismatch {self.shape} vs {o.shape}")
        return PolyMatrix([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, o.entries)])

    __radd__ = __add__

    def __neg__(self):
        return PolyMatrix([[-a for a in r] for r in self.entries])

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, s):
        if isinstance(s, (PolyMatrix, np.ndarray)):
            return NotImplemented
        s = as_poly(s)
        return PolyMatrix([[a * s for a in r] for r in self.entries])

    __rmul__ = __mul__

    def __matmul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if self.shape[1] != o.shape[0]:
            raise PolynomialError(f"shape mismatch {self.shape} @ {o.shape}")
        out = []
        for i in range(self.shape[0]):
            row = []
            for j in range(o.shape[1]):
                acc = Polynomial()
                for k in range(self.shape[1]):
                    a, b = self.entries[i][k], o.entries[k][j]
                    if not a.is_zero() and not b.is_zero():
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return PolyMatrix(out)

    def __rmatmul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o @ self

    def __eq__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self.shape == other.shape and all(
            a == b for ra, rb in zip(self.entries, other.entries) for a, b in zip(ra, rb)
        )

    def __hash__(self):
        return hash(tuple(hash(a) for r in self.entries for a in r))

    def used_vars(self) -> set:
        return set().union(*(a.used_vars() for r in self.entries for a in r))

    @property
    def degree(self) -> int:
        return max(a.degree for r in self.entries for a in r)

    def subs(self, values) -> "PolyMatrix":
        return PolyMatrix([[a.subs(values) for a in r] for r in self.entries])

    def evaluate_float(self, point) -> np.ndarray:
        return np.array([[a.evaluate_float(point) for a in r] for r in self.entries])

    def __repr__(self):
        body = "; ".join(", ".join(str(a) for a in r) for r in self.entries)
        return f"PolyMatrix([{body}])"


def poly_add(a, b):
    return as_poly(a) + b


def poly_sub(a, b):
    return as_poly(a) - b


def poly_mul(a, b):
    return as_poly(a) * b


def poly_pow(p, k):
    return as_poly(p) ** k


def diff(p, var):
    return as_poly(p).diff(var)


def evaluate(p, point):
    return as_poly(p).evaluate(point)
