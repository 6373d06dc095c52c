"""Sum-of-squares program declaration.

A :class:`SosProgram` records independent variables, decision variables and
constraints in coefficient form.  Decision variables are ordinary polynomial
variables (``coeff_17`` and friends), so user expressions are built with
plain :class:`~sosopt.polynomial.Polynomial` arithmetic.

Constraints are stored as ``p(x) = sum_j (sum_d At[d, j] c_d + b_j) x^Z_j``
over the program variable table (independent variables followed by the
``Mvar_`` pool used for matrix inequalities).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .polynomial import (
    PolyMatrix,
    Polynomial,
    PolynomialError,
    VarTable,
    as_poly,
    grlex_key,
    monomial_exps,
    monomials,
    mono_to_exps,
)

RESERVED_PREFIXES = ("coeff_", "Mvar_")
FORMAT_TAG = "sosopt-program"
FORMAT_VERSION = 1


class ModelError(ValueError):
    """Invalid program declaration."""


class SchemaError(ModelError):
    """Malformed serialized program; ``pointer`` is a JSON pointer."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


@dataclass
class ProgramVar:
    kind: str  # poly | sos | polymatrix | sosmatrix
    Z: list  # exponent tuples over the independent variables
    start: int
    stop: int
    matdims: tuple = (1, 1)
    symmetric: bool = False
    wscoeff: bool = False

    @property
    def block_size(self) -> int:
        """Gram dimension for the sos kinds."""
        return len(self.Z) * self.matdims[0]

    @property
    def is_psd(self) -> bool:
        return self.kind in ("sos", "sosmatrix")


@dataclass
class Constraint:
    kind: str  # eq | ineq | matrixineq
    At: list  # (decvar index, row index, Fraction)
    b: list  # Fraction per row
    Z: list  # exponent tuples over prog.allvars
    aux: dict = field(default_factory=dict)

    @property
    def nrows(self) -> int:
        return len(self.Z)


def _check_user_name(name: str, what: str):
    for pre in RESERVED_PREFIXES:
        if name.startswith(pre):
            raise ModelError(f"{what} name {name!r} uses the reserved prefix {pre!r}")


class SosProgram:
    """Mutable container of variables and constraints."""

    def __init__(self, vars: Sequence = (), decvars: Sequence = ()):
        table = VarTable(vars)
        for n in table:
            _check_user_name(n, "independent variable")
        dec = VarTable(decvars)
        for n in dec:
            _check_user_name(n, "decision variable")
            if n in table:
                raise ModelError(f"{n!r} declared both as independent and decision variable")
        self.vartable = table.names
        self.matvartable: tuple = ()
        self.decvars: list = []
        self._decindex: dict = {}
        self.user_decvars: list = []
        self.vars: list = []
        self.exprs: list = []
        self.objective: dict = {}
        self.frozen = False
        for n in dec:
            self._new_decvar(n)
            self.user_decvars.append(len(self.decvars) - 1)

    # bookkeeping
    @property
    def allvars(self) -> tuple:
        return self.vartable + self.matvartable

    @property
    def ndecvars(self) -> int:
        return len(self.decvars)

    def decvar_index(self, name) -> int:
        if isinstance(name, Polynomial):
            name = next(iter(name.used_vars()))
        try:
            return self._decindex[name]
        except KeyError:
            raise ModelError(f"{name!r} is not a decision variable of this program") from None

    def decvar(self, name) -> Polynomial:
        self.decvar_index(name)
        return Polynomial.var(name)

    def _check_mutable(self):
        if self.frozen:
            raise ModelError("program has been solved and can no longer be modified")

    def _new_decvar(self, name=None) -> Polynomial:
        k = len(self.decvars)
        if name is None:
            name = f"coeff_{k + 1}"
        self.decvars.append(name)
        self._decindex[name] = k
        return Polynomial.var(name)

    def _basis(self, Z) -> list:
        if isinstance(Z, Polynomial):
            Z = [Z]
        rows = []
        for z in Z:
            if isinstance(z, Polynomial):
                bad = z.used_vars() - set(self.vartable)
                if bad:
                    raise ModelError(f"monomial {z} uses non-independent variables {sorted(bad)}")
                try:
                    rows.append(monomial_exps(z, self.vartable))
                except PolynomialError as e:
                    raise ModelError(str(e)) from None
            else:
                e = tuple(int(v) for v in z)
                if len(e) != len(self.vartable) or min(e, default=0) < 0:
                    raise ModelError(f"bad exponent row {z!r}")
                rows.append(e)
        if len(set(rows)) != len(rows):
            raise ModelError("monomial vector has duplicate entries")
        return rows

    def _mono(self, exps) -> Polynomial:
        return Polynomial.monomial(self.vartable, exps)

    # declarations
    def decvar_new(self, names) -> list:
        self._check_mutable()
        if isinstance(names, (str, Polynomial)):
            names = [names]
        out = []
        for n in VarTable(names):
            _check_user_name(n, "decision variable")
            if n in self._decindex or n in self.allvars:
                raise ModelError(f"variable {n!r} already declared")
            out.append(self._new_decvar(n))
            self.user_decvars.append(len(self.decvars) - 1)
        return out

    def polyvar(self, Z, wscoeff: bool = False) -> Polynomial:
        self._check_mutable()
        rows = self._basis(Z)
        start = len(self.decvars)
        p = Polynomial({}, self.vartable)
        for e in rows:
            p = p + self._new_decvar() * self._mono(e)
        self.vars.append(ProgramVar("poly", rows, start, len(self.decvars), wscoeff=wscoeff))
        return p

    def sosvar(self, Z, wscoeff: bool = False) -> Polynomial:
        self._check_mutable()
        rows = self._basis(Z)
        m = len(rows)
        start = len(self.decvars)
        p = Polynomial({}, self.vartable)
        for i in range(m):
            for j in range(i, m):
                q = self._new_decvar()
                w = 1 if i == j else 2
                p = p + q * self._mono(tuple(a + b for a, b in zip(rows[i], rows[j]))) * w
        self.vars.append(ProgramVar("sos", rows, start, len(self.decvars), wscoeff=wscoeff))
        return p

    def polymatrixvar(self, Z, dims, symmetric: bool = False) -> PolyMatrix:
        self._check_mutable()
        rows = self._basis(Z)
        r, c = _dims(dims)
        if symmetric and r != c:
            raise ModelError("symmetric matrix variable must be square")
        start = len(self.decvars)
        ent = [[None] * c for _ in range(r)]
        for i in range(r):
            for j in range(c):
                if symmetric and j < i:
                    ent[i][j] = ent[j][i]
                    continue
                p = Polynomial({}, self.vartable)
                for e in rows:
                    p = p + self._new_decvar() * self._mono(e)
                ent[i][j] = p
        self.vars.append(ProgramVar("polymatrix", rows, start, len(self.decvars), (r, c), symmetric))
        return PolyMatrix(ent, symmetric=symmetric)

    def sosmatrixvar(self, Z, dims, symmetric: bool = True) -> PolyMatrix:
        self._check_mutable()
        rows = self._basis(Z)
        r, c = _dims(dims)
        if r != c:
            raise ModelError("SOS matrix variable must be square")
        if not symmetric:
            raise ModelError("SOS matrix variables are always symmetric")
        m = len(rows)
        n = r * m
        start = len(self.decvars)
        Q = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                Q[i][j] = Q[j][i] = self._new_decvar()
        ent = [[None] * r for _ in range(r)]
        for k in range(r):
            for l in range(k, r):
                p = Polynomial({}, self.vartable)
                for i in range(m):
                    for j in range(m):
                        mono = self._mono(tuple(a + b for a, b in zip(rows[i], rows[j])))
                        p = p + Q[k * m + i][l * m + j] * mono
                ent[k][l] = ent[l][k] = p
        self.vars.append(ProgramVar("sosmatrix", rows, start, len(self.decvars), (r, r), True))
        return PolyMatrix(ent, symmetric=True)

    # constraints
    def _coefficient_form(self, p: Polynomial, what: str):
        allowed_indep = set(self.allvars)
        dec = self._decindex
        idx = {v: i for i, v in enumerate(self.allvars)}
        nall = len(self.allvars)
        rows: dict = {}
        for mono, c in p.coeff_dict().items():
            dpart = [(v, e) for v, e in mono if v in dec]
            ipart = tuple((v, e) for v, e in mono if v not in dec)
            for v, _ in ipart:
                if v not in allowed_indep:
                    raise ModelError(f"{what}: unknown variable {v!r}")
            ddeg = sum(e for _, e in dpart)
            if ddeg > 1:
                raise ModelError(f"{what}: expression is not affine in the decision variables")
            key = mono_to_exps(ipart, idx, nall)
            lin, const = rows.get(key, ({}, Fraction(0)))
            if ddeg == 0:
                const += c
            else:
                d = dec[dpart[0][0]]
                lin[d] = lin.get(d, Fraction(0)) + c
            rows[key] = (lin, const)
        Z = sorted(rows, key=grlex_key)
        At, b = [], []
        for j, z in enumerate(Z):
            lin, const = rows[z]
            for d in sorted(lin):
                if lin[d] != 0:
                    At.append((d, j, lin[d]))
            b.append(const)
        keep = [j for j, z in enumerate(Z) if b[j] != 0 or any(t[1] == j for t in At)]
        if len(keep) != len(Z):
            remap = {j: k for k, j in enumerate(keep)}
            At = [(d, remap[j], v) for d, j, v in At if v != 0]
            Z = [Z[j] for j in keep]
            b = [b[j] for j in keep]
        return At, b, Z

    def eq(self, p):
        self._check_mutable()
        if isinstance(p, PolyMatrix):
            for row_i, row in enumerate(p.entries):
                for e in row:
                    self.eq(e)
            return
        p = as_poly(p)
        At, b, Z = self._coefficient_form(p, "soseq")
        if not Z:
            return
        self.exprs.append(Constraint("eq", At, b, Z))

    def ineq(self, p, option=None, extra=None):
        self._check_mutable()
        if isinstance(p, PolyMatrix):
            raise ModelError("sosineq takes scalar polynomials; use sosmatrixineq for matrices")
        p = as_poly(p)
        aux = {"basis": "heuristic"}
        if option is None:
            pass
        elif isinstance(option, str) and option == "sparse":
            aux = {"basis": "newton"}
        elif isinstance(option, str) and option == "sparsemultipartite":
            aux = {"basis": "multipartite", "partitions": self._partitions(extra)}
        elif isinstance(option, (tuple, list)) and len(option) == 2 and option[0] == "sparsemultipartite":
            aux = {"basis": "multipartite", "partitions": self._partitions(option[1])}
        elif isinstance(option, (tuple, list)) and len(option) == 2:
            return self._range_ineq(p, option)
        else:
            raise ModelError(f"unknown sosineq option {option!r}")
        At, b, Z = self._coefficient_form(p, "sosineq")
        self.exprs.append(Constraint("ineq", At, b, Z, aux))

    def _partitions(self, parts) -> list:
        if not parts:
            raise ModelError("sparsemultipartite needs a list of variable partitions")
        out, seen = [], set()
        for part in parts:
            names = VarTable(part if not isinstance(part, (str, Polynomial)) else [part]).names
            cols = []
            for n in names:
                if n not in self.vartable:
                    raise ModelError(f"partition variable {n!r} is not an independent variable")
                if n in seen:
                    raise ModelError(f"variable {n!r} appears in two partitions")
                seen.add(n)
                cols.append(self.vartable.index(n))
            out.append(cols)
        return out

    def _range_ineq(self, p: Polynomial, interval):
        lo, hi = (Fraction(v) if not isinstance(v, float) else Fraction(v) for v in interval)
        if not lo < hi:
            raise ModelError(f"empty interval [{lo}, {hi}]")
        indep = sorted((p.used_vars() - set(self._decindex)))
        if len(indep) > 1:
            raise ModelError("interval option requires an expression univariate in the independent variables")
        if indep:
            x = indep[0]
        elif len(self.vartable) == 1:
            x = self.vartable[0]
        else:
            raise ModelError("interval option requires a single independent variable")
        if x not in self.vartable:
            raise ModelError(f"unknown variable {x!r}")
        deg = p.degree_in([x])
        d0 = deg + (deg % 2)
        d1 = (deg - 2) + (deg % 2)
        X = Polynomial.var(x)
        expr = p
        col = self.vartable.index(x)
        if deg >= 1:
            Z1 = [tuple(k if i == col else 0 for i in range(len(self.vartable))) for k in range(d1 // 2 + 1)]
            s1 = self.sosvar(Z1)
            expr = p - (X - lo) * (hi - X) * s1
        Z0 = [tuple(k if i == col else 0 for i in range(len(self.vartable))) for k in range(d0 // 2 + 1)]
        At, b, Z = self._coefficient_form(expr, "sosineq")
        self.exprs.append(Constraint("ineq", At, b, Z, {"basis": "explicit", "gram_basis": Z0}))

    def _ensure_mvars(self, r: int):
        if len(self.matvartable) >= r:
            return
        new = tuple(f"Mvar_{k + 1}" for k in range(len(self.matvartable), r))
        grow = len(new)
        for c in self.exprs:
            c.Z = [z + (0,) * grow for z in c.Z]
        self.matvartable = self.matvartable + new

    def matrixineq(self, M, mode: str = "quadraticMineq"):
        self._check_mutable()
        if not isinstance(M, PolyMatrix):
            M = PolyMatrix.from_array(M)
        r, c = M.shape
        if r != c:
            raise ModelError(f"matrix inequality needs a square matrix, got {r}x{c}")
        if not M.is_symmetric():
            raise ModelError("matrix inequality needs a symmetric matrix")
        if mode not in ("quadraticMineq", "Mineq"):
            raise ModelError(f"unknown matrix inequality mode {mode!r}")
        self._ensure_mvars(r)
        ys = [Polynomial.var(f"Mvar_{k + 1}") for k in range(r)]
        expr = Polynomial({}, self.allvars)
        for k in range(r):
            for l in range(r):
                e = M.entries[k][l]
                if not e.is_zero():
                    expr = expr + ys[k] * ys[l] * e
        At, b, Z = self._coefficient_form(expr, "sosmatrixineq")
        nx = len(self.vartable)
        if mode == "quadraticMineq":
            parts = [list(range(nx)), list(range(nx, nx + r))]
            self.exprs.append(Constraint("ineq", At, b, Z, {"basis": "multipartite", "partitions": parts}))
        else:
            self.exprs.append(Constraint("matrixineq", At, b, Z, {"basis": "mineq", "mdim": r}))

    def setobj(self, obj):
        self._check_mutable()
        obj = as_poly(obj)
        extra = obj.used_vars() - set(self._decindex)
        if extra:
            raise ModelError(f"objective contains non-decision variables {sorted(extra)}")
        out = {}
        for mono, c in obj.coeff_dict().items():
            if not mono:
                continue
            if len(mono) != 1 or mono[0][1] != 1:
                raise ModelError("objective must be affine in the decision variables")
            out[self._decindex[mono[0][0]]] = c
        self.objective = dict(sorted(out.items()))

    # views
    def var_of_decvar(self, d: int):
        for v in self.vars:
            if v.start <= d < v.stop:
                return v
        return None

    def expr_poly(self, i: int, values=None) -> Polynomial:
        """Constraint ``i`` as a polynomial, optionally with decision values substituted."""
        c = self.exprs[i]
        terms = {}
        names = self.allvars
        for j, z in enumerate(c.Z):
            mono = tuple(sorted((n, e) for n, e in zip(names, z) if e))
            terms[mono] = Fraction(c.b[j])
        if values is None:
            p = Polynomial(terms, names)
            for d, j, v in c.At:
                mono = tuple(sorted((n, e) for n, e in zip(names, c.Z[j]) if e))
                p = p + Polynomial({tuple(sorted(mono + ((self.decvars[d], 1),))): v})
            return p.with_vars(names)
        for d, j, v in c.At:
            mono = tuple(sorted((n, e) for n, e in zip(names, c.Z[j]) if e))
            terms[mono] = terms.get(mono, 0) + v * Fraction(float(values[d]))
        return Polynomial(terms, names)

    def __repr__(self):
        return (
            f"SosProgram(vars={list(self.vartable)}, decvars={len(self.decvars)}, "
            f"constraints={len(self.exprs)})"
        )


def _dims(dims):
    if isinstance(dims, int):
        return dims, dims
    r, c = dims
    if r < 1 or c < 1:
        raise ModelError("matrix dimensions must be positive")
    return int(r), int(c)


# functional interface mirroring the classic toolbox


def sosprogram(vars=(), decvars=()) -> SosProgram:
    return SosProgram(vars, decvars)


def sosdecvar(prog: SosProgram, names):
    return prog, prog.decvar_new(names)


def sospolyvar(prog: SosProgram, Z, wscoeff: bool = False):
    return prog, prog.polyvar(Z, wscoeff)


def sossosvar(prog: SosProgram, Z, wscoeff: bool = False):
    return prog, prog.sosvar(Z, wscoeff)


def sospolymatrixvar(prog: SosProgram, Z, dims, symmetric: bool = False):
    return prog, prog.polymatrixvar(Z, dims, symmetric)


def sossosmatrixvar(prog: SosProgram, Z, dims, symmetric: bool = True):
    return prog, prog.sosmatrixvar(Z, dims, symmetric)


def soseq(prog: SosProgram, p) -> SosProgram:
    prog.eq(p)
    return prog


def sosineq(prog: SosProgram, p, option=None, extra=None) -> SosProgram:
    prog.ineq(p, option, extra)
    return prog


def sosmatrixineq(prog: SosProgram, M, mode: str = "quadraticMineq") -> SosProgram:
    prog.matrixineq(M, mode)
    return prog


def sossetobj(prog: SosProgram, obj) -> SosProgram:
    prog.setobj(obj)
    return prog


# serialization


def _frac_str(f: Fraction) -> str:
    f = Fraction(f)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def program_to_dict(prog: SosProgram) -> dict:
    return {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "vartable": list(prog.vartable),
        "matvartable": list(prog.matvartable),
        "decvars": list(prog.decvars),
        "user_decvars": list(prog.user_decvars),
        "vars": [
            {
                "kind": v.kind,
                "Z": [list(z) for z in v.Z],
                "idx": [v.start, v.stop],
                "matdims": list(v.matdims),
                "symmetric": v.symmetric,
                "wscoeff": v.wscoeff,
            }
            for v in prog.vars
        ],
        "exprs": [
            {
                "kind": c.kind,
                "At": [[d, j, _frac_str(v)] for d, j, v in c.At],
                "b": [_frac_str(v) for v in c.b],
                "Z": [list(z) for z in c.Z],
                "aux": _aux_to_json(c.aux),
            }
            for c in prog.exprs
        ],
        "objective": [[d, _frac_str(v)] for d, v in sorted(prog.objective.items())],
    }


def _aux_to_json(aux: dict) -> dict:
    out = {}
    for k in sorted(aux):
        v = aux[k]
        if k == "gram_basis":
            v = [list(z) for z in v]
        out[k] = v
    return out


def serialize(prog: SosProgram) -> str:
    return json.dumps(program_to_dict(prog), sort_keys=True, separators=(",", ":"))


_TOP_FIELDS = {"format", "version", "vartable", "matvartable", "decvars", "user_decvars", "vars", "exprs", "objective"}
_VAR_FIELDS = {"kind", "Z", "idx", "matdims", "symmetric", "wscoeff"}
_EXPR_FIELDS = {"kind", "At", "b", "Z", "aux"}


def _warn_unknown(obj: dict, known: set, pointer: str):
    for k in sorted(set(obj) - known):
        warnings.warn(f"{pointer}/{k}: unknown field ignored", stacklevel=3)


def _req(obj, key, typ, pointer):
    if key not in obj:
        raise SchemaError(pointer, f"missing field {key!r}")
    v = obj[key]
    if not isinstance(v, typ) or (typ is int and isinstance(v, bool)):
        name = typ.__name__ if isinstance(typ, type) else "/".join(t.__name__ for t in typ)
        raise SchemaError(f"{pointer}/{key}", f"expected {name}")
    return v


def _frac(v, pointer) -> Fraction:
    if isinstance(v, bool):
        raise SchemaError(pointer, "expected a rational number")
    try:
        return Fraction(v)
    except (TypeError, ValueError, ZeroDivisionError):
        raise SchemaError(pointer, f"not a rational number: {v!r}") from None


def _exps(rows, n, pointer) -> list:
    if not isinstance(rows, list):
        raise SchemaError(pointer, "expected a list of exponent rows")
    out = []
    for i, r in enumerate(rows):
        if not isinstance(r, list) or len(r) != n or not all(isinstance(e, int) and not isinstance(e, bool) and e >= 0 for e in r):
            raise SchemaError(f"{pointer}/{i}", f"expected {n} non-negative integers")
        out.append(tuple(r))
    return out


def program_from_dict(data) -> SosProgram:
    if not isinstance(data, dict):
        raise SchemaError("", "expected an object")
    _warn_unknown(data, _TOP_FIELDS, "")
    if data.get("format", FORMAT_TAG) != FORMAT_TAG:
        raise SchemaError("/format", f"expected {FORMAT_TAG!r}")
    if data.get("version", FORMAT_VERSION) != FORMAT_VERSION:
        raise SchemaError("/version", f"unsupported version {data.get('version')!r}")
    vt = _req(data, "vartable", list, "")
    decs = _req(data, "decvars", list, "")
    mv = data.get("matvartable", [])
    if not isinstance(mv, list):
        raise SchemaError("/matvartable", "expected list")
    for ptr, lst in (("/vartable", vt), ("/decvars", decs), ("/matvartable", mv)):
        for i, n in enumerate(lst):
            if not isinstance(n, str):
                raise SchemaError(f"{ptr}/{i}", "expected a string")
    try:
        prog = SosProgram(vt)
    except (ModelError, PolynomialError) as e:
        raise SchemaError("/vartable", str(e)) from None
    for i, n in enumerate(mv):
        if n != f"Mvar_{i + 1}":
            raise SchemaError(f"/matvartable/{i}", f"expected 'Mvar_{i + 1}'")
    prog.matvartable = tuple(mv)
    if len(set(decs)) != len(decs):
        raise SchemaError("/decvars", "duplicate decision variable names")
    for i, n in enumerate(decs):
        if n in prog.allvars:
            raise SchemaError(f"/decvars/{i}", "name clashes with an independent variable")
        prog._new_decvar(n)
    ud = data.get("user_decvars", [])
    if not isinstance(ud, list) or not all(isinstance(d, int) and 0 <= d < len(decs) for d in ud):
        raise SchemaError("/user_decvars", "expected decision variable indices")
    prog.user_decvars = list(ud)
    nx = len(prog.vartable)
    for i, v in enumerate(_req(data, "vars", list, "") if "vars" in data else []):
        ptr = f"/vars/{i}"
        if not isinstance(v, dict):
            raise SchemaError(ptr, "expected an object")
        _warn_unknown(v, _VAR_FIELDS, ptr)
        kind = _req(v, "kind", str, ptr)
        if kind not in ("poly", "sos", "polymatrix", "sosmatrix"):
            raise SchemaError(f"{ptr}/kind", f"unknown variable kind {kind!r}")
        Z = _exps(_req(v, "Z", list, ptr), nx, f"{ptr}/Z")
        idx = _req(v, "idx", list, ptr)
        if len(idx) != 2 or not all(isinstance(k, int) for k in idx) or not 0 <= idx[0] <= idx[1] <= len(decs):
            raise SchemaError(f"{ptr}/idx", "expected [start, stop] within the decision variables")
        md = v.get("matdims", [1, 1])
        if not isinstance(md, list) or len(md) != 2 or not all(isinstance(k, int) and k > 0 for k in md):
            raise SchemaError(f"{ptr}/matdims", "expected two positive integers")
        pv = ProgramVar(kind, Z, idx[0], idx[1], tuple(md), bool(v.get("symmetric", False)), bool(v.get("wscoeff", False)))
        if pv.is_psd:
            n = pv.block_size
            if idx[1] - idx[0] != n * (n + 1) // 2:
                raise SchemaError(f"{ptr}/idx", "range does not match the Gram dimension")
        prog.vars.append(pv)
    nall = len(prog.allvars)
    for i, c in enumerate(_req(data, "exprs", list, "") if "exprs" in data else []):
        ptr = f"/exprs/{i}"
        if not isinstance(c, dict):
            raise SchemaError(ptr, "expected an object")
        _warn_unknown(c, _EXPR_FIELDS, ptr)
        kind = _req(c, "kind", str, ptr)
        if kind not in ("eq", "ineq", "matrixineq"):
            raise SchemaError(f"{ptr}/kind", f"unknown constraint kind {kind!r}")
        Z = _exps(_req(c, "Z", list, ptr), nall, f"{ptr}/Z")
        b = [_frac(v, f"{ptr}/b/{j}") for j, v in enumerate(_req(c, "b", list, ptr))]
        if len(b) != len(Z):
            raise SchemaError(f"{ptr}/b", "length differs from Z")
        At = []
        for j, t in enumerate(_req(c, "At", list, ptr)):
            if not isinstance(t, list) or len(t) != 3:
                raise SchemaError(f"{ptr}/At/{j}", "expected [decvar, row, value]")
            d, r, val = t
            if not isinstance(d, int) or not 0 <= d < len(decs):
                raise SchemaError(f"{ptr}/At/{j}/0", "decision variable index out of range")
            if not isinstance(r, int) or not 0 <= r < len(Z):
                raise SchemaError(f"{ptr}/At/{j}/1", "row index out of range")
            At.append((d, r, _frac(val, f"{ptr}/At/{j}/2")))
        aux = c.get("aux", {})
        if not isinstance(aux, dict):
            raise SchemaError(f"{ptr}/aux", "expected an object")
        aux = dict(aux)
        if "gram_basis" in aux:
            aux["gram_basis"] = _exps(aux["gram_basis"], nx, f"{ptr}/aux/gram_basis")
        basis = aux.get("basis", "heuristic")
        if basis not in ("heuristic", "newton", "multipartite", "explicit", "mineq", "full"):
            raise SchemaError(f"{ptr}/aux/basis", f"unknown basis rule {basis!r}")
        prog.exprs.append(Constraint(kind, At, b, Z, aux))
    obj = data.get("objective", [])
    if not isinstance(obj, list):
        raise SchemaError("/objective", "expected a list")
    for j, t in enumerate(obj):
        if not isinstance(t, list) or len(t) != 2 or not isinstance(t[0], int) or not 0 <= t[0] < len(decs):
            raise SchemaError(f"/objective/{j}", "expected [decvar, value]")
        prog.objective[t[0]] = _frac(t[1], f"/objective/{j}/1")
    return prog


def parse(text: str) -> SosProgram:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError("", f"invalid JSON: {e}") from None
    return program_from_dict(data)
