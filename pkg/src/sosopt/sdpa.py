"""SDPA sparse format (.dat-s) export/import and SDPA-style solution files.

Mapping to our standard form ``min c'x, Ax = b, x in K``: the SDPA dual
``max F0.Y, Fi.Y = ci, Y >= 0`` is our primal with ``F0 = -C``, ``Fi = -Ai``
and ``ci = -bi``, so SDPA's ``x`` is our ``y`` and SDPA's ``Y`` is our ``X``.
Free variables become pairs ``u - v`` in a diagonal (LP) block; a header
comment records how many, so import can fold them back.
"""

from __future__ import annotations

import math
import re
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .compiler import Cone, SdpProblem, smat, svec

_SQRT2 = math.sqrt(2.0)
HEADER = "* sosopt-sdpa free="


class SdpaError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def _blocks_of(problem: SdpProblem):
    """Per solver column: (block number, i, j, off-diagonal flag), 1-based as in the format."""
    cone = problem.cone
    out = []
    first = 1
    if cone.free:
        for k in range(cone.free):
            out.append((1, 2 * k + 1, 2 * k + 1, False))
        first = 2
    for b, (off, n) in enumerate(zip(cone.offsets(), cone.psd)):
        for i in range(n):
            for j in range(i, n):
                out.append((first + b, i + 1, j + 1, i != j))
    return out


def sdpa_export(problem: SdpProblem, path=None) -> str:
    """Write ``problem`` in SDPA sparse format; returns the text (and writes it if ``path``)."""
    cone = problem.cone
    sizes = ([-2 * cone.free] if cone.free else []) + list(cone.psd)
    cols = _blocks_of(problem)
    lines = [
        f"{HEADER}{cone.free}",
        str(problem.m),
        str(len(sizes)),
        " ".join(str(s) for s in sizes) if sizes else "0",
        " ".join(f"{-v + 0.0:.17g}" for v in problem.b) if problem.m else "",
    ]

    def emit(mat, col, val):
        blk, i, j, off = cols[col]
        if off:
            val = val / _SQRT2
        lines.append(f"{mat} {blk} {i} {j} {val:.17g}")
        if blk == 1 and cone.free and col < cone.free:
            lines.append(f"{mat} {blk} {i + 1} {j + 1} {-val:.17g}")

    for col in np.flatnonzero(problem.c):
        emit(0, col, -problem.c[col])
    A = problem.A.tocsr()
    for r in range(problem.m):
        for k in range(A.indptr[r], A.indptr[r + 1]):
            emit(r + 1, A.indices[k], -A.data[k])
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def _numbers(text: str, line: int, count: int | None = None, kind=float) -> list:
    toks = [t for t in re.split(r"[\s,{}()]+", text) if t]
    try:
        vals = [kind(t) for t in toks]
    except ValueError as e:
        raise SdpaError(line, f"malformed number ({e})") from None
    if count is not None and len(vals) < count:
        raise SdpaError(line, f"expected {count} values, found {len(vals)}")
    return vals[:count] if count is not None else vals


def sdpa_import(source) -> SdpProblem:
    """Parse SDPA sparse text (or a path) back into an :class:`SdpProblem`."""
    text = Path(source).read_text() if isinstance(source, Path) else str(source)
    if "\n" not in text and Path(text).exists():
        text = Path(text).read_text()
    raw = text.splitlines()
    nfree = None
    body = []
    for ln, line in enumerate(raw, start=1):
        s = line.strip()
        if s.startswith(HEADER):
            nfree = int(s[len(HEADER):])
            continue
        if not s or s[0] in '"*':
            continue
        body.append((ln, s))
    if len(body) < 3:
        raise SdpaError(len(raw), "truncated header")
    (l_m, s_m), (l_nb, s_nb), (l_bs, s_bs) = body[:3]
    m = _numbers(s_m, l_m, 1, int)[0]
    nb = _numbers(s_nb, l_nb, 1, int)[0]
    sizes = _numbers(s_bs, l_bs, nb, int)
    pos = 3
    bvec = []
    if m:
        while len(bvec) < m:
            if pos >= len(body):
                raise SdpaError(len(raw), f"objective vector has {len(bvec)} of {m} entries")
            bvec += _numbers(body[pos][1], body[pos][0])
            pos += 1
        if len(bvec) != m:
            raise SdpaError(body[pos - 1][0], f"objective vector has {len(bvec)} entries, expected {m}")

    free = 0
    psd = []
    # map (block, i, j) -> solver column with an off-diagonal flag
    layout = {}
    lp_pairs = {}
    for bi, size in enumerate(sizes, start=1):
        if size < 0 and nfree is not None and bi == 1:
            if -size != 2 * nfree:
                raise SdpaError(l_bs, f"free block size {size} does not match header free={nfree}")
            free = nfree
            for k in range(nfree):
                lp_pairs[(bi, 2 * k + 1)] = (k, 1.0)
                lp_pairs[(bi, 2 * k + 2)] = (k, -1.0)
        elif size < 0:
            for i in range(-size):
                psd.append(1)
                layout[(bi, i + 1, i + 1)] = ("psd", len(psd) - 1, 0, 0)
        elif size == 0:
            raise SdpaError(l_bs, "zero block size")
        else:
            psd.append(size)
            for i in range(size):
                for j in range(i, size):
                    layout[(bi, i + 1, j + 1)] = ("psd", len(psd) - 1, i, j)
    cone = Cone(free, tuple(psd))
    offsets = cone.offsets()

    def column(blk, i, j, line):
        if (blk, i) in lp_pairs:
            if i != j:
                raise SdpaError(line, "off-diagonal entry in a diagonal block")
            k, sgn = lp_pairs[(blk, i)]
            return k, sgn, False
        key = layout.get((blk, i, j))
        if key is None:
            raise SdpaError(line, f"entry ({blk},{i},{j}) outside the block structure")
        _, b, p, q = key
        n = psd[b]
        idx = offsets[b] + p * n - p * (p - 1) // 2 + (q - p)
        return idx, 1.0, p != q

    n = cone.nvars
    c = np.zeros(n)
    rows, cols, vals = [], [], []
    seen_free = {}
    for ln, s in body[pos:]:
        parts = s.split()
        if len(parts) != 5:
            raise SdpaError(ln, f"expected 5 fields, found {len(parts)}")
        try:
            mat, blk, i, j = (int(t) for t in parts[:4])
            v = float(parts[4])
        except ValueError:
            raise SdpaError(ln, "malformed entry") from None
        if not 0 <= mat <= m:
            raise SdpaError(ln, f"matrix number {mat} out of range")
        if not 1 <= blk <= nb:
            raise SdpaError(ln, f"block number {blk} out of range")
        if j < i:
            raise SdpaError(ln, f"entry ({i},{j}) is below the diagonal")
        idx, sgn, off = column(blk, i, j, ln)
        val = -v * (_SQRT2 if off else 1.0)
        if sgn < 0:
            # second half of a free pair; must mirror the first
            key = (mat, idx)
            if key in seen_free and not math.isclose(seen_free[key], -val, rel_tol=1e-12, abs_tol=0.0):
                raise SdpaError(ln, "free-variable pair entries do not cancel")
            continue
        if free and idx < free and blk == 1:
            seen_free[(mat, idx)] = val
        if mat == 0:
            c[idx] += val
        else:
            rows.append(mat - 1)
            cols.append(idx)
            vals.append(val)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(m, n))
    return SdpProblem(A, -np.asarray(bvec, dtype=float), c, cone)


def _fmt_mat(M) -> str:
    return "{" + ",".join("{" + ",".join(f"{v:.17g}" for v in row) + "}" for row in M) + "}"


def sdpa_write_solution(problem: SdpProblem, x, y, S=None, path=None) -> str:
    """SDPA-style result text: ``xVec`` is our y, ``yMat`` our X, ``xMat`` our S."""
    cone = problem.cone
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    S = np.zeros_like(x) if S is None else np.asarray(S, dtype=float)

    def mats(v):
        out = []
        if cone.free:
            diag = []
            for k in range(cone.free):
                diag += [max(v[k], 0.0), max(-v[k], 0.0)]
            out.append("{" + ",".join(f"{d:.17g}" for d in diag) + "}")
        for off, n in zip(cone.offsets(), cone.psd):
            out.append(_fmt_mat(smat(v[off:off + n * (n + 1) // 2], n)))
        return "{\n" + "\n".join(out) + "\n}"

    text = (
        f"objValPrimal = {float(problem.c @ x):.17g}\n"
        f"objValDual = {float(problem.b @ y):.17g}\n"
        "xVec = \n{" + ",".join(f"{v:.17g}" for v in y) + "}\n"
        "xMat = \n" + mats(np.where(np.arange(x.size) < cone.free, 0.0, S)) + "\n"
        "yMat = \n" + mats(x) + "\n"
    )
    if path is not None:
        Path(path).write_text(text)
    return text


def sdpa_import_solution(text: str, problem: SdpProblem):
    """Read ``(x, y)`` in our convention from SDPA-style result text."""
    if "\n" not in text and Path(text).exists():
        text = Path(text).read_text()
    lines = text.splitlines()

    def section(name):
        for k, line in enumerate(lines):
            if line.strip().startswith(name):
                rest = line.split("=", 1)[1] if "=" in line else ""
                return k + 1, rest + "\n" + "\n".join(lines[k + 1:])
        raise SdpaError(len(lines), f"missing section {name}")

    cone = problem.cone
    ln, s = section("xVec")
    y = np.array(_numbers(s.split("}", 1)[0], ln), dtype=float)
    if y.size != problem.m:
        raise SdpaError(ln, f"xVec has {y.size} entries, expected {problem.m}")
    ln, s = section("yMat")
    nums = _numbers(s, ln)
    need = 2 * cone.free + sum(n * n for n in cone.psd)
    if len(nums) < need:
        raise SdpaError(ln, f"yMat has {len(nums)} values, expected {need}")
    x = np.empty(cone.nvars)
    p = 0
    for k in range(cone.free):
        x[k] = nums[p] - nums[p + 1]
        p += 2
    for off, n in zip(cone.offsets(), cone.psd):
        M = np.array(nums[p:p + n * n]).reshape(n, n)
        p += n * n
        x[off:off + n * (n + 1) // 2] = svec(0.5 * (M + M.T))
    return x, y
