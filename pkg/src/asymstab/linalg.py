"""Exact integer matrix algebra.

Matrices are numpy arrays with ``dtype=object`` holding Python ints, so
arithmetic never overflows and never touches floating point.  Empty
matrices (``0 x n`` and ``n x 0``) are legal everywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

IntMatrix = np.ndarray


def matrix(rows: Iterable[Sequence[int]], shape: Optional[tuple[int, int]] = None) -> IntMatrix:
    rows = [list(r) for r in rows]
    if shape is None:
        if not rows:
            raise ValueError("shape required for a matrix without rows")
        shape = (len(rows), len(rows[0]))
    out = np.zeros(shape, dtype=object)
    for i, r in enumerate(rows):
        if len(r) != shape[1]:
            raise ValueError(f"row {i} has length {len(r)}, expected {shape[1]}")
        for j, v in enumerate(r):
            out[i, j] = int(v)
    return out


def zeros(r: int, c: int) -> IntMatrix:
    out = np.empty((r, c), dtype=object)
    out.fill(0)
    return out


def eye(n: int) -> IntMatrix:
    out = zeros(n, n)
    for i in range(n):
        out[i, i] = 1
    return out


def diag(values: Sequence[int], rows: Optional[int] = None, cols: Optional[int] = None) -> IntMatrix:
    rows = len(values) if rows is None else rows
    cols = len(values) if cols is None else cols
    out = zeros(rows, cols)
    for i, v in enumerate(values):
        out[i, i] = int(v)
    return out


def as_int_matrix(m) -> IntMatrix:
    a = np.asarray(m, dtype=object)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    out = zeros(*a.shape)
    for idx, v in np.ndenumerate(a):
        out[idx] = int(v)
    return out


def column(values: Sequence[int]) -> IntMatrix:
    return as_int_matrix(np.array(list(values), dtype=object).reshape(-1, 1)) if len(values) else zeros(0, 1)


def hcat(*ms: IntMatrix, rows: Optional[int] = None) -> IntMatrix:
    ms = [m for m in ms if m is not None]
    if rows is None:
        if not ms:
            raise ValueError("hcat of nothing needs rows")
        rows = ms[0].shape[0]
    for m in ms:
        if m.shape[0] != rows:
            raise ValueError(f"hcat: block has {m.shape[0]} rows, expected {rows}")
    cols = sum(m.shape[1] for m in ms)
    out = zeros(rows, cols)
    c = 0
    for m in ms:
        out[:, c:c + m.shape[1]] = m
        c += m.shape[1]
    return out


def vcat(*ms: IntMatrix, cols: Optional[int] = None) -> IntMatrix:
    ms = [m.reshape(1, -1) if m.ndim == 1 else m for m in ms if m is not None]
    if cols is None:
        if not ms:
            raise ValueError("vcat of nothing needs cols")
        cols = ms[0].shape[1]
    for m in ms:
        if m.shape[1] != cols:
            raise ValueError(f"vcat: block has {m.shape[1]} columns, expected {cols}")
    rows = sum(m.shape[0] for m in ms)
    out = zeros(rows, cols)
    r = 0
    for m in ms:
        out[r:r + m.shape[0], :] = m
        r += m.shape[0]
    return out


def kron(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    ra, ca = a.shape
    rb, cb = b.shape
    out = zeros(ra * rb, ca * cb)
    for i in range(ra):
        for j in range(ca):
            v = a[i, j]
            if v:
                out[i * rb:(i + 1) * rb, j * cb:(j + 1) * cb] = v * b
    return out


def mat_key(m: IntMatrix) -> tuple:
    return (m.shape, tuple(int(v) for v in m.flat))


def is_zero(m: IntMatrix) -> bool:
    return all(v == 0 for v in m.flat)


@dataclass(frozen=True, eq=False)
class SmithDecomposition:
    """``U @ M @ V == S`` with U, V unimodular and S in Smith form.

    ``U_inv`` and ``V_inv`` are tracked alongside so callers never have to
    invert a unimodular matrix.
    """

    U: IntMatrix
    S: IntMatrix
    V: IntMatrix
    U_inv: IntMatrix
    V_inv: IntMatrix

    @property
    def diagonal(self) -> list[int]:
        k = min(self.S.shape)
        return [int(self.S[i, i]) for i in range(k)]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)

    @property
    def invariant_factors(self) -> list[int]:
        return [d for d in self.diagonal if d != 0]


def smith_normal_form(M: IntMatrix) -> SmithDecomposition:
    """Smith normal form with transforms.

    Pivot is the smallest nonzero entry by absolute value; the pivot row
    and column are reduced with floor division and the pivot is re-chosen
    until both are clear, which keeps entries small in practice.
    """
    m, n = M.shape
    A = [[int(v) for v in row] for row in M.tolist()] if m and n else [[0] * n for _ in range(m)]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    Ui = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]
    Vi = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        if i == j:
            return
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]
        for row in Ui:
            row[i], row[j] = row[j], row[i]

    def swap_cols(i, j):
        if i == j:
            return
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]
        Vi[i], Vi[j] = Vi[j], Vi[i]

    def add_row(dst, src, q):
        # row_dst += q * row_src
        if q == 0:
            return
        ad, as_ = A[dst], A[src]
        for c in range(n):
            if as_[c]:
                ad[c] += q * as_[c]
        ud, us = U[dst], U[src]
        for c in range(m):
            if us[c]:
                ud[c] += q * us[c]
        for row in Ui:
            if row[dst]:
                row[src] -= q * row[dst]

    def add_col(dst, src, q):
        # col_dst += q * col_src
        if q == 0:
            return
        for row in A:
            if row[src]:
                row[dst] += q * row[src]
        for row in V:
            if row[src]:
                row[dst] += q * row[src]
        vd, vs = Vi[dst], Vi[src]
        for c in range(n):
            if vd[c]:
                vs[c] -= q * vd[c]

    def negate_row(i):
        A[i] = [-v for v in A[i]]
        U[i] = [-v for v in U[i]]
        for row in Ui:
            row[i] = -row[i]

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                v = row[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        swap_rows(t, best[1])
        swap_cols(t, best[2])
        while True:
            p = A[t][t]
            clean = True
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
                    if A[i][t]:
                        clean = False
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
                    if A[t][j]:
                        clean = False
            if not clean:
                best = (abs(p), t, t)
                for i in range(t + 1, m):
                    if A[i][t] and abs(A[i][t]) < best[0]:
                        best = (abs(A[i][t]), i, t)
                for j in range(t + 1, n):
                    if A[t][j] and abs(A[t][j]) < best[0]:
                        best = (abs(A[t][j]), t, j)
                swap_rows(t, best[1])
                swap_cols(t, best[2])
                continue
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            negate_row(t)
        t += 1

    def arr(rows, r, c):
        return matrix(rows, (r, c)) if r else zeros(0, c)

    return SmithDecomposition(arr(U, m, m), arr(A, m, n), arr(V, n, n), arr(Ui, m, m), arr(Vi, n, n))


def _check_modulus(modulus: Optional[int]) -> None:
    if modulus is not None and modulus < 2:
        raise ValueError("modulus must be at least 2")


def solve_with(dec: SmithDecomposition, b: IntMatrix) -> Optional[IntMatrix]:
    """Solve ``M x = b`` given a precomputed decomposition of M."""
    m, n = dec.S.shape
    c = dec.U @ b if m else zeros(0, 1)
    y = zeros(n, 1)
    d = dec.diagonal
    for i in range(m):
        ci = c[i, 0]
        di = d[i] if i < len(d) else 0
        if di == 0:
            if ci != 0:
                return None
        else:
            if ci % di:
                return None
            y[i, 0] = ci // di
    return dec.V @ y if n else zeros(0, 1)


def solve(M: IntMatrix, b, modulus: Optional[int] = None) -> Optional[IntMatrix]:
    """Some integer ``x`` with ``M x = b`` (or ``= b mod modulus``), else None.

    None is only returned when no solution exists.
    """
    _check_modulus(modulus)
    b = as_int_matrix(b)
    if b.shape != (M.shape[0], 1):
        raise ValueError(f"dimension mismatch: M is {M.shape}, b is {b.shape}")
    if modulus is None:
        return solve_with(smith_normal_form(M), b)
    ext = hcat(M, modulus * eye(M.shape[0]), rows=M.shape[0])
    x = solve_with(smith_normal_form(ext), b)
    if x is None:
        return None
    return as_int_matrix([[v % modulus] for v in x[: M.shape[1], 0]]) if M.shape[1] else zeros(0, 1)


def lattice_kernel(M: IntMatrix) -> IntMatrix:
    """Z-basis (as columns) of ``{x in Z^n : M x = 0}``."""
    dec = smith_normal_form(M)
    return dec.V[:, dec.rank:]


def kernel_basis(M: IntMatrix, modulus: Optional[int] = None) -> IntMatrix:
    """Columns generating the kernel of M over Z or over Z/modulus.

    Over Z the columns form a basis of the kernel lattice.  Modulo
    ``modulus`` they generate the kernel subgroup of ``(Z/modulus)^n``;
    entries are reduced and zero columns are dropped.
    """
    _check_modulus(modulus)
    if modulus is None:
        return lattice_kernel(M)
    n = M.shape[1]
    K = lattice_kernel(hcat(M, modulus * eye(M.shape[0]), rows=M.shape[0]))[:n, :]
    cols = []
    for j in range(K.shape[1]):
        col = [int(v) % modulus for v in K[:, j]]
        if any(col) and col not in cols:
            cols.append(col)
    if not cols:
        return zeros(n, 0)
    return as_int_matrix(np.array(cols, dtype=object).T)
