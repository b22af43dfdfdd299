"""Dense symmetric kernels and an exact rational solver.

Floating point routines operate on plain ``numpy`` arrays; symmetry is
enforced by averaging with the transpose on entry.  The rational routines
use :class:`fractions.Fraction` and Python integers and never round.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

import numpy as np
import scipy.linalg

from .errors import Singular, SingularBlock

RANK_CUTOFF = 1e-9
PSD_SLACK = 1e-9


def symmetrize(M):
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + M.T)


def is_psd(M, slack=PSD_SLACK):
    """True when every eigenvalue is at least ``-slack * lambda_max``."""
    M = symmetrize(M)
    if M.size == 0:
        return True
    vals = np.linalg.eigvalsh(M)
    scale = max(abs(vals).max(), 1e-300)
    return bool(vals.min() >= -slack * scale)


def pinv(M, cutoff=RANK_CUTOFF):
    """Moore-Penrose pseudo-inverse of a symmetric matrix.

    Rank is decided by discarding eigenvalues whose magnitude is below
    ``cutoff * max|eigenvalue|``.
    """
    M = symmetrize(M)
    if M.size == 0:
        return M.copy()
    vals, vecs = np.linalg.eigh(M)
    top = abs(vals).max()
    if top == 0.0:
        return np.zeros_like(M)
    keep = abs(vals) > cutoff * top
    inv = np.zeros_like(vals)
    inv[keep] = 1.0 / vals[keep]
    out = (vecs * inv) @ vecs.T
    return symmetrize(out)


def _split(n, K):
    K = np.asarray(sorted(set(int(k) for k in K)), dtype=int)
    mask = np.ones(n, dtype=bool)
    mask[K] = False
    N = np.flatnonzero(mask)
    return K, N


def _factor_block(LN):
    try:
        c, low = scipy.linalg.cho_factor(LN, lower=True, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularBlock("eliminated block is not positive definite") from exc
    diag = np.abs(np.diag(c))
    scale = max(np.abs(np.diag(LN)).max(), 1e-300)
    if diag.min() ** 2 <= 1e-13 * scale:
        raise SingularBlock("eliminated block is numerically singular")
    return c, low


def schur_block(L, K):
    """Schur complement of ``L`` onto the index set ``K``.

    Returns the matrix ``L_K - L_M^T L_N^{-1} L_M`` whose rows and columns
    follow ``sorted(K)``.
    """
    L = symmetrize(L)
    n = L.shape[0]
    K, N = _split(n, K)
    LK = L[np.ix_(K, K)]
    if N.size == 0:
        return LK.copy()
    LN = L[np.ix_(N, N)]
    LM = L[np.ix_(N, K)]
    factor = _factor_block(LN)
    S = LK - LM.T @ scipy.linalg.cho_solve(factor, LM, check_finite=False)
    return symmetrize(S)


def min_quadratic_extension(L, K, x):
    """min over y of ``[y; x]^T L [y; x]`` with ``x`` fixed on ``sorted(K)``.

    Solved as a least-squares problem on the free block and then evaluated as
    a full quadratic form, so it does not share arithmetic with
    :func:`schur_block`.
    """
    L = symmetrize(L)
    n = L.shape[0]
    K, N = _split(n, K)
    x = np.asarray(x, dtype=float)
    z = np.zeros(n)
    z[K] = x
    if N.size:
        LN = L[np.ix_(N, N)]
        _factor_block(LN)
        rhs = -L[np.ix_(N, K)] @ x
        y, *_ = np.linalg.lstsq(LN, rhs, rcond=None)
        z[N] = y
    return float(z @ L @ z)


class RationalMatrix:
    """Square matrix of exact rationals stored row-major as ``Fraction``."""

    def __init__(self, rows):
        rows = [[Fraction(x) for x in row] for row in rows]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("RationalMatrix must be square")
        self.rows = rows

    @classmethod
    def zeros(cls, n):
        return cls([[0] * n for _ in range(n)])

    @property
    def n(self):
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __setitem__(self, ij, value):
        i, j = ij
        self.rows[i][j] = Fraction(value)

    def matvec(self, x):
        return [sum((a * b for a, b in zip(row, x)), Fraction(0)) for row in self.rows]

    def matmul(self, other):
        n = self.n
        cols = list(zip(*other.rows))
        return RationalMatrix(
            [[sum((a * b for a, b in zip(self.rows[i], col)), Fraction(0)) for col in cols] for i in range(n)]
        )

    def is_symmetric(self):
        n = self.n
        return all(self.rows[i][j] == self.rows[j][i] for i in range(n) for j in range(i))

    def is_strictly_diagonally_dominant(self):
        for i, row in enumerate(self.rows):
            off = sum(abs(x) for j, x in enumerate(row) if j != i)
            if abs(row[i]) <= off:
                return False
        return True

    def __eq__(self, other):
        return isinstance(other, RationalMatrix) and self.rows == other.rows

    def __repr__(self):
        return f"RationalMatrix(n={self.n})"


def _bareiss_solve(A, b):
    """Solve ``A x = b`` for integer ``A`` and ``b`` by fraction-free elimination."""
    n = len(A)
    M = [list(A[i]) + [b[i]] for i in range(n)]
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for r in range(k + 1, n):
                if M[r][k] != 0:
                    M[k], M[r] = M[r], M[k]
                    break
            else:
                raise Singular("matrix is singular")
        pivot = M[k][k]
        for i in range(k + 1, n):
            mik = M[i][k]
            row_i = M[i]
            row_k = M[k]
            for j in range(k + 1, n + 1):
                row_i[j] = (row_i[j] * pivot - mik * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    if M[n - 1][n - 1] == 0:
        raise Singular("matrix is singular")
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        acc = Fraction(M[i][n])
        for j in range(i + 1, n):
            acc -= M[i][j] * x[j]
        x[i] = acc / M[i][i]
    return x


def rational_solve_system(B, rhs):
    """Exact solution of ``B x = rhs`` as a list of ``Fraction``."""
    if not isinstance(B, RationalMatrix):
        B = RationalMatrix(B)
    rhs = [Fraction(r) for r in rhs]
    den = 1
    for row in B.rows:
        for x in row:
            den = lcm(den, x.denominator)
    for r in rhs:
        den = lcm(den, r.denominator)
    A = [[int(x * den) for x in row] for row in B.rows]
    b = [int(r * den) for r in rhs]
    return _bareiss_solve(A, b)


def rational_solve(B, e):
    """``(B^{-1})_{ee}`` computed exactly."""
    if not isinstance(B, RationalMatrix):
        B = RationalMatrix(B)
    rhs = [0] * B.n
    rhs[e] = 1
    return rational_solve_system(B, rhs)[e]
