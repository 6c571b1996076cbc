"""Dense kernels: symmetric indefinite LDL^T with inertia, tridiagonal QL,
and thin wrappers over LAPACK for eigen/singular value decompositions.

The LDL^T factorization sits behind :func:`factorize` so that a sparse
backend can be dropped in later without touching callers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
import scipy.linalg as sla

from .errors import SingularFactorError, SingularShift

EPS = np.finfo(float).eps
TAU_PIVOT = 0.1
TAU_ZERO = 1e-12


@dataclass(frozen=True)
class Inertia:
    nplus: int
    nminus: int
    nzero: int

    @property
    def n(self) -> int:
        return self.nplus + self.nminus + self.nzero

    def __iter__(self):
        return iter((self.nplus, self.nminus, self.nzero))


@dataclass(frozen=True)
class LdltFactor:
    """Factorization ``A[perm][:, perm] = L @ D @ L.T``.

    ``D`` is block diagonal; ``blocks`` lists the starting index and size
    (1 or 2) of every diagonal block.  Blocks classified as zero are kept
    as explicit zeros with an identity column in ``L``.
    """

    perm: np.ndarray
    L: np.ndarray
    D: np.ndarray
    blocks: tuple
    inertia: Inertia
    tau_pivot: float
    min_pivot: float
    zero_blocks: tuple = field(default=())

    @property
    def n(self) -> int:
        return self.L.shape[0]

    def solve(self, b):
        return solve(self, b)

    def reconstruct(self) -> np.ndarray:
        """Return ``P^T L D L^T P``, i.e. the matrix that was factored."""
        B = self.L @ self.D @ self.L.T
        A = np.empty_like(B)
        A[np.ix_(self.perm, self.perm)] = B
        return A


def _block_signs(d11, d21, d22, thresh):
    """Inertia contribution of a 2x2 block via its eigenvalues."""
    ev = np.linalg.eigvalsh(np.array([[d11, d21], [d21, d22]]))
    plus = int(np.sum(ev > thresh))
    minus = int(np.sum(ev < -thresh))
    return plus, minus, 2 - plus - minus


def ldlt(A, tau_pivot: float = TAU_PIVOT, tau_zero: float = TAU_ZERO) -> LdltFactor:
    """Bunch-Kaufman symmetric indefinite factorization with inertia.

    ``tau_pivot`` plays the role of the Bunch-Kaufman growth parameter: a
    1x1 pivot ``a_kk`` is accepted without interchange when
    ``|a_kk| >= tau_pivot * max_i |a_ik|``.  Any value in (0, 1) gives a
    valid factorization; 0.1 mirrors a typical multifrontal pivot threshold.

    Pivots with magnitude at most ``tau_zero * ||A||_1`` count as zero.  A
    column that is numerically zero below and on the diagonal is skipped
    (recorded as a zero pivot) so the factor of the nonsingular part is
    still returned.
    """
    A = np.array(A, dtype=float, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("ldlt expects a square matrix")
    if not 0.0 < tau_pivot < 1.0:
        raise ValueError("tau_pivot must lie in (0, 1)")
    n = A.shape[0]
    anorm = float(np.abs(A).sum(axis=0).max()) if n else 0.0
    zthresh = tau_zero * anorm
    perm = np.arange(n)
    L = np.eye(n)
    D = np.zeros((n, n))
    blocks = []
    zero_blocks = []
    nplus = nminus = nzero = 0
    min_pivot = math.inf

    def swap(i, j, k):
        if i == j:
            return
        A[[i, j], :] = A[[j, i], :]
        A[:, [i, j]] = A[:, [j, i]]
        # only the already computed columns of L move with the rows
        L[[i, j], :k] = L[[j, i], :k]
        perm[[i, j]] = perm[[j, i]]

    k = 0
    while k < n:
        absakk = abs(A[k, k])
        if k + 1 < n:
            col = np.abs(A[k + 1:, k])
            imax = k + 1 + int(np.argmax(col))
            colmax = float(col[imax - k - 1])
        else:
            imax, colmax = k, 0.0

        if max(absakk, colmax) <= zthresh:
            # Numerically zero column: leave it, zero pivot.
            D[k, k] = 0.0
            A[k + 1:, k] = 0.0
            A[k, k + 1:] = 0.0
            blocks.append((k, 1))
            zero_blocks.append(k)
            nzero += 1
            min_pivot = 0.0
            k += 1
            continue

        step = 1
        if absakk >= tau_pivot * colmax:
            piv = k
        else:
            row = np.abs(A[imax, k:])
            row[imax - k] = 0.0
            rowmax = float(row.max())
            if absakk * rowmax >= tau_pivot * colmax * colmax:
                piv = k
            elif abs(A[imax, imax]) >= tau_pivot * rowmax:
                piv = imax
            else:
                piv = imax
                step = 2

        if step == 1:
            swap(k, piv, k)
            d = A[k, k]
            a = A[k + 1:, k].copy()
            l = a / d
            A[k + 1:, k + 1:] -= np.outer(l, a)
            L[k + 1:, k] = l
            D[k, k] = d
            blocks.append((k, 1))
            if d > zthresh:
                nplus += 1
            elif d < -zthresh:
                nminus += 1
            else:
                nzero += 1
                zero_blocks.append(k)
            min_pivot = min(min_pivot, abs(d))
            k += 1
        else:
            swap(k + 1, piv, k)
            Dk = A[k:k + 2, k:k + 2].copy()
            Wk = A[k + 2:, k:k + 2].copy()
            lk = np.linalg.solve(Dk, Wk.T).T
            A[k + 2:, k + 2:] -= lk @ Wk.T
            L[k + 2:, k:k + 2] = lk
            D[k:k + 2, k:k + 2] = Dk
            blocks.append((k, 2))
            p, m, z = _block_signs(Dk[0, 0], Dk[1, 0], Dk[1, 1], zthresh)
            nplus += p
            nminus += m
            nzero += z
            if z:
                zero_blocks.append(k)
            min_pivot = min(min_pivot, float(np.min(np.abs(np.linalg.eigvalsh(Dk)))))
            k += 2
        # keep the trailing block exactly symmetric
        T = A[k:, k:]
        A[k:, k:] = 0.5 * (T + T.T)

    if n == 0:
        min_pivot = 0.0
    return LdltFactor(
        perm=perm,
        L=L,
        D=D,
        blocks=tuple(blocks),
        inertia=Inertia(nplus, nminus, nzero),
        tau_pivot=tau_pivot,
        min_pivot=float(min_pivot),
        zero_blocks=tuple(zero_blocks),
    )


def factorize(A, tau_pivot: float = TAU_PIVOT, tau_zero: float = TAU_ZERO) -> LdltFactor:
    """Backend hook used by the transform and counting code."""
    return ldlt(A, tau_pivot=tau_pivot, tau_zero=tau_zero)


def solve(f: LdltFactor, b):
    """Solve ``A x = b`` with a factorization of ``A``; ``b`` may be 2-D."""
    if f.inertia.nzero:
        raise SingularFactorError(
            f"factorization has {f.inertia.nzero} zero pivot(s)")
    b = np.asarray(b, dtype=float)
    y = b[f.perm]
    y = sla.solve_triangular(f.L, y, lower=True, unit_diagonal=True)
    z = np.empty_like(y)
    for k, s in f.blocks:
        if s == 1:
            z[k] = y[k] / f.D[k, k]
        else:
            z[k:k + 2] = np.linalg.solve(f.D[k:k + 2, k:k + 2], y[k:k + 2])
    x = sla.solve_triangular(f.L, z, lower=True, trans="T", unit_diagonal=True)
    out = np.empty_like(x)
    out[f.perm] = x
    return out


def inertia_from_eigenvalues(w, scale: float, tau_zero: float = TAU_ZERO) -> Inertia:
    w = np.asarray(w)
    t = tau_zero * scale
    return Inertia(int(np.sum(w > t)), int(np.sum(w < -t)), int(np.sum(np.abs(w) <= t)))


def _pythag(a, b):
    return math.hypot(a, b)


def sym_tridiag_eig(alpha, beta, vectors=True, rows=None, maxiter=60):
    """Eigen-decomposition of a symmetric tridiagonal matrix by implicit QL.

    Parameters
    ----------
    alpha : array_like
        Diagonal, length j.
    beta : array_like
        Off-diagonal, length j - 1.
    vectors : bool
        Accumulate eigenvectors.
    rows : sequence of int, optional
        Only accumulate these rows of the eigenvector matrix (e.g. ``[j-1]``
        for the bottom components needed by Lanczos error bounds).

    Returns
    -------
    theta : ndarray
        Eigenvalues in ascending order.
    S : ndarray or None
        Eigenvectors as columns (or the requested rows of them).
    """
    d = [float(x) for x in np.asarray(alpha, dtype=float).ravel()]
    n = len(d)
    e = [float(x) for x in np.asarray(beta, dtype=float).ravel()]
    if len(e) != max(n - 1, 0):
        raise ValueError("beta must have length len(alpha) - 1")
    e.append(0.0)
    if vectors:
        Z = np.eye(n) if rows is None else np.eye(n)[list(rows), :]
        # rotations act on pairs of columns; keep one entry per column
        if Z.shape[0] == 1:
            Zt = [float(z) for z in Z[0]]
        else:
            Zt = [Z[:, i].copy() for i in range(n)]
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            if it >= maxiter:
                raise RuntimeError("tridiagonal QL failed to converge")
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = _pythag(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = _pythag(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if vectors:
                    zi, zi1 = Zt[i], Zt[i + 1]
                    Zt[i + 1] = s * zi + c * zi1
                    Zt[i] = c * zi - s * zi1
                i -= 1
            if underflow and i >= l:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    theta = np.array(d)
    order = np.argsort(theta, kind="stable")
    theta = theta[order]
    if not vectors:
        return theta, None
    if not n:
        S = np.zeros((0 if rows is None else len(rows), 0))
    else:
        S = np.array(Zt, dtype=float).reshape(n, -1).T
    return theta, S[:, order]


def tridiag(alpha, beta) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    T = np.diag(alpha)
    if len(alpha) > 1:
        b = np.asarray(beta, dtype=float)
        T += np.diag(b, 1) + np.diag(b, -1)
    return T


def sym_eig(A):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix."""
    A = np.asarray(A, dtype=float)
    return np.linalg.eigh(0.5 * (A + A.T))


def svd(A):
    """Thin SVD ``A = U diag(s) V^T`` with ``s`` nonincreasing."""
    U, s, Vt = np.linalg.svd(np.asarray(A, dtype=float), full_matrices=False)
    return U, s, Vt.T


def qr(A):
    """Thin QR factorization."""
    return np.linalg.qr(np.asarray(A, dtype=float), mode="reduced")


def orthonormalize(Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=float)
    if Z.shape[1] == 0:
        return Z.copy()
    Q, _ = qr(Z)
    return Q


def norm1(A) -> float:
    A = np.asarray(A)
    return float(np.abs(A).sum(axis=0).max()) if A.size else 0.0


def pinv_apply_oracle(K, KG, sigma, v, null_dim=None, tau=1e-10):
    """Reference ``(K - sigma KG)^+ K v`` from a full eigendecomposition.

    Eigenvalues with ``|w| <= tau * max|w|`` are truncated.  When
    ``null_dim`` is given, the size of that cluster must match it; without
    it, the gap between the zero cluster and the smallest retained
    eigenvalue must be at least a factor 1e3.  Either failure means sigma
    sits (numerically) on the spectrum.
    """
    K = np.asarray(K, dtype=float)
    A = K - sigma * np.asarray(KG, dtype=float)
    w, X = sym_eig(A)
    absw = np.abs(w)
    top = absw.max() if absw.size else 0.0
    keep = absw > tau * top
    nz = int(np.sum(~keep))
    if null_dim is not None and nz != null_dim:
        raise SingularShift(
            f"shift {sigma} gives {nz} near-zero eigenvalues, expected {null_dim}")
    if keep.any() and nz:
        gap = absw[keep].min() / max(absw[~keep].max(), EPS * top)
        if null_dim is None and gap < 1e3:
            raise SingularShift(f"no clear zero cluster at shift {sigma}")
    Xk = X[:, keep]
    c = Xk.T @ (K @ np.asarray(v, dtype=float))
    scale = w[keep] if c.ndim == 1 else w[keep, None]
    return Xk @ (c / scale)
