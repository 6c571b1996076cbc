"""Canonical form of a symmetric semi-definite pencil ``A - lambda B``.

For symmetric ``A`` and positive semi-definite ``B`` a nonsingular ``W`` is
built with::

    W^T A W = diag(S, Lambda1, Lambda2, 0)
    W^T B W = diag(Omega, I, 0, 0)

where ``S = I_{n0} (x) [[0, 1], [1, 0]]`` and ``Omega = I_{n0} (x) [[1, 0], [0, 0]]``.
The pencil is simultaneously diagonalizable exactly when ``n0 == 0``.

Everything here is dense and meant as a ground-truth oracle for small
problems (n up to a few hundred).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import norm1, sym_eig, svd
from .errors import CouplingPresent, NotSemidefinite

TAU_RANK = 1e-10


@dataclass(frozen=True)
class FixHeibergerForm:
    """Intermediate reduction with column blocks ordered (n0, n1, n2, n0, n3).

    ``W0^T B W0 = diag(I, I, 0, 0, 0)``; in ``W0^T A W0`` the trailing null
    blocks only couple to the leading n0 block through ``Sigma``.
    """

    W0: np.ndarray
    n0: int
    n1: int
    n2: int
    n3: int
    Sigma: np.ndarray
    Lambda2: np.ndarray

    def slices(self):
        n0, n1, n2, n3 = self.n0, self.n1, self.n2, self.n3
        cuts = np.cumsum([0, n0, n1, n2, n0, n3])
        return [slice(cuts[i], cuts[i + 1]) for i in range(5)]


@dataclass(frozen=True)
class CanonicalForm:
    W: np.ndarray
    n0: int
    n1: int
    n2: int
    n3: int
    Lambda1: np.ndarray
    Lambda2: np.ndarray

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def has_coupling(self) -> bool:
        return self.n0 > 0

    def blocks(self):
        """Column slices of the ``2n0``, ``n1``, ``n2`` and ``n3`` blocks of ``W``."""
        cuts = np.cumsum([0, 2 * self.n0, self.n1, self.n2, self.n3])
        return [slice(cuts[i], cuts[i + 1]) for i in range(4)]

    @property
    def W1(self):
        return self.W[:, self.blocks()[1]]

    @property
    def W2(self):
        return self.W[:, self.blocks()[2]]

    @property
    def W3(self):
        return self.W[:, self.blocks()[3]]

    def target_A(self) -> np.ndarray:
        T = np.zeros((self.n, self.n))
        for i in range(self.n0):
            T[2 * i, 2 * i + 1] = T[2 * i + 1, 2 * i] = 1.0
        b = self.blocks()
        T[b[1], b[1]] = np.diag(self.Lambda1)
        T[b[2], b[2]] = np.diag(self.Lambda2)
        return T

    def target_B(self) -> np.ndarray:
        T = np.zeros((self.n, self.n))
        for i in range(self.n0):
            T[2 * i, 2 * i] = 1.0
        b = self.blocks()
        T[b[1], b[1]] = np.eye(self.n1)
        return T

    def residuals(self, A, B):
        """Relative Frobenius residuals ``||W^T A W - F_A|| / ||A||`` (and B)."""
        A = np.asarray(A, dtype=float)
        B = np.asarray(B, dtype=float)
        ra = np.linalg.norm(self.W.T @ A @ self.W - self.target_A())
        rb = np.linalg.norm(self.W.T @ B @ self.W - self.target_B())
        na = max(np.linalg.norm(A), np.finfo(float).tiny)
        nb = max(np.linalg.norm(B), np.finfo(float).tiny)
        return ra / na, rb / nb


def _sym(X):
    return 0.5 * (X + X.T)


def fix_heiberger_reduce(A, B, tau_rank: float = TAU_RANK) -> FixHeibergerForm:
    """First-stage reduction of a semi-definite pencil.

    Rank decisions threshold singular values at ``tau_rank`` times the
    largest one of the relevant reference matrix (``B`` for its range,
    the range-scaled ``A`` for the null-block rank and the coupling).
    """
    A = _sym(np.asarray(A, dtype=float))
    B = _sym(np.asarray(B, dtype=float))
    n = A.shape[0]
    if A.shape != (n, n) or B.shape != (n, n):
        raise ValueError("A and B must be square of equal size")

    dB, UB = sym_eig(B)
    top = max(float(np.max(np.abs(dB))) if n else 0.0, 0.0)
    if n and dB.min() < -tau_rank * max(norm1(B), top):
        raise NotSemidefinite(f"B has eigenvalue {dB.min():.3e} < 0")
    rng = dB > tau_rank * top if top > 0 else np.zeros(n, bool)
    U1 = UB[:, rng] / np.sqrt(dB[rng])
    U0 = UB[:, ~rng]
    r = U1.shape[1]

    Wa = np.hstack([U1, U0])
    Aa = _sym(Wa.T @ A @ Wa)
    refA = np.linalg.norm(Aa, 2) if n else 0.0
    cut = tau_rank * refA

    e, Q = sym_eig(Aa[r:, r:])
    nz = np.abs(e) > cut
    n2 = int(nz.sum())
    N2 = U0 @ Q[:, nz]
    Nz = U0 @ Q[:, ~nz]

    # Coupling between range(B) and the part of N(B) that A does not see.
    Cpl = U1.T @ A @ Nz
    if Cpl.size:
        Uc, s, Vct = np.linalg.svd(Cpl, full_matrices=True)
    else:
        Uc, s, Vct = np.eye(r), np.zeros(0), np.eye(Nz.shape[1])
    n0 = int(np.sum(s > cut))
    R = U1 @ Uc
    Zr = Nz @ Vct.T
    n1 = r - n0
    n3 = Zr.shape[1] - n0

    W0 = np.hstack([R[:, :n0], R[:, n0:], N2, Zr[:, :n0], Zr[:, n0:]])
    return FixHeibergerForm(W0, n0, n1, n2, n3, np.diag(s[:n0]), e[nz])


def reduce(A, B, tau_rank: float = TAU_RANK) -> CanonicalForm:
    """Canonical form via ``W = W0 W1 W2 P3 W4 P5``.

    Each elimination uses the blocks of the current transformed ``A`` (not
    the idealized diagonal ones), which removes rounding left over from the
    previous stage.
    """
    A = _sym(np.asarray(A, dtype=float))
    B = _sym(np.asarray(B, dtype=float))
    fh = fix_heiberger_reduce(A, B, tau_rank)
    n0, n1, n2, n3 = fh.n0, fh.n1, fh.n2, fh.n3
    n = A.shape[0]
    b0, b1, b2, b4, b5 = fh.slices()
    W = fh.W0

    # W1: clear A00, A01, A02 against Sigma.
    A1 = _sym(W.T @ A @ W)
    Sig = A1[b0, b4]
    W1 = np.eye(n)
    if n0:
        W1[b4, b0] = -0.5 * np.linalg.solve(Sig, A1[b0, b0])
        W1[b4, b1] = -np.linalg.solve(Sig, A1[b0, b1])
        W1[b4, b2] = -np.linalg.solve(Sig, A1[b0, b2])
    W = W @ W1

    # W2: clear A12 against Lambda2.
    A2 = _sym(W.T @ A @ W)
    W2 = np.eye(n)
    if n2 and n1:
        W2[b2, b1] = -np.linalg.solve(A2[b2, b2], A2[b1, b2].T)
    W = W @ W2

    # P3: reorder to (n0, n0', n1, n2, n3).
    order3 = np.r_[np.arange(n)[b0], np.arange(n)[b4], np.arange(n)[b1],
                   np.arange(n)[b2], np.arange(n)[b5]]
    W = W[:, order3]
    A3 = _sym(W.T @ A @ W)
    c0 = slice(0, n0)
    c4 = slice(n0, 2 * n0)
    c1 = slice(2 * n0, 2 * n0 + n1)
    c2 = slice(2 * n0 + n1, 2 * n0 + n1 + n2)

    # W4: diag(I, Sigma^-1, Q1, I, I) with C11 = Q1 Lambda1 Q1^T.
    lam1, Q1 = sym_eig(A3[c1, c1])
    W4 = np.eye(n)
    if n0:
        W4[c4, c4] = np.linalg.inv(A3[c0, c4])
    W4[c1, c1] = Q1
    W = W @ W4

    # P5: interleave the two n0 blocks into 2x2 pairs.
    E = np.empty(2 * n0, dtype=int)
    E[0::2] = np.arange(n0)
    E[1::2] = n0 + np.arange(n0)
    W = W[:, np.r_[E, np.arange(2 * n0, n)]]

    lam2 = np.diag(_sym(W[:, c2].T @ A @ W[:, c2])).copy()
    return CanonicalForm(W, n0, n1, n2, n3, lam1, lam2)


def enforce_constraint(cf: CanonicalForm) -> CanonicalForm:
    """Make ``W1`` and ``W2`` orthogonal to the common-nullspace block ``W3``.

    Both matrices annihilate ``span(W3)``, so projecting the other columns
    onto its orthogonal complement leaves the block forms unchanged.
    """
    if cf.n0:
        raise CouplingPresent("constraint only defined for n0 == 0")
    W = cf.W.copy()
    W3 = cf.W3
    if W3.shape[1]:
        b = cf.blocks()
        cols = slice(b[1].start, b[2].stop)
        X = W[:, cols]
        W[:, cols] = X - W3 @ np.linalg.solve(W3.T @ W3, W3.T @ X)
    return CanonicalForm(W, cf.n0, cf.n1, cf.n2, cf.n3, cf.Lambda1, cf.Lambda2)


def is_simultaneously_diagonalizable(cf: CanonicalForm) -> bool:
    return cf.n0 == 0


@dataclass(frozen=True)
class CanonicalEigenpairs:
    lambdas: np.ndarray
    vectors: np.ndarray
    infinite: np.ndarray

    def __len__(self):
        return len(self.lambdas)


def eigenpairs_from_canonical(cf: CanonicalForm, tau_zero: float = 1e-12) -> CanonicalEigenpairs:
    """Finite nonzero eigenpairs of ``K - lambda K_G`` from the reversed form.

    ``cf`` must come from ``reduce(K_G, K)``.  Each nonzero ``lambda#`` of
    ``Lambda1`` gives ``lambda = 1 / lambda#`` with eigenvector the matching
    column of ``W1`` (after :func:`enforce_constraint`).  Zero entries are
    the infinite eigenvalues; their columns are returned in ``infinite``.
    """
    cf = enforce_constraint(cf)
    lam = np.asarray(cf.Lambda1, dtype=float)
    scale = max(np.max(np.abs(lam)), 1.0) if lam.size else 1.0
    fin = np.abs(lam) > tau_zero * scale
    W1 = cf.W1
    lambdas = 1.0 / lam[fin]
    order = np.argsort(lambdas)
    return CanonicalEigenpairs(lambdas[order], W1[:, fin][:, order], W1[:, ~fin])


def dimension_oracle(A, B, tau_rank: float = TAU_RANK):
    """Block dimensions from the rank formulas, computed by plain SVDs.

    Independent of :func:`reduce`; returns ``(n0, n1, n2, n3)``.
    """
    A = _sym(np.asarray(A, dtype=float))
    B = _sym(np.asarray(B, dtype=float))
    n = A.shape[0]
    U, s, _ = svd(B)
    rank_b = int(np.sum(s > tau_rank * s[0])) if n and s[0] > 0 else 0
    Uf, _, _ = np.linalg.svd(B)
    N = Uf[:, rank_b:]
    PAP = N.T @ A @ N
    sa = np.linalg.svd(PAP, compute_uv=False) if PAP.size else np.zeros(0)
    scale = max(np.linalg.norm(A, 2), np.linalg.norm(B, 2))
    n2 = int(np.sum(sa > tau_rank * scale))
    stacked = np.vstack([A / max(np.linalg.norm(A, 2), 1e-300),
                         B / max(np.linalg.norm(B, 2), 1e-300)])
    ss = np.linalg.svd(stacked, compute_uv=False)
    n3 = n - int(np.sum(ss > tau_rank * ss[0])) if n else 0
    n0 = (n - rank_b) - n2 - n3
    n1 = rank_b - n0
    return n0, n1, n2, n3
