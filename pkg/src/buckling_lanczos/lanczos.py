"""Shift-invert Lanczos for the buckling pencil in the ``M``-inner product.

The iteration builds ``V_{j+1}`` and ``T_j`` with

    C V_j = V_j T_j + beta_j v_{j+1} e_j^T,    V_{j+1}^T M V_{j+1} = I,

using full reorthogonalization (two classical Gram-Schmidt passes in the
``M``-inner product, with ``M v_i`` cached).
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Callable

import numpy as np

from .dense import EPS, norm1, sym_tridiag_eig, tridiag
from .errors import LanczosBreakdown, NonpositiveNorm
from .transform import RegularizedInnerProduct, ShiftInvertOperator

TAU_BREAKDOWN = math.sqrt(EPS)
DEFAULT_TOL = 1e-6
DEFAULT_MAXIT = 100


@dataclass
class LanczosState:
    """Growing Lanczos basis.  Column ``i`` of ``V`` is ``v_{i+1}``;
    ``betas[0]`` is the start norm and ``betas[i]`` couples ``v_i``, ``v_{i+1}``."""

    V: np.ndarray
    MV: np.ndarray
    CV: np.ndarray
    alphas: list = field(default_factory=list)
    betas: list = field(default_factory=list)
    j: int = 0
    events: list = field(default_factory=list)

    @classmethod
    def empty(cls, n: int, capacity: int) -> "LanczosState":
        return cls(np.zeros((n, capacity + 1)), np.zeros((n, capacity + 1)),
                   np.zeros((n, capacity)))

    @property
    def n(self) -> int:
        return self.V.shape[0]

    @property
    def capacity(self) -> int:
        return self.CV.shape[1]

    @property
    def beta(self) -> float:
        """The current residual coefficient ``beta_j``."""
        return self.betas[self.j]

    def basis(self, extra: int = 0) -> np.ndarray:
        return self.V[:, : self.j + extra]

    def T(self) -> np.ndarray:
        return tridiag(self.alphas[: self.j], self.betas[1 : self.j])

    def vnorms(self) -> np.ndarray:
        return np.linalg.norm(self.basis(), axis=0)


@dataclass(frozen=True)
class RitzPair:
    mu: float
    lam: float
    x: np.ndarray
    eta: float
    cos_angle: float
    converged: bool
    errbound: float


@dataclass
class LanczosResult:
    sigma: float
    pairs: list
    iterations: int
    status: str                  # "converged", "maxit" or "invariant"
    trace: list
    orthogonality: float
    state: LanczosState
    nconv_history: list = field(default_factory=list)

    @property
    def converged(self) -> list:
        return [p for p in self.pairs if p.converged]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([p.lam for p in self.converged])


def _mapped(mu, sigma):
    return math.inf if mu == 1.0 else sigma * mu / (mu - 1.0)


def residual_eta(K, KG, lam, x, norms=None) -> float:
    """``||K x - lam K_G x|| / ((||K||_1 + |lam| ||K_G||_1) ||x||)``.

    ``norms`` may carry precomputed ``(||K||_1, ||K_G||_1)``.
    """
    x = np.asarray(x, dtype=float)
    nK, nKG = norms if norms is not None else (norm1(K), norm1(KG))
    r = K @ x - lam * (KG @ x)
    return float(np.linalg.norm(r) / ((nK + abs(lam) * nKG) * np.linalg.norm(x)))


def angle_to_nullspace(x, QC) -> float:
    """Cosine of the angle between ``x`` and ``span(QC)`` (``QC`` orthonormal)."""
    x = np.asarray(x, dtype=float)
    if QC.shape[1] == 0:
        return 0.0
    return float(np.linalg.norm(QC.T @ x) / np.linalg.norm(x))


def errbound(mu, sigma, beta, s_last) -> float:
    """Error estimate for ``lambda`` from a Ritz value of ``C``."""
    if mu == 1.0:
        return math.inf
    return abs(sigma) / (mu - 1.0) ** 2 * abs(beta) * abs(s_last)


def is_converged(mu, bound, tol) -> bool:
    # a single tol both screens the zero class and bounds the error
    return bool(abs(mu) >= tol and bound < tol)


def start(state: LanczosState, apply_C, apply_M, x0, check_nonpositive=True) -> float:
    """Set ``v_1 = C x0 / ||C x0||_M``; return ``beta_0``."""
    x0 = np.asarray(x0, dtype=float)
    ref = float(x0 @ apply_M(x0))
    r = apply_C(x0)
    p = apply_M(r)
    b2 = float(p @ r)
    if b2 < 0.0 and check_nonpositive:
        raise NonpositiveNorm(f"r^T M r = {b2:.3e} < 0 at the start vector")
    beta0 = math.sqrt(abs(b2))
    if beta0 <= TAU_BREAKDOWN * math.sqrt(abs(ref)) or beta0 == 0.0:
        raise LanczosBreakdown("C x0 vanishes: the start vector has no finite component")
    state.V[:, 0] = r / beta0
    state.MV[:, 0] = p / beta0
    state.betas[:] = [beta0]
    state.alphas[:] = []
    state.j = 0
    return beta0


def step(state: LanczosState, apply_C, apply_M, passes: int = 2,
         check_nonpositive: bool = True, purge=None) -> float:
    """One Lanczos step with full reorthogonalization; returns ``beta_j``.

    ``purge`` (optional) maps ``r`` back onto the range of ``C`` before the
    norm is taken; without it rounding components in ``null(C)`` that the
    recurrence cannot remove grow geometrically.
    """
    j = state.j
    v, mv = state.V[:, j], state.MV[:, j]
    r = apply_C(v)
    state.CV[:, j] = r
    if j > 0:
        r = r - state.betas[j] * state.V[:, j - 1]
    alpha = float(mv @ r)
    r = r - alpha * v
    V, MV = state.V[:, : j + 1], state.MV[:, : j + 1]
    for _ in range(passes):
        h = MV.T @ r
        r = r - V @ h
        alpha += float(h[j])
    if purge is not None:
        r = purge(r)
    p = apply_M(r)
    b2 = float(p @ r)
    if b2 < 0.0:
        if check_nonpositive:
            raise NonpositiveNorm(f"r^T M r = {b2:.3e} < 0 at step {j + 1}")
        state.events.append((j + 1, b2))
    beta = math.sqrt(abs(b2))
    state.alphas.append(alpha)
    state.betas.append(beta)
    state.j = j + 1
    if beta > 0.0:
        state.V[:, j + 1] = r / beta
        state.MV[:, j + 1] = p / beta
    return beta


def range_projector(QC):
    """``r -> r - Q_C Q_C^T r``, or ``None`` when there is no common nullspace."""
    if QC.shape[1] == 0:
        return None
    return lambda r: r - QC @ (QC.T @ r)


def orthogonality_error(state: LanczosState, M=None) -> float:
    """``||V^T M V - I||_F`` over ``v_1..v_{j+1}``; recomputes ``M V`` if given."""
    k = state.j + (1 if state.beta > 0.0 else 0)
    V = state.V[:, :k]
    MV = M.apply(V) if M is not None else state.MV[:, :k]
    G = V.T @ MV
    return float(np.linalg.norm(G - np.eye(k)))


def governing_residual(state: LanczosState) -> float:
    """``||C V_j - V_j T_j - beta_j v_{j+1} e_j^T||_F`` from cached ``C v_i``."""
    j = state.j
    R = state.CV[:, :j] - state.basis() @ state.T()
    R[:, j - 1] -= state.beta * state.V[:, j]
    return float(np.linalg.norm(R))


def ritz_extract(state: LanczosState, op: ShiftInvertOperator, tol: float = DEFAULT_TOL,
                 K=None, KG=None, QC=None, norms=None) -> list:
    """Ritz pairs of ``T_j`` outside the zero class, nearest the shift first."""
    if state.j < 1:
        return []
    sigma = op.sigma
    K = op.K if K is None else K
    theta, S = sym_tridiag_eig(state.alphas[: state.j], state.betas[1 : state.j])
    X = state.basis() @ S
    QC = op.QC if QC is None else QC
    pairs = []
    for i, mu in enumerate(theta):
        mu = float(mu)
        if abs(mu) < tol:
            continue
        bnd = errbound(mu, sigma, state.beta, S[-1, i])
        lam = _mapped(mu, sigma)
        x = X[:, i]
        if KG is not None and math.isfinite(lam):
            eta = residual_eta(K, KG, lam, x, norms)
        else:
            eta = math.nan
        pairs.append(RitzPair(mu, lam, x, eta, angle_to_nullspace(x, QC),
                              is_converged(mu, bnd, tol), bnd))
    pairs.sort(key=lambda p: -abs(p.mu))
    return pairs


def _count_converged(state, sigma, tol, interval):
    theta, S = sym_tridiag_eig(state.alphas, state.betas[1 : state.j], rows=[state.j - 1])
    n = 0
    lams = []
    for mu, s in zip(theta, S[0]):
        mu = float(mu)
        if is_converged(mu, errbound(mu, sigma, state.beta, s), tol):
            lam = _mapped(mu, sigma)
            if interval is None or interval[0] < lam < interval[1]:
                n += 1
                lams.append(lam)
    return n, lams


def _distinct(values, tol_cluster):
    out = []
    for v in sorted(values):
        if not out or abs(v - out[-1]) > tol_cluster:
            out.append(v)
    return out


def run(op: ShiftInvertOperator, M: RegularizedInnerProduct, x0=None, *, KG=None,
        tol: float = DEFAULT_TOL, maxit: int = DEFAULT_MAXIT, nev: int | None = None,
        interval=None, want: int | None = None, seed: int = 0,
        monitor: Callable | None = None) -> LanczosResult:
    """Shift-invert Lanczos on ``C`` with the ``M``-inner product.

    Parameters
    ----------
    op, M : the operator ``C`` and the inner product over the same pencil
    x0 : start vector; a seeded Gaussian vector by default.  The actual
        start is ``C x0``, which removes nullspace and infinite components.
    KG : K_G, needed for the ``eta`` residuals of the returned pairs.
    nev : stop once this many pairs have converged.
    interval, want : stop once ``want`` distinct converged eigenvalues lie
        in ``interval`` (``want`` usually comes from an inertia count).
    monitor : called as ``monitor(state)`` after every step.

    Stops at ``maxit`` otherwise, or cleanly when ``beta_j`` vanishes
    (an invariant subspace, in which case every Ritz value is exact).
    """
    n = op.n
    if x0 is None:
        x0 = np.random.default_rng(seed).standard_normal(n)
    state = LanczosState.empty(n, maxit)
    start(state, op.apply, M.apply, x0)
    purge = range_projector(op.QC)
    trace = []
    nconv_history = []
    status = "maxit"
    sigma = op.sigma
    for _ in range(maxit):
        beta = step(state, op.apply, M.apply, purge=purge)
        j = state.j
        trace.append((j, float(np.linalg.norm(state.V[:, j - 1])), beta))
        if monitor is not None:
            monitor(state)
        tnorm = norm1(state.T())
        nconv, lams = _count_converged(state, sigma, tol, interval)
        nconv_history.append(nconv)
        if nev is not None and interval is None and nconv >= nev:
            status = "converged"
            break
        if interval is not None and want is not None:
            tc = 1e-8 * max(abs(interval[0]), abs(interval[1]))
            if len(_distinct(lams, tc)) >= want:
                status = "converged"
                break
        if beta <= TAU_BREAKDOWN * max(1.0, tnorm):
            status = "invariant"
            break
    norms = (norm1(op.K), norm1(KG)) if KG is not None else None
    pairs = ritz_extract(state, op, tol, KG=KG, norms=norms)
    return LanczosResult(sigma, pairs, state.j, status, trace,
                         orthogonality_error(state), state, nconv_history)


__all__ = [
    "LanczosState", "RitzPair", "LanczosResult", "residual_eta", "angle_to_nullspace",
    "errbound", "is_converged", "start", "step", "range_projector", "orthogonality_error",
    "governing_residual", "ritz_extract", "run", "TAU_BREAKDOWN",
]
