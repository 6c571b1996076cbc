"""Synthetic buckling pencils with known spectra, and a Lanczos-vector norm
growth demonstration comparing the ``K`` semi-inner product with ``M``."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import lanczos as lz
from .dense import norm1, orthonormalize, sym_tridiag_eig
from .errors import InputError
from .matio import ProblemBundle
from .pencil import Pencil
from .transform import build, build_inner_product


@dataclass(frozen=True)
class GeneratedPencil:
    bundle: ProblemBundle
    truth: list                   # (lambda, x) for finite nonzero eigenvalues
    infinite_count: int           # size of the lambda = 0 class (n2)
    common_null_dim: int          # n3
    seed: int | None
    params: dict = field(default_factory=dict)

    @cached_property
    def pencil(self) -> Pencil:
        return Pencil.from_bundle(self.bundle)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.sort(np.array([lam for lam, _ in self.truth]))

    def truth_dict(self) -> dict:
        return {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "infinite_count": self.infinite_count,
            "common_null_dim": self.common_null_dim,
            "seed": self.seed,
            "params": self.params,
        }


def _sym(X):
    return 0.5 * (X + X.T)


def random_orthogonal(n: int, rng) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR with a sign-fixed diagonal)."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    return Q * d


def well_conditioned(n: int, rng, spread: float = 0.1) -> np.ndarray:
    """``Q1 (I + spread R) Q2`` with ``||R||_2 = 1``, so ``cond <= (1+s)/(1-s)``."""
    if n == 0:
        return np.zeros((0, 0))
    G = rng.standard_normal((n, n))
    G /= np.linalg.norm(G, 2)
    return random_orthogonal(n, rng) @ (np.eye(n) + spread * G) @ random_orthogonal(n, rng)


def gen_example1(n: int, m: int, seed: int = 0) -> GeneratedPencil:
    """``K = Q Lambda Q^T``, ``K_G = Q Phi Q^T`` with ``Lambda_kk = k`` for
    ``k <= n - m`` (else 0) and ``Phi_kk = (-1)^k``; ``lambda_k = (-1)^k k``."""
    if not (1 <= m < n):
        raise InputError("need 1 <= m < n")
    rng = np.random.default_rng(seed)
    Q = random_orthogonal(n, rng)
    k = np.arange(1, n + 1, dtype=float)
    lam = np.where(k <= n - m, k, 0.0)
    phi = (-1.0) ** k
    K = _sym((Q * lam) @ Q.T)
    KG = _sym((Q * phi) @ Q.T)
    ZN = Q[:, n - m:]
    truth = [(float(phi[i] * k[i]), Q[:, i].copy()) for i in range(n - m)]
    bundle = ProblemBundle.from_arrays(K, KG, ZN, None)
    return GeneratedPencil(bundle, truth, m, 0, seed, {"kind": "example1", "n": n, "m": m})


def gen_singular(n1: int, n2: int, n3: int, lambda1_sharp, lambda2_sharp,
                 seed: int | None = 0, identity: bool = False) -> GeneratedPencil:
    """Singular pencil with ``W^T K W = diag(I, 0, 0)`` and
    ``W^T K_G W = diag(Lambda1#, Lambda2#, 0)``.

    Finite eigenvalues are ``1 / lambda#`` for the nonzero entries of
    ``Lambda1#`` with eigenvectors the matching columns of ``W``.  ``W`` is
    random and well conditioned unless ``identity`` is set.
    """
    l1 = np.atleast_1d(np.asarray(lambda1_sharp, dtype=float))
    l2 = np.atleast_1d(np.asarray(lambda2_sharp, dtype=float))
    if l1.size != n1 or l2.size != n2:
        raise InputError("Lambda1#/Lambda2# lengths must equal n1/n2")
    if np.any(l2 == 0.0):
        raise InputError("Lambda2# entries must be nonzero")
    if n1 < 1:
        raise InputError("need n1 >= 1")
    n = n1 + n2 + n3
    rng = np.random.default_rng(seed)
    W = np.eye(n) if identity else well_conditioned(n, rng)
    if n3:
        # first two blocks orthogonal to the common nullspace block
        W3 = W[:, n1 + n2:]
        Q3 = orthonormalize(W3)
        X = W[:, : n1 + n2]
        W[:, : n1 + n2] = X - Q3 @ (Q3.T @ X)
    Winv = np.linalg.inv(W)
    dK = np.concatenate([np.ones(n1), np.zeros(n2 + n3)])
    dG = np.concatenate([l1, l2, np.zeros(n3)])
    K = _sym((Winv.T * dK) @ Winv)
    KG = _sym((Winv.T * dG) @ Winv)
    ZN = W[:, n1 : n1 + n2]
    ZC = orthonormalize(W[:, n1 + n2:]) if n3 else None
    if identity:
        ZC = W[:, n1 + n2:] if n3 else None
    truth = [(1.0 / l1[i], W[:, i].copy()) for i in range(n1) if l1[i] != 0.0]
    bundle = ProblemBundle.from_arrays(K, KG, ZN if n2 else None, ZC)
    params = {"kind": "singular", "n1": n1, "n2": n2, "n3": n3,
              "lambda1_sharp": [float(v) for v in l1],
              "lambda2_sharp": [float(v) for v in l2]}
    return GeneratedPencil(bundle, truth, n2, n3, seed, params)


def tiny_pencil() -> GeneratedPencil:
    """``K = diag(1, 0, 0)``, ``K_G = diag(2, -1, 0)``, ``Z_N = e2``, ``Z_C = e3``."""
    return gen_singular(1, 1, 1, [2.0], [-1.0], seed=None, identity=True)


def random_singular(seed: int, n_max: int = 200, n3_choices=(1, 2, 3)) -> GeneratedPencil:
    """A seeded :func:`gen_singular` pencil with well separated ``lambda#``."""
    rng = np.random.default_rng(seed)
    n3 = int(rng.choice(n3_choices))
    n = int(rng.integers(20, n_max + 1))
    n2 = int(rng.integers(1, max(2, n // 10) + 1))
    n1 = n - n2 - n3
    # eigenvalues lambda = +-(1..) spaced at least 0.1 apart
    mag = 0.5 + 0.25 * np.arange(n1) + 0.1 * rng.random(n1)
    lam = rng.permutation(mag * rng.choice([-1.0, 1.0], n1))
    l2 = rng.choice([-1.0, 1.0], n2) * rng.uniform(0.5, 2.0, n2)
    return gen_singular(n1, n2, n3, 1.0 / lam, l2, seed=seed)


@dataclass(frozen=True)
class SemidefinitePencil:
    A: np.ndarray
    B: np.ndarray
    dims: tuple                   # (n0, n1, n2, n3)
    Lambda1: np.ndarray
    Lambda2: np.ndarray
    W: np.ndarray


def gen_semidefinite(n0: int, n1: int, n2: int, n3: int, seed: int = 0) -> SemidefinitePencil:
    """``A``, ``B`` (``B`` semidefinite) congruent to the canonical blocks.

    Each coupled pair contributes ``A = [[0, 1], [1, 0]]``, ``B = diag(1, 0)``.
    """
    rng = np.random.default_rng(seed)
    n = 2 * n0 + n1 + n2 + n3
    W = well_conditioned(n, rng)
    l1 = rng.choice([-1.0, 1.0], n1) * rng.uniform(0.2, 3.0, n1)
    l2 = rng.choice([-1.0, 1.0], n2) * rng.uniform(0.5, 2.0, n2)
    FA = np.zeros((n, n))
    FB = np.zeros((n, n))
    for i in range(n0):
        FA[2 * i, 2 * i + 1] = FA[2 * i + 1, 2 * i] = 1.0
        FB[2 * i, 2 * i] = 1.0
    o = 2 * n0
    FA[o : o + n1, o : o + n1] = np.diag(l1)
    FB[o : o + n1, o : o + n1] = np.eye(n1)
    FA[o + n1 : o + n1 + n2, o + n1 : o + n1 + n2] = np.diag(l2)
    Winv = np.linalg.inv(W)
    A = _sym(Winv.T @ FA @ Winv)
    B = _sym(Winv.T @ FB @ Winv)
    return SemidefinitePencil(A, B, (n0, n1, n2, n3), l1, l2, W)


@dataclass
class DemoTrace:
    inner: str
    sigma: float
    vnorms: list
    betas: list
    eta_history: list             # eta of the Ritz pair nearest sigma, per step
    restart: int | None = None
    events: list = field(default_factory=list)

    @property
    def max_vnorm(self) -> float:
        return float(max(self.vnorms))

    def rows(self):
        return [(i + 1, v, b) for i, (v, b) in enumerate(zip(self.vnorms, self.betas))]

    def eta_rows(self):
        return [(i + 1, e) for i, e in enumerate(self.eta_history)]


class _SemiInner:
    """The ``K`` semi-inner product, as used before regularization."""

    def __init__(self, K):
        self.K = K

    def apply(self, x):
        return self.K @ x


def _purge(state: lz.LanczosState) -> None:
    """One implicit QR step with zero shift; drops the last Lanczos vector.

    The new start vector is ``C v_1``, damping directions that ``C`` maps
    to zero (nullspace components).
    """
    j = state.j
    T = state.T()
    Q, _ = np.linalg.qr(T)
    Tp = Q.T @ T @ Q
    Vp = state.V[:, :j] @ Q
    MVp = state.MV[:, :j] @ Q
    CVp = state.CV[:, :j] @ Q
    k = j - 1
    f = Vp[:, k] * Tp[k, k - 1] + state.beta * Q[j - 1, k - 1] * state.V[:, j]
    mf = MVp[:, k] * Tp[k, k - 1] + state.beta * Q[j - 1, k - 1] * state.MV[:, j]
    b2 = float(mf @ f)
    beta = np.sqrt(abs(b2))
    if b2 < 0:
        state.events.append(("restart", b2))
    state.V[:, :k] = Vp[:, :k]
    state.MV[:, :k] = MVp[:, :k]
    state.CV[:, :k] = CVp[:, :k]
    state.V[:, k:] = 0.0
    state.MV[:, k:] = 0.0
    state.V[:, k] = f / beta
    state.MV[:, k] = mf / beta
    state.alphas[:] = list(np.diag(Tp)[:k])
    state.betas[:] = [state.betas[0]] + list(np.diag(Tp, -1)[: k - 1]) + [beta]
    state.j = k


def _nearest_eta(state, sigma, K, KG, norms):
    theta, S = sym_tridiag_eig(state.alphas, state.betas[1 : state.j])
    i = int(np.argmax(np.abs(theta)))
    mu = float(theta[i])
    if mu == 1.0:
        return float("nan")
    lam = sigma * mu / (mu - 1.0)
    return lz.residual_eta(K, KG, lam, state.basis() @ S[:, i], norms)


def demo_norm_growth(n: int = 500, m: int = 1, sigma: float = -0.6, steps: int = 40,
                     inner: str = "M", restart: int | None = None, seed: int = 0,
                     gp: GeneratedPencil | None = None, x0=None) -> DemoTrace:
    """Lanczos vector 2-norms under the ``K`` or ``M`` inner product.

    Runs exactly ``steps`` operator applications from ``v = C x0`` (``x0`` all
    ones by default) on the :func:`gen_example1` pencil; ``M`` uses
    ``H_N = I``.  In ``K`` mode ``beta`` comes from the
    seminorm ``(r^T K r)^{1/2}``; a negative ``r^T K r`` is recorded and its
    magnitude used.  ``restart`` applies one zero-shift purge after that step.
    """
    if inner not in ("K", "M"):
        raise InputError("inner must be 'K' or 'M'")
    gp = gen_example1(n, m, seed) if gp is None else gp
    p = gp.pencil
    op = build(p, sigma, "reduced")
    if inner == "M":
        Mip = build_inner_product(p, HN=np.eye(p.ZN.shape[1]), HC=np.eye(p.n3))
    else:
        Mip = _SemiInner(p.K)
    x0 = np.ones(p.n) if x0 is None else np.asarray(x0, dtype=float)
    state = lz.LanczosState.empty(p.n, steps + 1)
    check = inner == "M"
    lz.start(state, op.apply, Mip.apply, x0, check_nonpositive=check)
    norms = (norm1(p.K), norm1(p.KG))
    out = DemoTrace(inner, sigma, [], [], [], restart)
    for t in range(1, steps + 1):
        beta = lz.step(state, op.apply, Mip.apply, check_nonpositive=check)
        out.vnorms.append(float(np.linalg.norm(state.V[:, state.j])) if beta > 0
                          else float(np.linalg.norm(state.V[:, state.j - 1])))
        out.betas.append(beta)
        out.eta_history.append(_nearest_eta(state, sigma, p.K, p.KG, norms))
        if restart is not None and t == restart and state.j >= 2:
            _purge(state)
        if beta == 0.0:
            break
    out.events = list(state.events)
    return out


__all__ = [
    "GeneratedPencil", "SemidefinitePencil", "DemoTrace", "random_orthogonal",
    "well_conditioned", "gen_example1", "gen_singular", "tiny_pencil",
    "random_singular", "gen_semidefinite", "demo_norm_growth",
]
