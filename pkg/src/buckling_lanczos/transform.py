"""Generalized buckling spectral transformation and the regularized inner
product.

``C = (K - sigma K_G)^+ K`` is never formed.  ``u = C v`` is the unique
solution of ``(K - sigma K_G) u = K v`` with ``Z_C^T u = 0``, computed either
from the bordered ("augmented") matrix

    A_sigma = [[K - sigma K_G, Z_C], [Z_C^T, 0]]

or ("reduced") from a nonsingular principal submatrix ``S11`` of the
permuted shifted matrix followed by a projection onto ``Z_C``'s complement.
"""
from __future__ import annotations

from dataclasses import dataclass
import enum

import numpy as np
import scipy.linalg as sla

from .dense import LdltFactor, TAU_PIVOT, TAU_ZERO, factorize, norm1, orthonormalize
from .errors import InputError, PermutationFailure, ShiftIsZero, SingularShift
from .pencil import Pencil

TAU_PROJ = 1e-10


class Method(str, enum.Enum):
    AUGMENTED = "augmented"
    REDUCED = "reduced"


@dataclass(frozen=True)
class ShiftInvertOperator:
    K: np.ndarray
    sigma: float
    method: Method
    factor: LdltFactor
    QC: np.ndarray
    inertia_neg: int
    keep: np.ndarray | None = None   # reduced method: retained indices
    drop: np.ndarray | None = None   # reduced method: indices moved last

    @property
    def n(self) -> int:
        return self.K.shape[0]

    @property
    def min_pivot(self) -> float:
        """Smallest pivot magnitude; a conditioning hint near the spectrum."""
        return self.factor.min_pivot

    def apply(self, v, return_aux: bool = False):
        """Return ``u = C v`` (``v`` may hold several columns).

        With ``return_aux`` the augmented method also returns the bordered
        unknown ``y``, which is zero in exact arithmetic.
        """
        v = np.asarray(v, dtype=float)
        Kv = self.K @ v
        n = self.n
        if self.method is Method.AUGMENTED:
            k3 = self.QC.shape[1]
            rhs = np.concatenate([Kv, np.zeros((k3,) + Kv.shape[1:])])
            sol = self.factor.solve(rhs)
            u, y = sol[:n], sol[n:]
            return (u, y) if return_aux else u
        c = Kv[self.keep]
        w1 = self.factor.solve(c)
        up = np.zeros_like(Kv)
        up[self.keep] = w1
        u = up - self.QC @ (self.QC.T @ up)
        return (u, None) if return_aux else u

    __call__ = apply


def _check_shift(sigma):
    if sigma == 0.0:
        raise ShiftIsZero("the shift must be nonzero")


def augmented_matrix(pencil: Pencil, sigma: float) -> np.ndarray:
    QC = pencil.QC
    k3 = QC.shape[1]
    return np.block([[pencil.shifted(sigma), QC], [QC.T, np.zeros((k3, k3))]])


def build_method1(pencil: Pencil, sigma: float, tau_pivot: float = TAU_PIVOT,
                  tau_zero: float = TAU_ZERO) -> ShiftInvertOperator:
    """Factor the bordered matrix ``A_sigma`` (size n + n3)."""
    sigma = float(sigma)
    _check_shift(sigma)
    f = factorize(augmented_matrix(pencil, sigma), tau_pivot, tau_zero)
    if f.inertia.nzero:
        raise SingularShift(
            f"A_sigma is singular at sigma={sigma!r} ({f.inertia.nzero} zero pivots)")
    return ShiftInvertOperator(pencil.K, sigma, Method.AUGMENTED, f, pencil.QC,
                               f.inertia.nminus)


def select_permutation(ZC) -> tuple[np.ndarray, np.ndarray]:
    """Split indices into (keep, drop) so that ``ZC[drop]`` is nonsingular.

    Column-pivoted QR of ``ZC^T`` greedily picks the rows of ``ZC`` that
    make the trailing block best conditioned.
    """
    ZC = np.asarray(ZC, dtype=float)
    n, k3 = ZC.shape
    if k3 == 0:
        return np.arange(n), np.arange(0)
    _, R, piv = sla.qr(ZC.T, mode="economic", pivoting=True)
    drop = np.sort(piv[:k3])
    Y2 = ZC[drop]
    s = np.linalg.svd(Y2, compute_uv=False)
    if s[-1] <= 1e-12 * max(s[0], 1.0):
        raise PermutationFailure("no nonsingular trailing block in Z_C; is it full rank?")
    keep = np.setdiff1d(np.arange(n), drop)
    return keep, drop


def build_method2(pencil: Pencil, sigma: float, tau_pivot: float = TAU_PIVOT,
                  tau_zero: float = TAU_ZERO) -> ShiftInvertOperator:
    """Factor the nonsingular submatrix ``S11`` of the permuted shifted matrix."""
    sigma = float(sigma)
    _check_shift(sigma)
    keep, drop = select_permutation(pencil.QC)
    A = pencil.shifted(sigma)
    S11 = A[np.ix_(keep, keep)]
    # zero classification against the full shifted matrix's scale
    f = factorize(S11, tau_pivot, tau_zero * norm1(A) / max(norm1(S11), 1e-300))
    if f.inertia.nzero:
        raise SingularShift(
            f"S11 is singular at sigma={sigma!r} ({f.inertia.nzero} zero pivots)")
    return ShiftInvertOperator(pencil.K, sigma, Method.REDUCED, f, pencil.QC,
                               f.inertia.nminus, keep, drop)


def build(pencil: Pencil, sigma: float, method="reduced", **kw) -> ShiftInvertOperator:
    method = Method(method)
    if method is Method.AUGMENTED:
        return build_method1(pencil, sigma, **kw)
    return build_method2(pencil, sigma, **kw)


def apply(op: ShiftInvertOperator, v):
    return op.apply(v)


@dataclass(frozen=True)
class RegularizedInnerProduct:
    """``M = K + U_N H_N U_N^T + Z_C H_C Z_C^T`` with ``U_N = K_G Z_N``."""

    K: np.ndarray
    UN: np.ndarray
    HN: np.ndarray
    ZC: np.ndarray
    HC: np.ndarray

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        y = self.K @ x
        if self.UN.shape[1]:
            y = y + self.UN @ (self.HN @ (self.UN.T @ x))
        if self.ZC.shape[1]:
            y = y + self.ZC @ (self.HC @ (self.ZC.T @ x))
        return y

    __call__ = apply

    def dense(self) -> np.ndarray:
        return self.apply(np.eye(self.K.shape[0]))


def m_apply(M: RegularizedInnerProduct, x):
    return M.apply(x)


def default_scaling(pencil: Pencil, ZC=None):
    """``H_N = omega diag(1 / ||(K_G Z_N)_i||^2)`` and ``H_C = omega I``,
    with ``omega = ||K||_1``."""
    omega = pencil.norm1_K
    UN = pencil.KG @ pencil.ZN
    cn = np.linalg.norm(UN, axis=0)
    if np.any(cn == 0.0) or np.any(cn <= 1e-14 * max(pencil.norm1_KG, 1.0)):
        raise InputError("K_G Z_N has a zero column: that Z_N vector lies in the common nullspace")
    k3 = pencil.n3 if ZC is None else np.asarray(ZC).shape[1]
    return omega * np.diag(1.0 / cn ** 2), omega * np.eye(k3)


def build_inner_product(pencil: Pencil, HN=None, HC=None, ZC=None) -> RegularizedInnerProduct:
    """Regularized inner product; defaults to :func:`default_scaling` and the
    orthonormalized common-nullspace basis."""
    ZC = pencil.QC if ZC is None else np.asarray(ZC, dtype=float)
    if HN is None or HC is None:
        dHN, dHC = default_scaling(pencil, ZC)
        HN = dHN if HN is None else HN
        HC = dHC if HC is None else HC
    return RegularizedInnerProduct(pencil.K, pencil.KG @ pencil.ZN,
                                   np.atleast_2d(np.asarray(HN, dtype=float)).reshape(
                                       pencil.ZN.shape[1], pencil.ZN.shape[1]),
                                   ZC, np.asarray(HC, dtype=float).reshape(ZC.shape[1], ZC.shape[1]))


def mu_to_lambda(mu, sigma):
    """``lambda = sigma mu / (mu - 1)``; ``mu == 1`` is the infinite class."""
    if mu == 1.0:
        raise ZeroDivisionError("mu = 1 corresponds to an infinite eigenvalue")
    return sigma * mu / (mu - 1.0)


def lambda_to_mu(lam, sigma):
    """``mu = lambda / (lambda - sigma)``."""
    if lam == sigma:
        raise ZeroDivisionError("lambda equals the shift")
    return lam / (lam - sigma)


def operator_matrix(op: ShiftInvertOperator) -> np.ndarray:
    """Dense ``C`` obtained by applying the operator to the identity (oracle use)."""
    return op.apply(np.eye(op.n))


__all__ = [
    "Method", "ShiftInvertOperator", "RegularizedInnerProduct", "augmented_matrix",
    "build", "build_method1", "build_method2", "select_permutation", "apply",
    "m_apply", "default_scaling", "build_inner_product", "mu_to_lambda",
    "lambda_to_mu", "operator_matrix", "orthonormalize", "TAU_PROJ",
]
