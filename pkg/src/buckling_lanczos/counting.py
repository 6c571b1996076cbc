"""Eigenvalue counting on intervals from matrix inertias.

For ``alpha < 0`` the number of eigenvalues in ``(alpha, 0)`` is
``nu_-(K - alpha K_G) - nu_-(Z_N^T K_G Z_N)``; for ``alpha > 0`` the number
in ``(0, alpha)`` is ``nu_-(K - alpha K_G) - nu_+(Z_N^T K_G Z_N)``.  The
first term is read off a factorization of either ``A_alpha`` (minus
``dim Z_C``) or the nonsingular block ``S11``.  Zero and infinite
eigenvalues are never counted.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dense import Inertia, TAU_PIVOT, TAU_ZERO, factorize, norm1
from .errors import AlphaOnSpectrum, InputError, ShiftIsZero, SingularProjectedBlock
from .pencil import Pencil
from .transform import Method, augmented_matrix, select_permutation

TAU_CLUSTER = 1e-8
TAU_VECTOR_RANK = 1e-6


@dataclass(frozen=True)
class CountReport:
    interval: tuple
    count: int
    method: str
    inertias_used: list = field(default_factory=list)   # (alpha, nu_-(K - alpha K_G))
    correction_terms: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "interval": [float(self.interval[0]), float(self.interval[1])],
            "count": int(self.count),
            "method": self.method,
            "inertias_used": [[float(a), int(k)] for a, k in self.inertias_used],
            "correction_terms": dict(self.correction_terms),
        }


def small_inertia(ZN, KG) -> Inertia:
    """Inertia of ``Z_N^T K_G Z_N``, which must be nonsingular."""
    ZN = np.asarray(ZN, dtype=float)
    if ZN.shape[1] == 0:
        return Inertia(0, 0, 0)
    G = ZN.T @ np.asarray(KG, dtype=float) @ ZN
    G = 0.5 * (G + G.T)
    w = np.linalg.eigvalsh(G)
    # scale-aware zero test: compare against ||K_G|| ||Z_N||^2
    scale = norm1(KG) * np.linalg.norm(ZN, 2) ** 2
    if np.any(np.abs(w) <= TAU_ZERO * max(scale, np.finfo(float).tiny)):
        raise SingularProjectedBlock("Z_N^T K_G Z_N is singular; check the nullspace bases")
    f = factorize(G)
    return f.inertia


def shifted_negative_count(pencil: Pencil, alpha: float, method="augmented",
                           tau_pivot: float = TAU_PIVOT, tau_zero: float = TAU_ZERO) -> dict:
    """``nu_-(K - alpha K_G)`` via the chosen factorization.

    Returns a dict with ``nminus`` and the raw factor inertia.
    """
    alpha = float(alpha)
    if alpha == 0.0:
        raise ShiftIsZero("alpha must be nonzero")
    method = Method(method)
    if method is Method.AUGMENTED:
        f = factorize(augmented_matrix(pencil, alpha), tau_pivot, tau_zero)
        if f.inertia.nzero:
            raise AlphaOnSpectrum(f"A_alpha is singular at alpha={alpha!r}")
        return {"nminus": f.inertia.nminus - pencil.n3, "inertia": f.inertia}
    keep, _ = select_permutation(pencil.QC)
    A = pencil.shifted(alpha)
    S11 = A[np.ix_(keep, keep)]
    f = factorize(S11, tau_pivot, tau_zero * norm1(A) / max(norm1(S11), 1e-300))
    if f.inertia.nzero:
        raise AlphaOnSpectrum(f"S11 is singular at alpha={alpha!r}")
    return {"nminus": f.inertia.nminus, "inertia": f.inertia}


def count_half_interval(pencil: Pencil, alpha: float, method="augmented",
                        small: Inertia | None = None) -> CountReport:
    """``n(alpha, 0)`` for ``alpha < 0``, ``n(0, alpha)`` for ``alpha > 0``."""
    alpha = float(alpha)
    if alpha == 0.0:
        raise ShiftIsZero("alpha must be nonzero")
    method = Method(method).value
    small = small_inertia(pencil.ZN, pencil.KG) if small is None else small
    res = shifted_negative_count(pencil, alpha, method)
    neg = res["nminus"]
    if alpha < 0:
        corr = small.nminus
        interval = (alpha, 0.0)
        terms = {"nu_minus_ZtKGZ": corr, "dim_ZC": pencil.n3}
    else:
        corr = small.nplus
        interval = (0.0, alpha)
        terms = {"nu_plus_ZtKGZ": corr, "dim_ZC": pencil.n3}
    # raw negative count of the factored matrix (A_alpha or S11)
    terms["nu_minus_factor"] = [[alpha, res["inertia"].nminus]]
    return CountReport(interval, neg - corr, method, [(alpha, neg)], terms)


def count_interval(pencil: Pencil, a: float, b: float, method="augmented") -> CountReport:
    """Number of finite nonzero eigenvalues in ``(a, b)``."""
    a, b = float(a), float(b)
    if not a < b:
        raise InputError(f"degenerate interval ({a}, {b})")
    if a == 0.0 or b == 0.0:
        raise ShiftIsZero("interval endpoints must be nonzero")
    method = Method(method).value
    small = small_inertia(pencil.ZN, pencil.KG)
    ra = count_half_interval(pencil, a, method, small)
    rb = count_half_interval(pencil, b, method, small)
    if a < 0 < b:
        count = ra.count + rb.count
    elif a > 0:
        count = rb.count - ra.count
    else:
        count = ra.count - rb.count
    terms = {"nu_minus_ZtKGZ": small.nminus, "nu_plus_ZtKGZ": small.nplus,
             "dim_ZC": pencil.n3,
             "nu_minus_factor": ra.correction_terms["nu_minus_factor"]
             + rb.correction_terms["nu_minus_factor"]}
    return CountReport((a, b), count, method, ra.inertias_used + rb.inertias_used, terms)


@dataclass(frozen=True)
class Verdict:
    kind: str        # "MATCH", "MISSING" or "SURPLUS"
    k: int
    count: int
    found: int

    def __str__(self):
        return self.kind if self.kind == "MATCH" else f"{self.kind}({self.k})"

    @property
    def ok(self) -> bool:
        return self.kind == "MATCH"

    def to_dict(self) -> dict:
        return {"verdict": str(self), "kind": self.kind, "k": self.k,
                "count": self.count, "found": self.found}


def _cluster_multiplicity(vectors) -> int:
    X = np.column_stack([x / np.linalg.norm(x) for x in vectors])
    s = np.linalg.svd(X, compute_uv=False)
    return int(np.sum(s > TAU_VECTOR_RANK * s[0]))


def found_in_interval(pairs, a: float, b: float) -> int:
    """Distinct eigenvalues among converged pairs in ``(a, b)``.

    Values within ``1e-8 max(|a|, |b|)`` form one cluster; a cluster counts
    the rank of its eigenvectors, so a repeated pair counts once while a
    genuinely multiple eigenvalue counts each independent vector.
    """
    tol = TAU_CLUSTER * max(abs(a), abs(b))
    inside = sorted((p for p in pairs if getattr(p, "converged", True) and a < p.lam < b),
                    key=lambda p: p.lam)
    clusters = []
    for p in inside:
        if clusters and abs(p.lam - clusters[-1][-1].lam) <= tol:
            clusters[-1].append(p)
        else:
            clusters.append([p])
    return sum(_cluster_multiplicity([p.x for p in c]) for c in clusters)


def validate(report: CountReport, pairs) -> Verdict:
    """Compare converged eigenpairs in the report's interval with its count."""
    a, b = report.interval
    found = found_in_interval(pairs, a, b)
    if found == report.count:
        return Verdict("MATCH", 0, report.count, found)
    if found < report.count:
        return Verdict("MISSING", report.count - found, report.count, found)
    return Verdict("SURPLUS", found - report.count, report.count, found)


def brute_force_count(lambdas, a: float, b: float) -> int:
    """Tally of known eigenvalues in ``(a, b)`` (test oracle)."""
    lam = np.asarray(lambdas, dtype=float)
    return int(np.sum((lam > a) & (lam < b)))


__all__ = [
    "CountReport", "Verdict", "small_inertia", "shifted_negative_count",
    "count_half_interval", "count_interval", "found_in_interval", "validate",
    "brute_force_count", "TAU_CLUSTER",
]
