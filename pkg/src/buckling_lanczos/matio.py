"""Matrix Market I/O for pencils and bases, bundle validation, and the JSON
report / CSV trace artifacts."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
import json
import logging
import math
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import InputError

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
TAU_NULL = 1e-10
TAU_RANK = 1e-10
PRECISION = 17
TRACE_HEADER = ("step", "vnorm", "beta")


@dataclass(frozen=True)
class SymMatrix:
    """Symmetric matrix stored as lower-triangle coordinate triplets."""

    n: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    name: str = ""

    def __post_init__(self):
        if np.any(self.rows < self.cols):
            raise InputError("SymMatrix stores the lower triangle only")
        if self.rows.size and (self.rows.max() >= self.n or self.cols.min() < 0):
            raise InputError("SymMatrix index out of bounds")

    @classmethod
    def from_triplets(cls, n, rows, cols, vals, name="") -> "SymMatrix":
        """Assemble triplets: fold to the lower triangle and sum duplicates."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=float)
        lo = np.maximum(rows, cols)
        hi = np.minimum(rows, cols)
        if lo.size and (lo.max() >= n or hi.min() < 0):
            raise InputError("index out of bounds")
        coo = sp.coo_matrix((vals, (lo, hi)), shape=(n, n))
        coo.sum_duplicates()
        return cls(n, coo.row.astype(np.int64), coo.col.astype(np.int64),
                   coo.data.astype(float), name)

    @classmethod
    def from_dense(cls, A, name="") -> "SymMatrix":
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InputError("expected a square matrix")
        if not np.array_equal(A, A.T):
            raise InputError(f"matrix {name!r} is not exactly symmetric")
        r, c = np.nonzero(np.tril(A))
        return cls(A.shape[0], r.astype(np.int64), c.astype(np.int64), A[r, c], name)

    def toarray(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        np.add.at(A, (self.rows, self.cols), self.vals)
        off = self.rows != self.cols
        np.add.at(A, (self.cols[off], self.rows[off]), self.vals[off])
        return A


@dataclass(frozen=True)
class BasisColumns:
    columns: np.ndarray

    @property
    def n(self) -> int:
        return self.columns.shape[0]

    @property
    def k(self) -> int:
        return self.columns.shape[1]

    @classmethod
    def empty(cls, n: int) -> "BasisColumns":
        return cls(np.zeros((n, 0)))


def check_rank(Z, tau_rank: float = TAU_RANK) -> int:
    """Numerical column rank by singular-value thresholding."""
    Z = np.asarray(Z, dtype=float)
    if Z.shape[1] == 0:
        return 0
    s = np.linalg.svd(Z, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tau_rank * s[0]))


def make_basis(Z, n=None, tau_rank: float = TAU_RANK, name="basis") -> BasisColumns:
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == 1:
        Z = Z[:, None]
    if n is not None and Z.shape[0] != n:
        raise InputError(f"{name}: expected {n} rows, found {Z.shape[0]}")
    r = check_rank(Z, tau_rank)
    if r < Z.shape[1]:
        raise InputError(f"{name}: rank {r} is below the declared {Z.shape[1]} columns")
    return BasisColumns(Z.copy())


@dataclass(frozen=True)
class ProblemBundle:
    K: SymMatrix
    KG: SymMatrix
    ZN: BasisColumns
    ZC: BasisColumns

    def __post_init__(self):
        n = self.K.n
        if self.KG.n != n or self.ZN.n != n or self.ZC.n != n:
            raise InputError("bundle dimensions are inconsistent")

    @property
    def n(self) -> int:
        return self.K.n

    @cached_property
    def K_dense(self) -> np.ndarray:
        return self.K.toarray()

    @cached_property
    def KG_dense(self) -> np.ndarray:
        return self.KG.toarray()

    @classmethod
    def from_arrays(cls, K, KG, ZN=None, ZC=None) -> "ProblemBundle":
        K = np.asarray(K, dtype=float)
        n = K.shape[0]
        ZN = BasisColumns.empty(n) if ZN is None else make_basis(ZN, n, name="ZN")
        ZC = BasisColumns.empty(n) if ZC is None else make_basis(ZC, n, name="ZC")
        return cls(SymMatrix.from_dense(K, "K"), SymMatrix.from_dense(KG, "KG"), ZN, ZC)


# -- Matrix Market ----------------------------------------------------------

def read_matrix_market(path, name=None) -> SymMatrix:
    """Read a symmetric real Matrix Market file (coordinate or array)."""
    path = Path(path)
    name = path.stem if name is None else name
    try:
        rows, ncols, _, fmt, field_, symm = scipy.io.mminfo(str(path))
    except (OSError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    if rows != ncols:
        raise InputError(f"{path}: matrix is not square ({rows}x{ncols})")
    if field_ not in ("real", "integer"):
        raise InputError(f"{path}: unsupported field {field_!r}")
    if fmt == "coordinate" and symm != "symmetric":
        raise InputError(f"{path}: header declares {symm!r}, expected symmetric")
    try:
        data = scipy.io.mmread(str(path))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if fmt == "coordinate":
        # mmread already mirrored the stored triangle; keep the lower part
        coo = sp.coo_matrix(data)
        coo.sum_duplicates()
        keep = coo.row >= coo.col
        return SymMatrix.from_triplets(rows, coo.row[keep], coo.col[keep], coo.data[keep], name)
    A = np.asarray(data, dtype=float)
    if not np.array_equal(A, A.T):
        raise InputError(f"{path}: array matrix is not symmetric")
    return SymMatrix.from_dense(A, name)


def write_matrix_market(path, M: SymMatrix, precision: int = PRECISION) -> None:
    coo = sp.coo_matrix((M.vals, (M.rows, M.cols)), shape=(M.n, M.n))
    scipy.io.mmwrite(str(path), coo, symmetry="symmetric", precision=precision,
                     comment=M.name)


def read_basis(path, n: int, tau_rank: float = TAU_RANK) -> BasisColumns:
    path = Path(path)
    try:
        data = scipy.io.mmread(str(path))
    except (OSError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    if sp.issparse(data):
        data = data.toarray()
    return make_basis(np.asarray(data, dtype=float), n, tau_rank, name=str(path))


def write_basis(path, Z, precision: int = PRECISION) -> None:
    Z = Z.columns if isinstance(Z, BasisColumns) else np.asarray(Z, dtype=float)
    scipy.io.mmwrite(str(path), np.asarray(Z, dtype=float), precision=precision)


BUNDLE_FILES = {"K": "K.mtx", "KG": "KG.mtx", "ZN": "ZN.mtx", "ZC": "ZC.mtx"}


def read_bundle(K, KG, ZN=None, ZC=None, tau_rank: float = TAU_RANK) -> ProblemBundle:
    """Load a bundle from individual paths; missing bases mean 0 columns."""
    Km = read_matrix_market(K, "K")
    KGm = read_matrix_market(KG, "KG")
    n = Km.n
    ZNb = read_basis(ZN, n, tau_rank) if ZN else BasisColumns.empty(n)
    ZCb = read_basis(ZC, n, tau_rank) if ZC else BasisColumns.empty(n)
    return ProblemBundle(Km, KGm, ZNb, ZCb)


def read_bundle_dir(directory, tau_rank: float = TAU_RANK) -> ProblemBundle:
    d = Path(directory)
    paths = {k: d / v for k, v in BUNDLE_FILES.items()}
    return read_bundle(paths["K"], paths["KG"],
                       paths["ZN"] if paths["ZN"].exists() else None,
                       paths["ZC"] if paths["ZC"].exists() else None, tau_rank)


def write_bundle_dir(directory, b: ProblemBundle) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_matrix_market(d / BUNDLE_FILES["K"], b.K)
    write_matrix_market(d / BUNDLE_FILES["KG"], b.KG)
    write_basis(d / BUNDLE_FILES["ZN"], b.ZN)
    write_basis(d / BUNDLE_FILES["ZC"], b.ZC)


# -- validation -------------------------------------------------------------

@dataclass
class ValidationReport:
    """Per-column residual ratios ``||A z|| / (||A||_1 ||z||)``.

    ``k_ratios`` covers every column of ``[Z_N Z_C]``; ``kg_ratios`` covers
    the columns of ``Z_C``.  Only the K ratios decide pass/fail; K_G
    ratios above the tolerance produce warnings.
    """

    tau_null: float
    k_ratios: list = field(default_factory=list)
    kg_ratios: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r <= self.tau_null for r in self.k_ratios)

    def to_dict(self) -> dict:
        return {"tau_null": self.tau_null, "passed": self.passed,
                "k_ratios": self.k_ratios, "kg_ratios": self.kg_ratios,
                "warnings": self.warnings}


def _ratios(A, Z):
    if Z.shape[1] == 0:
        return []
    an = float(np.abs(A).sum(axis=0).max())
    num = np.linalg.norm(A @ Z, axis=0)
    den = an * np.linalg.norm(Z, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.where(num > 0, np.inf, 0.0))
    return [float(x) for x in r]


def validate_bundle(b: ProblemBundle, tau_null: float = TAU_NULL) -> ValidationReport:
    K, KG = b.K_dense, b.KG_dense
    Z = np.hstack([b.ZN.columns, b.ZC.columns])
    rep = ValidationReport(tau_null, _ratios(K, Z), _ratios(KG, b.ZC.columns))
    for i, r in enumerate(rep.kg_ratios):
        if r > tau_null:
            msg = f"Z_C column {i}: ||K_G z||/(||K_G||_1 ||z||) = {r:.3e} exceeds {tau_null:g}"
            rep.warnings.append(msg)
            log.warning(msg)
    return rep


# -- reports ----------------------------------------------------------------

def _num(x):
    """JSON-safe float (repr round-trips exactly); non-finite become strings."""
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def report_document(result=None, count=None, verdict=None, meta=None) -> dict:
    """Build the versioned report dictionary.

    ``result`` is duck-typed: anything with ``sigma``, ``iterations``,
    ``status`` and ``converged`` (a list of Ritz pairs with ``lam``, ``mu``,
    ``eta``, ``cos_angle`` and ``errbound``) works.
    """
    doc = {"schema": SCHEMA_VERSION}
    if meta:
        doc.update(meta)
    pairs = []
    if result is not None:
        doc["sigma"] = _num(result.sigma)
        doc["iterations"] = int(result.iterations)
        doc["status"] = result.status
        doc["orthogonality"] = _num(result.orthogonality)
        pairs = [
            {"lambda": _num(p.lam), "mu": _num(p.mu), "eta": _num(p.eta),
             "cos_angle": _num(p.cos_angle), "errbound": _num(p.errbound)}
            for p in result.converged
        ]
    doc["eigenpairs"] = pairs
    doc["count"] = None if count is None else count.to_dict()
    doc["verdict"] = None if verdict is None else verdict.to_dict()
    return doc


def write_report(path, result=None, count=None, verdict=None, meta=None) -> dict:
    doc = report_document(result, count, verdict, meta)
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path is None or str(path) == "-":
        print(text, end="")
    else:
        Path(path).write_text(text)
    return doc


def read_report(path) -> dict:
    return json.loads(Path(path).read_text())


def write_trace(path, rows, header=TRACE_HEADER) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in row])


def read_trace(path):
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = tuple(next(rd))
        rows = [tuple(int(v) if i == 0 else float(v) for i, v in enumerate(r)) for r in rd]
    return header, rows
