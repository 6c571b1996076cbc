"""Dense in-memory view of a buckling pencil with its nullspace bases."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .dense import norm1, orthonormalize
from .errors import InputError


@dataclass(frozen=True)
class Pencil:
    """``K - lambda K_G`` with ``[Z_N Z_C]`` spanning ``N(K)``.

    ``Z_C`` spans the common nullspace of ``K`` and ``K_G``; either basis
    may have zero columns.
    """

    K: np.ndarray
    KG: np.ndarray
    ZN: np.ndarray
    ZC: np.ndarray

    def __post_init__(self):
        n = self.K.shape[0]
        for name, X in (("K", self.K), ("KG", self.KG)):
            if X.shape != (n, n):
                raise InputError(f"{name} must be {n}x{n}")
        for name, Z in (("ZN", self.ZN), ("ZC", self.ZC)):
            if Z.ndim != 2 or Z.shape[0] != n:
                raise InputError(f"{name} must have {n} rows")

    @classmethod
    def from_arrays(cls, K, KG, ZN=None, ZC=None) -> "Pencil":
        K = np.asarray(K, dtype=float)
        n = K.shape[0]

        def basis(Z):
            if Z is None:
                return np.zeros((n, 0))
            Z = np.asarray(Z, dtype=float)
            return Z[:, None] if Z.ndim == 1 else Z

        return cls(K, np.asarray(KG, dtype=float), basis(ZN), basis(ZC))

    @classmethod
    def from_bundle(cls, bundle) -> "Pencil":
        return cls(bundle.K_dense, bundle.KG_dense, bundle.ZN.columns, bundle.ZC.columns)

    @property
    def n(self) -> int:
        return self.K.shape[0]

    @property
    def n3(self) -> int:
        return self.ZC.shape[1]

    @cached_property
    def norm1_K(self) -> float:
        return norm1(self.K)

    @cached_property
    def norm1_KG(self) -> float:
        return norm1(self.KG)

    @cached_property
    def QC(self) -> np.ndarray:
        """Orthonormal basis of the common nullspace."""
        return orthonormalize(self.ZC)

    def shifted(self, sigma: float) -> np.ndarray:
        return self.K - sigma * self.KG
