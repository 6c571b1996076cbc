"""Eigenpairs of singular symmetric buckling pencils ``K - lambda K_G``.

Shift-invert Lanczos on ``C = (K - sigma K_G)^+ K`` in a regularized
positive definite inner product, with inertia-based eigenvalue counting to
validate the results.
"""
from .canonical import CanonicalForm, reduce
from .counting import CountReport, count_half_interval, count_interval, validate
from .dense import Inertia, ldlt
from .errors import BucklingError
from .lanczos import LanczosResult, RitzPair, run
from .matio import ProblemBundle, read_bundle, read_bundle_dir, write_bundle_dir
from .pencil import Pencil
from .problems import gen_example1, gen_singular
from .transform import build, build_inner_product

__version__ = "0.1.0"

__all__ = [
    "BucklingError", "CanonicalForm", "CountReport", "Inertia", "LanczosResult",
    "Pencil", "ProblemBundle", "RitzPair", "build", "build_inner_product",
    "count_half_interval", "count_interval", "gen_example1", "gen_singular", "ldlt",
    "read_bundle", "read_bundle_dir", "reduce", "run", "validate", "write_bundle_dir",
]
