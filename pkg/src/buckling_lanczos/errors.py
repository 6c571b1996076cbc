"""Exception hierarchy shared across the package."""


class BucklingError(Exception):
    """Base class for all package errors."""


class InputError(BucklingError):
    """Malformed or inconsistent input data (files, bases, parameters)."""


class SingularFactorError(BucklingError):
    """A solve was requested on a factorization with zero pivots."""


class ShiftIsZero(BucklingError):
    pass


class SingularShift(BucklingError):
    """The shift is (numerically) an eigenvalue of the pencil."""


class PermutationFailure(BucklingError):
    """No nonsingular trailing block of the common-nullspace basis was found."""


class NotSemidefinite(BucklingError):
    pass


class CouplingPresent(BucklingError):
    """Operation requires a simultaneously diagonalizable pencil (n0 == 0)."""


class LanczosBreakdown(BucklingError):
    """The starting vector generates a trivial Krylov space."""


class NonpositiveNorm(BucklingError):
    """The inner product returned a negative squared norm."""


class AlphaOnSpectrum(BucklingError):
    """A counting endpoint coincides with a pencil eigenvalue."""


class SingularProjectedBlock(BucklingError):
    """Z_N^T K_G Z_N is singular, so the nullspace bases are inconsistent."""
