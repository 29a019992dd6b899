"""Shared exception types.

Errors that signal a *mathematical* failure (an inequality that should hold
does not, a boundary operator that does not square to zero) are distinct
classes so tests can assert on them precisely.
"""


class MBHError(Exception):
    """Base class for all package errors."""


# --- exact algebra ---------------------------------------------------------

class NotAComplex(MBHError):
    """Some composite boundary d_{k-1} . d_k is nonzero."""

    def __init__(self, degrees):
        self.degrees = tuple(degrees)
        super().__init__(f"boundary does not square to zero in degrees {self.degrees}")


# --- polynomials -----------------------------------------------------------

class NotDivisible(MBHError):
    """M - P is not divisible by (1 + t)."""


class NegativeCoefficient(MBHError):
    """The quotient by (1 + t) exists but has a negative coefficient."""


class InvalidKernelRank(MBHError):
    """A kernel rank exceeds the rank of its chain group."""


# --- landscapes ------------------------------------------------------------

class InvalidPoint(MBHError):
    """Coordinates violate the chart constraint beyond tolerance."""


class NotFound(MBHError):
    """Unknown catalog name."""


# --- flow engine -----------------------------------------------------------

class DegenerateCritical(MBHError):
    """A refined critical point has a near-zero Hessian eigenvalue transverse
    to its detected cluster."""


class NoConvergence(MBHError):
    """Flow integration exceeded t_max without capture."""


class RelativeIndexNotOne(MBHError):
    """Connection counting requested for a pair with index difference != 1."""


# --- perturbation ----------------------------------------------------------

class EpsilonTooLarge(MBHError):
    """The perturbed function has critical points outside the expected set."""


class UnmatchedCritical(MBHError):
    """A critical point of the perturbed function matches no auxiliary
    critical point."""


# --- cascades --------------------------------------------------------------

class BudgetExceeded(MBHError):
    """Cascade scan grid exhausted without a stable count."""


class EmptySet(MBHError):
    """Hausdorff distance of an empty sample requested."""


class CountDrift(MBHError):
    """Connection counts changed across an epsilon sweep."""


class BijectionFailure(MBHError):
    """Cascade/perturbed-flow matching failed (count mismatch or
    non-injective matching)."""


# --- chains / multicomplex -------------------------------------------------

class DegreeZero(MBHError):
    """Boundary of a single zero-dimensional face requested."""


class NotFaceClosed(MBHError):
    """A cubical complex is missing faces of some of its cubes."""


class ShapeMismatch(MBHError):
    """Multicomplex differentials have inconsistent shapes."""


class RelationFailure(MBHError):
    """The multicomplex relations fail on numerically built data."""


class DimensionUnsupported(MBHError):
    """Numeric multicomplex construction requested for a base of dimension > 1."""


# --- cli -------------------------------------------------------------------

class ConfigError(MBHError):
    """Run configuration failed to parse or validate."""
