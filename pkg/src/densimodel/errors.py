"""Exception taxonomy shared by all densimodel modules."""


class DensimodelError(Exception):
    """Base class for all densimodel errors."""


class NonEisenstein(DensimodelError):
    """Ramified defining polynomial fails the Eisenstein criterion."""


class ReduciblePolynomial(DensimodelError):
    """Unramified defining polynomial is reducible mod p."""


class NonUnitInverse(DensimodelError):
    """Inversion requested for an element of positive valuation."""


class PrecisionExhausted(DensimodelError):
    """A computation hit the working-precision floor.

    Callers that own a precision policy (the stabilization loop) catch
    this, double the cap and retry; everyone else propagates it.
    """


class BelowPrecision:
    """Sentinel returned by valuation() when x == 0 at current precision.

    Deliberately not an int and not falsy-comparable: arithmetic on it
    raises, so a below-precision valuation can never be silently used
    as an exact one.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BelowPrecision"


BELOW_PRECISION = BelowPrecision()


class DegenerateForm(DensimodelError):
    """Quadratic lattice with vanishing determinant."""


class NotSublattice(DensimodelError):
    """lattice_index called on a pair that is not nested."""


class RankDeficient(DensimodelError):
    """A lattice that must have full rank does not."""


class NotAModule(DensimodelError):
    """A kernel expected to be A-stable is only a Z_p-module."""


class ClosureViolation(DensimodelError):
    """A product of stabilized-lattice elements escaped the lattice."""


class LiftDependence(DensimodelError):
    """Residue homomorphism output changed between random lifts."""


class NotIsometry(DensimodelError):
    """Residue homomorphism output does not preserve the residue form."""


class BudgetExceeded(DensimodelError):
    """Enumeration size exceeds the configured budget."""


class NotStabilized(DensimodelError):
    """Naive density oracle did not stabilize within k_max levels."""

    def __init__(self, k_max, ratios=None):
        super().__init__(f"oracle not stabilized by k_max={k_max}")
        self.k_max = k_max
        self.ratios = ratios or []


class OutOfFamily(DensimodelError):
    """Closed-form density requested outside the covered family."""


class ParseError(DensimodelError):
    """Lattice specification text failed to parse."""

    def __init__(self, message, line, col):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col
