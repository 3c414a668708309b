"""Exception hierarchy.

Two families map onto the CLI exit codes: :class:`InputError` (exit 2) for
malformed data or arguments, :class:`NumericalError` (exit 3) for
degenerate designs, singular matrices and similar failures.
"""


class CycleFitError(Exception):
    """Base class for all package errors."""


class InputError(CycleFitError, ValueError):
    """Bad input data, arguments or configuration."""


class NumericalError(CycleFitError, ArithmeticError):
    """A computation could not be carried out on well-formed input."""


# -- panel ingestion ---------------------------------------------------------

class MissingColumn(InputError):
    def __init__(self, column, path=None):
        self.column = column
        self.path = path
        where = f" in {path}" if path else ""
        super().__init__(f"missing column {column!r}{where}")


class NonNumericCell(InputError):
    def __init__(self, row, col, value, path=None):
        self.row, self.col, self.value = row, col, value
        where = f"{path}: " if path else ""
        super().__init__(f"{where}non-numeric cell at row {row}, column {col!r}: {value!r}")


class GapInYears(InputError):
    def __init__(self, previous, current, path=None):
        self.previous, self.current = previous, current
        where = f"{path}: " if path else ""
        super().__init__(f"{where}years must be consecutive, got {previous} followed by {current}")


class DuplicateSector(InputError):
    def __init__(self, name, path=None):
        self.name = name
        where = f"{path}: " if path else ""
        super().__init__(f"{where}duplicate sector {name!r}")


class ZeroBaseValue(InputError):
    def __init__(self, sector):
        self.sector = sector
        super().__init__(f"sector {sector!r} has a zero value at t=1; cannot normalize")


class UnknownSector(InputError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown sector {name!r}")


class EmptyGrouping(InputError):
    def __init__(self):
        super().__init__("grouping is empty")


class EmptyPanel(InputError):
    def __init__(self):
        super().__init__("panel has no sectors")


class DimensionMismatch(InputError):
    pass


class LengthMismatch(InputError):
    pass


# -- spectrum / fitting ------------------------------------------------------

class KAboveNyquist(InputError):
    def __init__(self, k, N):
        self.k, self.N = k, N
        super().__init__(f"harmonic k={k} is not admissible for N={N} (need 1 <= k < N/2)")


class InadmissibleK(KAboveNyquist):
    pass


class EmptyKSet(InputError):
    def __init__(self):
        super().__init__("harmonic set is empty")


class WindowTooLong(InputError):
    pass


class EmptyRange(InputError):
    pass


class DegenerateDenominator(NumericalError):
    pass


class RankDeficientDesign(NumericalError):
    pass


class NoCovariance(NumericalError):
    pass


class ZeroDofResidual(NumericalError):
    pass


class ConstantSeries(NumericalError):
    pass


class ZeroFluctuation(NumericalError):
    pass


class NoHarmonics(NumericalError):
    pass


# -- Leontief system ---------------------------------------------------------

class RankDeficientRegressors(NumericalError):
    pass


class SingularB(NumericalError):
    def __init__(self, condition_number):
        self.condition_number = condition_number
        super().__init__(f"capital matrix B is singular (condition number {condition_number:.3e})")


class UnstableBlowup(NumericalError):
    def __init__(self, t, norm):
        self.t, self.norm = t, norm
        super().__init__(f"state norm {norm:.3e} exceeded the overflow guard at t={t:g}")
