"""Exception and warning types shared by all modules."""


class HartreeError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 3

    def to_dict(self):
        return {"error": type(self).__name__, "message": str(self)}


class NonFinite(HartreeError, FloatingPointError):
    """A field or intermediate result contains NaN or Inf."""


class GridMismatch(HartreeError, ValueError):
    """Two fields that must share a grid do not."""


class RangeError(HartreeError, ValueError):
    """A parameter lies outside the range an operation supports."""


class ComplexDensity(HartreeError, ValueError):
    """A density expected to be real carries a significant imaginary part."""


class DegenerateDenominator(HartreeError, ZeroDivisionError):
    """A ratio is undefined because its denominator vanishes."""


class QuadratureBudgetExceeded(HartreeError):
    """A quadrature failed its order-doubling self-consistency check."""

    def __init__(self, message, coarse=None, fine=None):
        super().__init__(message)
        self.coarse = coarse
        self.fine = fine


class NoConvergence(HartreeError):
    """An iterative solver hit its iteration budget."""

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)

    def to_dict(self):
        d = super().to_dict()
        d["history_tail"] = [float(h) for h in self.history[-20:]]
        return d


class CollapseToZero(HartreeError):
    """An iterate underflowed to zero (usually a bad seed)."""


class GridTooSmall(HartreeError):
    """The converged profile is not decayed at the edge of the grid."""


class InsufficientSamples(HartreeError, ValueError):
    """Too few stored samples to form the requested diagnostic."""


class ConfigError(HartreeError, ValueError):
    """Invalid scenario configuration."""

    exit_code = 2

    def __init__(self, message, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.key = key
        self.line = line

    def to_dict(self):
        d = super().to_dict()
        d.update(key=self.key, line=self.line)
        return d


class TailWarning(UserWarning):
    """A physical-side field is not decayed by the edge of the grid.

    Attributes
    ----------
    ratio : float
        max |f| over the outer 5% of nodes divided by max |f|.
    """

    def __init__(self, message, ratio=float("nan")):
        super().__init__(message)
        self.ratio = ratio
