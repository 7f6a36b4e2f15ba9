"""Exception types shared across the toolkit."""


class CcmError(Exception):
    """Base class for all toolkit errors."""


class NumericalBlowup(CcmError):
    """A numerical kernel produced non-finite values."""


class InsufficientSamples(CcmError):
    """An integral was requested over fewer than two samples."""


class ShapeError(CcmError):
    """An array argument has the wrong dimension for the system at hand."""


class UnknownExample(CcmError):
    """Requested built-in system name does not exist."""


class UnknownMetric(CcmError):
    """Requested built-in metric name does not exist."""


class NonSmoothAtZero(CcmError):
    """Metric gradient requested at a zero tangent where it is undefined."""


class InvalidMetric(CcmError):
    """Metric evaluated to a value inconsistent with its declared structure."""


class DegeneratePath(CcmError):
    """A path violates the tangent-regularity floor (e.g. coincident endpoints)."""


class RateNotExponential(CcmError):
    """An exponential-rate report was requested for a non-linear rate spec."""


class ConfigError(CcmError):
    """A run configuration file is missing, malformed, or inconsistent."""


class ConditionViolated(CcmError):
    """The stabilizability condition failed at a sampled point.

    Signals b ~ 0 together with a >= 0: the control term cannot dominate the
    drift term there, so no gain renders the point dissipative.
    """

    def __init__(self, message, *, a=None, b=None, x=None, delta=None,
                 node_index=None, s=None):
        super().__init__(message)
        self.a = a
        self.b = b
        self.x = x
        self.delta = delta
        self.node_index = node_index
        self.s = s
