"""Exception hierarchy shared by every zerofree module."""

from __future__ import annotations


class ZeroFreeError(Exception):
    """Base class for all errors raised by the package."""


class PoleAt(ZeroFreeError):
    """Evaluation requested within pole clearance of a known singularity."""

    def __init__(self, pole, point=None):
        self.pole = complex(pole)
        self.point = None if point is None else complex(point)
        msg = f"pole at {_fmt(self.pole)}"
        if self.point is not None:
            msg += f" (evaluated at {_fmt(self.point)})"
        super().__init__(msg)


class PoleTooClose(ZeroFreeError):
    """Finite-difference stencil would straddle a known pole."""


class DomainError(ZeroFreeError, ValueError):
    """Argument outside the domain of a branch-dependent function."""


class ValueOverflow(ZeroFreeError, ArithmeticError):
    """Tagged overflow sentinel: the log-modulus of a result exceeds the representable range.

    ``log_value`` holds the complex logarithm that could not be exponentiated,
    so callers that can work in log space still have the information.
    """

    def __init__(self, point, log_value):
        self.point = complex(point)
        self.log_value = complex(log_value)
        super().__init__(
            f"result at {_fmt(self.point)} overflows (log-modulus {self.log_value.real:.6g})"
        )


class DenominatorZero(ZeroFreeError):
    def __init__(self, point):
        self.point = complex(point)
        super().__init__(f"denominator vanishes near {_fmt(self.point)}")


class UnknownFunction(ZeroFreeError, KeyError):
    def __str__(self):
        return f"unknown function {self.args[0]!r}"


class RegionError(ZeroFreeError, ValueError):
    """Malformed region parameters."""


class UnboundedRegion(RegionError):
    pass


class PoleOnBoundary(ZeroFreeError):
    def __init__(self, point, cause=None):
        self.point = complex(point)
        self.cause = cause
        super().__init__(f"boundary sample {_fmt(self.point)} cannot be evaluated: {cause}")


class PoleInRegion(PoleOnBoundary):
    pass


class PoleOnCut(PoleOnBoundary):
    pass


class ZeroOnContour(ZeroFreeError):
    def __init__(self, point):
        self.point = complex(point)
        super().__init__(f"function (nearly) vanishes on the contour near {_fmt(self.point)}")


class QuadratureNotConverged(ZeroFreeError):
    pass


class InvalidResidual(ZeroFreeError):
    pass


class MaxDepthExceeded(ZeroFreeError):
    pass


class ZeroOnCut(ZeroFreeError):
    pass


def _fmt(z: complex) -> str:
    return f"{z.real:.10g}{z.imag:+.10g}i"
