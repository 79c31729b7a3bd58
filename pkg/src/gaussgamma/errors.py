"""Exception types raised by the library."""

from __future__ import annotations


class GaussGammaError(Exception):
    """Base class for all library errors.

    ``iteration`` is filled in by the EM driver when the error happened
    inside a fit.
    """

    iteration: int | None = None

    def __str__(self):
        msg = super().__str__()
        if self.iteration is not None:
            return f"{msg} (EM iteration {self.iteration})"
        return msg


class NonPositiveMean(GaussGammaError, ValueError):
    pass


class SchemaError(GaussGammaError, ValueError):
    """Malformed model document.  ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class ZeroDensityObservation(GaussGammaError):
    def __init__(self, index: int, value: float):
        self.index = index
        self.value = value
        super().__init__(
            f"observation {index} (x={value!r}) has zero density under every component"
        )


class ComponentCollapse(GaussGammaError):
    def __init__(self, component: int, reason: str):
        self.component = component
        super().__init__(f"component {component} collapsed: {reason}")


class InfeasibleConfiguration(GaussGammaError, ValueError):
    pass


class EmptySweep(GaussGammaError):
    pass


class ParseError(GaussGammaError, ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class MissingColumn(GaussGammaError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "missing column"


class TooShort(GaussGammaError, ValueError):
    pass
