"""Exception types raised by the engine.

Every geometric failure carries the offending point when one is known, so the
scenario runner can report where a configuration broke down.
"""


class SFieldError(Exception):
    """Base class for all engine errors."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point

    def __str__(self):
        msg = super().__str__()
        if self.point is not None:
            coords = ", ".join(f"{c:.6g}" for c in self.point)
            msg = f"{msg} at ({coords})"
        return msg


# --- expressions -----------------------------------------------------------

class ExpressionSyntaxError(SFieldError):
    """Malformed expression text. ``offset`` is the byte offset of the problem."""

    def __init__(self, message, offset, text=""):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset
        self.text = text


class UnknownSymbol(SFieldError):
    def __init__(self, name, offset):
        super().__init__(f"unknown symbol {name!r} (offset {offset})")
        self.name = name
        self.offset = offset


class DomainError(SFieldError):
    """Evaluation left the real domain of a function (log of a negative, 1/0, ...)."""


# --- geometry --------------------------------------------------------------

class Degenerate(SFieldError):
    """A matrix that must be invertible is (numerically) singular."""


class WrongSignature(SFieldError):
    """A metric does not have Lorentz signature (+, -, -, -)."""


class FrameNotOrthonormal(SFieldError):
    """A local frame field violates a^T eta a = eta."""


class SingularSystem(SFieldError):
    """A pointwise linear solve is rank deficient."""


# --- Dirac bilinears -------------------------------------------------------

class NonRealError(SFieldError):
    """A quantity that must be real has a significant imaginary part."""

    def __init__(self, message, residue, point=None):
        super().__init__(f"{message}: imaginary residue {residue:.3e}", point)
        self.residue = residue


class NonRealDensity(NonRealError):
    pass


class NonRealLagrangian(NonRealError):
    pass


class NonRealTensor(NonRealError):
    pass


class NonRealCurrent(NonRealError):
    pass


# --- scenario input --------------------------------------------------------

class ScenarioError(SFieldError):
    """Base for problems with scenario input (CLI exit code 2)."""


class ScenarioParseError(ScenarioError):
    def __init__(self, message, location):
        super().__init__(f"{location}: {message}")
        self.location = location


class ValidationError(ScenarioError):
    def __init__(self, field, message="missing or invalid"):
        super().__init__(f"{field}: {message}")
        self.field = field
