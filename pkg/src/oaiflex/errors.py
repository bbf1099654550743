"""Exception hierarchy.

Every error carries a ``stage`` name so that the command line front end can
map failures to stable exit codes.
"""


class OAIError(Exception):
    """Base class for all package errors."""

    stage = "GENERIC"


class DegenerateQuad(OAIError):
    stage = "DEGENERATE"


class NotOrthodiagonal(OAIError):
    stage = "ORTHODIAGONAL"


class Unrealizable(OAIError):
    stage = "UNREALIZABLE"


class RightAngle(OAIError):
    """Base quadrilateral has a right angle or does not close."""

    stage = "RIGHT_ANGLE"


class NegativeDiscriminant(OAIError):
    stage = "RC_RANGE"


class ZeroDenominator(OAIError):
    stage = "RC_RANGE"


class OutOfRange(OAIError):
    stage = "RC_RANGE"


class BetaUndefined(OAIError):
    stage = "BETA"


class NotElliptic(OAIError):
    stage = "ELLIPTIC"


class NoValidPattern(OAIError):
    stage = "PATTERN"


class NotFlexible(OAIError):
    stage = "NOT_FLEXIBLE"


class TauNotFound(OAIError):
    stage = "TAU"


class PoleEncountered(OAIError):
    stage = "POLE"


class DegenerateLeading(OAIError):
    stage = "RESULTANT"


class NoClosure(OAIError):
    stage = "NO_CLOSURE"


class ClosureFailure(OAIError):
    stage = "CLOSURE"
