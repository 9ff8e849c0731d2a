"""Exception hierarchy shared across the package."""


class ToricKoszulError(Exception):
    """Base class; the CLI maps these to exit code 2."""


class NonPrimitiveRay(ToricKoszulError):
    pass


class NonSmoothCone(ToricKoszulError):
    pass


class NotAFan(ToricKoszulError):
    pass


class RankMismatch(ToricKoszulError):
    pass


class LengthMismatch(ToricKoszulError):
    pass


class NotAFacet(ToricKoszulError):
    pass


class NoContainingCone(ToricKoszulError):
    pass


class FanNotComplete(ToricKoszulError):
    pass


class ConeMismatch(ToricKoszulError):
    pass


class FlavorMismatch(ToricKoszulError):
    pass


class InvalidMorphism(ToricKoszulError):
    pass


class NotLocallyClosed(ToricKoszulError):
    pass


class ResolutionTooLong(ToricKoszulError):
    pass


class SignIncoherence(ToricKoszulError):
    pass


class NotAComplex(ToricKoszulError):
    pass


class NotTcf(ToricKoszulError):
    pass


class NotCoherentInput(ToricKoszulError):
    pass


class NotLocallyFree(ToricKoszulError):
    pass


class IncompatibleDivisor(ToricKoszulError):
    pass


class ParseError(ToricKoszulError):
    pass
