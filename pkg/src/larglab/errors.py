"""Exception hierarchy shared by all larglab modules."""


class LarglabError(Exception):
    """Base class for every error raised by larglab."""


class DomainError(LarglabError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class UnsupportedError(LarglabError, TypeError):
    """The operation has no exact implementation for these representations."""


class AmbiguousDistance(LarglabError):
    """A certified distance enclosure straddles an integer at the finest tolerance."""

    def __init__(self, pair, bounds):
        super().__init__(f"distance of pair {pair} is ambiguous: enclosure {bounds}")
        self.pair = pair
        self.bounds = bounds


class StructuralError(LarglabError):
    """A structural precondition (transversality, partition shape...) is violated."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ResolutionExhausted(LarglabError):
    """A finite-resolution rendering lacks a feature the construction needs."""

    def __init__(self, message, cell=None, kind=None):
        super().__init__(message)
        self.cell = cell
        self.kind = kind


class CertificateError(LarglabError):
    """A per-step certificate failed; always indicates a bug."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
