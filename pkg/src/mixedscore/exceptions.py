"""Exception hierarchy shared by every stage of the pipeline."""


class MixedScoreError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(MixedScoreError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(MixedScoreError, ValueError):
    """Raised when model parameters or configs violate their invariants.

    ``failures`` lists every violated condition, not just the first.
    """

    def __init__(self, failures):
        if isinstance(failures, str):
            failures = [failures]
        self.failures = list(failures)
        super().__init__("; ".join(self.failures))


class DisconnectedGraphError(MixedScoreError):
    pass


class NoElbowError(MixedScoreError):
    def __init__(self, message, eps):
        self.eps = dict(eps)
        super().__init__(message)


class RadicandError(MixedScoreError):
    """Nonpositive radicand while estimating b1 (badly estimated simplex)."""

    def __init__(self, k, value):
        self.k = k
        self.value = value
        super().__init__(
            f"nonpositive radicand {value:.6g} for vertex {k}; "
            "the estimated simplex is probably degenerate or misplaced")


class DegenerateHullError(MixedScoreError):
    pass
