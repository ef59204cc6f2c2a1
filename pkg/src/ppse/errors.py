"""Exception hierarchy.

Every error raised by the library derives from :class:`PPSEError`.  Errors
raised while a scenario is being run carry a ``stage`` attribute naming the
pipeline stage that failed (``"preselect"``, ``"density"``, ...).
"""


class PPSEError(Exception):
    """Base class for all library errors."""

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.message = message
        self.stage = stage

    def __str__(self):
        if self.stage:
            return f"[{self.stage}] {self.message}"
        return self.message


# linear algebra
class DimensionMismatch(PPSEError):
    pass


class NotNormalized(PPSEError):
    pass


class NotUnitary(PPSEError):
    pass


class IncompleteSpectrum(PPSEError):
    pass


class NonOrthonormal(PPSEError):
    pass


class BadFactorIndex(PPSEError):
    pass


# apparatus
class NonOrthonormalBasis(NonOrthonormal):
    pass


class IncompleteBasis(PPSEError):
    pass


class BadDCoeffRow(PPSEError):
    def __init__(self, k, l, norm, stage=None):
        super().__init__(
            f"d-coefficient row k={k}, l={l} has squared norm {norm:.12g}, expected 1",
            stage,
        )
        self.k = k
        self.l = l
        self.norm = norm


class ModeMismatch(PPSEError):
    pass


# ensembles
class ImpossibleSelection(PPSEError):
    pass


class ImpossiblePostSelection(PPSEError):
    pass


class EmptyEnsemble(PPSEError):
    pass


class UnknownOutcomeTag(PPSEError):
    pass


class MissingThetaForProcess(PPSEError):
    pass


# scenarios
class UnknownBuiltin(PPSEError):
    pass


class ParseError(PPSEError):
    """Syntactic error at a 1-based ``line``/``column``."""

    def __init__(self, line, column, message, token=None):
        super().__init__(message, stage="parse")
        self.line = line
        self.column = column
        self.token = token

    def __str__(self):
        near = f" near {self.token!r}" if self.token is not None else ""
        return f"{self.line}:{self.column}: {self.message}{near}"


class SemanticError(ParseError):
    """Well-formed text describing an invalid experiment.

    ``kind`` names the violated constraint, e.g. ``"DimensionMismatch"``.
    """

    def __init__(self, line, column, message, token=None, kind="SemanticError"):
        super().__init__(line, column, message, token)
        self.kind = kind

    def __str__(self):
        return f"{super().__str__()} ({self.kind})"
