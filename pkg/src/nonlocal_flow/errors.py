"""Exception types shared across the package."""


class NonlocalFlowError(Exception):
    """Base class for all package-specific errors."""


class EmptySpec(NonlocalFlowError):
    """Initial datum spec contains no atoms or pieces."""


class NonpositiveWeight(NonlocalFlowError):
    """An atom weight or piece measure is not strictly positive."""


class NoHypothesis(NonlocalFlowError):
    """Initial data fits none of the admissible hypothesis classes."""


class DenominatorVanishes(NonlocalFlowError):
    """The integral of g(u) over the domain fell below the guard threshold.

    Under data confined to [0, 1] this is an expected long-time outcome,
    so callers in the integration loop treat it as a termination signal
    rather than a failure.
    """

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class StepSizeUnderflow(NonlocalFlowError):
    """Adaptive step control drove the step size below h_min."""


class DegenerateSupport(NonlocalFlowError):
    """A limit prediction needs a level set that has zero measure."""


class NoSettlingTime(NonlocalFlowError):
    """The recorded nonlocal coefficient never settles within eps."""


class SchemaError(NonlocalFlowError):
    """Config document violates the schema. Carries the offending path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message
