"""Exception types shared across the package."""


class CatqbError(Exception):
    """Base class for all package errors."""


class ValidationError(CatqbError, ValueError):
    """Invalid parameters, shapes, signatures or configuration values."""


class PhysicsAbortError(CatqbError, RuntimeError):
    """Propagation aborted: trace blowup or non-finite state entries.

    Carries the time at which the violation was detected.
    """

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


class SolverError(CatqbError, RuntimeError):
    """Eigensolver or linear-solver failure (non-convergence, bad residual)."""


class DegenerateSteadyStateError(SolverError):
    """Steady manifold is not one-dimensional.

    ``basis`` holds an orthonormal set of vectorized operators spanning the
    null space of the generator.
    """

    def __init__(self, message: str, basis):
        super().__init__(message)
        self.basis = basis
