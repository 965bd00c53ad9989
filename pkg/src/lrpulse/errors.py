"""Exception types shared across the package."""


class DomainError(ValueError):
    """A time argument fell outside the domain of a schedule or trajectory."""


class SingularityError(ArithmeticError):
    """A closed-form expression was evaluated at one of its poles."""


class SynthesisError(RuntimeError):
    """A trajectory cannot be turned into a bounded pulse schedule."""


class CalibrationError(RuntimeError):
    """A calibration solver failed to bracket or converge on its target."""


class ConvergenceError(RuntimeError):
    """An iterative numerical kernel hit its iteration or panel cap."""


class PropagationError(RuntimeError):
    """The integrator encountered a non-finite Hamiltonian sample."""
