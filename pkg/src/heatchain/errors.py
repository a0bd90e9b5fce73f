"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument violates a documented precondition."""


class ConfigError(ValueError):
    """An experiment configuration is invalid."""


class NumericalError(RuntimeError):
    """A numerical routine failed to meet its accuracy contract."""


class StructuralError(RuntimeError):
    """The transition graph is reducible (system splits into uncoupled parts)."""


class DegeneracyError(NumericalError):
    """The stationary null space does not have dimension one."""


class DegenerateCouplingError(ValueError):
    """A coupling kernel vanishes identically."""


class PathologicalCouplingError(RuntimeError):
    """Couplings outside the regime where the perturbative construction is defined."""


class CouplingRegimeWarning(UserWarning):
    """Parameters outside the physically sensible regime; results still computed."""
