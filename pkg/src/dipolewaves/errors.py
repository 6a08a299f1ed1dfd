"""Named error types shared by all modules.

Every numerical failure mode surfaces as a subclass of :class:`DipoleWaveError`
so callers (notably the CLI) can map it to an exit code by name.
"""

from dataclasses import dataclass, field


class DipoleWaveError(Exception):
    """Base class for all package errors."""


class ConfigError(DipoleWaveError):
    """Invalid configuration value (reported with its location)."""


class SingularEvaluation(DipoleWaveError):
    """A potential was evaluated too close to a vortex center or branch cut."""


class DegenerateGeometry(DipoleWaveError):
    """Geometry outside 0 < rho < a."""


class CompatibilityViolated(DipoleWaveError):
    """gamma2 does not satisfy the compatibility condition."""


class ExpansionDiverged(DipoleWaveError):
    """The Dirichlet-Neumann Taylor expansion is outside its convergence regime."""


class NonZeroMean(DipoleWaveError):
    """Input to a homogeneous-space operator has nonzero mean."""


class NoConvergence(DipoleWaveError):
    """An iterative linear solve did not reach its tolerance."""


class NewtonDiverged(DipoleWaveError):
    """Damped Newton failed; the last iterate is attached."""

    def __init__(self, msg, last_iterate=None, residual=None):
        super().__init__(msg)
        self.last_iterate = last_iterate
        self.residual = residual


class SymmetryBroken(DipoleWaveError):
    """Parity of a steady iterate drifted beyond tolerance."""


class EpsilonZero(DipoleWaveError):
    """The Poisson map is undefined at epsilon = 0."""


class VortexNearSurface(DipoleWaveError):
    """A vortex came within the breach guard distance of the surface."""


class StepUnstable(DipoleWaveError):
    """Time step blew up (state norm grew by more than 1e3)."""


class AmbiguousSignature(DipoleWaveError):
    """An eigenvalue other than the translation mode is too close to zero."""

    def __init__(self, msg, eigenvalues=None):
        super().__init__(msg)
        self.eigenvalues = eigenvalues


class BranchTooShort(DipoleWaveError):
    """Fewer branch points than a finite-difference stencil needs."""


@dataclass
class BreachEvent:
    """Diagnostic emitted when a trajectory stops at the breach guard."""

    t: float
    separation: float
    which: str
    details: dict = field(default_factory=dict)
