"""Exception hierarchy.

Kernels report failures through integer status codes (they must compile in
nopython mode); :func:`raise_for_status` turns those into the exceptions
below at the public boundary.
"""

from . import _wavekern as _wk


class MgRiemannError(Exception):
    """Base class for every error raised by this package."""


class DomainError(MgRiemannError, ValueError):
    """An argument lies outside the domain of the operation (e.g. rho <= 0)."""


class ParameterError(DomainError):
    """A parameter set violates the invariants of its model."""


class UnsupportedOperationError(MgRiemannError):
    """The operation is undefined for this model (e.g. energy of a barotrope)."""


class NonHyperbolicError(MgRiemannError):
    """c^2 <= 0: the state is outside the admissible region."""

    def __init__(self, msg, rho=None, p=None):
        super().__init__(msg)
        self.rho = rho
        self.p = p


class LimitUndefinedError(MgRiemannError):
    """A yield-limit state does not exist for the given data."""


class BracketError(MgRiemannError):
    """No sign change of a Hugoniot function on its density bracket."""


class NonConvergenceError(MgRiemannError):
    """An iteration hit its cap; ``trace`` holds the iterates."""

    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace if trace is not None else []


class IntegrationError(MgRiemannError):
    """Adaptive integration failed (step underflow or non-hyperbolic state)."""


class LocusDegeneracyError(MgRiemannError):
    """The slope of a Hugoniot locus is not positive."""


class VacuumError(MgRiemannError):
    """The Riemann problem would generate vacuum (non-positive margin)."""

    def __init__(self, msg, margin=None, q_min=None):
        super().__init__(msg)
        self.margin = margin
        self.q_min = q_min


class ClassificationError(MgRiemannError):
    """A wave configuration outside the supported catalogue."""


class ConstitutiveViolationError(MgRiemannError):
    """The effective deviatoric stress exceeds the plastic yield limit."""


class SimulationError(MgRiemannError):
    """A simulation step failed; ``where`` names the cell or interface."""

    def __init__(self, msg, where=None):
        super().__init__(msg)
        self.where = where


class TopologyError(SimulationError):
    """Interfaces collided or otherwise left the supported topology."""


class ConfigError(MgRiemannError, ValueError):
    """Malformed or invalid problem configuration."""

    def __init__(self, msg, line=None, field=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(field)
        super().__init__(f"{'; '.join(loc)}: {msg}" if loc else msg)
        self.line = line
        self.field = field


_STATUS = {
    _wk.ERR_BRACKET: (BracketError, "Hugoniot function has no sign change on its bracket"),
    _wk.ERR_NEWTON: (NonConvergenceError, "Hugoniot density iteration did not converge"),
    _wk.ERR_NONHYP: (NonHyperbolicError, "non-hyperbolic state (c^2 <= 0)"),
    _wk.ERR_STEP: (IntegrationError, "rarefaction integration step underflow"),
    _wk.ERR_VACUUM: (VacuumError, "vacuum would be generated"),
    _wk.ERR_LIMIT: (LimitUndefinedError, "yield limit state undefined"),
    _wk.ERR_LOCUS: (LocusDegeneracyError, "Hugoniot locus slope is not positive"),
    _wk.ERR_BELOW_QMIN: (VacuumError, "stress below the cut-off stress"),
    _wk.ERR_ITER: (NonConvergenceError, "Newton iteration did not converge"),
}


def raise_for_status(status, context=""):
    """Raise the exception mapped to a kernel status code (no-op for OK)."""
    status = int(status)
    if status == _wk.OK:
        return
    cls, msg = _STATUS.get(status, (MgRiemannError, f"kernel status {status}"))
    raise cls(f"{context}: {msg}" if context else msg)
