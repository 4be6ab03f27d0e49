"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so the split matters:
schema problems, physical-invariant violations, and numerical failures
must stay distinguishable.
"""


class ConfigurationError(ValueError):
    """Malformed or incomplete configuration (unknown key, wrong type, missing reference)."""


class DomainError(ValueError):
    """Input violates a physical invariant (negative length, oblate particle, ...)."""


class PreconditionError(ValueError):
    """Operation called on data that does not satisfy its contract."""


class IntegrationError(RuntimeError):
    """Adaptive ODE stepping failed (step-size underflow, step budget exhausted).

    Carries the partial trajectory computed so far in ``partial`` when available.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class OracleError(RuntimeError):
    """Truncated-Fock propagation failed its accuracy contract."""

