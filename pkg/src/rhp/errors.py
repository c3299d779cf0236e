"""Exception types shared across the package.

All constraint violations raise a subclass of RhpError so callers can catch
domain failures without swallowing programming errors.
"""


class RhpError(Exception):
    """Base class for domain errors raised by this package."""


class SupportError(RhpError, ValueError):
    """Evaluation outside the usable support of a distribution or kernel."""


class SubcriticalityError(RhpError, ValueError):
    """Branching ratio at or above one: the cluster cascade would not die out."""


class DegenerateKernelError(RhpError, ValueError):
    """Kernel with zero mass cannot produce offspring displacements."""


class DefectiveModelError(RhpError, ValueError):
    """Operation needs a proper interarrival law (total mass one, finite mean)."""


class UnboundedHazardError(RhpError, ValueError):
    """Thinning needs a finite majorant: supply an explicit hazard envelope."""


class TieError(RhpError, ValueError):
    """Exact ties between event times: zero-probability under a density,
    indicates a bug or degenerate input."""


class ClusterOverflowError(RhpError, RuntimeError):
    """A single cluster exceeded the node cap (runaway cascade)."""


class ConvergenceError(RhpError, RuntimeError):
    """An iterative solver failed to reach its tolerance."""


class InsufficientDataError(RhpError, ValueError):
    """A statistical test was handed fewer observations than it can support."""


class ConfigError(RhpError, ValueError):
    """Invalid run configuration; carries one message per offending field."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
