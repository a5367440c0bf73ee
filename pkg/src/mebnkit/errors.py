"""Exception hierarchy shared across the package.

The split mirrors the pipeline stages so the CLI can map failures to
exit codes: parsing (2), grounding/model resolution (3), inference (4).
Structural problems found by validators are reported as data
(ValidationReport), not raised.
"""

from __future__ import annotations


class MebnError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(MebnError):
    """Input text could not be parsed; carries the diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class UnknownFunctorError(MebnError):
    """A functor name has no declaration (or no home MFrag)."""


class ConflictingTypeError(MebnError):
    """One entity instance name was declared with two different types."""


class GroundingError(MebnError):
    """Base class for failures while instantiating an SSBN."""


class UnresolvedQueryError(GroundingError):
    """The query cannot be grounded against the entity pool."""


class DependencyCycleError(GroundingError):
    """Grounded random-variable instances depend on each other cyclically."""


class GroundingExplosionError(GroundingError):
    """Instantiation exceeded the configured node cap."""


class DistributionError(GroundingError):
    """A local distribution cannot be applied to the grounded parents."""


class ArityMismatchError(DistributionError):
    """Grounded parent count does not match the declared table parents."""


class RowCoverageError(DistributionError):
    """A table is missing the row for some parent-state configuration."""


class InferenceError(MebnError):
    """Base class for failures while answering a query."""


class ImpossibleEvidenceError(InferenceError):
    """The evidence has (numerically) zero probability under the model."""


class EnumerationTooLargeError(InferenceError):
    """The joint state space exceeds the enumeration engine's cap."""
