"""Exception hierarchy shared across the package."""


class RotabeamError(Exception):
    """Base class for all package errors."""


class ConstraintError(RotabeamError):
    """A mechanical rotation limit or feasibility bound was violated."""


class ConfigurationError(RotabeamError):
    """Invalid configuration values (grid sizes, guards, settings)."""


class DomainError(RotabeamError):
    """An operation was called outside its mathematical domain."""


class StructuralError(RotabeamError):
    """Malformed problem data (dimension mismatch, non-Hermitian input)."""


class ScenarioParseError(ConfigurationError):
    """Scenario file is not valid JSON."""


class ScenarioSchemaError(ConfigurationError):
    """Scenario file parses but does not match the documented schema."""


class ScenarioValidationError(ConfigurationError):
    """Scenario values violate an invariant (e.g. reversed interval)."""
