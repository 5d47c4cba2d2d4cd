"""Exception taxonomy shared by every module in the package."""


class HyperpercError(Exception):
    """Base class so callers can catch anything raised by this package."""


class UnrealizableTiling(HyperpercError):
    """Vertex type fails a combinatorial or geometric realizability rule."""


class RadiusTooLarge(HyperpercError):
    """Requested ball exceeds the construction size cap."""


class MapMismatch(HyperpercError):
    """Two objects live on different maps, or a map fails validation."""


class DomainError(HyperpercError):
    """Numeric argument outside the domain of a closed-form expression."""


class TooLarge(HyperpercError):
    """Instance exceeds an exact-enumeration cap."""


class StructureViolation(HyperpercError):
    """Configuration violates an invariant it was promised to satisfy."""


class SupportMismatch(HyperpercError):
    """Two exact measures are defined on different outcome spaces."""


class NonPositive(HyperpercError):
    """Weight or probability that must be positive is not."""


class InsufficientData(HyperpercError):
    """Estimator invoked with too few samples or radii."""


class BudgetExceeded(HyperpercError):
    """Work request exceeds the configured sweep budget."""


class ConfigError(HyperpercError):
    """Malformed experiment configuration text."""
