"""Exception types shared across quenchlab."""


class QuenchlabError(Exception):
    """Base class for all quenchlab errors."""


class ConfigError(QuenchlabError, ValueError):
    """Malformed model, distribution or run configuration."""


class CapacityError(QuenchlabError):
    """Requested computation exceeds the exhaustive-enumeration capacity."""


class UnsupportedRegionError(QuenchlabError, ValueError):
    """Operation needs a box region."""


class PreconditionError(QuenchlabError, ValueError):
    """Input violates the hypothesis of the check being run."""
