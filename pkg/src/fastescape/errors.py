"""Exception types shared across the package."""


class DomainError(ValueError):
    """An operation was applied outside its mathematical domain."""


class ParameterError(ValueError):
    """Checker or growth parameters violate their stated constraints."""


class CatalogError(Exception):
    """A catalog or configuration file is missing or malformed."""
