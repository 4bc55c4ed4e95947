"""Escape-speed growth maps, regularity checkers and orbit classification for
transcendental entire functions."""
from .core import BACKEND
from .errors import CatalogError, DomainError, ParameterError
from .tower import TowerReal

__version__ = "0.1.0"

__all__ = ["BACKEND", "CatalogError", "DomainError", "ParameterError", "TowerReal"]
