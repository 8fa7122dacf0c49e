"""Configuration management."""

from .config_manager import ConfigManager, ConfigValidationError, coerce
from .schema import FIELD_TYPES, RunConfig

__all__ = [
    "RunConfig",
    "FIELD_TYPES",
    "ConfigManager",
    "ConfigValidationError",
    "coerce",
]
