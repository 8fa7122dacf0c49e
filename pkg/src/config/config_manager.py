"""Configuration manager.

Builds a RunConfig from four layers, later layers winning:

    1. RunConfig defaults
    2. a configuration file: flat ``key = value`` lines (``#`` comments)
       or a JSON object when the file ends in ``.json``
    3. environment variables ``CCT_<KEY>`` (e.g. CCT_BATCH_SIZE=64)
    4. command-line flags
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Mapping

from ..core.errors import ConfigError
from ..core.types import DatasetName, PEKind, Pooling
from ..models.registry import resolve_config
from .schema import FIELD_TYPES, RunConfig

logger = logging.getLogger(__name__)

ENV_PREFIX = "CCT_"
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}
_NONE = {"", "none", "null"}


class ConfigValidationError:
    """Represents a configuration validation error."""

    def __init__(self, path: str, message: str, value: Any = None):
        self.path = path
        self.message = message
        self.value = value

    def __str__(self) -> str:
        if self.value is not None:
            return f"{self.path}: {self.message} (got: {self.value})"
        return f"{self.path}: {self.message}"


def coerce(key: str, raw: Any) -> Any:
    """Convert a text value to the type of ``key``.

    Raises:
        ConfigError: Unknown key or unparseable value
    """
    if key not in FIELD_TYPES:
        raise ConfigError(f"unknown configuration key '{key}'")
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    if text.lower() in _NONE:
        return None
    kind = FIELD_TYPES[key]
    if kind is bool:
        if text.lower() in _TRUE:
            return True
        if text.lower() in _FALSE:
            return False
        raise ConfigError(f"{key}: expected a boolean, got '{raw}'")
    try:
        return kind(text)
    except ValueError as e:
        raise ConfigError(f"{key}: expected {kind.__name__}, got '{raw}'") from e


class ConfigManager:
    """Loads, merges and validates run configuration.

    Attributes:
        config_path: Optional configuration file
        env: Environment mapping consulted for CCT_* overrides

    Example:
        manager = ConfigManager("config.example.conf")
        config = manager.resolve({"epochs": 15, "dataset": "mnist"})
    """

    def __init__(self, config_path: str | Path | None = None, env: Mapping[str, str] | None = None):
        self.config_path = Path(config_path) if config_path else None
        self.env = os.environ if env is None else env
        self._validation_errors: list[ConfigValidationError] = []

    def load_file(self, path: str | Path | None = None) -> dict[str, Any]:
        """Read a configuration file into a typed dictionary.

        Raises:
            ConfigError: Missing file, malformed line or unknown key
        """
        path = Path(path) if path else self.config_path
        if path is None:
            return {}
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        text = path.read_text(encoding="utf-8")

        if path.suffix == ".json":
            try:
                data = json.loads(text)
            except json.JSONDecodeError as e:
                raise ConfigError(f"invalid JSON in {path}: {e}") from e
            if not isinstance(data, dict):
                raise ConfigError(f"{path}: top level must be an object")
            return {k.replace("-", "_"): coerce(k.replace("-", "_"), v) for k, v in data.items()}

        data: dict[str, Any] = {}
        for line_num, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_num}: expected key=value, got '{line}'")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            data[key] = coerce(key, value)
        logger.info(f"Configuration loaded from {path}")
        return data

    def env_overrides(self) -> dict[str, Any]:
        """CCT_<KEY> environment variables as typed values."""
        data = {}
        for key in FIELD_TYPES:
            name = ENV_PREFIX + key.upper()
            if name in self.env:
                data[key] = coerce(key, self.env[name])
        if data:
            logger.debug(f"Environment overrides: {sorted(data)}")
        return data

    def merge(self, flags: Mapping[str, Any] | None = None) -> dict[str, Any]:
        """Merge file, environment and flag layers (None flags are ignored)."""
        data: dict[str, Any] = {}
        data.update(self.load_file())
        data.update(self.env_overrides())
        for key, value in (flags or {}).items():
            if value is not None:
                data[key] = value
        return data

    def validate(self, data: Mapping[str, Any]) -> list[ConfigValidationError]:
        """Validate merged configuration data.

        Returns:
            List of validation errors (empty if valid)
        """
        errors: list[ConfigValidationError] = []

        for key in data:
            if key not in FIELD_TYPES:
                errors.append(ConfigValidationError(key, "unknown key"))

        def positive(key: str, allow_zero: bool = False):
            if data.get(key) is None:
                return
            val = data[key]
            if not isinstance(val, (int, float)) or isinstance(val, bool) or val < 0 or (val == 0 and not allow_zero):
                errors.append(ConfigValidationError(key, "must be a positive number", val))

        for key in ("epochs", "batch_size", "eval_batch_size", "repeats", "threads",
                    "image_size", "samples_per_class"):
            positive(key)
        for key in ("lr", "weight_decay", "warmup_epochs", "min_lr", "seed"):
            positive(key, allow_zero=True)

        smoothing = data.get("label_smoothing")
        if smoothing is not None and not 0.0 <= smoothing < 1.0:
            errors.append(ConfigValidationError("label_smoothing", "must be in [0, 1)", smoothing))

        if data.get("precision") is not None and data["precision"] not in (32, 64):
            errors.append(ConfigValidationError("precision", "must be 32 or 64", data["precision"]))

        choices = {
            "dataset": [d.value for d in DatasetName],
            "pos_emb": [p.value for p in PEKind],
            "pool": [p.value for p in Pooling],
            "sweep_mode": ["train", "inference"],
        }
        for key, allowed in choices.items():
            val = data.get(key)
            if val is not None and str(val).strip().lower() not in allowed:
                errors.append(ConfigValidationError(key, f"must be one of {', '.join(allowed)}", val))

        if data.get("model") is not None:
            try:
                resolve_config(str(data["model"]))
            except ConfigError as e:
                errors.append(ConfigValidationError("model", str(e), data["model"]))

        return errors

    def resolve(self, flags: Mapping[str, Any] | None = None) -> RunConfig:
        """Merge all layers and build a validated RunConfig.

        Raises:
            ConfigError: Listing every validation error
        """
        data = self.merge(flags)
        self._validation_errors = self.validate(data)
        if self._validation_errors:
            raise ConfigError("; ".join(str(e) for e in self._validation_errors))
        config = RunConfig.from_dict(data)
        logger.debug(f"Resolved run configuration: {config.to_json(indent=None)}")
        return config

    def get_validation_errors(self) -> list[ConfigValidationError]:
        return self._validation_errors.copy()
