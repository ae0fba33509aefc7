"""trimlab application setup."""

import logging
import logging.config
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from trimlab.config_models import CustomConfig
from trimlab.exceptions import ConfigError

logger = logging.getLogger(__name__)

CONFIG_FILE = Path(__file__).resolve().parent / "config.yaml"


class AppConfig:
    """Validated application configuration.

    Args:
        log: Logging configuration in `dictConfig` format.
        custom: Validated custom configuration.

    Attributes:
        log: Logging configuration in `dictConfig` format.
        custom: Validated custom configuration.
    """

    def __init__(self, log: Dict[str, Any], custom: CustomConfig) -> None:
        """Class constructor."""
        self.log = log
        self.custom = custom


def init_app(
    config_file: Optional[Path] = None,
    verbose: bool = False,
) -> AppConfig:
    """Load configuration and set up logging.

    Args:
        config_file: Optional YAML file merged over the packaged defaults. If
            not given, the file named by the environment variable
            `TRIMLAB_CONFIG` is used, if any.
        verbose: Lower the console handler level to `DEBUG`.

    Returns:
        Validated application configuration.

    Raises:
        trimlab.exceptions.ConfigError: A configuration file cannot be read.
    """
    config = _load_yaml(CONFIG_FILE)
    override = config_file or os.environ.get("TRIMLAB_CONFIG") or None
    if override:
        _merge(config, _load_yaml(Path(override)))
    log_config = config.get("log", {})
    if verbose:
        log_config.setdefault("handlers", {}).setdefault("console", {})[
            "level"
        ] = logging.DEBUG
    logging.config.dictConfig(log_config)
    custom = CustomConfig(**config.get("custom", {}))
    workers = os.environ.get("TRIMLAB_WORKERS")
    if workers:
        try:
            custom.defaults.workers = max(1, int(workers))
        except ValueError as exc:
            raise ConfigError(f"TRIMLAB_WORKERS is not an integer: {workers}") from exc
    logger.debug(f"Configuration loaded (override: {override}).")
    return AppConfig(log=log_config, custom=custom)


def _load_yaml(path: Path) -> Dict[str, Any]:
    """Read a YAML mapping from disk."""
    try:
        with open(path, encoding="utf-8") as _file:
            content = yaml.safe_load(_file) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"Cannot read configuration file '{path}': {exc}") from exc
    if not isinstance(content, dict):
        raise ConfigError(f"Configuration file '{path}' is not a mapping.")
    return content


def _merge(base: Dict[str, Any], update: Dict[str, Any]) -> None:
    """Recursively merge `update` into `base` in place."""
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = value
