"""Run manifest model."""

from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel  # pylint: disable=no-name-in-module

# pragma pylint: disable=too-few-public-methods


class RunManifest(BaseModel):
    """Everything needed to reproduce a command-line run.

    Passing the written manifest back via `--config` repeats the run.

    Args:
        command: Command name.
        arguments: Resolved command arguments, keyed by option name.
        config: Canonical experiment configuration, if the command has one.
        config_hash: SHA-1 of the canonical configuration.
        version: trimlab version.
        master_seed: Master seed of stochastic commands.
        outputs: Files written by the run.
    """

    command: str
    arguments: Dict[str, Any]
    config: Optional[Dict[str, Any]] = None
    config_hash: Optional[str] = None
    version: str
    master_seed: Optional[int] = None
    outputs: List[str] = []

    def write(self, destination: Union[str, Path]) -> Path:
        """Write the manifest as sorted, indented JSON."""
        destination = Path(destination)
        with open(destination, "w", encoding="utf-8") as _file:
            _file.write(self.json(sort_keys=True, indent=2))
            _file.write("\n")
        return destination

    @classmethod
    def read(cls, source: Union[str, Path]) -> "RunManifest":
        """Read a manifest from disk."""
        return cls.parse_file(source)
