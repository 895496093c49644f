"""Exceptions raised while writing or reading result files."""

from pathlib import Path


class OutputError(Exception):
    """A result, manifest or plot file could not be written or read."""

    def __init__(self, path: str | Path, message: str):
        self.path = Path(path)
        super().__init__(f"{self.path}: {message}")
