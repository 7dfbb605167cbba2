"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
anything else -> 4.
"""


class MatshiftError(Exception):
    """Base class for all package-level failures."""


class ConfigError(MatshiftError):
    """Invalid or inconsistent configuration (unknown keys, bad ranges)."""


class DataError(MatshiftError):
    """On-disk or in-memory data violating a documented invariant."""


class TargetNotFoundError(DataError):
    """Segmentation produced no usable mask for the given prompt."""

    def __init__(self, prompt, detail: str = ""):
        self.prompt = prompt
        msg = f"target not found for prompt {prompt!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
