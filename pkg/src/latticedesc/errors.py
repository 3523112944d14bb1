"""Exception hierarchy shared across the pipeline.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
ModelArtifactError -> 4.
"""


class LatticeDescError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(LatticeDescError):
    """Bad or missing configuration."""


class DataError(LatticeDescError):
    """Corpus, feature, or label files violate the documented formats."""


class ModelArtifactError(LatticeDescError):
    """A trained model file is missing, stale, or malformed."""
