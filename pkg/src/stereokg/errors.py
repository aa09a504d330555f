"""Exception hierarchy shared across the pipeline.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
ScorerError -> 3.
"""


class StereoKgError(Exception):
    pass


class ConfigError(StereoKgError):
    """Invalid or inconsistent configuration."""


class DataError(StereoKgError):
    """Malformed or missing input data."""


class EmptyCorpus(DataError):
    """An operation received no usable records."""


class ScorerError(StereoKgError):
    """A scorer backend failed (transport, protocol, or exhausted retries)."""


class CacheMiss(ScorerError):
    """File-cache backend has no record for the requested key."""

    def __init__(self, capability: str, key: str):
        super().__init__(f"cache miss for ({capability}, {key})")
        self.capability = capability
        self.key = key


class ConversionFailed(StereoKgError):
    """A matched question could not be rewritten into a statement."""


class ClusterUnrepresentable(StereoKgError):
    """No surviving triple is available to represent a cluster."""
