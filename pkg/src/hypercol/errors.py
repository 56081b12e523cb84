"""Shared exception types."""


class ConfigError(ValueError):
    """Invalid configuration or constructor argument."""


class NoPredictionError(RuntimeError):
    """Prediction requested before any token has completed."""


class SnapshotError(RuntimeError):
    """Snapshot is corrupt, truncated, or from an unknown format version."""


class ProtocolError(RuntimeError):
    """Peer violated the wire protocol."""
