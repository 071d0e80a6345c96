"""Exception types raised across the engine."""


class SensorAuthError(Exception):
    """Base class for all errors raised by this package."""


class UnsupportedFormat(SensorAuthError):
    """Stream format is unknown or the file header does not match the schema."""


class NonMonotonicTimestamp(SensorAuthError):
    """A valid record moved backwards in time; the export is corrupt or unsorted."""


class InvalidSpec(SensorAuthError):
    """A persona or attack specification violates its invariants."""


class NonFiniteInput(SensorAuthError):
    """A continuous observation or query value is NaN or infinite."""


class EmptyDensity(SensorAuthError):
    """Percentiles requested from a density with no observations."""


class OutOfOrderEvent(SensorAuthError):
    """An event older than the profile's last ingested event."""


class DayNotComplete(SensorAuthError):
    """Snapshot requested for a day the stream has not reached."""


class FrozenSnapshot(SensorAuthError):
    """Attempted mutation of an immutable profile snapshot."""


class VersionMismatch(SensorAuthError):
    """Profile document written by an incompatible format version."""


class CorruptDocument(SensorAuthError):
    """Profile document cannot be decoded into a complete profile."""


class NonConsecutiveDays(SensorAuthError):
    """Day distance requested for snapshots that are not in day order."""


class NegativeGap(SensorAuthError):
    """Gap penalty requested with current time before the previous event."""


class DoubleClose(SensorAuthError):
    """end_of_day called twice for the same day."""


class EmptyDay(SensorAuthError):
    """Daily percentile requested over zero samples."""


class NoHistory(SensorAuthError):
    """Threshold requested before any daily percentile value exists."""


class BaselineNotReady(SensorAuthError):
    """Drift check requested before the comfort baseline is established."""


class NotAuthenticated(SensorAuthError):
    """Retraining requested without explicit authentication."""


class NotDeployed(SensorAuthError):
    """Scoring requested against a profile still in training."""


class NotDeployedBeforeAttack(SensorAuthError):
    """The owner stream did not reach deployment before the attack start."""


class InvalidScenario(SensorAuthError):
    """Scenario file is missing required keys or names an unknown case."""


class InvalidConfig(SensorAuthError):
    """Run configuration contains unknown keys or out-of-range values."""
