"""Exception types raised across the package."""


class RomstabError(Exception):
    """Base class for all package errors."""


class InvalidGrid(RomstabError, ValueError):
    pass


class DimensionMismatch(RomstabError, ValueError):
    pass


class GridMismatch(DimensionMismatch):
    pass


class TimeGridMismatch(DimensionMismatch):
    pass


class IntegrationFailure(RomstabError, RuntimeError):
    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (t={t:.6g})")
        self.t = t


class NonFiniteState(RomstabError, FloatingPointError):
    def __init__(self, t: float):
        super().__init__(f"state became non-finite at t={t:.6g}")
        self.t = t


class EmptySnapshotSet(RomstabError, ValueError):
    pass


class RankDeficient(RomstabError, ValueError):
    """Requested more POD modes than the snapshot set supports."""

    def __init__(self, requested: int, rank: int):
        super().__init__(
            f"requested r={requested} modes but numerical rank is {rank}; lower r"
        )
        self.requested = requested
        self.rank = rank


class InvalidThreshold(RomstabError, ValueError):
    pass


class NonPositiveGains(RomstabError, ValueError):
    pass


class EmptySpectrum(RomstabError, ValueError):
    pass


class NonFiniteCost(RomstabError, FloatingPointError):
    pass


class EqualFrequencies(RomstabError, ValueError):
    pass


class ConfigError(RomstabError, ValueError):
    """Configuration validation failure; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
