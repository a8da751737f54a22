"""Exception types shared across the package."""


class GridcraftError(Exception):
    """Base class for all gridcraft-specific errors."""


class OccupiedCell(GridcraftError):
    """Attempted to place a block into a cell that already holds one."""


class AirCell(GridcraftError):
    """Attempted to break a block in an empty cell."""


class AirBlock(GridcraftError):
    """Attempted to place block id 0 (air)."""


class ModeMismatch(GridcraftError):
    """Action variant does not match the episode's control mode."""


class InvalidTask(GridcraftError):
    """Task cannot be used to run an episode (e.g. empty target)."""


class EpisodeFinished(GridcraftError):
    """step() called after the episode terminated."""


class ParseError(GridcraftError):
    """Malformed input file (JSON lines, grid literal, TSV...)."""


class ValidationError(GridcraftError):
    """Well-formed input that violates a documented invariant."""


class EmptyInput(GridcraftError, ValueError):
    """A score was requested over zero episodes."""


class EmptyCorpus(GridcraftError, ValueError):
    """A text metric was requested over an empty corpus."""


class MismatchError(GridcraftError):
    """Replay diverged from the recorded episode."""
