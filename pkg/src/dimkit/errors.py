"""Exception types shared across the package."""


class DimkitError(Exception):
    """Base class for all package errors."""


class DomainError(DimkitError, ValueError):
    """An argument lies outside the domain of the operation."""


class ResolutionError(DomainError):
    """A scale below the resolution at which a point cloud is faithful."""


class InsufficientDataError(DimkitError):
    """Too few scales or samples to fit a scaling exponent."""


class ExtinctionError(DimkitError):
    """A percolation realization died out before the requested depth."""

    def __init__(self, seed: int, level: int):
        super().__init__(f"percolation with seed {seed} is extinct at level {level}")
        self.seed = seed
        self.level = level


class ExtrapolationError(DomainError):
    """A curve was asked for a value outside its sampled range."""


class SpecError(DomainError):
    """A fractal specification is malformed or violates its invariants."""
