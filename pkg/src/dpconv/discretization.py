"""Uniform grids and discretised privacy loss densities.

The accountant works on a symmetric uniform grid of n points (n even)

    x_i = -L + i * dx,   dx = 2 L / n,   i = 0 .. n-1,

which covers [-L, L) half-open. A continuous privacy loss density is sampled
pointwise on this grid; the samples, scaled by dx, approximate the measure
each cell carries. The half_swap reordering moves the origin to index 0,
turning the natural left-to-right layout into the wrap-around layout the
discrete Fourier transform expects for a function on a circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GridTooSmallError
from .mechanisms import MechanismSpec, PldDensity, pld_density


@dataclass(frozen=True)
class Grid:
    """Symmetric uniform grid on [-half_width, half_width) with an even size."""

    half_width: float
    size: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.half_width) and self.half_width > 0):
            raise DomainError(f"half_width must be positive and finite, got {self.half_width}")
        if self.size < 2 or self.size % 2:
            raise DomainError(f"size must be an even integer >= 2, got {self.size}")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.size

    def points(self) -> np.ndarray:
        """Grid points -L, -L + dx, ..., L - dx."""
        return -self.half_width + self.dx * np.arange(self.size)

    def refine(self, factor: int = 2) -> "Grid":
        """Same interval, factor times as many points."""
        if factor < 1:
            raise DomainError(f"refinement factor must be >= 1, got {factor}")
        return Grid(half_width=self.half_width, size=self.size * factor)


@dataclass(frozen=True)
class DiscretePld:
    """Pointwise samples of a privacy loss density on a grid.

    mass is the discrete integral dx * sum(samples); it falls short of one
    by the probability the continuous density puts outside [-L, L).
    """

    grid: Grid
    samples: np.ndarray
    spec: MechanismSpec

    @property
    def mass(self) -> float:
        return float(self.grid.dx * self.samples.sum())


def discretize(spec_or_density: MechanismSpec | PldDensity, grid: Grid) -> DiscretePld:
    """Samples a privacy loss density on a grid.

    Raises GridTooSmallError if the density has a finite support edge at or
    outside the grid boundary, since then the grid cannot see where the
    density actually lives. Densities supported on all of R merely lose
    tail mass, which the periodisation bound accounts for.
    """
    density = spec_or_density if isinstance(spec_or_density, PldDensity) else pld_density(
        spec_or_density
    )
    lo, hi = density.support_lo, density.support_hi
    if math.isfinite(lo) and lo <= -grid.half_width:
        raise GridTooSmallError(
            f"support edge {lo:.6g} lies at or below the grid boundary {-grid.half_width:.6g}; "
            "increase the truncation radius"
        )
    if math.isfinite(hi) and hi >= grid.half_width:
        raise GridTooSmallError(
            f"support edge {hi:.6g} lies at or above the grid boundary {grid.half_width:.6g}; "
            "increase the truncation radius"
        )
    samples = np.asarray(density(grid.points()), dtype=float)
    return DiscretePld(grid=grid, samples=samples, spec=density.spec)


def half_swap(values: np.ndarray) -> np.ndarray:
    """Rotates a vector by half its length: out[i] = values[(i + n/2) mod n].

    Maps the grid layout (origin at index n/2) to the DFT layout (origin at
    index 0) and back; applying it twice is the identity.
    """
    values = np.asarray(values)
    n = values.shape[-1]
    if n % 2:
        raise DomainError(f"half_swap needs an even length, got {n}")
    return np.roll(values, -(n // 2), axis=-1)
