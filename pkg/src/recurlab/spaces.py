"""Discretized weighted function spaces.

A space is a uniform cell-centered grid over a truncated 1-D domain together
with positive weight samples and a norm mode: an integral p-norm against the
weight (composite midpoint quadrature) or a weighted sup norm over the
samples.  Functions are complex sample vectors bound to their space.

Off-grid reads use linear interpolation between cell centers.  Reads that
fall outside the truncated window return zero; whether that sets the
truncation flag on the result depends on the domain kind (see
``sample_values``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidWeightError, SpaceMismatchError

__all__ = [
    "DomainKind",
    "DomainSpec",
    "WeightFunction",
    "WeightedGridSpace",
    "GridFunction",
    "norm",
    "distance",
    "sample_values",
]

# Fractional offsets within this distance of a grid index are snapped, so
# grid-aligned shifts reproduce sample values bitwise.
_SNAP = 1e-7


class DomainKind(enum.Enum):
    HALF_LINE = "halfline"
    LINE = "line"
    OPEN_BOX = "openbox"


@dataclass(frozen=True)
class DomainSpec:
    """Base domain of the function space.

    ``bounds`` is kept per-dimension for forward compatibility, but only
    one-dimensional domains are implemented throughout the package.

    * ``HALF_LINE``: [0, inf), truncated to [0, trunc].  The left endpoint is
      a genuine boundary point of the domain; only the right edge is a
      truncation artifact.
    * ``LINE``: the real line, truncated to [-trunc, trunc].  Both edges are
      truncation artifacts.
    * ``OPEN_BOX``: a finite open interval (lo, hi) taken verbatim; both
      edges are treated as open.
    """

    kind: DomainKind
    bounds: tuple[tuple[float, float], ...] = ()
    trunc: float | None = None

    def __post_init__(self):
        if self.kind in (DomainKind.HALF_LINE, DomainKind.LINE):
            if self.trunc is None or not self.trunc > 0:
                raise ValueError("unbounded domains need a positive trunc")
        if self.kind is DomainKind.OPEN_BOX:
            if len(self.bounds) != 1:
                raise ValueError("OPEN_BOX needs exactly one (lo, hi) pair")
            lo, hi = self.bounds[0]
            if not lo < hi:
                raise ValueError(f"empty box ({lo}, {hi})")

    @property
    def window(self) -> tuple[float, float]:
        """Truncated interval actually covered by grids on this domain."""
        if self.kind is DomainKind.HALF_LINE:
            return (0.0, float(self.trunc))
        if self.kind is DomainKind.LINE:
            return (-float(self.trunc), float(self.trunc))
        return tuple(map(float, self.bounds[0]))

    @property
    def open_edges(self) -> tuple[bool, bool]:
        """Which window edges are truncation/open artifacts (left, right)."""
        if self.kind is DomainKind.HALF_LINE:
            return (False, True)
        return (True, True)

    def flags_truncation(self) -> bool:
        """Whether out-of-window reads set the truncation flag.

        Half-line functions are represented as supported inside the window,
        so reads past the truncation edge are taken as exact zeros.  On the
        line and on open boxes the zero extension is an assumption and is
        flagged.
        """
        return self.kind is not DomainKind.HALF_LINE


@dataclass(frozen=True)
class WeightFunction:
    """Positive weight with claimed growth constants.

    ``claimed_m`` and ``claimed_omega`` are the constants the weight is
    *claimed* to satisfy in the admissibility inequality; they are certified
    (or refuted) by the checkers in :mod:`recurlab.admissibility`, never
    assumed.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    claimed_m: float
    claimed_omega: float
    label: str = ""

    def __post_init__(self):
        if not self.claimed_m >= 1:
            raise ValueError("claimed_m must be >= 1")

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(x, dtype=float)), dtype=float)


class WeightedGridSpace:
    """Uniform cell-centered grid with weight samples and a norm mode.

    Parameters
    ----------
    domain : DomainSpec
    n_cells : int
        Number of quadrature cells; centers are lo + (i + 1/2) h.
    weight : WeightFunction
    mode : {"lp", "c0sup"}
        Integral p-norm against the weight, or weighted sup over samples.
    p : float, optional
        Exponent for mode "lp"; must be >= 1.

    The instance is immutable after construction; sample arrays are
    write-protected.
    """

    def __init__(self, domain: DomainSpec, n_cells: int, weight: WeightFunction,
                 mode: str = "lp", p: float | None = 1.0):
        if mode not in ("lp", "c0sup"):
            raise ValueError(f"unknown norm mode {mode!r}")
        if mode == "lp":
            if p is None or not p >= 1:
                raise ValueError("mode 'lp' needs p >= 1")
        if n_cells < 1:
            raise ValueError("need at least one cell")
        lo, hi = domain.window
        h = (hi - lo) / n_cells
        grid = lo + (np.arange(n_cells) + 0.5) * h
        rho = weight(grid)
        if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
            bad = grid[~(np.isfinite(rho) & (rho > 0))][:3]
            raise InvalidWeightError(
                f"weight {weight.label!r} non-positive or non-finite near {bad}")
        self.domain = domain
        self.weight = weight
        self.mode = mode
        self.p = float(p) if mode == "lp" else None
        self.h = h
        self.grid = grid
        self.quad_weights = np.full(n_cells, h)
        self.weight_samples = rho
        for arr in (self.grid, self.quad_weights, self.weight_samples):
            arr.flags.writeable = False

    @property
    def n(self) -> int:
        return self.grid.size

    @property
    def window(self) -> tuple[float, float]:
        return self.domain.window

    def __repr__(self):
        tag = self.mode if self.mode == "c0sup" else f"lp(p={self.p:g})"
        return (f"WeightedGridSpace({self.domain.kind.value}, n={self.n}, "
                f"h={self.h:.4g}, {tag}, weight={self.weight.label!r})")

    # -- functions on the space -------------------------------------------

    def function(self, values, truncated: bool = False) -> "GridFunction":
        return GridFunction(np.asarray(values, dtype=complex), self, truncated)

    def zero(self) -> "GridFunction":
        return self.function(np.zeros(self.n, dtype=complex))

    def from_callable(self, fn) -> "GridFunction":
        return self.function(np.asarray(fn(self.grid), dtype=complex))

    def indicator(self, a: float, b: float, amplitude: complex = 1.0) -> "GridFunction":
        """Sampled indicator of [a, b], scaled by ``amplitude``."""
        vals = np.where((self.grid >= a) & (self.grid <= b), amplitude, 0.0)
        return self.function(vals)

    def tent(self, a: float, b: float, amplitude: complex = 1.0) -> "GridFunction":
        """Piecewise-linear bump on [a, b] peaking at the midpoint."""
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        vals = amplitude * np.clip(1.0 - np.abs(self.grid - mid) / half, 0.0, None)
        return self.function(vals)

    # -- metric ------------------------------------------------------------

    def norm(self, f: "GridFunction") -> float:
        self._check_member(f)
        mag = np.abs(f.values)
        if self.mode == "c0sup":
            return float(np.max(mag * self.weight_samples))
        acc = np.sum(mag ** self.p * self.weight_samples * self.quad_weights)
        return float(acc ** (1.0 / self.p))

    def distance(self, f: "GridFunction", g: "GridFunction") -> float:
        self._check_member(f)
        self._check_member(g)
        return self.norm(self.function(f.values - g.values))

    def _check_member(self, f: "GridFunction"):
        if f.space is self:
            return
        other = f.space
        if other.n != self.n or other.mode != self.mode or \
                not np.array_equal(other.grid, self.grid):
            raise SpaceMismatchError(
                f"function on {other!r} used with {self!r}")


@dataclass(frozen=True)
class GridFunction:
    """Complex sample vector bound to a space.

    ``truncated`` records that producing this function involved reads beyond
    the truncated window on a domain whose zero extension is an assumption.
    The flag is advisory: detectors consult it when issuing verdicts.
    """

    values: np.ndarray
    space: WeightedGridSpace
    truncated: bool = False

    def __post_init__(self):
        if self.values.shape != (self.space.n,):
            raise SpaceMismatchError(
                f"value vector of shape {self.values.shape} on a "
                f"{self.space.n}-cell grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite sample values")
        self.values.flags.writeable = False

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self.space._check_member(other)
        return GridFunction(self.values + other.values, self.space,
                            self.truncated or other.truncated)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self.space._check_member(other)
        return GridFunction(self.values - other.values, self.space,
                            self.truncated or other.truncated)

    def __mul__(self, scalar: complex) -> "GridFunction":
        return GridFunction(self.values * scalar, self.space, self.truncated)

    __rmul__ = __mul__

    def support_window(self, cutoff: float = 0.0) -> tuple[float, float] | None:
        """Smallest grid interval containing all samples with |value| > cutoff."""
        hits = np.nonzero(np.abs(self.values) > cutoff)[0]
        if hits.size == 0:
            return None
        return (float(self.space.grid[hits[0]]), float(self.space.grid[hits[-1]]))


def norm(space: WeightedGridSpace, f: GridFunction) -> float:
    """Norm of ``f`` in ``space`` (delegates to the space)."""
    return space.norm(f)


def distance(space: WeightedGridSpace, f: GridFunction, g: GridFunction) -> float:
    """Norm of the difference f - g."""
    return space.distance(f, g)


def _read_weights(space: WeightedGridSpace, points: np.ndarray):
    """Linear interpolation coefficients for reads at ``points``.

    Returns ``(idx, frac, inside)`` with the convention that the read value
    is ``(1-frac) * v[idx] + frac * v[idx+1]`` for inside points (indices
    pre-clipped to the sample range, constant continuation over the boundary
    half-cells) and zero otherwise.  Near-integer offsets are snapped so
    grid-aligned shifts are exact.
    """
    if space.n < 2:
        raise SpaceMismatchError("interpolation needs at least two cells")
    lo, hi = space.window
    pos = (points - space.grid[0]) / space.h
    idx = np.floor(pos).astype(np.int64)
    frac = pos - idx
    hi_snap = frac > 1.0 - _SNAP
    idx = np.where(hi_snap, idx + 1, idx)
    frac = np.where(hi_snap | (frac < _SNAP), 0.0, frac)
    inside = (points >= lo) & (points <= hi)
    last = space.n - 1
    low_clamp = idx < 0
    high_clamp = idx >= last
    idx = np.clip(idx, 0, last - 1)
    frac = np.where(low_clamp | high_clamp, 0.0, frac)
    idx = np.where(high_clamp & inside, last, idx)
    # column for the frac part; harmless when frac == 0
    return idx, frac, inside


def sample_values(space: WeightedGridSpace, f: GridFunction,
                  points: np.ndarray) -> tuple[np.ndarray, int]:
    """Read ``f`` at arbitrary points.

    Returns the interpolated values and the number of points that fell
    outside the truncated window (those read as zero).
    """
    space._check_member(f)
    points = np.asarray(points, dtype=float)
    idx, frac, inside = _read_weights(space, points)
    upper = np.minimum(idx + 1, space.n - 1)
    vals = (1.0 - frac) * f.values[idx] + frac * f.values[upper]
    vals = np.where(inside, vals, 0.0)
    return vals, int(np.count_nonzero(~inside))
