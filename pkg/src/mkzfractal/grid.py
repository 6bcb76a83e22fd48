"""Uniform-grid function representation with piecewise-linear evaluation.

GridFunction is the concrete carrier for germs, operator images and solved
fractal fixed points.  Evaluation at a grid node returns the stored sample
exactly; between nodes values are linearly interpolated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class IntervalSpec:
    """Closed interval [left, right] with left < right."""

    left: float
    right: float

    def __post_init__(self):
        if not self.left < self.right:
            raise ValueError(f"interval endpoints must satisfy left < right, got [{self.left}, {self.right}]")

    @property
    def width(self) -> float:
        return self.right - self.left

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all((x >= self.left - 1e-12) & (x <= self.right + 1e-12)))


class GridFunction:
    """Real function sampled at M >= 2 uniform points of an interval."""

    __slots__ = ("interval", "values")

    def __init__(self, interval: IntervalSpec, values):
        values = np.array(values, dtype=float, copy=True)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("GridFunction needs a 1-d vector of at least 2 samples")
        if not np.all(np.isfinite(values)):
            raise ValueError("GridFunction samples must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "interval", interval)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):  # samples are immutable once built
        raise AttributeError("GridFunction is read-only; build a new one instead")

    @classmethod
    def from_callable(cls, fn, interval: IntervalSpec, size: int) -> "GridFunction":
        xs = grid_points(interval, size)
        return cls(interval, np.asarray(fn(xs), dtype=float))

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def step(self) -> float:
        return self.interval.width / (self.size - 1)

    def xs(self) -> np.ndarray:
        return grid_points(self.interval, self.size)

    def __call__(self, x):
        """Piecewise-linear evaluation; exact sample values at the grid nodes."""
        scalar = np.isscalar(x) or (isinstance(x, np.ndarray) and x.ndim == 0)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        m = self.size - 1
        t = (x - self.interval.left) * (m / self.interval.width)
        t = np.clip(t, 0.0, float(m))
        i = np.minimum(t.astype(np.int64), m - 1)
        w = t - i
        out = self.values[i] * (1.0 - w) + self.values[i + 1] * w
        # snap to stored samples where x coincides bitwise with a grid node
        j = np.rint(t).astype(np.int64)
        h = self.interval.width / m
        exact = self.interval.left + j * h == x
        if np.any(exact):
            out[exact] = self.values[j[exact]]
        return float(out[0]) if scalar else out

    # -- norms ------------------------------------------------------------

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def lp_norm(self, p: float) -> float:
        """Trapezoid-rule L^p norm over the interval, p >= 1."""
        if p < 1:
            raise ValueError(f"p must be >= 1, got {p}")
        return float(np.trapezoid(np.abs(self.values) ** p, dx=self.step) ** (1.0 / p))

    # -- exact integrals of the interpolant --------------------------------

    def _cumulative(self) -> np.ndarray:
        v = self.values
        cells = 0.5 * (v[1:] + v[:-1]) * self.step
        return np.concatenate(([0.0], np.cumsum(cells)))

    def integrate(self, a, b):
        """Exact integral of the piecewise-linear interpolant over [a, b] (vectorized)."""
        cum = self._cumulative()
        scalar = np.isscalar(a) and np.isscalar(b)

        def anti(x):
            x = np.atleast_1d(np.asarray(x, dtype=float))
            m = self.size - 1
            t = np.clip((x - self.interval.left) * (m / self.interval.width), 0.0, float(m))
            i = np.minimum(t.astype(np.int64), m - 1)
            w = t - i
            vx = self.values[i] * (1.0 - w) + self.values[i + 1] * w
            return cum[i] + 0.5 * (self.values[i] + vx) * w * self.step

        out = anti(b) - anti(a)
        return float(out[0]) if scalar else out

    # -- algebra on a shared grid ------------------------------------------

    def _same_grid(self, other: "GridFunction"):
        if self.size != other.size or self.interval != other.interval:
            raise ValueError("grid functions live on different grids")

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._same_grid(other)
            return GridFunction(self.interval, self.values + other.values)
        return GridFunction(self.interval, self.values + float(other))

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self._same_grid(other)
            return GridFunction(self.interval, self.values - other.values)
        return GridFunction(self.interval, self.values - float(other))

    def __rmul__(self, c):
        return GridFunction(self.interval, float(c) * self.values)

    __mul__ = __rmul__

    def __eq__(self, other):
        return (
            isinstance(other, GridFunction)
            and self.interval == other.interval
            and np.array_equal(self.values, other.values)
        )

    # -- serialization -----------------------------------------------------

    def to_csv(self, path) -> None:
        """Two-column CSV `x,value`; floats written in shortest round-trip form."""
        xs = self.xs()
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("x,value\n")
            for x, v in zip(xs, self.values):
                fh.write(f"{float(x)!r},{float(v)!r}\n")

    @classmethod
    def from_csv(cls, path) -> "GridFunction":
        xs, vs = [], []
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != "x,value":
                raise ValueError(f"expected header 'x,value', got {header!r}")
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                sx, sv = line.split(",")
                xs.append(float(sx))
                vs.append(float(sv))
        if len(vs) < 2:
            raise ValueError("need at least two samples")
        return cls(IntervalSpec(xs[0], xs[-1]), np.asarray(vs))


def grid_points(interval: IntervalSpec, size: int) -> np.ndarray:
    """The M uniform sample abscissae; endpoints land exactly on the interval ends."""
    if size < 2:
        raise ValueError(f"grid needs at least 2 points, got {size}")
    m = size - 1
    h = interval.width / m
    xs = interval.left + np.arange(size) * h
    xs[-1] = interval.right
    return xs
