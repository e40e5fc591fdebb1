"""Uniform-grid containers plus the interpolation, differencing and cumulative
quadrature primitives shared by the 2D and 3D transforms.

Coordinate conventions: every axis is sampled uniformly from ``min`` to ``max``
inclusive, and grid values are indexed ``values[ix, iy]`` (2D) or
``values[ix, iy, iz]`` (3D).  Sampling a point outside the grid rectangle/box
returns 0, which encodes the compact-support assumption all transforms rely on.
"""

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AxisSpec",
    "ConeGeometry",
    "NonFiniteGridError",
    "RealGrid2D",
    "RealGrid3D",
    "cumint_from_top",
    "diff2_x_central",
    "diff_y_forward",
    "sample_linear_2d",
    "sample_linear_xy",
]


class NonFiniteGridError(ValueError):
    """Raised when grid data contains NaN or infinite entries."""


@dataclass(frozen=True)
class AxisSpec:
    """Uniformly sampled axis: ``n_samples`` points from ``min`` to ``max`` inclusive."""

    n_samples: int
    min: float
    max: float

    def __post_init__(self):
        if self.n_samples < 2:
            raise ValueError(f"axis needs at least 2 samples, got {self.n_samples}")
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise ValueError("axis bounds must be finite")
        if not self.max > self.min:
            raise ValueError(f"axis requires max > min, got [{self.min}, {self.max}]")

    @property
    def spacing(self) -> float:
        return (self.max - self.min) / (self.n_samples - 1)

    def coordinates(self) -> np.ndarray:
        """Coordinate of sample i is min + i * spacing."""
        return self.min + self.spacing * np.arange(self.n_samples)


@dataclass(frozen=True)
class ConeGeometry:
    """Fixed half-opening angle beta in (0, pi/2), axis vertical by construction.

    ``tan_beta`` and ``cos_beta`` are cached at construction since every ray and
    surface-element formula uses them.
    """

    beta: float
    tan_beta: float = field(init=False, repr=False)
    cos_beta: float = field(init=False, repr=False)

    def __post_init__(self):
        if not (0.0 < self.beta < math.pi / 2):
            raise ValueError(f"half-opening angle must lie in (0, pi/2), got {self.beta}")
        object.__setattr__(self, "tan_beta", math.tan(self.beta))
        object.__setattr__(self, "cos_beta", math.cos(self.beta))


def _check_finite(values: np.ndarray):
    if not np.all(np.isfinite(values)):
        raise NonFiniteGridError("grid values must all be finite")


@dataclass
class RealGrid2D:
    """Real-valued samples of a function on an axis-aligned rectangle.

    ``values[ix, iy]`` is the sample at ``(x_axis.coordinates()[ix],
    y_axis.coordinates()[iy])``.
    """

    x_axis: AxisSpec
    y_axis: AxisSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        expected = (self.x_axis.n_samples, self.y_axis.n_samples)
        if v.shape != expected:
            raise ValueError(f"values shape {v.shape} does not match axes {expected}")
        _check_finite(v)
        self.values = v

    @property
    def x_coords(self) -> np.ndarray:
        return self.x_axis.coordinates()

    @property
    def y_coords(self) -> np.ndarray:
        return self.y_axis.coordinates()

    def axes(self) -> tuple[AxisSpec, AxisSpec]:
        return (self.x_axis, self.y_axis)


@dataclass
class RealGrid3D:
    """Real-valued samples on an axis-aligned box, indexed ``values[ix, iy, iz]``."""

    x_axis: AxisSpec
    y_axis: AxisSpec
    z_axis: AxisSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        expected = (self.x_axis.n_samples, self.y_axis.n_samples, self.z_axis.n_samples)
        if v.shape != expected:
            raise ValueError(f"values shape {v.shape} does not match axes {expected}")
        _check_finite(v)
        self.values = v

    def axes(self) -> tuple[AxisSpec, AxisSpec, AxisSpec]:
        return (self.x_axis, self.y_axis, self.z_axis)


def _bilinear(values, x_axis: AxisSpec, y_axis: AxisSpec, xq, yq):
    """Bilinear interpolation of a (nx, ny) array; 0 outside the rectangle."""
    xq = np.asarray(xq, dtype=float)
    yq = np.asarray(yq, dtype=float)
    xq, yq = np.broadcast_arrays(xq, yq)
    nx, ny = values.shape

    tx = (xq - x_axis.min) / x_axis.spacing
    ty = (yq - y_axis.min) / y_axis.spacing
    inside = (tx >= 0.0) & (tx <= nx - 1.0) & (ty >= 0.0) & (ty <= ny - 1.0)

    tx = np.clip(tx, 0.0, nx - 1.0)
    ty = np.clip(ty, 0.0, ny - 1.0)
    i0 = np.minimum(tx.astype(np.intp), nx - 2)
    j0 = np.minimum(ty.astype(np.intp), ny - 2)
    fx = tx - i0
    fy = ty - j0

    v = (
        (1.0 - fx) * (1.0 - fy) * values[i0, j0]
        + fx * (1.0 - fy) * values[i0 + 1, j0]
        + (1.0 - fx) * fy * values[i0, j0 + 1]
        + fx * fy * values[i0 + 1, j0 + 1]
    )
    return np.where(inside, v, 0.0)


def sample_linear_2d(grid: RealGrid2D, x, y):
    """Bilinearly interpolate ``grid`` at (x, y); points outside the rectangle give 0.

    Accepts scalars or broadcastable arrays and returns the matching shape.
    """
    out = _bilinear(grid.values, grid.x_axis, grid.y_axis, x, y)
    return float(out) if out.ndim == 0 else out


def sample_linear_xy(volume: RealGrid3D, x, y, z_index: int):
    """Bilinearly interpolate the z-slice ``z_index`` of ``volume`` at (x, y).

    ``z_index`` must address an existing slice; (x, y) outside the rectangle give 0.
    """
    nz = volume.z_axis.n_samples
    if not 0 <= z_index < nz:
        raise IndexError(f"z_index {z_index} out of range [0, {nz})")
    out = _bilinear(volume.values[:, :, z_index], volume.x_axis, volume.y_axis, x, y)
    return float(out) if out.ndim == 0 else out


def diff_y_forward(grid: RealGrid2D) -> RealGrid2D:
    """First-order forward difference along y; the top row replicates the one below.

    The replication keeps the output on the input grid; data is expected to be
    (near-)zero at the top row because supports sit strictly inside the domain.
    """
    v = grid.values
    if grid.y_axis.n_samples < 2:
        raise ValueError("forward difference needs at least 2 samples along y")
    dy = grid.y_axis.spacing
    out = np.empty_like(v)
    out[:, :-1] = (v[:, 1:] - v[:, :-1]) / dy
    out[:, -1] = out[:, -2]
    return RealGrid2D(grid.x_axis, grid.y_axis, out)


def diff2_x_central(grid: RealGrid2D) -> RealGrid2D:
    """Central second difference along x; boundary columns replicate the adjacent
    interior value."""
    v = grid.values
    if grid.x_axis.n_samples < 3:
        raise ValueError("second difference needs at least 3 samples along x")
    dx = grid.x_axis.spacing
    out = np.empty_like(v)
    out[1:-1, :] = (v[:-2, :] - 2.0 * v[1:-1, :] + v[2:, :]) / (dx * dx)
    out[0, :] = out[1, :]
    out[-1, :] = out[-2, :]
    return RealGrid2D(grid.x_axis, grid.y_axis, out)


def _upper_trapezoid_weights(n: int, spacing: float) -> np.ndarray:
    """W[j, m] are trapezoid weights of the integral from node j to the top,
    over nodes m >= j (zero below the diagonal, zero-length row at the top)."""
    w = np.triu(np.ones((n, n)))
    w[np.diag_indices(n)] = 0.5
    w[:, -1] *= 0.5
    w[-1, -1] = 0.0
    return w * spacing


def cumint_from_top(profile, spacing: float, axis: int = -1):
    """Trapezoidal integral from each sample position to the top of the axis.

    output[k] approximates the integral of the profile from coordinate k to the
    last coordinate; output at the last position is exactly 0.  Works on real or
    complex arrays of any dimension (integrates along ``axis``).
    """
    p = np.asarray(profile)
    if p.shape[axis] < 2:
        raise ValueError("cumulative integral needs at least 2 samples")
    if not spacing > 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    p = np.moveaxis(p, axis, -1)
    seg = 0.5 * spacing * (p[..., :-1] + p[..., 1:])
    out = np.zeros(p.shape, dtype=np.result_type(p.dtype, float))
    out[..., :-1] = np.cumsum(seg[..., ::-1], axis=-1)[..., ::-1]
    return np.moveaxis(out, -1, axis)
