"""Smooth bump phantoms, scene-file parsing and reconstruction-quality metrics.

A bump of radius r centered at c contributes
``intensity * exp(-r^2 / (r^2 - rho^2))`` for rho < r and 0 outside, where rho
is the distance to c.  The bump is infinitely smooth and compactly supported,
which is exactly the class the inversion formulas assume.
"""

from dataclasses import dataclass

import numpy as np

from .grids import AxisSpec, RealGrid2D, RealGrid3D

__all__ = [
    "BumpSpec",
    "max_abs_error",
    "parse_scene",
    "relative_l2",
    "render_bumps_2d",
    "render_bumps_3d",
]


@dataclass(frozen=True)
class BumpSpec:
    """One smooth bump: center (2 or 3 coordinates), radius > 0 and intensity."""

    center: tuple[float, ...]
    radius: float
    intensity: float = 1.0

    def __post_init__(self):
        if len(self.center) not in (2, 3):
            raise ValueError("bump center must have 2 or 3 coordinates")
        if not self.radius > 0:
            raise ValueError(f"bump radius must be positive, got {self.radius}")


def _check_support(spec: BumpSpec, axes: tuple[AxisSpec, ...]):
    for c, axis in zip(spec.center, axes):
        if not (axis.min < c - spec.radius and c + spec.radius < axis.max):
            raise ValueError(
                f"bump at {spec.center} with radius {spec.radius} is not strictly "
                f"inside the grid domain"
            )


def _accumulate(values: np.ndarray, rho2: np.ndarray, spec: BumpSpec):
    r2 = spec.radius * spec.radius
    mask = rho2 < r2
    values[mask] += spec.intensity * np.exp(-r2 / (r2 - rho2[mask]))


def render_bumps_2d(specs, x_axis: AxisSpec, y_axis: AxisSpec) -> RealGrid2D:
    """Sum of smooth bumps sampled on the given 2D grid.

    Every bump must be supported strictly inside the rectangle.
    """
    xs = x_axis.coordinates()
    ys = y_axis.coordinates()
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    values = np.zeros(gx.shape)
    for spec in specs:
        if len(spec.center) != 2:
            raise ValueError("2D rendering needs 2D bump centers")
        _check_support(spec, (x_axis, y_axis))
        rho2 = (gx - spec.center[0]) ** 2 + (gy - spec.center[1]) ** 2
        _accumulate(values, rho2, spec)
    return RealGrid2D(x_axis, y_axis, values)


def render_bumps_3d(specs, x_axis: AxisSpec, y_axis: AxisSpec, z_axis: AxisSpec) -> RealGrid3D:
    """3D analog of :func:`render_bumps_2d` with Euclidean distance in the ball."""
    xs = x_axis.coordinates()
    ys = y_axis.coordinates()
    zs = z_axis.coordinates()
    gx, gy, gz = np.meshgrid(xs, ys, zs, indexing="ij")
    values = np.zeros(gx.shape)
    for spec in specs:
        if len(spec.center) != 3:
            raise ValueError("3D rendering needs 3D bump centers")
        _check_support(spec, (x_axis, y_axis, z_axis))
        rho2 = (
            (gx - spec.center[0]) ** 2
            + (gy - spec.center[1]) ** 2
            + (gz - spec.center[2]) ** 2
        )
        _accumulate(values, rho2, spec)
    return RealGrid3D(x_axis, y_axis, z_axis, values)


def _matched_values(a, b):
    if a.axes() != b.axes():
        raise ValueError("grids must share axes")
    return a.values, b.values


def relative_l2(a, b) -> float:
    """||a - b||_2 / ||b||_2 over matching grids; plain ||a||_2 when b is zero."""
    va, vb = _matched_values(a, b)
    norm_b = float(np.linalg.norm(vb))
    diff = float(np.linalg.norm(va - vb))
    if norm_b == 0.0:
        return float(np.linalg.norm(va))
    return diff / norm_b


def max_abs_error(a, b) -> float:
    """Maximum absolute difference over matching grids."""
    va, vb = _matched_values(a, b)
    return float(np.max(np.abs(va - vb)))


def parse_scene(text: str, dim: int, default_radius: float = 0.25) -> list[BumpSpec]:
    """Parse a phantom scene description into bump specs.

    One bump per line: ``cx cy [cz] r intensity``; ``#`` starts a comment.
    Lines that omit the radius (``cx cy [cz] intensity``) fall back to
    ``default_radius``.  ``dim`` (2 or 3) fixes how many center coordinates a
    line carries.
    """
    if dim not in (2, 3):
        raise ValueError("scene dimension must be 2 or 3")
    specs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            tokens = [float(tok) for tok in line.split()]
        except ValueError as exc:
            raise ValueError(f"scene line {lineno}: non-numeric token ({raw!r})") from exc
        if len(tokens) == dim + 2:
            center = tuple(tokens[:dim])
            radius, intensity = tokens[dim], tokens[dim + 1]
        elif len(tokens) == dim + 1:
            center = tuple(tokens[:dim])
            radius, intensity = default_radius, tokens[dim]
        else:
            raise ValueError(
                f"scene line {lineno}: expected {dim + 2} (or {dim + 1}) numbers, "
                f"got {len(tokens)}"
            )
        specs.append(BumpSpec(center=center, radius=radius, intensity=intensity))
    return specs
