"""Independent numerical oracles used by the test suite.

Everything here is deliberately written from scratch against the defining
integrals (quadrature of integral representations, ray marching, surface
quadrature) and stays independent of the library code paths it checks; only
plain numpy is used.
"""

import numpy as np


def j0_quadrature(a, nodes: int = 4096):
    """J0 via the integral representation (1/2pi) int_0^2pi exp(i a cos t) dt,
    with the periodic trapezoid rule (spectrally accurate)."""
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    phases = np.multiply.outer(np.asarray(a, dtype=float), np.cos(theta))
    return np.real(np.exp(1j * phases)).mean(axis=-1)


def j0_first_zero(nodes: int = 4096, tol: float = 1e-12) -> float:
    """First positive zero of J0, by bisection on the quadrature oracle."""
    lo, hi = 2.0, 3.0
    flo = float(j0_quadrature(lo, nodes))
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fmid = float(j0_quadrature(mid, nodes))
        if (flo > 0) == (fmid > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bilinear_sample(values, x_axis, y_axis, xq, yq):
    """Standalone bilinear interpolation with zero outside the rectangle."""
    xq = np.asarray(xq, dtype=float)
    yq = np.asarray(yq, dtype=float)
    nx, ny = values.shape
    tx = (xq - x_axis.min) / x_axis.spacing
    ty = (yq - y_axis.min) / y_axis.spacing
    inside = (tx >= 0) & (tx <= nx - 1) & (ty >= 0) & (ty <= ny - 1)
    tx = np.clip(tx, 0, nx - 1)
    ty = np.clip(ty, 0, ny - 1)
    i = np.minimum(tx.astype(int), nx - 2)
    j = np.minimum(ty.astype(int), ny - 2)
    fx, fy = tx - i, ty - j
    val = (
        values[i, j] * (1 - fx) * (1 - fy)
        + values[i + 1, j] * fx * (1 - fy)
        + values[i, j + 1] * (1 - fx) * fy
        + values[i + 1, j + 1] * fx * fy
    )
    return np.where(inside, val, 0.0)


def vline_ray_march(f, geometry, x_v: float, y_v: float, oversample: int = 10) -> float:
    """V-line integral at one vertex by marching both rays in arclength.

    Steps are ``oversample`` times finer than the grid-level quadrature of the
    implementation (arclength step dy / (oversample cos(beta))), trapezoid rule,
    sampling the grid's bilinear interpolant.
    """
    cos_b, sin_b = geometry.cos_beta, np.sin(geometry.beta)
    y_top = f.y_axis.max
    height = y_top - y_v
    if height <= 0:
        return 0.0
    n_grid_steps = max(1, int(np.ceil(height / f.y_axis.spacing)))
    n_steps = oversample * n_grid_steps
    r = np.linspace(0.0, height / cos_b, n_steps + 1)
    y = y_v + r * cos_b
    total = 0.0
    for sign in (+1.0, -1.0):
        x = x_v + sign * r * sin_b
        samples = bilinear_sample(f.values, f.x_axis, f.y_axis, x, y)
        total += float(np.trapezoid(samples, r))
    return total


def vline_ray_march_grid(f, geometry, oversample: int = 10) -> np.ndarray:
    """Ray-marching V-line data on every vertex of f's own grid (vectorized
    across x for each vertex row)."""
    cos_b, sin_b = geometry.cos_beta, np.sin(geometry.beta)
    xs = f.x_axis.coordinates()
    ys = f.y_axis.coordinates()
    n_x, n_y = xs.size, ys.size
    out = np.zeros((n_x, n_y))
    for j in range(n_y - 1):
        height = f.y_axis.max - ys[j]
        n_steps = oversample * (n_y - 1 - j)
        r = np.linspace(0.0, height / cos_b, n_steps + 1)
        y = ys[j] + r * cos_b
        acc = np.zeros((n_x, r.size))
        for sign in (+1.0, -1.0):
            x = xs[:, None] + sign * r[None, :] * sin_b
            acc += bilinear_sample(f.values, f.x_axis, f.y_axis, x, y[None, :])
        out[:, j] = np.trapezoid(acc, r, axis=1)
    return out


def trilinear_sample(volume, x_axis, y_axis, z_axis, xq, yq, zq):
    """Standalone trilinear interpolation with zero outside the box."""
    xq = np.asarray(xq, dtype=float)
    yq = np.asarray(yq, dtype=float)
    zq = np.asarray(zq, dtype=float)
    xq, yq, zq = np.broadcast_arrays(xq, yq, zq)
    nx, ny, nz = volume.shape
    tx = (xq - x_axis.min) / x_axis.spacing
    ty = (yq - y_axis.min) / y_axis.spacing
    tz = (zq - z_axis.min) / z_axis.spacing
    inside = (
        (tx >= 0) & (tx <= nx - 1) & (ty >= 0) & (ty <= ny - 1) & (tz >= 0) & (tz <= nz - 1)
    )
    tx = np.clip(tx, 0, nx - 1)
    ty = np.clip(ty, 0, ny - 1)
    tz = np.clip(tz, 0, nz - 1)
    i = np.minimum(tx.astype(int), nx - 2)
    j = np.minimum(ty.astype(int), ny - 2)
    k = np.minimum(tz.astype(int), nz - 2)
    fx, fy, fz = tx - i, ty - j, tz - k
    val = np.zeros(tx.shape)
    for di, wx in ((0, 1 - fx), (1, fx)):
        for dj, wy in ((0, 1 - fy), (1, fy)):
            for dk, wz in ((0, 1 - fz), (1, fz)):
                val += volume[i + di, j + dj, k + dk] * wx * wy * wz
    return np.where(inside, val, 0.0)


def cone_surface_quadrature(f, geometry, x_v, y_v, z_v, oversample: int = 4) -> float:
    """Cone-surface integral at one vertex with ``oversample`` times finer z
    steps and phi sampling than the implementation's grid-driven quadrature,
    sampling the volume's trilinear interpolant."""
    t, cos_b = geometry.tan_beta, geometry.cos_beta
    z_top = f.z_axis.max
    height = z_top - z_v
    if height <= 0:
        return 0.0
    dz = f.z_axis.spacing
    n_steps = oversample * max(1, int(np.ceil(height / dz)))
    z = np.linspace(z_v, z_top, n_steps + 1)
    ring_means = np.zeros(z.size)
    for m, zm in enumerate(z):
        r = (zm - z_v) * t
        n_phi = oversample * max(16, int(np.ceil(2 * np.pi * r / f.x_axis.spacing)))
        phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
        samples = trilinear_sample(
            f.values, f.x_axis, f.y_axis, f.z_axis,
            x_v + r * np.cos(phi), y_v + r * np.sin(phi), np.full(n_phi, zm),
        )
        ring_means[m] = samples.mean()
    integrand = (z - z_v) * ring_means
    return float(2.0 * np.pi * (t / cos_b) * np.trapezoid(integrand, z))


def smooth_bump_1d(z, center: float = 0.0, radius: float = 0.5):
    """C-infinity compactly supported bump profile for 1D oracle tests."""
    z = np.asarray(z, dtype=float)
    rho2 = (z - center) ** 2
    out = np.zeros_like(z)
    mask = rho2 < radius * radius
    out[mask] = np.exp(-radius * radius / (radius * radius - rho2[mask]))
    return out


def kernel_profile_quadrature(fhat_fn, z_nodes, z_top: float, u: float,
                              j0_fn, oversample: int = 8) -> np.ndarray:
    """G(z_v) = int_{z_v}^{z_top} fhat(z) (z - z_v) J0(u (z - z_v)) dz on each
    node, by trapezoid on an ``oversample`` times finer subgrid."""
    n = z_nodes.size
    out = np.zeros(n)
    for j in range(n):
        m = (n - 1 - j) * oversample + 1
        if m < 2:
            continue
        zf = np.linspace(z_nodes[j], z_top, m)
        gap = zf - z_nodes[j]
        out[j] = float(np.trapezoid(fhat_fn(zf) * gap * j0_fn(u * gap), zf))
    return out
