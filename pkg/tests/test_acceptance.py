"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line
(run with ``pytest tests/test_acceptance.py -s`` to see them).

Thresholds marked "frozen" were fixed from oracle/convergence measurements
during development and must not drift.
"""

import time

import numpy as np
import pytest

from coneradon.cone3d import (
    KernelParams,
    cone_forward,
    cone_invert,
    dft2_slices,
    invert_frequency_profile,
    kernel_eval,
)
from coneradon.grids import AxisSpec, ConeGeometry, RealGrid2D, RealGrid3D
from coneradon.phantoms import BumpSpec, relative_l2, render_bumps_2d, render_bumps_3d
from coneradon.specfun import bessel_j0, bessel_j1
from coneradon.vline2d import vline_forward, vline_invert, vline_spectral_oracle

import oracles

GEOM = ConeGeometry(np.pi / 8)
BUMP2 = BumpSpec((0.2, 0.1), 0.25, 1.0)
BUMP3 = BumpSpec((0.2, 0.1, 0.0), 0.25, 1.0)

# Frozen tolerances (measured once, asserted forever).
BESSEL_ORACLE_ATOL = 1e-9
KERNEL_QUAD_ATOL = 1e-8
FWD_RAYMARCH_RTOL = 5e-3
FWD_SPECTRAL_RTOL = 1e-2
ROUNDTRIP_2D_N120_MAX = 0.15
PEAK_RATIO_RTOL = 0.10
PROFILE_RECOVERY_RTOL = 1e-2
ROUNDTRIP_3D_N48_MAX = 0.25
BETA_SWEEP_FACTOR = 2.0


def report(number: int, passed: bool, detail: str):
    print(f"[criterion {number}] {'PASS' if passed else 'FAIL'}: {detail}")
    assert passed, f"criterion {number} failed: {detail}"


def bump_grid(n, spec=BUMP2):
    ax = AxisSpec(n, -1.0, 1.0)
    return render_bumps_2d([spec], ax, ax)


def bump_volume(n, spec=BUMP3):
    ax = AxisSpec(n, -1.0, 1.0)
    return render_bumps_3d([spec], ax, ax, ax)


def local_maxima_above_half_peak(values):
    interior = values[1:-1, 1:-1]
    is_max = np.ones_like(interior, dtype=bool)
    n, m = values.shape
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if (di, dj) == (0, 0):
                continue
            is_max &= interior > values[1 + di : n - 1 + di, 1 + dj : m - 1 + dj]
    is_max &= interior >= 0.5 * values.max()
    return [(int(i) + 1, int(j) + 1) for i, j in np.argwhere(is_max)]


@pytest.fixture(scope="module")
def roundtrip_2d():
    out = {}
    for n in (60, 120, 240):
        f = bump_grid(n)
        projection = vline_forward(f, GEOM)
        recon = vline_invert(projection)
        out[n] = {"f": f, "g": projection, "recon": recon, "err": relative_l2(recon, f)}
    return out


@pytest.fixture(scope="module")
def roundtrip_3d():
    out = {}
    for n in (32, 48, 64):
        f = bump_volume(n)
        recon = cone_invert(cone_forward(f, GEOM), GEOM, pad_factor=2)
        out[n] = relative_l2(recon, f)
    return out


def test_criterion_1_bessel_functions():
    start = time.perf_counter()
    x = np.linspace(0.0, 50.0, 1000)
    worst_j0 = np.abs(bessel_j0(x) - oracles.j0_quadrature(x, 4096)).max()

    rng = np.random.default_rng(11)
    a = rng.uniform(0.0, 30.0, size=100)
    ident_repr = np.abs(oracles.j0_quadrature(a, 4096) - bessel_j0(a)).max()

    xs = rng.uniform(0.1, 50.0, size=200)
    h = 1e-5
    deriv = np.abs(
        (bessel_j0(xs + h) - bessel_j0(xs - h)) / (2 * h) + bessel_j1(xs)
    ).max()

    xr = rng.uniform(0.5, 50.0, size=200)
    h2 = 1e-4
    d2 = (bessel_j0(xr + h2) - 2 * bessel_j0(xr) + bessel_j0(xr - h2)) / (h2 * h2)
    recur = np.abs(d2 + bessel_j0(xr) - bessel_j1(xr) / xr).max()

    worst_int = 0.0
    for upper in (1.0, 5.0, 20.0):
        v = np.linspace(0.0, upper, 100_001)
        integral = np.trapezoid(v * bessel_j0(v), v)
        worst_int = max(worst_int, abs(integral - upper * bessel_j1(upper)))

    elapsed = time.perf_counter() - start
    ok = (
        worst_j0 <= BESSEL_ORACLE_ATOL
        and ident_repr <= 1e-8
        and deriv <= 1e-7
        and recur <= 1e-6
        and worst_int <= 1e-7
        and elapsed < 5.0
    )
    report(
        1, ok,
        f"J0 oracle err {worst_j0:.2e}, repr {ident_repr:.2e}, deriv {deriv:.2e}, "
        f"recurrence {recur:.2e}, integral {worst_int:.2e} ({elapsed:.1f}s)",
    )


def test_criterion_2_kernel_reduction():
    start = time.perf_counter()
    rng = np.random.default_rng(13)
    theta = 2.0 * np.pi * np.arange(4096) / 4096
    worst = 0.0
    for _ in range(50):
        geom = ConeGeometry(rng.uniform(0.1, 1.4))
        lam, mu = rng.uniform(-20.0, 20.0, size=2)
        gap = rng.uniform(0.0, 2.0)
        u = geom.tan_beta * np.hypot(lam, mu)
        closed = kernel_eval(KernelParams(u, geom), gap, 0.0)
        phase = gap * geom.tan_beta * (lam * np.cos(theta) + mu * np.sin(theta))
        quad = (geom.tan_beta / geom.cos_beta) * gap * 2 * np.pi * float(np.mean(np.cos(phase)))
        worst = max(worst, abs(closed - quad))
    elapsed = time.perf_counter() - start
    ok = worst <= KERNEL_QUAD_ATOL and elapsed < 5.0
    report(2, ok, f"kernel vs angular quadrature worst {worst:.2e} ({elapsed:.1f}s)")


def test_criterion_3_forward_oracles(roundtrip_2d):
    start = time.perf_counter()
    f = roundtrip_2d[120]["f"]
    g = roundtrip_2d[120]["g"].grid.values
    marched = oracles.vline_ray_march_grid(f, GEOM, oversample=10)
    rel_march = np.linalg.norm(g - marched) / np.linalg.norm(marched)
    spectral = vline_spectral_oracle(f, GEOM, pad_factor=2).grid.values
    rel_spec = np.linalg.norm(g - spectral) / np.linalg.norm(g)
    elapsed = time.perf_counter() - start
    ok = rel_march <= FWD_RAYMARCH_RTOL and rel_spec <= FWD_SPECTRAL_RTOL and elapsed < 30.0
    report(
        3, ok,
        f"forward vs ray-march {rel_march:.4f} (<= {FWD_RAYMARCH_RTOL}), "
        f"vs spectral route {rel_spec:.4f} (<= {FWD_SPECTRAL_RTOL}) ({elapsed:.1f}s)",
    )


def test_criterion_4_single_bump_reproduction(roundtrip_2d):
    start = time.perf_counter()
    err_60 = roundtrip_2d[60]["err"]
    err_120 = roundtrip_2d[120]["err"]
    recon = roundtrip_2d[120]["recon"]
    f = roundtrip_2d[120]["f"]

    peaks = local_maxima_above_half_peak(recon.values)
    ax = f.x_axis
    center_node = (round((0.2 + 1) / ax.spacing), round((0.1 + 1) / ax.spacing))
    centered = len(peaks) == 1 and max(
        abs(peaks[0][0] - center_node[0]), abs(peaks[0][1] - center_node[1])
    ) <= 2

    # No ring artifacts above 10% of peak outside the (slightly dilated) support.
    gx, gy = np.meshgrid(ax.coordinates(), ax.coordinates(), indexing="ij")
    outside = (gx - 0.2) ** 2 + (gy - 0.1) ** 2 > (0.25 + 3 * ax.spacing) ** 2
    ring_level = np.abs(recon.values[outside]).max() / recon.values.max()

    elapsed = time.perf_counter() - start
    ok = (
        err_120 <= ROUNDTRIP_2D_N120_MAX
        and err_120 < err_60
        and centered
        and ring_level <= 0.10
        and elapsed < 60.0
    )
    report(
        4, ok,
        f"rel L2 N=120 {err_120:.4f} (<= {ROUNDTRIP_2D_N120_MAX}) < N=60 {err_60:.4f}, "
        f"single centered peak {centered}, ring level {ring_level:.3f} (<= 0.10) "
        f"({elapsed:.1f}s)",
    )


def test_criterion_5_two_bump_reproduction():
    start = time.perf_counter()
    n = 220
    ax = AxisSpec(n, -1.0, 1.0)
    specs = [BumpSpec((0.5, 0.3), 0.25, 3.0), BumpSpec((-0.2, -0.2), 0.25, 4.0)]
    f = render_bumps_2d(specs, ax, ax)
    recon = vline_invert(vline_forward(f, GEOM))

    peaks = local_maxima_above_half_peak(recon.values)
    expected = [
        (round((0.5 + 1) / ax.spacing), round((0.3 + 1) / ax.spacing)),
        (round((-0.2 + 1) / ax.spacing), round((-0.2 + 1) / ax.spacing)),
    ]
    located = len(peaks) == 2 and all(
        any(max(abs(p[0] - e[0]), abs(p[1] - e[1])) <= 2 for p in peaks) for e in expected
    )
    ratio_ok = False
    ratio = float("nan")
    if len(peaks) == 2:
        values = sorted(recon.values[i, j] for i, j in peaks)
        ratio = values[0] / values[1]
        ratio_ok = abs(ratio / (3.0 / 4.0) - 1.0) <= PEAK_RATIO_RTOL
    elapsed = time.perf_counter() - start
    ok = located and ratio_ok and elapsed < 120.0
    report(
        5, ok,
        f"{len(peaks)} maxima above half-peak, located within 2 px {located}, "
        f"peak ratio {ratio:.4f} vs 0.75 ({elapsed:.1f}s)",
    )


def test_criterion_6_frequency_profile_inversion():
    start = time.perf_counter()
    n = 512
    zax = AxisSpec(n, -1.0, 1.0)
    z = zax.coordinates()
    truth = oracles.smooth_bump_1d(z)
    worst = 0.0
    for u in (0.0, 0.5, 3.0, 10.0):
        data = oracles.kernel_profile_quadrature(
            oracles.smooth_bump_1d, z, zax.max, u, bessel_j0, oversample=6
        )
        recovered = invert_frequency_profile(data, zax, u)
        worst = max(worst, np.linalg.norm(recovered - truth) / np.linalg.norm(truth))
    elapsed = time.perf_counter() - start
    ok = worst <= PROFILE_RECOVERY_RTOL and elapsed < 10.0
    report(
        6, ok,
        f"worst recovery rel L2 {worst:.5f} (<= {PROFILE_RECOVERY_RTOL}) over "
        f"u in (0, 0.5, 3, 10) ({elapsed:.1f}s)",
    )


def test_criterion_7_3d_roundtrip(roundtrip_3d):
    start = time.perf_counter()
    err_48, err_64 = roundtrip_3d[48], roundtrip_3d[64]
    elapsed = time.perf_counter() - start
    ok = err_48 <= ROUNDTRIP_3D_N48_MAX and err_64 < err_48
    report(
        7, ok,
        f"rel L2 N=48 {err_48:.4f} (<= {ROUNDTRIP_3D_N48_MAX}), N=64 {err_64:.4f} "
        f"strictly smaller ({elapsed:.1f}s beyond shared fixtures)",
    )


def test_criterion_8_property_suites(roundtrip_2d, roundtrip_3d):
    start = time.perf_counter()
    failures = []

    ax2 = AxisSpec(40, -1.0, 1.0)
    ax3 = AxisSpec(16, -1.0, 1.0)
    for seed in range(20):
        rng = np.random.default_rng(seed)

        # 2D linearity
        v1, v2 = rng.normal(size=(2, 40, 40))
        a, b = rng.normal(size=2)
        lhs = vline_forward(RealGrid2D(ax2, ax2, a * v1 + b * v2), GEOM).grid.values
        rhs = (
            a * vline_forward(RealGrid2D(ax2, ax2, v1), GEOM).grid.values
            + b * vline_forward(RealGrid2D(ax2, ax2, v2), GEOM).grid.values
        )
        if not np.allclose(lhs, rhs, rtol=1e-11, atol=1e-11):
            failures.append(f"2D linearity (seed {seed})")

        # 2D translation equivariance on interior columns
        block = np.zeros((40, 40))
        block[12:20, 10:26] = rng.uniform(0, 1, size=(8, 16))
        shift = int(rng.integers(1, 6))
        g0 = vline_forward(RealGrid2D(ax2, ax2, block), GEOM).grid.values
        g1 = vline_forward(RealGrid2D(ax2, ax2, np.roll(block, shift, axis=0)), GEOM).grid.values
        if not np.allclose(g1[shift + 16 : -16], g0[16 : -16 - shift], rtol=1e-11, atol=1e-13):
            failures.append(f"2D translation (seed {seed})")

        # support vanishing and nonnegativity for a random bump
        cx, cy = rng.uniform(-0.4, 0.4, size=2)
        radius = rng.uniform(0.1, 0.3)
        f_rand = render_bumps_2d([BumpSpec((cx, cy), radius, 1.0)], ax2, ax2)
        g_rand = vline_forward(f_rand, GEOM).grid
        rows_above = np.flatnonzero(ax2.coordinates() >= cy + radius + ax2.spacing)
        if rows_above.size and np.abs(g_rand.values[:, rows_above]).max() > 0.0:
            failures.append(f"2D support vanishing (seed {seed})")
        if g_rand.values.min() < 0.0:
            failures.append(f"2D nonnegativity (seed {seed})")

        # 2D mirror symmetry on arbitrary data
        vm = rng.normal(size=(40, 40))
        gm = vline_forward(RealGrid2D(ax2, ax2, vm), GEOM).grid.values
        gm_ref = vline_forward(RealGrid2D(ax2, ax2, vm[::-1].copy()), GEOM).grid.values
        if not np.allclose(gm_ref, gm[::-1], rtol=1e-10, atol=1e-11):
            failures.append(f"2D mirror (seed {seed})")

        # 3D linearity and rotation covariance
        w1, w2 = rng.normal(size=(2, 16, 16, 16))
        lhs3 = cone_forward(RealGrid3D(ax3, ax3, ax3, a * w1 + b * w2), GEOM).values
        rhs3 = (
            a * cone_forward(RealGrid3D(ax3, ax3, ax3, w1), GEOM).values
            + b * cone_forward(RealGrid3D(ax3, ax3, ax3, w2), GEOM).values
        )
        if not np.allclose(lhs3, rhs3, rtol=1e-11, atol=1e-11):
            failures.append(f"3D linearity (seed {seed})")
        g3 = cone_forward(RealGrid3D(ax3, ax3, ax3, w1), GEOM).values
        g3_rot = cone_forward(
            RealGrid3D(ax3, ax3, ax3, np.ascontiguousarray(np.rot90(w1, axes=(0, 1)))), GEOM
        ).values
        if not np.allclose(g3_rot, np.rot90(g3, axes=(0, 1)), rtol=1e-10, atol=1e-11):
            failures.append(f"3D rotation covariance (seed {seed})")

        # 3D support vanishing: vertices above the support see nothing
        wz = np.zeros((16, 16, 16))
        wz[:, :, 4:9] = rng.uniform(0, 1, size=(16, 16, 5))
        gz = cone_forward(RealGrid3D(ax3, ax3, ax3, wz), GEOM).values
        if np.abs(gz[:, :, 9:]).max() > 0.0:
            failures.append(f"3D support vanishing (seed {seed})")

        # Parseval consistency per slice
        vols = rng.normal(size=(12, 12, 3))
        grid3 = RealGrid3D(AxisSpec(12, -1, 1), AxisSpec(12, -1, 1), AxisSpec(3, 0, 1), vols)
        stack = dft2_slices(grid3)
        scale = (grid3.x_axis.spacing * grid3.y_axis.spacing) ** 2 * 12 * 12
        for k in range(3):
            lhs_e = np.sum(np.abs(stack.values[:, :, k]) ** 2)
            rhs_e = np.sum(vols[:, :, k] ** 2) * scale
            if abs(lhs_e - rhs_e) > 1e-10 * rhs_e:
                failures.append(f"Parseval (seed {seed}, slice {k})")

    # monotone round-trip convergence
    errs2 = [roundtrip_2d[n]["err"] for n in (60, 120, 240)]
    if not (errs2[0] > errs2[1] > errs2[2]):
        failures.append(f"2D convergence not monotone: {errs2}")
    errs3 = [roundtrip_3d[n] for n in (32, 48, 64)]
    if not (errs3[0] > errs3[1] > errs3[2]):
        failures.append(f"3D convergence not monotone: {errs3}")

    elapsed = time.perf_counter() - start
    ok = not failures
    report(
        8, ok,
        "all property suites over 20 seeded trials; 2D errs "
        f"{[round(e, 4) for e in errs2]}, 3D errs {[round(e, 4) for e in errs3]} "
        f"({elapsed:.1f}s)" + ("" if ok else f"; failures: {failures[:4]}"),
    )


def test_criterion_9_beta_sweep(roundtrip_2d):
    start = time.perf_counter()
    baseline = roundtrip_2d[120]["err"]
    f = roundtrip_2d[120]["f"]
    errors = {}
    for beta in (np.pi / 12, np.pi / 8, np.pi / 6, np.pi / 4, 3 * np.pi / 8):
        geom = ConeGeometry(beta)
        errors[beta] = relative_l2(vline_invert(vline_forward(f, geom)), f)
    elapsed = time.perf_counter() - start
    worst = max(errors.values())
    ok = worst <= BETA_SWEEP_FACTOR * baseline
    report(
        9, ok,
        f"round-trip errors {[round(e, 4) for e in errors.values()]} all <= "
        f"{BETA_SWEEP_FACTOR} x baseline {baseline:.4f} ({elapsed:.1f}s)",
    )
