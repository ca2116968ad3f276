import numpy as np
import pytest

from phasecone.cone import LinkSpec
from phasecone import acpde, fermi, minsurf, profile1d

from conftest import make_cone_curve


@pytest.fixture(scope="module")
def tube33(curve33):
    return fermi.TubularMap(curve33)


@pytest.fixture(scope="module")
def small_grid_setup(curve33):
    eps = 0.25
    grid = acpde.Grid2D(R=6.0, h=eps / 8.0, m=4)
    coords = fermi.grid_fermi_coords(grid, curve33)
    return grid, coords, eps


def test_signed_distance_identity_and_offsets(curve33, tube33):
    frame = tube33.frame
    for s, tau in ((0.5, 0.0), (3.0, 0.05), (11.0, -0.4), (25.0, 1.0)):
        p = np.array(frame.point_on_normal(s, tau))
        t, foot, valid = fermi.signed_distance(p, curve33)
        assert t == pytest.approx(tau, abs=1e-10)
        assert foot == pytest.approx(s, abs=1e-8)
        assert valid


def test_signed_distance_sign_constant_on_cone_side_ray(curve33):
    # The diagonal stays strictly on the cone side of the leaf: the sign
    # of t must not flip anywhere along it.
    direction = np.array([1.0, 1.0]) / np.sqrt(2.0)
    pts = np.outer(np.linspace(0.5, 25.0, 60), direction)
    t, _, _ = fermi.signed_distance(pts, curve33)
    assert np.all(t > 0.0)


def test_tube_injectivity_roundtrip(curve33, tube33):
    rng = np.random.default_rng(3)
    s = rng.uniform(1.0, 35.0, 400)
    t = rng.uniform(-1.0, 1.0, 400) * 0.2 * np.sqrt(1 + s**2)
    px, py = tube33.frame.point_on_normal(s, t)
    fc = tube33.query(np.column_stack([px, py]))
    assert np.all(fc.valid)
    assert np.max(np.abs(fc.foot - s)) <= 1e-7
    assert np.max(np.abs(fc.t - t)) <= 1e-8
    qx, qy = tube33.frame.point_on_normal(fc.foot, fc.t)
    assert np.max(np.hypot(qx - px, qy - py)) <= 1e-8


def test_parallel_curvature_unit_sphere_model():
    # n equal unit curvatures (the unit-sphere model): H_z = n/(1 - z).
    # Not minimal, so the constant trace term must be kept in the series.
    n = 6
    z = np.linspace(-0.5, 0.5, 41)
    h_exact, h_series = fermi.mean_curvature_from_kappas(
        np.ones(n), np.ones(n), z, order=64, drop_constant=False)
    assert np.allclose(h_exact, n / (1.0 - z), rtol=1e-12)
    assert np.allclose(h_series, h_exact, atol=1e-10)


def test_parallel_curvature_simons_cone_odd():
    curve = make_cone_curve(4, 4)
    s = np.full(30, 10.0)
    z = np.linspace(-2.0, 2.0, 30)
    r = np.interp(10.0, curve.s, curve.r)
    h_exact, _ = fermi.parallel_mean_curvature(curve, s, z)
    assert np.allclose(h_exact, 8.0 * z / (r**2 - z**2), rtol=1e-9)
    # Odd in z: even-order traces cancel exactly on the cone.
    assert np.allclose(h_exact + h_exact[::-1], 0.0, atol=1e-12)


def test_parallel_curvature_series_within_tail_bound(curve33):
    rng = np.random.default_rng(11)
    s = rng.uniform(0.5, 35.0, 300)
    frame = fermi.CurveFrame(curve33)
    kmax = np.max(np.abs(np.stack(frame.curvatures(s))), axis=0)
    z = rng.uniform(-1.0, 1.0, 300) * 0.5 / kmax
    h_exact, h_series = fermi.parallel_mean_curvature(curve33, s, z, order=12)
    bound = fermi.series_tail_bound(curve33, s, z, order=12)
    assert np.all(np.abs(h_exact - h_series) <= bound + 1e-14)


def test_parallel_curvature_radius_error(curve33):
    with pytest.raises(fermi.RadiusOfConvergenceError):
        fermi.parallel_mean_curvature(curve33, np.array([0.5]),
                                      np.array([5.0]))


def test_cutoffs_support_and_nesting():
    eps, ds = 0.25, 0.5
    d = np.array([1.0, 3.0, 10.0])
    assert np.all(fermi.cutoff_chi(1, 0.0, d, eps, ds) == 1.0)
    scale = eps**ds
    for j in (1, 2, 5):
        hi = scale * (d - (2 * j - 2) / 100.0)
        lo = scale * (d - (2 * j - 1) / 100.0)
        assert np.all(fermi.cutoff_chi(j, hi, d, eps, ds) == 0.0)
        assert np.all(fermi.cutoff_chi(j, scale * d, d, eps, ds) == 0.0)
        assert np.all(fermi.cutoff_chi(j, lo, d, eps, ds) == 1.0)
    # Nesting on random samples: chi_{j} > 0 implies chi_{j-1} == 1.
    rng = np.random.default_rng(5)
    t = rng.uniform(0.0, 0.6, 3000)
    dr = rng.uniform(1.0, 12.0, 3000)
    for j in (2, 3, 4, 5):
        cj = fermi.cutoff_chi(j, t, dr, eps, ds)
        cjm = fermi.cutoff_chi(j - 1, t, dr, eps, ds)
        assert np.all(cjm[cj > 0.0] == 1.0)


def test_cutoff_gradient_scaling():
    # max |d chi/dt| should scale like eps^{-delta*}.
    d = 5.0
    sups = {}
    for eps in (0.25, 0.0625):
        t = np.linspace(0.0, eps**0.5 * d, 40001)
        chi = fermi.cutoff_chi(3, t, d, eps, 0.5)
        sups[eps] = np.max(np.abs(np.diff(chi))) / (t[1] - t[0])
    ratio = sups[0.0625] / sups[0.25]
    assert ratio == pytest.approx((0.25 / 0.0625) ** 0.5, rel=0.05)


def test_approx_solution_values(small_grid_setup, curve33):
    grid, coords, eps = small_grid_setup
    approx = fermi.build_approx_solution(grid, curve33, eps, coords=coords)
    vals = approx.values.ravel()
    assert np.max(np.abs(vals)) <= 1.0
    chi1 = fermi.cutoff_chi(1, coords.t, coords.d_gamma, eps,
                            approx.delta_star)
    outside = chi1 == 0.0
    assert np.all(np.isin(vals[outside], (-1.0, 1.0)))
    assert np.all(vals[outside] == coords.side[outside])
    inside = chi1 == 1.0
    expect = profile1d.profile(coords.t[inside] / eps)
    assert np.allclose(vals[inside], expect, atol=1e-15)
    # Flipping the side convention flips the field.
    flipped = fermi.build_approx_solution(grid, curve33, eps, plus_side=-1,
                                          coords=coords)
    assert np.allclose(flipped.values, -approx.values, atol=1e-15)


def test_inner_residual_zero_offset_and_tube_error(curve33):
    vals = fermi.inner_residual(curve33, np.array([5.0]), np.array([0.0]),
                                0.25)
    assert abs(vals[0]) <= 1e-14   # H_0 is the minimality sum (roundoff)
    with pytest.raises(fermi.TubeError):
        fermi.inner_residual(curve33, np.array([5.0]), np.array([3.0]), 0.25)


def test_inner_residual_eps_scaling(curve33):
    for s in (5.0, 12.0, 25.0):
        sups = {}
        for eps in (0.25, 0.125):
            t = np.linspace(-0.2 * np.hypot(1, s), 0.2 * np.hypot(1, s), 801)
            sups[eps] = np.max(np.abs(fermi.inner_residual(
                curve33, np.full_like(t, s), t, eps)))
        assert sups[0.25] / sups[0.125] == pytest.approx(4.0, rel=0.1)


def test_inner_residual_odd_on_exact_cone():
    curve = make_cone_curve(4, 4)
    t = np.linspace(-1.5, 1.5, 41)
    vals = fermi.inner_residual(curve, np.full_like(t, 12.0), t, 0.25)
    assert np.max(np.abs(vals + vals[::-1])) <= 1e-13 * np.max(np.abs(vals))


def test_projection_normalization_and_parity(curve33):
    eps = 0.25
    s0 = 30.0  # tube long enough that no truncation warning fires
    one = fermi.project_pi(curve33, lambda s, t: profile1d.dprofile(t / eps),
                           eps, [s0])
    assert one == pytest.approx(1.0, abs=1e-9)
    odd = fermi.project_pi(curve33,
                           lambda s, t: t * profile1d.dprofile(t / eps),
                           eps, [s0])
    assert odd == pytest.approx(0.0, abs=1e-14)


def test_projection_idempotent_and_complement(curve33):
    eps = 0.25
    s_vals = np.array([20.0, 30.0])

    def f(s, t):
        return np.cos(0.1 * s) * np.exp(-(t / (3 * eps)) ** 2) * (1 + t)

    proj = fermi.project_pi(curve33, f, eps, s_vals)

    def f_proj(s, t):
        p = proj[np.argmin(np.abs(s_vals - s))]
        return p * profile1d.dprofile(t / eps)

    proj2 = fermi.project_pi(curve33, f_proj, eps, s_vals)
    assert np.allclose(proj2, proj, rtol=1e-8)

    def f_perp(s, t):
        p = proj[np.argmin(np.abs(s_vals - s))]
        return f(s, t) - p * profile1d.dprofile(t / eps)

    perp_proj = fermi.project_pi(curve33, f_perp, eps, s_vals)
    assert np.max(np.abs(perp_proj)) <= 1e-9


def test_projection_matches_moment_expansion(curve33):
    """Pi of the inner residual equals the parity-reduced moment series
    -(1/c)(eps^3 m2 Tr h^3 + eps^5 m4 Tr h^5) up to higher order."""
    eps = 0.2
    mom = profile1d.profile_moments(2)
    frame = fermi.CurveFrame(curve33)
    s_vals = np.array([20.0, 28.0])

    def f(s, t):
        return fermi.inner_residual(curve33, np.full_like(t, s), t, eps,
                                    frame=frame)

    proj = fermi.project_pi(curve33, f, eps, s_vals)
    kp, k1, k2 = frame.curvatures(s_vals)
    tr3 = kp**3 + 3 * k1**3 + 3 * k2**3
    tr5 = kp**5 + 3 * k1**5 + 3 * k2**5
    expected = -(eps**3 * mom.m2k[0] * tr3 + eps**5 * mom.m2k[1] * tr5) / mom.c
    assert np.allclose(proj, expected, rtol=2e-3)


def test_projection_truncation_warning(curve33):
    with pytest.warns(UserWarning, match="tube"):
        fermi.project_pi(curve33, lambda s, t: np.ones_like(t), 0.25, [3.0])


def test_projected_residual_decay(curve33_long):
    scan = fermi.residual_decay_scan(curve33_long, 0.25, d_window=(3.0, 30.0))
    slope_sup, _, _ = minsurf.fit_decay_exponent(scan.d_gamma, scan.sup_inner,
                                                 (3.0, 30.0))
    slope_proj, _, _ = minsurf.fit_decay_exponent(scan.d_gamma, scan.proj_abs,
                                                  (3.0, 30.0))
    assert abs(slope_sup + 2.0) <= 0.2
    assert slope_proj <= -5.0


def test_dzeta_identity_and_roundtrip(small_grid_setup, curve33):
    grid, coords, eps = small_grid_setup
    S1, S2 = grid.S1, grid.S2
    smooth = acpde.ScalarField2D(grid, np.sin(0.8 * S1) * np.cos(0.6 * S2))

    unchanged = fermi.apply_dzeta(smooth, curve33, np.zeros_like(curve33.s),
                                  eps, coords=coords)
    assert np.array_equal(unchanged.values, smooth.values)

    amp = 1e-3
    zeta = amp * np.exp(-((curve33.s - 6.0) / 4.0) ** 2)
    fwd = fermi.apply_dzeta(smooth, curve33, zeta, eps, coords=coords)
    back = fermi.apply_dzeta(fwd, curve33, zeta, eps, direction="inverse",
                             coords=coords)
    dev = np.max(np.abs(back.values - smooth.values))
    assert dev <= 10.0 * (grid.h**2 + amp**2 * grid.h)


def test_dzeta_nonmonotone_error(small_grid_setup, curve33):
    grid, coords, eps = small_grid_setup
    field = acpde.ScalarField2D(grid, np.zeros(grid.shape))
    with pytest.raises(fermi.NonMonotoneShiftError):
        fermi.apply_dzeta(field, curve33, 0.1 * np.ones_like(curve33.s), eps,
                          coords=coords)


def test_dzeta_constant_shift_moves_zero_set(curve33):
    # Shallow cutoff exponent gives a monotone margin wide enough to
    # observe the shift against extraction error.
    eps, delta_star, shift = 0.125, 0.25, 2e-3
    grid = acpde.Grid2D(R=6.0, h=eps / 8.0, m=4)
    coords = fermi.grid_fermi_coords(grid, curve33)
    approx = fermi.build_approx_solution(grid, curve33, eps,
                                         delta_star=delta_star, coords=coords)
    moved = fermi.apply_dzeta(approx.field(), curve33,
                              shift * np.ones_like(curve33.s), eps,
                              delta_star=delta_star, direction="forward",
                              coords=coords)
    zero = np.vstack(acpde.zero_set_extract(moved))
    t, foot, _ = fermi.signed_distance(zero, curve33)
    core = (foot > 1.0) & (foot < 5.0)
    assert np.mean(t[core]) == pytest.approx(shift, rel=0.2)


def test_weighted_norm_weight_cancellation(curve33):
    w = curve33.d_gamma ** -2.0
    norm = fermi.weighted_norm(w, -2.0, 0.25, "curve", curve=curve33)
    assert norm.value == pytest.approx(1.0, abs=1e-12)
    ones = fermi.weighted_norm(np.ones_like(curve33.s), 0.0, 0.25, "curve",
                               curve=curve33)
    assert ones.value == pytest.approx(1.0, abs=1e-15)
    assert set(norm.derivative_seminorms) == {1, 2}


def test_weighted_norm_tube_eps_uniformity(curve33):
    grid = acpde.Grid2D(R=4.0, h=1.0 / 64.0, m=4)
    coords = fermi.grid_fermi_coords(grid, curve33)
    frame = fermi.CurveFrame(curve33)
    scaled = {}
    for eps in (0.25, 0.125):
        vals = np.zeros(coords.t.size)
        m = coords.valid
        vals[m] = fermi.inner_residual(curve33, coords.foot[m], coords.t[m],
                                       eps, frame=frame)
        norm = fermi.weighted_norm(vals, -2.0, eps, "tube", grid=grid,
                                   coords=coords)
        scaled[eps] = norm.value / eps**2
    ratio = scaled[0.25] / scaled[0.125]
    assert 0.5 <= ratio <= 2.0


def test_weighted_norm_ambient(small_grid_setup):
    grid, _, eps = small_grid_setup
    w = (1.0 + grid.S1**2 + grid.S2**2) ** -1.0
    norm = fermi.weighted_norm(w, -2.0, eps, "ambient", grid=grid)
    assert norm.value == pytest.approx(1.0, abs=1e-12)
