import numpy as np
import pytest
import scipy.sparse as sp

from phasecone import acpde, fermi, profile1d


def strip_profile_field(grid, eps, center):
    """Flat interface along s2 (m = 1 strip model)."""
    return acpde.ScalarField2D(
        grid, np.broadcast_to(
            profile1d.profile((grid.s[None, :] - center) / eps),
            grid.shape).copy())


def test_grid_validation():
    with pytest.raises(ValueError):
        acpde.Grid2D(R=1.0, h=0.3, m=4)       # R/h not integral
    with pytest.raises(ValueError):
        acpde.Grid2D(R=1.0, h=0.25, m=0)
    grid = acpde.Grid2D(R=2.0, h=0.25, m=4)
    with pytest.raises(acpde.ResolutionError):
        grid.check_resolution(1.0)            # h > eps/8


def test_field_shape_validation():
    grid = acpde.Grid2D(R=2.0, h=0.25, m=4)
    with pytest.raises(ValueError):
        acpde.ScalarField2D(grid, np.zeros((3, 3)))


def test_jacobian_reaction_diagonal_at_constant_one():
    grid = acpde.Grid2D(R=2.0, h=1.0 / 16.0, m=4)
    eps = 0.5
    u = np.ones(grid.shape)
    J = acpde.jacobian(grid, eps, u)
    L = acpde.laplacian_matrix(grid) * eps**2
    reaction = (J - L).diagonal()
    assert np.allclose(reaction, -2.0, atol=1e-14)


def test_reduced_laplacian_matches_radial_oracle():
    """Delta_red on f(r) equals f'' + (2m-1) f'/r for the 2m-dim radial
    Laplacian (1D oracle, second-order in h)."""
    m = 4
    errs = {}
    for h in (1.0 / 32.0, 1.0 / 64.0):
        grid = acpde.Grid2D(R=4.0, h=h, m=m)
        r = np.hypot(grid.S1, grid.S2)
        f = np.exp(-0.5 * r**2)
        exact = (r**2 - 1.0) * f + (2 * m - 1) * (-r * f) / np.maximum(r, 1e-300)
        exact = np.where(r == 0.0, -2.0 * m, exact)  # limit at the origin
        got = acpde.apply_reduced_laplacian(grid, f)
        inner = (grid.S1 < 3.0) & (grid.S2 < 3.0)
        errs[h] = np.max(np.abs(got - exact)[inner])
    assert errs[1.0 / 32.0] <= 5e-3
    ratio = errs[1.0 / 32.0] / errs[1.0 / 64.0]
    assert 3.0 <= ratio <= 5.0


def test_weighted_symmetry_exact():
    grid = acpde.Grid2D(R=2.0, h=1.0 / 16.0, m=4)
    W = acpde.weights(grid).ravel()
    A = sp.diags(W) @ acpde.laplacian_matrix(grid)
    asym = (A - A.T)
    assert np.max(np.abs(asym.data)) if asym.nnz else 0.0 <= 1e-14


def test_newton_constant_state_is_fixed_point():
    grid = acpde.Grid2D(R=2.0, h=1.0 / 16.0, m=4)
    init = acpde.ScalarField2D(grid, np.ones(grid.shape))
    sol, rep = acpde.newton_solve(grid, 0.5, init, tol=1e-12)
    assert rep.converged
    assert rep.iterations <= 1
    assert np.allclose(sol.values, 1.0, atol=1e-12)


def test_newton_rejects_wild_initial_state():
    grid = acpde.Grid2D(R=2.0, h=1.0 / 16.0, m=4)
    init = acpde.ScalarField2D(grid, 2.0 * np.ones(grid.shape))
    with pytest.raises(ValueError):
        acpde.newton_solve(grid, 0.5, init)


def test_newton_flat_interface_strip_reproduces_profile():
    """m = 1 slice: the 2D solve must recover the 1D heteroclinic to
    O(h^2); the convergence ratio under grid halving is the oracle.
    The interface sits far enough from the axis that the Neumann
    mismatch of the manufactured profile is negligible."""
    eps, center = 0.25, 2.0
    errors = {}
    for h in (eps / 8.0, eps / 16.0):
        grid = acpde.Grid2D(R=4.0, h=h, m=1)
        exact = strip_profile_field(grid, eps, center)
        rng = np.random.default_rng(0)
        nb = grid.n_cells
        init = exact.copy()
        bump = 0.05 * np.sin(3 * grid.S1[:nb, :nb]) \
            * np.sin(2.0 * np.pi * grid.S2[:nb, :nb] / grid.R)
        init.values[:nb, :nb] += bump
        sol, rep = acpde.newton_solve(grid, eps, init, tol=1e-10)
        assert rep.converged
        errors[h] = np.max(np.abs(sol.values - exact.values))
    assert errors[eps / 8.0] <= 5e-3
    ratio = errors[eps / 8.0] / errors[eps / 16.0]
    assert 3.0 <= ratio <= 5.0


def test_newton_residual_monotone_and_maximum_principle(curve33):
    eps = 0.25
    grid = acpde.Grid2D(R=6.0, h=eps / 8.0, m=4)
    approx = fermi.build_approx_solution(grid, curve33, eps)
    sol, rep = acpde.newton_solve(grid, eps, approx.field(), tol=1e-11)
    assert rep.converged
    assert rep.final_sup_residual < 1e-11
    norms = rep.residual_norms
    assert all(b < a for a, b in zip(norms, norms[1:]))
    assert sol.max_principle_defect() <= 1e-6
    # Jacobian consistency: directional finite differences of the
    # residual match the assembled Jacobian action.
    nb = grid.n_cells
    rng = np.random.default_rng(1)
    J = acpde.jacobian(grid, eps, sol.values)
    for _ in range(20):
        v = rng.standard_normal((nb, nb))
        v /= np.max(np.abs(v))
        tau = 1e-6
        up = sol.values.copy()
        up[:nb, :nb] += tau * v
        dn = sol.values.copy()
        dn[:nb, :nb] -= tau * v
        fd = (acpde.residual(grid, eps, up)
              - acpde.residual(grid, eps, dn))[:nb, :nb] / (2.0 * tau)
        jv = (J @ v.ravel()).reshape(nb, nb)
        denom = np.max(np.abs(jv))
        assert np.max(np.abs(fd - jv)) / denom <= 1e-6
    # Axis symmetry in the smooth-extension sense: the one-sided
    # derivative at each axis vanishes to O(h^2).
    d1 = np.abs(-3 * sol.values[0, :] + 4 * sol.values[1, :]
                - sol.values[2, :]) / (2 * grid.h)
    d2 = np.abs(-3 * sol.values[:, 0] + 4 * sol.values[:, 1]
                - sol.values[:, 2]) / (2 * grid.h)
    scale = np.max(np.abs(sol.values)) / eps**2
    assert max(d1.max(), d2.max()) <= 0.5 * grid.h**2 * scale


def test_grid_convergence_order(curve33):
    # At this eps the grafting seam tail at the Dirichlet ring (2e-5)
    # sits well under the interior discretization error.
    eps = 0.25
    sols = {}
    for h in (eps / 8.0, eps / 16.0, eps / 32.0):
        grid = acpde.Grid2D(R=4.0, h=h, m=4)
        approx = fermi.build_approx_solution(grid, curve33, eps)
        sol, _ = acpde.newton_solve(grid, eps, approx.field(), tol=1e-10)
        sols[h] = sol.values
    e1 = np.max(np.abs(sols[eps / 8.0][::1, ::1]
                       - sols[eps / 16.0][::2, ::2]))
    e2 = np.max(np.abs(sols[eps / 16.0][::1, ::1]
                       - sols[eps / 32.0][::2, ::2]))
    order = np.log2(e1 / e2)
    assert order >= 1.8


def test_pde_residual_prediction_in_tube(curve33):
    """Away from the cutoff seams the discrete residual of the glued
    approximation tracks -eps H_t u1'(t/eps) to within a factor of two
    plus the quadratic remainder scale."""
    eps = 0.25
    grid = acpde.Grid2D(R=6.0, h=eps / 8.0, m=4)
    coords = fermi.grid_fermi_coords(grid, curve33)
    approx = fermi.build_approx_solution(grid, curve33, eps, coords=coords)
    res, _, _ = acpde.pde_residual(grid, eps, approx.field())
    frame = fermi.CurveFrame(curve33)
    core = (coords.valid & (np.abs(coords.t) <= 0.1 * coords.d_gamma)
            & (coords.d_gamma > 2.0) & (coords.d_gamma < 5.0))
    idx = np.flatnonzero(core)[::7]
    pred = fermi.inner_residual(curve33, coords.foot[idx], coords.t[idx],
                                eps, frame=frame)
    got = res.values.ravel()[idx]
    slack = 2.0 * eps**2 / coords.d_gamma[idx] ** 2 + 40.0 * grid.h**2 * eps**2
    assert np.all(np.abs(got - pred) <= np.abs(pred) + slack)


def test_zero_set_synthetic_diagonal():
    grid = acpde.Grid2D(R=2.0, h=1.0 / 16.0, m=1)
    u = acpde.ScalarField2D(grid, grid.S1 - grid.S2)
    polys = acpde.zero_set_extract(u)
    assert len(polys) == 1
    z = polys[0]
    assert np.max(np.abs(z[:, 0] - z[:, 1])) <= 1e-12


def test_zero_set_requires_sign_change():
    grid = acpde.Grid2D(R=2.0, h=1.0 / 16.0, m=1)
    u = acpde.ScalarField2D(grid, np.ones(grid.shape))
    with pytest.raises(acpde.NoZeroCrossingError):
        acpde.zero_set_extract(u)


def test_zero_set_of_approximation_lies_on_curve(curve33):
    eps = 0.25
    grid = acpde.Grid2D(R=6.0, h=eps / 8.0, m=4)
    approx = fermi.build_approx_solution(grid, curve33, eps)
    polys = acpde.zero_set_extract(approx.field())
    dev = acpde.zero_set_deviation(np.vstack(polys), curve33, d_max=5.0)
    # u1(0) = 0 on the curve: deviation is pure crossing interpolation.
    assert dev.max_dev <= 2.0 * grid.h**2 / eps
