import numpy as np
import pytest

from phasecone.cone import (LinkSpec, characteristic_roots, classify_stability,
                            classify_stability_from_mu0, cone_spectrum,
                            link_eigenvalues, link_geometry)


def zonal_product_mu0(n1, n2, n_theta=160, modes=1):
    """Mesh oracle: lowest eigenvalue(s) of -(Laplace + (n-1)) on the link.

    Discretizes the zonal-zonal block of the product-sphere
    Laplace-Beltrami operator: each factor reduces to the 1D operator
    (sin th)^(1-d) d/dth((sin th)^(d-1) d/dth) on [0, pi], assembled in
    finite-volume form so the constant mode is represented exactly to
    roundoff.  The lowest modes of the full operator are zonal x zonal,
    so this is a faithful (2%-accurate) oracle for them.
    """
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    n = n1 + n2 + 1
    rho = {0: np.sqrt(n1 / (n - 1)), 1: np.sqrt(n2 / (n - 1))}
    ops = []
    for axis, d in enumerate((n1, n2)):
        h = np.pi / n_theta
        th = (np.arange(n_theta) + 0.5) * h   # cell centers
        faces = np.arange(1, n_theta) * h
        a = np.sin(faces) ** (d - 1)
        V = np.empty(n_theta)
        for i in range(n_theta):
            xs = np.linspace(i * h, (i + 1) * h, 9)
            V[i] = np.trapezoid(np.sin(xs) ** (d - 1), xs) / h
        c_up = np.concatenate([a / (h * h * V[:-1]), [0.0]])
        c_lo = np.concatenate([[0.0], a / (h * h * V[1:])])
        L = sp.diags([c_lo[1:], -(c_up + c_lo), c_up[:-1]], [-1, 0, 1])
        ops.append((L / rho[axis] ** 2, sp.diags(V)))
    eye = [sp.identity(n_theta) for _ in range(2)]
    L2d = sp.kron(ops[0][0], eye[1]) + sp.kron(eye[0], ops[1][0])
    W = sp.kron(ops[0][1], ops[1][1])
    A = -(W @ L2d) - (n - 1) * W
    A = ((A + A.T) * 0.5).tocsc()
    vals = spla.eigsh(A, k=modes, M=W.tocsc(), sigma=-(n - 1) - 1.0,
                      which="LM", return_eigenvectors=False)
    return np.sort(vals)


def test_link_geometry_examples():
    geo = link_geometry(LinkSpec(3, 3))
    assert geo.rho1 == pytest.approx(1 / np.sqrt(2), abs=1e-15)
    assert geo.rho2 == pytest.approx(1 / np.sqrt(2), abs=1e-15)
    assert geo.normA2 == pytest.approx(6.0, abs=1e-12)

    geo11 = link_geometry(LinkSpec(1, 1))
    assert geo11.rho1 == pytest.approx(1 / np.sqrt(2), abs=1e-15)
    assert geo11.traceH == pytest.approx(0.0, abs=1e-14)

    # Direct-substitution oracle for an asymmetric link.
    geo24 = link_geometry(LinkSpec(2, 4))
    rho1, rho2 = np.sqrt(2 / 6), np.sqrt(4 / 6)
    assert geo24.rho1 == pytest.approx(rho1, abs=1e-15)
    assert geo24.traceH == pytest.approx(2 * rho2 / rho1 - 4 * rho1 / rho2,
                                         abs=1e-14)


def test_link_radii_on_unit_sphere():
    for n1 in range(1, 7):
        for n2 in range(1, 7):
            geo = link_geometry(LinkSpec(n1, n2))
            assert geo.rho1**2 + geo.rho2**2 == pytest.approx(1.0, abs=1e-14)
            assert geo.normA2 == pytest.approx(n1 + n2, abs=1e-12)


def test_invalid_spec_rejected():
    with pytest.raises(ValueError):
        LinkSpec(0, 3)


def test_mu0_against_mesh_oracle():
    for n1, n2 in ((3, 3), (1, 1)):
        mu0 = link_eigenvalues(LinkSpec(n1, n2), 1)[0][0]
        oracle = zonal_product_mu0(n1, n2)[0]
        assert mu0 == pytest.approx(-(n1 + n2), abs=1e-12)
        assert abs(oracle - mu0) <= 0.02 * abs(mu0)


def test_mu0_nonpositive_everywhere():
    for n1 in range(1, 6):
        for n2 in range(1, 6):
            assert link_eigenvalues(LinkSpec(n1, n2), 1)[0][0] <= 0.0


def test_eigenvalue_list_structure():
    modes = link_eigenvalues(LinkSpec(3, 3), 6)
    mus = [m[0] for m in modes]
    assert mus == sorted(mus)
    # Constant mode: multiplicity 1, degrees (0, 0).
    assert modes[0][1:] == (0, 0, 1)
    # First excited: degree-1 harmonics on one S^3 factor, dimension 4,
    # lexicographic tie-break puts (0, 1) before (1, 0).
    assert modes[1][:4] == (pytest.approx(0.0, abs=1e-12), 0, 1, 4)
    assert modes[2][:4] == (pytest.approx(0.0, abs=1e-12), 1, 0, 4)


def test_indicial_roots_dimension_eight():
    cs = cone_spectrum(LinkSpec(3, 3), 4)
    assert cs.modes[0].nu_plus == pytest.approx(-2.0, abs=1e-12)
    assert cs.modes[0].nu_minus == pytest.approx(-3.0, abs=1e-12)
    assert not cs.modes[0].complex_pair
    assert cs.stability == "strictly_stable"


def test_indicial_roots_low_dimensions_collapse():
    for n1, n2 in ((1, 1), (1, 2), (2, 2), (1, 4), (2, 3)):
        spec = LinkSpec(n1, n2)
        n = spec.n
        assert n <= 6
        m0 = cone_spectrum(spec, 1).modes[0]
        assert m0.complex_pair
        assert m0.nu_plus == pytest.approx((2 - n) / 2.0, abs=1e-12)
        assert m0.nu_minus == pytest.approx((2 - n) / 2.0, abs=1e-12)


def test_indicial_root_windows_high_dimensions():
    for n1 in range(3, 9):
        for n2 in range(n1, 9):
            spec = LinkSpec(n1, n2)
            if spec.n < 7:
                continue
            m0 = cone_spectrum(spec, 1).modes[0]
            n = spec.n
            if n == 7:
                assert (m0.nu_plus, m0.nu_minus) == (-2.0, -3.0)
            else:
                assert -2.0 <= m0.nu_plus < -1.0
                assert 3 - n < m0.nu_minus <= 4 - n


def test_characteristic_equation_residual():
    for n1, n2 in ((3, 3), (2, 4), (4, 5), (1, 1)):
        spec = LinkSpec(n1, n2)
        n = spec.n
        for mode in cone_spectrum(spec, 8).modes:
            for g in (mode.gamma_plus, mode.gamma_minus):
                assert abs(g * g + (n - 2) * g - mode.mu) < 1e-12


def test_repeated_root_flag_and_boundary_classification():
    n = 7
    mu_crit = -(((n - 2) / 2.0) ** 2)
    gp, gm, nup, num, cplx, rep = characteristic_roots(mu_crit, n)
    assert rep and not cplx
    assert nup == num == pytest.approx((2 - n) / 2.0, abs=1e-15)
    assert classify_stability_from_mu0(mu_crit, n) == "stable"
    assert classify_stability_from_mu0(mu_crit + 1e-9, n) == "strictly_stable"
    assert classify_stability_from_mu0(mu_crit - 1e-9, n) == "unstable"


def test_strict_stability_iff_discriminant_positive():
    for n1 in range(1, 8):
        for n2 in range(1, 8):
            spec = LinkSpec(n1, n2)
            n = spec.n
            strict = classify_stability(spec) == "strictly_stable"
            assert strict == (n * n - 8 * n + 8 > 0)
            # Equivalent formulation: the lowest-mode roots split.
            m0 = cone_spectrum(spec, 1).modes[0]
            assert strict == (m0.nu_plus != m0.nu_minus)


def test_classification_examples():
    assert classify_stability(LinkSpec(3, 3)) == "strictly_stable"
    assert classify_stability(LinkSpec(1, 1)) == "unstable"
