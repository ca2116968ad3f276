"""Stability certificate: spectrum, dilation derivative, quadratic form.

The linearization ``L = -(eps^2 Delta_red + 1 - 3u^2)`` is symmetric in
the inner product weighted by ``(s1 s2)**(m-1)``; its lowest eigenvalues
are computed by shift-invert Lanczos on the weighted generalized
problem.  The candidate positive kernel element ``phi`` comes from
central differencing of solutions built over dilated copies of the
generating curve; its positivity plus a small kernel residual is the
desk-scale shadow of the monotone-implies-stable argument, checked
directly on randomized compactly supported test functions through the
logarithmic-substitution identity

    int (eps^2 |grad psi|^2 - psi^2 + 3 u^2 psi^2)
        = eps^2 int |grad psi - psi grad(log phi)|^2      (when L phi = 0).

Far from the interface the two dilated solutions coincide with +-1 to
machine precision, so their difference snaps to exactly zero in double
precision; positivity is therefore certified on the nodes where the
difference is resolved above the roundoff floor, and the unresolved
fraction is reported alongside.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import acpde, fermi
from .acpde import Grid2D, ScalarField2D
from .minsurf import GeneratingCurve

#: Differences below this multiple of ulp(1) cannot testify about sign.
RESOLUTION_FLOOR = 10 * np.finfo(float).eps


class StepTooLargeError(RuntimeError):
    """The two dilated solves are structurally different."""


def weighted_operator(grid: Grid2D, eps: float, u):
    """Symmetrized ``A = W L`` and mass ``M = diag(W)`` over the unknowns."""
    uv = u.values if isinstance(u, ScalarField2D) else np.asarray(u, dtype=float)
    nb = grid.n_cells
    W = acpde.weights(grid).ravel()
    J = acpde.jacobian(grid, eps, uv)
    A = -sp.diags(W) @ J
    A = (A + A.T) * 0.5  # exact up to roundoff; enforce symmetry bitwise
    return A.tocsc(), sp.diags(W).tocsc()


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    eigenfields: list
    orthonormality_defect: float
    k: int
    sigma: float


def linearization_spectrum(grid: Grid2D, eps: float, u, k: int = 6,
                           sigma: float = -0.5,
                           residual_tol: float = 1e-8) -> SpectrumReport:
    """Lowest ``k`` eigenvalues of ``L`` in the weighted inner product.

    Requires a converged state (`pde_residual` below ``residual_tol``).
    Dirichlet on the outer ring, Neumann on the axes (built into the
    finite-volume stencil).
    """
    _, sup, _ = acpde.pde_residual(grid, eps, u)
    if sup > residual_tol:
        raise ValueError(f"state not converged: residual {sup:.3e}")
    A, M = weighted_operator(grid, eps, u)
    vals, vecs = spla.eigsh(A, k=k, M=M, sigma=sigma, which="LM")
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    gram = vecs.T @ (M @ vecs)
    defect = float(np.max(np.abs(gram - np.eye(k))))
    nb = grid.n_cells
    fields = []
    for j in range(k):
        full = np.zeros(grid.shape)
        full[:nb, :nb] = vecs[:, j].reshape(nb, nb)
        fields.append(ScalarField2D(grid, full))
    return SpectrumReport(eigenvalues=vals, eigenfields=fields,
                          orthonormality_defect=defect, k=k, sigma=sigma)


@dataclass
class DilationReport:
    phi: ScalarField2D
    positivity: bool
    kernel_residual: float
    min_resolved_phi: float
    unresolved_fraction: float
    lambda_step: float
    newton_reports: tuple


def phi_from_dilation(curve: GeneratingCurve, grid: Grid2D, eps: float,
                      lambda_step: float = 1e-3, u0=None,
                      delta_star: float = fermi.DEFAULT_DELTA_STAR,
                      newton_tol: float = 1e-11) -> DilationReport:
    """Dilation derivative by central differencing over scaled curves.

    Solves the reduced equation seeded over ``(1 +- lambda_step) Gamma``
    and forms ``phi = (u_plus - u_minus) / (2 lambda_step)``.  The
    positivity verdict covers every interior node where the difference is
    resolved above the roundoff floor; the kernel residual applies the
    Jacobian at the unscaled solution ``u0`` (solved here when absent).
    """
    solves = {}
    zero_components = {}
    reports = []
    for sgn in (+1.0, -1.0):
        scaled = curve.scaled(1.0 + sgn * lambda_step)
        approx = fermi.build_approx_solution(grid, scaled, eps,
                                             delta_star=delta_star)
        sol, rep = acpde.newton_solve(grid, eps, approx.field(),
                                      tol=newton_tol)
        solves[sgn] = sol.values
        reports.append(rep)
        zero_components[sgn] = len(acpde.zero_set_extract(sol))
    if zero_components[+1.0] != zero_components[-1.0]:
        raise StepTooLargeError(
            f"zero-set component count changed between the dilated solves: "
            f"{zero_components[-1.0]} vs {zero_components[+1.0]}")

    diff = solves[+1.0] - solves[-1.0]
    phi = diff / (2.0 * lambda_step)
    nb = grid.n_cells
    resolved = np.abs(diff[:nb, :nb]) > RESOLUTION_FLOOR
    unresolved_fraction = 1.0 - float(np.mean(resolved))
    if np.any(resolved):
        min_resolved = float(np.min(phi[:nb, :nb][resolved]))
    else:
        min_resolved = 0.0
    positivity = bool(np.any(resolved) and min_resolved > 0.0)

    if u0 is None:
        base = fermi.build_approx_solution(grid, curve, eps,
                                           delta_star=delta_star)
        u0, _ = acpde.newton_solve(grid, eps, base.field(), tol=newton_tol)
    u0v = u0.values if isinstance(u0, ScalarField2D) else np.asarray(u0)
    lin = acpde.assemble_operator(grid, eps, u0v)
    kres = lin.apply(phi)
    kernel_residual = float(np.max(np.abs(kres[:nb, :nb]))
                            / np.max(np.abs(phi)))
    return DilationReport(phi=ScalarField2D(grid, phi), positivity=positivity,
                          kernel_residual=kernel_residual,
                          min_resolved_phi=min_resolved,
                          unresolved_fraction=unresolved_fraction,
                          lambda_step=lambda_step,
                          newton_reports=tuple(reports))


# ---------------------------------------------------------------------------
# Quadratic form trials
# ---------------------------------------------------------------------------

def _bump(r):
    """C^2 compactly supported radial bump: 1 at 0, 0 for r >= 1."""
    return 1.0 - fermi.smootherstep(r)


def random_test_function(grid: Grid2D, eps: float, rng,
                         curve: GeneratingCurve | None = None,
                         max_bumps: int = 5, center_d_max: float = None):
    """Sum of up to ``max_bumps`` radial bumps, compactly supported.

    Centers are drawn near the interface (foot distance at most
    ``center_d_max``, offset inside the validity tube when a curve is
    given); widths lie in ``[2 eps, 10 eps]``.
    """
    if center_d_max is None:
        center_d_max = grid.R / 2.0
    n_b = int(rng.integers(1, max_bumps + 1))
    psi = np.zeros(grid.shape)
    S1, S2 = grid.S1, grid.S2
    frame = fermi.CurveFrame(curve) if curve is not None else None
    for _ in range(n_b):
        w = float(rng.uniform(2.0 * eps, 10.0 * eps))
        for _attempt in range(100):
            if frame is not None:
                s_c = float(rng.uniform(0.0,
                                        np.sqrt(max(center_d_max**2 - 1, 0.5))))
                t_c = float(rng.uniform(-0.2, 0.2)) * np.sqrt(1 + s_c**2)
                cx, cy = frame.point_on_normal(s_c, t_c)
            else:
                cx, cy = rng.uniform(0.0, center_d_max, size=2)
            if (cx - w > grid.h and cy - w > grid.h
                    and cx + w < grid.R - grid.h and cy + w < grid.R - grid.h):
                break
        amp = float(rng.uniform(0.5, 1.0)) * (1 if rng.random() < 0.5 else -1)
        r = np.hypot(S1 - cx, S2 - cy) / w
        psi += amp * _bump(r)
    return psi


@dataclass(frozen=True)
class QTrial:
    q_value: float
    rhs_value: float
    identity_gap: float
    norm2: float


def _face_quadratures(grid: Grid2D):
    c_up, _, V = acpde.fv_coefficients(grid)
    nb = grid.n_cells
    s = grid.s[:nb]
    a_face = (s + 0.5 * grid.h) ** (grid.m - 1)   # at faces i+1/2, i < nb
    return a_face, V


def quadratic_form(grid: Grid2D, eps: float, u, psi):
    """Discrete second-variation form by weighted face quadrature.

    Summation by parts makes this identical (to roundoff) to
    ``psi^T W L psi`` for ``psi`` vanishing on the Dirichlet ring.
    """
    uv = u.values if isinstance(u, ScalarField2D) else np.asarray(u)
    a_face, V = _face_quadratures(grid)
    h = grid.h
    n = grid.shape[0]
    d1 = (psi[1:, :] - psi[:-1, :]) / h          # faces between rows
    d2 = (psi[:, 1:] - psi[:, :-1]) / h
    w_face1 = np.outer(a_face, V) * h * h        # (face i+1/2, node j)
    w_face2 = np.outer(V, a_face) * h * h
    grad_term = (np.sum(w_face1 * d1[:, :n - 1] ** 2)
                 + np.sum(w_face2 * d2[:n - 1, :] ** 2))
    W = np.outer(V, V) * h * h
    pot_term = np.sum(W * (1.0 - 3.0 * uv[:n - 1, :n - 1] ** 2)
                      * psi[:n - 1, :n - 1] ** 2)
    return eps * eps * grad_term - pot_term


def quadratic_form_check(grid: Grid2D, eps: float, u, phi, trials: int = 100,
                         seed: int = 42, curve: GeneratingCurve | None = None):
    """Randomized trials of the stability inequality and the log identity.

    For each random ``psi``, returns ``Q(psi)``, the right-hand side
    ``eps^2 int |grad psi - psi grad(log phi)|^2``, their relative gap and
    the weighted norm ``int psi^2``.  ``phi`` must be positive wherever
    resolved; unresolved (snapped-to-zero) values are floored before
    taking the logarithm, which only affects faces outside every bump
    support.
    """
    phiv = phi.values if isinstance(phi, ScalarField2D) else np.asarray(phi)
    uv = u.values if isinstance(u, ScalarField2D) else np.asarray(u)
    resolved = np.abs(phiv) > RESOLUTION_FLOOR / 2e-3
    if np.any(phiv[resolved] <= 0.0):
        raise ValueError("phi must be positive on resolved nodes")
    floor = np.min(phiv[resolved & (phiv > 0)])
    logphi = np.log(np.maximum(phiv, floor * 1e-30))

    a_face, V = _face_quadratures(grid)
    h = grid.h
    n = grid.shape[0]
    w_face1 = np.outer(a_face, V) * h * h
    w_face2 = np.outer(V, a_face) * h * h
    W = np.outer(V, V) * h * h

    rng = np.random.default_rng(seed)
    out = []
    for _ in range(trials):
        psi = random_test_function(grid, eps, rng, curve=curve)
        q = quadratic_form(grid, eps, uv, psi)
        dpsi1 = (psi[1:, :] - psi[:-1, :]) / h
        dpsi2 = (psi[:, 1:] - psi[:, :-1]) / h
        dl1 = (logphi[1:, :] - logphi[:-1, :]) / h
        dl2 = (logphi[:, 1:] - logphi[:, :-1]) / h
        pf1 = 0.5 * (psi[1:, :] + psi[:-1, :])
        pf2 = 0.5 * (psi[:, 1:] + psi[:, :-1])
        rhs = eps * eps * (
            np.sum(w_face1 * (dpsi1 - pf1 * dl1)[:, :n - 1] ** 2)
            + np.sum(w_face2 * (dpsi2 - pf2 * dl2)[:n - 1, :] ** 2))
        norm2 = float(np.sum(W * psi[:n - 1, :n - 1] ** 2))
        gap = abs(q - rhs) / max(abs(rhs), 1e-300)
        out.append(QTrial(q_value=float(q), rhs_value=float(rhs),
                          identity_gap=float(gap), norm2=norm2))
    return out
