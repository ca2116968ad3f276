"""Reduced Allen-Cahn equation on the quadrant: grid, Newton solve, zero set.

``O(m) x O(m)``-invariant functions on ``R^{2m}`` reduce to the quadrant
coordinates ``(s1, s2) = (|x|, |y|)`` with

    Delta_red = d11 + d22 + (m - 1) (d1/s1 + d2/s2).

The discretization is the finite-volume form of the divergence identity
``Delta_red u = w^{-1} div(w grad u)`` with ``w = (s1 s2)**(m-1)``: fluxes
use exact face weights and cells use exact volume integrals, which makes
the matrix symmetric in the weighted inner product and gives the correct
axis limit (equivalent to ghost-node reflection with the L'Hopital
replacement of ``(m-1)/s * d`` by ``(m-1) * d^2`` at ``s = 0``).  The
outer boundary ``s_i = R`` is Dirichlet.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class ResolutionError(ValueError):
    """Grid too coarse for the requested interface width."""


class NewtonDivergenceError(RuntimeError):
    """Damped Newton failed to reduce the residual."""

    def __init__(self, message, field=None, report=None):
        super().__init__(message)
        self.field = field
        self.report = report


class NoZeroCrossingError(ValueError):
    """Field has no sign change to extract."""


@dataclass(frozen=True)
class Grid2D:
    """Uniform tensor grid on ``[0, R]^2`` with symmetry multiplicity m."""

    R: float
    h: float
    m: int

    def __post_init__(self):
        if self.h <= 0 or self.R <= 0:
            raise ValueError("R and h must be positive")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        ratio = self.R / self.h
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(f"R/h = {ratio} must be an integer")

    @property
    def n_cells(self) -> int:
        return int(round(self.R / self.h))

    @property
    def s(self) -> np.ndarray:
        return self.h * np.arange(self.n_cells + 1)

    @property
    def shape(self):
        n = self.n_cells + 1
        return (n, n)

    @property
    def S1(self) -> np.ndarray:
        return np.broadcast_to(self.s[:, None], self.shape)

    @property
    def S2(self) -> np.ndarray:
        return np.broadcast_to(self.s[None, :], self.shape)

    def check_resolution(self, eps: float):
        if self.h > eps / 8.0 + 1e-12:
            raise ResolutionError(
                f"h = {self.h} exceeds eps/8 = {eps / 8.0}; refine the grid")


@dataclass
class ScalarField2D:
    """Nodal values on a :class:`Grid2D` (row i is s1, column j is s2)."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError("values shape does not match grid")

    def copy(self) -> "ScalarField2D":
        return ScalarField2D(self.grid, self.values.copy())

    def max_principle_defect(self) -> float:
        """How far ``|u|`` exceeds 1 (should be <= ~1e-6 for solutions)."""
        return float(np.max(np.abs(self.values)) - 1.0)


def fv_coefficients(grid: Grid2D):
    """Per-direction FV data ``(c_up, c_lo, V)`` for the radial operator.

    ``(L u)_i = c_up[i] (u[i+1] - u[i]) + c_lo[i] (u[i-1] - u[i])`` for the
    1D operator ``s^{1-m} (s^{m-1} u')'``; ``V`` are the cell-averaged
    weights making ``diag(V) L`` symmetric.
    """
    m = grid.m
    h = grid.h
    nb = grid.n_cells
    i = np.arange(nb)
    s = grid.s[:nb]
    a_up = (s + 0.5 * h) ** (m - 1)
    a_lo = np.where(i > 0, (s - 0.5 * h) ** (m - 1), 0.0)
    upper = (s + 0.5 * h) ** m
    lower = np.where(i > 0, (s - 0.5 * h) ** m, 0.0)
    V = (upper - lower) / (m * h)
    c_up = a_up / (h * h * V)
    c_lo = a_lo / (h * h * V)
    return c_up, c_lo, V


def weights(grid: Grid2D) -> np.ndarray:
    """Quadrature weights ``V_i V_j h^2`` over the non-Dirichlet nodes."""
    _, _, V = fv_coefficients(grid)
    return np.outer(V, V) * grid.h**2


def apply_reduced_laplacian(grid: Grid2D, u: np.ndarray) -> np.ndarray:
    """Apply the FV ``Delta_red`` to full-grid values; Dirichlet rows are 0."""
    c_up, c_lo, _ = fv_coefficients(grid)
    nb = grid.n_cells
    out = np.zeros_like(u)
    out[:nb, :] += c_up[:, None] * (u[1:, :] - u[:nb, :])
    out[1:nb, :] += c_lo[1:, None] * (u[:nb - 1, :] - u[1:nb, :])
    out[:, :nb] += c_up[None, :] * (u[:, 1:] - u[:, :nb])
    out[:, 1:nb] += c_lo[None, 1:] * (u[:, :nb - 1] - u[:, 1:nb])
    out[nb, :] = 0.0
    out[:, nb] = 0.0
    return out


def laplacian_matrix(grid: Grid2D) -> sp.csr_matrix:
    """Sparse FV ``Delta_red`` over the unknown (non-Dirichlet) nodes."""
    c_up, c_lo, _ = fv_coefficients(grid)
    nb = grid.n_cells
    diag = -(c_up + c_lo)
    K = sp.diags([c_lo[1:], diag, c_up[:-1]], [-1, 0, 1], format="csr")
    eye = sp.identity(nb, format="csr")
    return (sp.kron(K, eye) + sp.kron(eye, K)).tocsr()


def residual(grid: Grid2D, eps: float, u: np.ndarray) -> np.ndarray:
    """Pointwise residual ``eps^2 Delta_red u + u - u^3`` (0 on Dirichlet)."""
    nb = grid.n_cells
    out = eps * eps * apply_reduced_laplacian(grid, u)
    out[:nb, :nb] += u[:nb, :nb] - u[:nb, :nb] ** 3
    return out


def jacobian(grid: Grid2D, eps: float, u: np.ndarray) -> sp.csr_matrix:
    """Jacobian ``eps^2 Delta_red + diag(1 - 3 u^2)`` over the unknowns."""
    nb = grid.n_cells
    L = laplacian_matrix(grid)
    diag = 1.0 - 3.0 * u[:nb, :nb].ravel() ** 2
    return (eps * eps * L + sp.diags(diag)).tocsr()


@dataclass
class OperatorHandle:
    """Assembled linear operator: sparse matrix plus full-grid application."""

    grid: Grid2D
    eps: float
    matrix: sp.csr_matrix
    linearization_state: np.ndarray | None

    def apply(self, u: np.ndarray) -> np.ndarray:
        out = self.eps**2 * apply_reduced_laplacian(self.grid, u)
        if self.linearization_state is not None:
            nb = self.grid.n_cells
            w = 1.0 - 3.0 * self.linearization_state[:nb, :nb] ** 2
            out[:nb, :nb] += w * u[:nb, :nb]
        return out


def assemble_operator(grid: Grid2D, eps: float, u=None) -> OperatorHandle:
    """Assemble ``eps^2 Delta_red`` (``u=None``) or the Jacobian at ``u``."""
    grid.check_resolution(eps)
    if u is None:
        return OperatorHandle(grid, eps, (eps**2 * laplacian_matrix(grid)).tocsr(),
                              None)
    uv = u.values if isinstance(u, ScalarField2D) else np.asarray(u, dtype=float)
    return OperatorHandle(grid, eps, jacobian(grid, eps, uv), uv)


@dataclass
class NewtonReport:
    iterations: int
    residual_norms: list
    final_sup_residual: float
    linear_stats: list
    converged: bool
    wall_time: float = 0.0


class _LinearSolver:
    """Direct LU for moderate systems; frozen-LU-preconditioned GMRES above.

    The Jacobian changes only through its diagonal between Newton steps,
    so a factorization of an earlier Jacobian is an excellent
    preconditioner; it is refreshed when GMRES stops converging fast.
    """

    def __init__(self, size: int, mode: str = "auto",
                 direct_limit: int = 350_000):
        if mode == "auto":
            mode = "direct" if size <= direct_limit else "frozen-lu"
        self.mode = mode
        self._lu = None

    def solve(self, A: sp.csr_matrix, b: np.ndarray):
        if self.mode == "direct":
            return spla.splu(A.tocsc()).solve(b), {"method": "splu"}
        if self._lu is None:
            self._lu = spla.splu(A.tocsc())
            return self._lu.solve(b), {"method": "splu(frozen)"}
        M = spla.LinearOperator(A.shape, matvec=self._lu.solve)
        n_it = 0

        def count(_):
            nonlocal n_it
            n_it += 1

        x, info = spla.gmres(A, b, M=M, rtol=1e-12, atol=0.0, restart=50,
                             maxiter=60, callback=count,
                             callback_type="legacy")
        if info != 0:
            self._lu = spla.splu(A.tocsc())
            x = self._lu.solve(b)
            return x, {"method": "splu(refreshed)", "gmres_iterations": n_it}
        return x, {"method": "gmres+frozen-lu", "gmres_iterations": n_it}


def newton_solve(grid: Grid2D, eps: float, init, tol: float = 1e-11,
                 maxit: int = 20, solver: str = "auto"):
    """Damped Newton for ``eps^2 Delta_red u + u - u^3 = 0``.

    The outer Dirichlet ring of ``init`` is held fixed.  Line search
    backtracks on the sup-residual.  Returns ``(ScalarField2D,
    NewtonReport)``; raises :class:`NewtonDivergenceError` (carrying the
    last iterate) if the residual cannot be decreased or ``maxit`` is
    exhausted.
    """
    grid.check_resolution(eps)
    u = (init.values if isinstance(init, ScalarField2D) else
         np.asarray(init, dtype=float)).copy()
    if np.max(np.abs(u)) > 1.1:
        raise ValueError("initial iterate outside [-1.1, 1.1]")
    nb = grid.n_cells
    t_start = time.perf_counter()
    lin = _LinearSolver(nb * nb, mode=solver)
    res = residual(grid, eps, u)
    sup = float(np.max(np.abs(res)))
    norms = [sup]
    stats = []
    for it in range(1, maxit + 1):
        if sup < tol:
            rep = NewtonReport(it - 1, norms, sup, stats, True,
                               time.perf_counter() - t_start)
            return ScalarField2D(grid, u), rep
        A = jacobian(grid, eps, u)
        delta, st = lin.solve(A, -res[:nb, :nb].ravel())
        stats.append(st)
        step = np.zeros_like(u)
        step[:nb, :nb] = delta.reshape(nb, nb)
        alpha = 1.0
        stalled = False
        for _ in range(12):
            trial = u + alpha * step
            res_t = residual(grid, eps, trial)
            sup_t = float(np.max(np.abs(res_t)))
            if sup_t < sup:
                break
            alpha *= 0.5
        else:
            # No step length decreases the residual: the roundoff floor.
            stalled = True
        if stalled:
            break
        u, res, sup = trial, res_t, sup_t
        norms.append(sup)
    n_done = len(norms) - 1
    if sup < tol:
        rep = NewtonReport(n_done, norms, sup, stats, True,
                           time.perf_counter() - t_start)
        return ScalarField2D(grid, u), rep
    rep = NewtonReport(n_done, norms, sup, stats, False,
                       time.perf_counter() - t_start)
    raise NewtonDivergenceError(
        f"no convergence after {n_done} iterations (sup={sup:.3e})",
        field=ScalarField2D(grid, u), report=rep)


def pde_residual(grid: Grid2D, eps: float, u):
    """Residual field, its sup norm, and ambient weighted norms."""
    from . import fermi

    uv = u.values if isinstance(u, ScalarField2D) else np.asarray(u, dtype=float)
    res = residual(grid, eps, uv)
    sup = float(np.max(np.abs(res)))
    wn = {
        "ambient_nu_0": fermi.weighted_norm(res, 0.0, eps, "ambient",
                                            grid=grid).value,
        "ambient_nu_-2": fermi.weighted_norm(res, -2.0, eps, "ambient",
                                             grid=grid).value,
    }
    return ScalarField2D(grid, res), sup, wn


def zero_set_extract(u) -> list:
    """Zero level set as ordered polylines (marching squares).

    Returns a list of ``(M, 2)`` arrays in ``(s1, s2)`` coordinates,
    longest component first.
    """
    from skimage.measure import find_contours

    fieldv = u.values if isinstance(u, ScalarField2D) else np.asarray(u)
    grid = u.grid if isinstance(u, ScalarField2D) else None
    if fieldv.min() >= 0.0 or fieldv.max() <= 0.0:
        raise NoZeroCrossingError("field does not change sign")
    contours = find_contours(fieldv, 0.0)
    h = grid.h if grid is not None else 1.0
    polys = [np.asarray(cont) * h for cont in contours]
    polys.sort(key=lambda p: -p.shape[0])
    return polys


@dataclass(frozen=True)
class DeviationReport:
    max_dev: float
    d_gamma: np.ndarray
    deviation: np.ndarray


def zero_set_deviation(zero: np.ndarray, curve, d_max: float = np.inf):
    """Signed normal distance of zero-set vertices to the generating curve.

    Vertices are projected through the Fermi chart; entries are sorted by
    the foot distance ``d_gamma`` and limited to ``d_gamma <= d_max``.
    """
    from . import fermi

    t, foot, _ = fermi.signed_distance(np.asarray(zero, dtype=float), curve)
    d = np.sqrt(1.0 + np.asarray(foot) ** 2)
    order = np.argsort(d)
    d, t = d[order], np.asarray(t)[order]
    keep = d <= d_max
    d, t = d[keep], t[keep]
    if d.size == 0:
        raise ValueError("no zero-set vertices within d_max")
    return DeviationReport(max_dev=float(np.max(np.abs(t))), d_gamma=d,
                           deviation=t)
