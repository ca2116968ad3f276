"""Fermi coordinates about a generating curve, residuals and projections.

Points of the reduced quadrant near the curve are described by a foot
arclength ``s`` and a signed normal offset ``t`` (positive toward the
side containing the cone).  On this chart live the cutoff family, the
glued approximate solution, the leading interface residual
``-eps * H_t(s) * u1'(t/eps)``, the projection onto the interface mode,
the normal-shift diffeomorphism, and the weighted sup-norm diagnostics.

The nearest-point map is resolved by a KD-tree pass over the curve
samples followed by a bracketed bisection on the perpendicularity
condition against a cubic Hermite interpolant of the curve, so foot
points are accurate to interpolant precision rather than sample spacing.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicHermiteSpline, RegularGridInterpolator
from scipy.ndimage import maximum_filter, maximum_filter1d
from scipy.spatial import cKDTree

from . import profile1d
from .minsurf import GeneratingCurve

DEFAULT_C_STAR = 0.2
DEFAULT_DELTA_STAR = 0.5


class TubeError(ValueError):
    """Query outside the validity tube of the Fermi chart."""


class RadiusOfConvergenceError(ValueError):
    """Parallel-surface series evaluated at ``|z * kappa| >= 1``."""


class NonMonotoneShiftError(ValueError):
    """The normal shift ``t -> t - chi2 * zeta`` is not monotone."""


@lru_cache(maxsize=1)
def _profile_c() -> float:
    return profile1d.profile_moments(0).c


def smootherstep(x):
    """C^2 polynomial step: 0 for x<=0, 1 for x>=1, 6x^5-15x^4+10x^3 between."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return x * x * x * (x * (6.0 * x - 15.0) + 10.0)


class CurveFrame:
    """Interpolated geometric frame along a generating curve.

    Wraps cubic Hermite interpolants of ``(x, y, theta)`` (knot
    derivatives are exact from the flow) plus analytic curvature
    evaluations at arbitrary arclengths.
    """

    def __init__(self, curve: GeneratingCurve):
        self.curve = curve
        spec = curve.spec
        dx = np.cos(curve.theta)
        dy = np.sin(curve.theta)
        dtheta = curve.theta_prime()
        self._sx = CubicHermiteSpline(curve.s, curve.x, dx)
        self._sy = CubicHermiteSpline(curve.s, curve.y, dy)
        self._sth = CubicHermiteSpline(curve.s, curve.theta, dtheta)
        self._n1, self._n2 = spec.n1, spec.n2
        self.s_min = float(curve.s[0])
        self.s_max = float(curve.s[-1])

    def position(self, s):
        return self._sx(s), self._sy(s)

    def angle(self, s):
        return self._sth(s)

    def tangent(self, s):
        th = self._sth(s)
        return np.cos(th), np.sin(th)

    def normal(self, s):
        th = self._sth(s)
        o = self.curve.orientation
        return -o * np.sin(th), o * np.cos(th)

    def d_gamma(self, s):
        return np.sqrt(1.0 + np.asarray(s, dtype=float) ** 2)

    def curvatures(self, s):
        """Principal curvatures ``(kappa_profile, kappa1, kappa2)`` at ``s``."""
        x, y = self.position(s)
        th = self._sth(s)
        st, ct = np.sin(th), np.cos(th)
        k1 = st / x
        k2 = -ct / y
        kp = self._n2 * ct / y - self._n1 * st / x
        return kp, k1, k2

    def point_on_normal(self, s, t):
        x, y = self.position(s)
        nx, ny = self.normal(s)
        return x + t * nx, y + t * ny


@dataclass
class FermiCoords:
    """Vectorized Fermi coordinates of a batch of quadrant points."""

    foot: np.ndarray        # arclength of the nearest curve point
    t: np.ndarray           # signed normal distance
    valid: np.ndarray       # |t| <= c_star * d_gamma(foot), unclamped foot
    side: np.ndarray        # +1 on the cone side of the curve, -1 otherwise
    perp_residual: np.ndarray
    clamped: np.ndarray

    @property
    def d_gamma(self):
        return np.sqrt(1.0 + self.foot**2)


class TubularMap:
    """Nearest-point projection onto a generating curve in the quadrant."""

    def __init__(self, curve: GeneratingCurve, c_star: float = DEFAULT_C_STAR):
        self.curve = curve
        self.c_star = float(c_star)
        self.frame = CurveFrame(curve)
        self._tree = cKDTree(np.column_stack([curve.x, curve.y]))
        # Polar graph u_Gamma(r) of the curve; r is strictly increasing
        # away from the axis (the curve leaves the unit sphere outward).
        r = curve.r
        if np.any(np.diff(r) <= 0):
            raise ValueError("curve radius must be strictly increasing")
        self._r_samples = r
        self._u_samples = np.arctan2(curve.y, curve.x)

    def side_of(self, points):
        """+1 if a point lies on the cone side of the curve, else -1.

        Inside the curve's minimal radius everything connects to the cone
        side; beyond that, compare the polar angle with the curve graph.
        """
        p = np.atleast_2d(points)
        r = np.hypot(p[:, 0], p[:, 1])
        u = np.arctan2(p[:, 1], p[:, 0])
        u_curve = np.interp(r, self._r_samples, self._u_samples)
        side = np.where((r < self._r_samples[0]) | (u > u_curve), 1.0, -1.0)
        return side

    def query(self, points, refine_margin: float = 4.0) -> FermiCoords:
        """Fermi coordinates of ``points`` (array of shape (N, 2))."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        n = p.shape[0]
        dist0, idx = self._tree.query(p)
        s_node = self.curve.s[idx]
        side = self.side_of(p)

        # Refine the foot by bisection on g(s) = (p - gamma(s)) . T(s),
        # bracketing around the nearest sample.  Only points within a few
        # tube widths matter; far points keep the nearest-sample foot.
        h = self.curve.h
        d_node = np.sqrt(1.0 + s_node**2)
        near = dist0 <= refine_margin * np.maximum(self.c_star * d_node, 10 * h)
        foot = s_node.copy()
        clamped = np.zeros(n, dtype=bool)
        if np.any(near):
            pn = p[near]
            lo = np.maximum(s_node[near] - 2.0 * h, self.frame.s_min)
            hi = np.minimum(s_node[near] + 2.0 * h, self.frame.s_max)

            def g(s):
                x, y = self.frame.position(s)
                tx, ty = self.frame.tangent(s)
                return (pn[:, 0] - x) * tx + (pn[:, 1] - y) * ty

            glo, ghi = g(lo), g(hi)
            # Where no sign change brackets a root the projection clamps
            # to an endpoint of the bracket (curve cap or far end).
            bad = glo * ghi > 0.0
            for _ in range(52):
                mid = 0.5 * (lo + hi)
                gm = g(mid)
                take_lo = glo * gm <= 0.0
                hi = np.where(take_lo, mid, hi)
                ghi = np.where(take_lo, gm, ghi)
                lo = np.where(take_lo, lo, mid)
                glo = np.where(take_lo, glo, gm)
            s_ref = 0.5 * (lo + hi)
            s_ref = np.where(bad, np.clip(s_node[near], self.frame.s_min, self.frame.s_max), s_ref)
            foot[near] = s_ref
            cl = np.zeros(s_ref.size, dtype=bool)
            cl |= bad
            cl |= (s_ref <= self.frame.s_min + 1e-12) | (s_ref >= self.frame.s_max - 1e-12)
            clamped[near] = cl

        x, y = self.frame.position(foot)
        dvec = np.column_stack([p[:, 0] - x, p[:, 1] - y])
        dist = np.hypot(dvec[:, 0], dvec[:, 1])
        tx, ty = self.frame.tangent(foot)
        perp = np.abs(dvec[:, 0] * tx + dvec[:, 1] * ty)
        t = side * dist
        d_gamma = np.sqrt(1.0 + foot**2)
        valid = (np.abs(t) <= self.c_star * d_gamma) & ~clamped
        return FermiCoords(foot=foot, t=t, valid=valid, side=side,
                           perp_residual=perp, clamped=clamped)


def signed_distance(points, curve: GeneratingCurve,
                    c_star: float = DEFAULT_C_STAR):
    """Signed distance and foot point(s); sign is + toward the cone side.

    Returns ``(t, foot, valid)``; scalars for a single point.
    """
    single = np.asarray(points).ndim == 1
    fc = TubularMap(curve, c_star=c_star).query(points)
    if single:
        return float(fc.t[0]), float(fc.foot[0]), bool(fc.valid[0])
    return fc.t, fc.foot, fc.valid


# ---------------------------------------------------------------------------
# Parallel-surface mean curvature
# ---------------------------------------------------------------------------

def _curvature_sets(frame: CurveFrame, s):
    kp, k1, k2 = frame.curvatures(s)
    kappas = np.stack(np.broadcast_arrays(kp, k1, k2), axis=-1)
    counts = np.array([1.0, frame._n1, frame._n2])
    return kappas, counts


def mean_curvature_from_kappas(kappas, counts, z, order: int = 12,
                               drop_constant: bool = True):
    """Closed form and truncated trace series for given principal curvatures.

    ``kappas`` has the curvature values on its last axis with
    multiplicities ``counts``.  Returns ``(H_exact, H_series)`` with
    ``H_exact = sum_i m_i kappa_i / (1 - z kappa_i)`` (the determinant
    identity) and the power series truncated at ``z**order``.  With
    ``drop_constant`` the order-zero trace (the mean curvature itself,
    zero on minimal hypersurfaces) is omitted from the series.
    """
    kappas = np.asarray(kappas, dtype=float)
    counts = np.asarray(counts, dtype=float)
    z = np.asarray(z, dtype=float)
    zk = z[..., None] * kappas
    if np.any(np.abs(zk) >= 1.0):
        raise RadiusOfConvergenceError("need |z * kappa_i| < 1 for all i")
    h_exact = np.sum(counts * kappas / (1.0 - zk), axis=-1)
    # Horner evaluation of sum_j (sum_i m_i kappa_i^{j+1}) z^j.
    acc = np.zeros_like(zk[..., 0])
    for j in range(order, 0, -1):
        trace = np.sum(counts * kappas ** (j + 1), axis=-1)
        acc = acc * z + trace
    h_series = acc * z
    if not drop_constant:
        h_series = h_series + np.sum(counts * kappas, axis=-1)
    return h_exact, h_series


def parallel_mean_curvature(curve: GeneratingCurve, s, z, order: int = 12):
    """Mean curvature of the parallel surface at height ``z`` over ``s``.

    Returns ``(H_exact, H_series)``: the closed form from the determinant
    identity and the trace power series truncated at ``z**order`` (the
    constant term vanishes by minimality and is dropped).

    Raises
    ------
    RadiusOfConvergenceError
        If ``max_i |z * kappa_i| >= 1``.
    """
    frame = curve if isinstance(curve, CurveFrame) else CurveFrame(curve)
    kappas, counts = _curvature_sets(frame, np.asarray(s, dtype=float))
    return mean_curvature_from_kappas(kappas, counts, z, order=order)


def series_tail_bound(curve: GeneratingCurve, s, z, order: int = 12):
    """Geometric-tail bound on the order-``order`` truncation error."""
    frame = curve if isinstance(curve, CurveFrame) else CurveFrame(curve)
    kappas, counts = _curvature_sets(frame, np.asarray(s, dtype=float))
    zk = np.abs(np.asarray(z, dtype=float)[..., None] * kappas)
    return np.sum(counts * np.abs(kappas) * zk ** (order + 1) / (1.0 - zk),
                  axis=-1)


# ---------------------------------------------------------------------------
# Cutoff family
# ---------------------------------------------------------------------------

def cutoff_chi(j: int, t, d_gamma, eps: float,
               delta_star: float = DEFAULT_DELTA_STAR):
    """Cutoff ``chi_j`` at offset ``t`` over a foot with distance ``d_gamma``.

    Identically 1 for ``|t| <= eps**delta_star * (d_gamma - (2j-1)/100)``
    and 0 for ``|t| >= eps**delta_star * (d_gamma - (2j-2)/100)``, with a
    C^2 monotone polynomial transition between.  Supports nest with
    ``j``: where ``chi_j > 0`` the previous cutoff is identically 1.
    """
    if not 1 <= j <= 5:
        raise ValueError("cutoff index must be in 1..5")
    t = np.abs(np.asarray(t, dtype=float))
    d = np.asarray(d_gamma, dtype=float)
    scale = eps**delta_star
    lo = scale * (d - (2 * j - 1) / 100.0)
    hi = scale * (d - (2 * j - 2) / 100.0)
    return smootherstep((hi - t) / (hi - lo))


# ---------------------------------------------------------------------------
# Approximate solution on a grid
# ---------------------------------------------------------------------------

@dataclass
class ApproxSolution:
    """Glued approximate solution on a grid with its Fermi-chart cache."""

    grid: "Grid2D"
    values: np.ndarray
    eps: float
    curve: GeneratingCurve
    delta_star: float
    plus_side: int
    coords: FermiCoords

    def field(self):
        from .acpde import ScalarField2D
        return ScalarField2D(grid=self.grid, values=self.values)


def grid_fermi_coords(grid, curve: GeneratingCurve,
                      c_star: float = DEFAULT_C_STAR) -> FermiCoords:
    """Fermi coordinates of every grid node (cache for field operations)."""
    pts = np.column_stack([grid.S1.ravel(), grid.S2.ravel()])
    return TubularMap(curve, c_star=c_star).query(pts)


def build_approx_solution(grid, curve: GeneratingCurve, eps: float,
                          delta_star: float = DEFAULT_DELTA_STAR,
                          plus_side: int = 1,
                          coords: FermiCoords | None = None) -> ApproxSolution:
    """Interface profile in the tube, grafted to ``+-1`` outside.

    ``plus_side=+1`` assigns the ``+1`` phase to the side of the curve the
    normal points to (the component containing the cone); flip to ``-1``
    to exchange the phases.
    """
    if coords is None:
        coords = grid_fermi_coords(grid, curve)
    chi1 = cutoff_chi(1, coords.t, coords.d_gamma, eps, delta_star)
    u_tube = profile1d.profile(plus_side * coords.side * np.abs(coords.t) / eps)
    u_far = plus_side * coords.side
    values = (chi1 * u_tube + (1.0 - chi1) * u_far).reshape(grid.shape)
    return ApproxSolution(grid=grid, values=values, eps=eps, curve=curve,
                          delta_star=delta_star, plus_side=plus_side,
                          coords=coords)


# ---------------------------------------------------------------------------
# Inner residual and projection on the interface mode
# ---------------------------------------------------------------------------

def inner_residual(curve: GeneratingCurve, s, t, eps: float,
                   c_star: float = DEFAULT_C_STAR, frame: CurveFrame = None):
    """Leading residual ``-eps * H_t(s) * u1'(t/eps)`` of the approximation.

    ``(s, t)`` must lie in the validity tube ``|t| <= c_star * d_gamma``.
    """
    frame = frame or CurveFrame(curve)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > c_star * np.sqrt(1.0 + s**2) * (1 + 1e-12)):
        raise TubeError("offset outside the validity tube")
    h_exact, _ = parallel_mean_curvature(frame, s, t, order=1)
    return -eps * h_exact * profile1d.dprofile(t / eps)


def _pi_quadrature(T: float, eps: float, n_gl: int = 8):
    """Symmetric Gauss-Legendre panels of width ``eps/2`` covering [-T, T]."""
    n_panels = max(1, int(math.ceil(T / (eps / 2.0))))
    edges = np.linspace(0.0, T, n_panels + 1)
    xg, wg = np.polynomial.legendre.leggauss(n_gl)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    tp = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    wp = (half[:, None] * wg[None, :]).ravel()
    t = np.concatenate([-tp[::-1], tp])
    w = np.concatenate([wp[::-1], wp])
    return t, w


def project_pi(curve: GeneratingCurve, f, eps: float, s_values,
               c: float = DEFAULT_C_STAR, n_gl: int = 8,
               use_cutoff: bool = True):
    """Projection ``Pi(f)(s) = (1/(eps c0)) int f(s, t) u1'(t/eps) dt``.

    ``f`` must be callable as ``f(s_scalar, t_array)``.  The integral is
    cut off at ``|t| = c * d_gamma(s)`` (multiplied by the transition
    cutoff when ``use_cutoff``), evaluated on symmetric Gauss-Legendre
    panels of width ``eps/2``.  Emits a truncation warning when the tube
    is shorter than ``10 * eps``.
    """
    s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
    c0 = _profile_c()
    out = np.empty(s_values.size)
    warned = False
    for i, s in enumerate(s_values):
        T = c * math.sqrt(1.0 + s * s)
        if T < 10.0 * eps and not warned:
            warnings.warn(
                f"projection tube {T:.3g} shorter than 10*eps={10*eps:.3g}; "
                "quadrature truncates profile mass", stacklevel=2)
            warned = True
        t, w = _pi_quadrature(T, eps)
        vals = np.asarray(f(s, t), dtype=float)
        if use_cutoff:
            vals = vals * smootherstep((T - np.abs(t)) / (0.1 * T))
        out[i] = np.sum(w * vals * profile1d.dprofile(t / eps)) / (eps * c0)
    return out if out.size > 1 else float(out[0])


def pi_perp(curve: GeneratingCurve, f, eps: float, s_values, t_values,
            **kwargs):
    """Complement ``f - Pi(f) u1'(t/eps)`` evaluated on an (s, t) grid."""
    s_values = np.atleast_1d(s_values)
    proj = np.atleast_1d(project_pi(curve, f, eps, s_values, **kwargs))
    rows = []
    for s, p in zip(s_values, proj):
        rows.append(np.asarray(f(s, t_values), dtype=float)
                    - p * profile1d.dprofile(np.asarray(t_values) / eps))
    return np.array(rows)


@dataclass(frozen=True)
class ResidualDecayScan:
    """Decay data of the interface residual along the curve."""

    d_gamma: np.ndarray
    sup_inner: np.ndarray
    proj_abs: np.ndarray


def residual_decay_scan(curve: GeneratingCurve, eps: float,
                        d_window=(3.0, 30.0), n_s: int = 60,
                        c_star: float = DEFAULT_C_STAR) -> ResidualDecayScan:
    """Sup and projected inner residual sampled log-evenly in ``d_gamma``."""
    frame = CurveFrame(curve)
    d_lo, d_hi = d_window
    d_vals = np.geomspace(d_lo, d_hi, n_s)
    s_vals = np.sqrt(np.maximum(d_vals**2 - 1.0, 1e-12))
    sup_inner = np.empty(n_s)
    for i, (s, d) in enumerate(zip(s_vals, d_vals)):
        tmax = c_star * d
        t = np.linspace(-tmax, tmax, max(65, int(tmax / (eps / 20.0)) | 1))
        sup_inner[i] = np.max(np.abs(
            inner_residual(curve, np.full_like(t, s), t, eps,
                           c_star=c_star, frame=frame)))

    def f(s, t):
        return inner_residual(curve, np.full_like(t, s), t, eps,
                              c_star=c_star, frame=frame)

    proj = project_pi(curve, f, eps, s_vals, c=c_star)
    return ResidualDecayScan(d_gamma=d_vals, sup_inner=sup_inner,
                             proj_abs=np.abs(np.atleast_1d(proj)))


# ---------------------------------------------------------------------------
# Normal-shift diffeomorphism
# ---------------------------------------------------------------------------

def _zeta_interp(curve: GeneratingCurve, zeta):
    if callable(zeta):
        return zeta
    zeta = np.asarray(zeta, dtype=float)
    return lambda s: np.interp(s, curve.s, zeta)


def apply_dzeta(field, curve: GeneratingCurve, zeta, eps: float,
                delta_star: float = DEFAULT_DELTA_STAR,
                direction: str = "forward",
                coords: FermiCoords | None = None):
    """Resample a grid field through the normal shift ``t -> t - chi2 zeta``.

    ``direction='forward'`` composes the field with the shift;
    ``'inverse'`` composes with its inverse, obtained per node by
    monotone bisection (no series inversion).  The map is the identity
    outside the support of ``chi2``.
    """
    from .acpde import ScalarField2D

    grid = field.grid
    values = field.values
    if coords is None:
        coords = grid_fermi_coords(grid, curve)
    zfun = _zeta_interp(curve, zeta)
    zeta_foot = np.asarray(zfun(coords.foot), dtype=float)
    sup_z = float(np.max(np.abs(zeta_foot)))
    # Steepest cutoff slope: transition width eps^delta/100, max slope 15/8.
    slope = 187.5 * eps ** (-delta_star)
    if sup_z * slope >= 1.0:
        raise NonMonotoneShiftError(
            f"sup|zeta| = {sup_z:.3g} too large for monotone shift "
            f"(cutoff slope {slope:.3g})")

    d = coords.d_gamma
    t0 = coords.t
    if direction == "forward":
        t_new = t0 - cutoff_chi(2, t0, d, eps, delta_star) * zeta_foot
    elif direction == "inverse":
        lo = t0 - np.abs(zeta_foot)
        hi = t0 + np.abs(zeta_foot)

        def shift(t):
            return t - cutoff_chi(2, t, d, eps, delta_star) * zeta_foot - t0

        glo = shift(lo)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            gm = shift(mid)
            take_lo = glo * gm <= 0.0
            hi = np.where(take_lo, mid, hi)
            lo = np.where(take_lo, lo, mid)
            glo = np.where(take_lo, glo, gm)
        t_new = 0.5 * (lo + hi)
    else:
        raise ValueError("direction must be 'forward' or 'inverse'")

    moved = t_new != t0
    out = values.ravel().copy()
    if np.any(moved):
        frame = CurveFrame(curve)
        px, py = frame.point_on_normal(coords.foot[moved], t_new[moved])
        interp = RegularGridInterpolator((grid.s, grid.s), values,
                                         bounds_error=False, fill_value=None)
        out[moved] = interp(np.column_stack([
            np.clip(px, grid.s[0], grid.s[-1]),
            np.clip(py, grid.s[0], grid.s[-1]),
        ]))
    return ScalarField2D(grid=grid, values=out.reshape(grid.shape))


# ---------------------------------------------------------------------------
# Weighted norms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightedNorm:
    value: float
    derivative_seminorms: dict


def weighted_norm(obj, nu: float, eps: float, flavor: str, *,
                  curve: GeneratingCurve | None = None,
                  grid=None, coords: FermiCoords | None = None) -> WeightedNorm:
    """Discrete weighted sup-norms of Definition-style diagnostics.

    ``flavor='curve'``: ``obj`` sampled on ``curve.s``; weight
    ``d_gamma**-nu``.  ``flavor='tube'``: ``obj`` on a grid restricted to
    the validity tube; weight ``d_gamma(foot)**-nu``.
    ``flavor='ambient'``: ``obj`` on a grid; weight ``(1+|x|^2)**(-nu/2)``.

    The order-zero value is the pointwise weighted sup (so the weight
    cancels exactly against its own power).  Finite-difference derivative
    seminorms are recorded separately through the weighted local sup over
    balls (radius 1 along the curve, radius eps on grids); the grid
    flavors carry the scaled-metric factors ``eps`` and ``eps**2``.
    """
    if flavor == "curve":
        if curve is None:
            raise ValueError("curve flavor needs the curve")
        w = np.asarray(obj, dtype=float)
        h = curve.h
        size = 2 * int(round(1.0 / h)) + 1
        weight = curve.d_gamma ** (-nu)
        d1 = np.gradient(w, h, edge_order=2)
        d2 = np.gradient(d1, h, edge_order=2)
        def local(v):
            return maximum_filter1d(np.abs(v), size=size, mode="nearest")
        return WeightedNorm(
            value=float(np.max(weight * np.abs(w))),
            derivative_seminorms={
                1: float(np.max(weight * local(d1))),
                2: float(np.max(weight * local(d2))),
            },
        )

    if grid is None:
        raise ValueError(f"{flavor} flavor needs the grid")
    w = np.asarray(obj, dtype=float).reshape(grid.shape)
    h = grid.h
    size = 2 * max(1, int(round(eps / h))) + 1
    def local(v):
        return maximum_filter(np.abs(v), size=size, mode="nearest")
    g1, g2 = np.gradient(w, h, edge_order=2)
    d1 = np.hypot(g1, g2) * eps
    d2 = np.abs(np.gradient(g1, h, axis=0, edge_order=2)
                + np.gradient(g2, h, axis=1, edge_order=2)) * eps**2

    if flavor == "tube":
        if coords is None:
            raise ValueError("tube flavor needs the Fermi coordinate cache")
        weight = (coords.d_gamma ** (-nu)).reshape(grid.shape)
        mask = coords.valid.reshape(grid.shape)
        if not np.any(mask):
            raise ValueError("no grid nodes inside the validity tube")
        def wmax(v):
            return float(np.max((weight * v)[mask]))
    elif flavor == "ambient":
        weight = (1.0 + grid.S1**2 + grid.S2**2) ** (-nu / 2.0)
        def wmax(v):
            return float(np.max(weight * v))
    else:
        raise ValueError(f"unknown flavor {flavor!r}")

    return WeightedNorm(
        value=wmax(np.abs(w)),
        derivative_seminorms={1: wmax(local(d1)), 2: wmax(local(d2))},
    )
