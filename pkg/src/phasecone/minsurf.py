"""Hardt-Simon generating curves by ODE shooting, and their Jacobi data.

An ``O(n1+1) x O(n2+1)``-invariant hypersurface in ``R^(n+1)`` is swept
out by a planar curve ``s -> (x(s), y(s))`` in the open quadrant.  With
unit-speed parameterization ``x' = cos(theta)``, ``y' = sin(theta)``,
zero mean curvature reads

    theta' = n2 * cos(theta) / y - n1 * sin(theta) / x.

The leaf asymptotic to the cone ``{y = x tan(u_inf)}`` starts on the
x-axis at ``(x0, 0)`` with ``theta = pi/2``; the axis term is singular
there and the integration is seeded with the local series
``theta(s) = pi/2 - a s``, ``a = n1 / ((1 + n2) x0)`` (the balance forced
by L'Hopital at y = 0).

The printed angular system

    u' = cos u sin u sin(u - v),   v' = n1 sin u sin v - n2 cos u cos v

(with ``tan u = y/x``, ``tan v = y'/x'``) is carried along for
cross-checking only: along trajectories of the Cartesian flow its vector
field is collinear with the Cartesian-induced one with scalar factor
``-r sin u cos u``, i.e. the same orbits traversed in the opposite
direction.  This module reports that comparison; it does not "correct"
the printed system.

Orientation: the unit normal is ``N = (-sin(theta), cos(theta))``, which
points from the curve toward the side containing the cone.  The dilation
Jacobi field is ``zeta0 = p . N = -x sin(theta) + y cos(theta)`` (negative
with this orientation; its modulus decays like the cone distance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.linalg import solve_banded
from scipy.spatial import cKDTree

from .cone import LinkSpec


class ConeCrossingError(RuntimeError):
    """Shooting hit the cone (or re-hit the axis): non-minimizing regime."""

    def __init__(self, message, s_event=None, state=None):
        super().__init__(message)
        self.s_event = s_event
        self.state = state


class DegenerateWindowError(ValueError):
    """Fewer than 10 samples in a decay-fit window."""


def cone_angle(spec: LinkSpec) -> float:
    """Opening angle ``u_inf = arctan(sqrt(n2/n1))`` of the limiting cone."""
    return math.atan(math.sqrt(spec.n2 / spec.n1))


def cartesian_rhs(state, spec: LinkSpec):
    """Arclength flow ``(x', y', theta')`` for the generating curve.

    Raises a domain error off the open quadrant (the series start handles
    the axis; see :func:`shoot_hardt_simon`).
    """
    x, y, theta = state
    if x <= 0.0 or y <= 0.0:
        raise ValueError(f"state off the open quadrant: x={x}, y={y}")
    ct, st = math.cos(theta), math.sin(theta)
    return np.array([ct, st, spec.n2 * ct / y - spec.n1 * st / x])


def printed_uv_rhs(u, v, spec: LinkSpec):
    """The angular system exactly as printed; for cross-checking only."""
    return np.array([
        math.cos(u) * math.sin(u) * math.sin(u - v),
        spec.n1 * math.sin(u) * math.sin(v) - spec.n2 * math.cos(u) * math.cos(v),
    ])


@dataclass(frozen=True)
class GeneratingCurve:
    """Arclength-sampled generating curve with its link data.

    ``s`` is uniform after resampling; ``theta`` is the tangent angle.
    ``orientation = +1`` means ``N = (-sin(theta), cos(theta))``.
    """

    spec: LinkSpec
    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    orientation: int = 1

    @property
    def h(self) -> float:
        return float(self.s[1] - self.s[0])

    @property
    def d_gamma(self) -> np.ndarray:
        """Regularized intrinsic distance ``sqrt(1 + s**2)`` from the cap."""
        return np.sqrt(1.0 + self.s**2)

    @property
    def r(self) -> np.ndarray:
        return np.hypot(self.x, self.y)

    def normal(self):
        """Unit normal components ``(Nx, Ny)``."""
        return (-self.orientation * np.sin(self.theta),
                self.orientation * np.cos(self.theta))

    def theta_prime(self) -> np.ndarray:
        """Tangent-angle derivative from the flow (exact on the trajectory)."""
        return (self.spec.n2 * np.cos(self.theta) / self.y
                - self.spec.n1 * np.sin(self.theta) / self.x)

    def unit_speed_residual(self) -> float:
        """Max of ``|x'^2 + y'^2 - 1|`` with the parameterized tangents."""
        return float(np.max(np.abs(np.cos(self.theta) ** 2
                                   + np.sin(self.theta) ** 2 - 1.0)))

    def zeta0(self) -> np.ndarray:
        """Dilation Jacobi field ``p . N`` along the curve."""
        nx, ny = self.normal()
        return self.x * nx + self.y * ny

    def distance_to_cone(self) -> np.ndarray:
        """Perpendicular distance from each sample to the limiting cone ray."""
        ui = cone_angle(self.spec)
        return np.abs(self.x * math.sin(ui) - self.y * math.cos(ui))

    def scaled(self, lam: float) -> "GeneratingCurve":
        """Dilated curve ``lam * Gamma`` (minimality is scale invariant)."""
        if lam <= 0.0:
            raise ValueError("scale must be positive")
        return GeneratingCurve(spec=self.spec, s=lam * self.s, x=lam * self.x,
                               y=lam * self.y, theta=self.theta.copy(),
                               orientation=self.orientation)


def shoot_hardt_simon(spec: LinkSpec, s_max: float, tol: float = 1e-10,
                      x0: float = 1.0, s0: float = 1e-6,
                      resample_h: float = 0.01) -> GeneratingCurve:
    """Integrate the one-sided leaf from the axis to arclength ``s_max``.

    Starts at ``(x, y, theta) = (x0, 0, pi/2)`` (unit distance from the
    origin for ``x0 = 1``), regularized by the series start at ``s0``.
    Integrates with an adaptive embedded Runge-Kutta pair and resamples to
    a uniform arclength grid through a cubic Hermite interpolant (the RHS
    supplies exact knot derivatives).

    ``tol`` is the accuracy target for quantities later differenced on
    the resampled grid; the integrator itself runs at ``rtol = tol/100``
    with a capped step so that sample noise and interpolation ripple stay
    two orders below ``tol`` and do not surface in finite differences.

    Raises
    ------
    ConeCrossingError
        If the trajectory touches the cone ``y tan(u_inf) = x`` or falls
        back to the axis, the signature of the non-minimizing regime
        (expected whenever ``n = n1 + n2 + 1 <= 6``).
    """
    if s_max < 10.0:
        raise ValueError("s_max too small to reach the asymptotic regime")
    a = spec.n1 / ((1.0 + spec.n2) * x0)
    state0 = np.array([x0 + 0.5 * a * s0**2, s0, math.pi / 2.0 - a * s0])
    ui = cone_angle(spec)
    sin_ui, cos_ui = math.sin(ui), math.cos(ui)

    def rhs(s, state):
        # Inline form tolerant to transient stage overshoot past the axis;
        # accepted steps never get there (events terminate first).
        x, y, theta = state
        ct, st = math.cos(theta), math.sin(theta)
        return (ct, st,
                spec.n2 * ct / max(y, 1e-12) - spec.n1 * st / max(x, 1e-12))

    def hit_cone(s, state):
        return state[0] * sin_ui - state[1] * cos_ui

    def hit_axis(s, state):
        return state[1] - 0.5 * s0

    hit_cone.terminal = True
    hit_axis.terminal = True

    sol = solve_ivp(rhs, (s0, s_max), state0, method="RK45",
                    rtol=tol * 1e-2, atol=tol * 1e-4, dense_output=False,
                    events=(hit_cone, hit_axis), max_step=0.05)
    if not sol.success:
        raise RuntimeError(f"integration failed: {sol.message}")
    if sol.status == 1:
        which = "cone" if len(sol.t_events[0]) else "axis"
        s_ev = (sol.t_events[0] if which == "cone" else sol.t_events[1])[0]
        raise ConeCrossingError(
            f"trajectory for (n1, n2) = ({spec.n1}, {spec.n2}) hit the "
            f"{which} at s = {s_ev:.6g}: non-minimizing regime",
            s_event=float(s_ev),
            state=sol.y_events[0 if which == "cone" else 1][0],
        )

    knots_s = sol.t
    knots = sol.y
    derivs = np.array([cartesian_rhs(knots[:, i], spec)
                       for i in range(knots.shape[1])]).T
    s_uniform = np.arange(s0, s_max, resample_h)
    out = np.empty((3, s_uniform.size))
    for k in range(3):
        spline = CubicHermiteSpline(knots_s, knots[k], derivs[k])
        out[k] = spline(s_uniform)
    curve = GeneratingCurve(spec=spec, s=s_uniform, x=out[0], y=out[1],
                            theta=out[2])
    # One-sidedness must hold on every resampled node as well.
    gap = curve.x * sin_ui - curve.y * cos_ui
    if np.any(gap <= 0.0):
        raise ConeCrossingError("resampled curve touches the cone")
    return curve


@dataclass(frozen=True)
class CurveGeometry:
    """Per-sample principal curvatures and derived quantities."""

    kappa_profile: np.ndarray   # theta', multiplicity 1
    kappa_type1: np.ndarray     # sin(theta)/x, multiplicity n1
    kappa_type2: np.ndarray     # -cos(theta)/y, multiplicity n2
    normA2: np.ndarray
    d_gamma: np.ndarray
    minimality_residual: float


def curve_geometry(curve: GeneratingCurve) -> CurveGeometry:
    """Principal curvatures along the curve.

    ``kappa_profile`` is evaluated from the flow (exact on trajectories);
    the reported minimality residual instead differentiates the sampled
    ``theta`` with a fourth-order stencil, so it measures integration plus
    resampling error rather than restating the definition.
    """
    n1, n2 = curve.spec.n1, curve.spec.n2
    k1 = np.sin(curve.theta) / curve.x
    k2 = -np.cos(curve.theta) / curve.y
    kp = curve.theta_prime()
    normA2 = kp**2 + n1 * k1**2 + n2 * k2**2
    th, h = curve.theta, curve.h
    dth = (th[:-4] - 8.0 * th[1:-3] + 8.0 * th[3:-1] - th[4:]) / (12.0 * h)
    resid = float(np.max(np.abs(dth + n1 * k1[2:-2] - n2 * (-k2[2:-2]))))
    return CurveGeometry(kappa_profile=kp, kappa_type1=k1, kappa_type2=k2,
                         normA2=normA2, d_gamma=curve.d_gamma,
                         minimality_residual=resid)


def principal_curvatures(curve: GeneratingCurve):
    """Curvature values and multiplicities as ``(kappas, counts)`` arrays.

    ``kappas`` has shape ``(nsamples, 3)`` in the order profile, type-1,
    type-2; ``counts = (1, n1, n2)``.
    """
    geo = curve_geometry(curve)
    kappas = np.stack([geo.kappa_profile, geo.kappa_type1, geo.kappa_type2],
                      axis=-1)
    counts = np.array([1, curve.spec.n1, curve.spec.n2])
    return kappas, counts


def fit_decay_exponent(r, values, window):
    """Least-squares power-law fit ``value ~ amplitude * r**exponent``.

    Fits ``log(value)`` against ``log(r)`` inside ``window = (r_min, r_max)``.
    Returns ``(exponent, amplitude, fit_residual)`` where the residual is
    the RMS of the log-space misfit.
    """
    r = np.asarray(r, dtype=float)
    values = np.asarray(values, dtype=float)
    rmin, rmax = window
    mask = (r >= rmin) & (r <= rmax) & (values > 0.0)
    if np.count_nonzero(mask) < 10:
        raise DegenerateWindowError(
            f"only {np.count_nonzero(mask)} usable points in window {window}"
        )
    lr, lv = np.log(r[mask]), np.log(values[mask])
    slope, intercept = np.polyfit(lr, lv, 1)
    resid = float(np.sqrt(np.mean((lv - (slope * lr + intercept)) ** 2)))
    return float(slope), float(np.exp(intercept)), resid


def uv_cross_check(curve: GeneratingCurve, stride: int = 25):
    """Compare the printed angular system with the Cartesian flow.

    At sampled points, evaluates the printed ``(u', v')`` and the values
    induced by the Cartesian trajectory (``u' = sin(v - u)/r``,
    ``v' = theta'``).  Returns a dict with the max normalized cross
    product (collinearity defect) and statistics of the scalar ratio,
    which analysis of the two systems predicts to be ``-r sin u cos u``.
    """
    idx = np.arange(1, curve.s.size, stride)
    cross = np.empty(idx.size)
    ratio_err = np.empty(idx.size)
    thp = curve.theta_prime()
    for k, i in enumerate(idx):
        x, y, th = curve.x[i], curve.y[i], curve.theta[i]
        r = math.hypot(x, y)
        u, v = math.atan2(y, x), th
        printed = printed_uv_rhs(u, v, curve.spec)
        induced = np.array([math.sin(v - u) / r, float(thp[i])])
        denom = np.linalg.norm(printed) * np.linalg.norm(induced)
        cross[k] = abs(printed[0] * induced[1] - printed[1] * induced[0]) / denom
        predicted = -r * math.sin(u) * math.cos(u)
        # Compare on the dominant component to avoid 0/0.
        j = int(np.argmax(np.abs(induced)))
        ratio_err[k] = abs(printed[j] / induced[j] - predicted) / abs(predicted)
    return {
        "max_collinearity_defect": float(np.max(cross)),
        "max_ratio_error": float(np.max(ratio_err)),
        "orientation_reversed": True,
    }


# ---------------------------------------------------------------------------
# Jacobi operator on the generating curve
# ---------------------------------------------------------------------------

def _jacobi_coeff(curve: GeneratingCurve):
    """Analytic first-order coefficient ``n1 x'/x + n2 y'/y`` of J_Gamma."""
    return (curve.spec.n1 * np.cos(curve.theta) / curve.x
            + curve.spec.n2 * np.sin(curve.theta) / curve.y)


def jacobi_apply(curve: GeneratingCurve, zeta):
    """Apply ``J_Gamma = Delta_Gamma + |A|^2`` to an invariant function.

    On invariant functions the operator reduces to
    ``zeta'' + (n1 x'/x + n2 y'/y) zeta' + |A|^2 zeta`` along the curve;
    the coefficients are analytic and only ``zeta``'s derivatives use
    second-order central differences.  The first and last entries use
    one-sided stencils and should be treated as flagged.
    """
    z = np.asarray(zeta(curve.s) if callable(zeta) else zeta, dtype=float)
    if z.shape != curve.s.shape:
        raise ValueError("zeta must be sampled on the curve grid")
    h = curve.h
    dz = np.gradient(z, h, edge_order=2)
    d2z = np.empty_like(z)
    d2z[1:-1] = (z[2:] - 2.0 * z[1:-1] + z[:-2]) / h**2
    d2z[0] = (2.0 * z[0] - 5.0 * z[1] + 4.0 * z[2] - z[3]) / h**2
    d2z[-1] = (2.0 * z[-1] - 5.0 * z[-2] + 4.0 * z[-3] - z[-4]) / h**2
    geo = curve_geometry(curve)
    return d2z + _jacobi_coeff(curve) * dz + geo.normA2 * z


def jacobi_interior(curve: GeneratingCurve, margin: float = 0.5):
    """Mask excluding endpoint stencils and the axis-cap transition."""
    return (curve.s > curve.s[0] + margin) & (curve.s < curve.s[-1] - margin)


def jacobi_solve(curve: GeneratingCurve, f, boundary=(0.0, 0.0)):
    """Solve ``J_Gamma zeta = f`` with Dirichlet data at both curve ends.

    Banded (tridiagonal) direct solve of the same discretization used by
    :func:`jacobi_apply`.  Returns ``(zeta, residual)`` where the residual
    is the interior sup-norm of ``J zeta - f``.
    """
    fv = np.asarray(f(curve.s) if callable(f) else f, dtype=float)
    n = curve.s.size
    h = curve.h
    geo = curve_geometry(curve)
    p = _jacobi_coeff(curve)
    lower = 1.0 / h**2 - p[1:-1] / (2.0 * h)
    diag = -2.0 / h**2 + geo.normA2[1:-1]
    upper = 1.0 / h**2 + p[1:-1] / (2.0 * h)
    m = n - 2
    ab = np.zeros((3, m))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    rhs = fv[1:-1].copy()
    rhs[0] -= lower[0] * boundary[0]
    rhs[-1] -= upper[-1] * boundary[1]
    try:
        zin = solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"singular Jacobi system: {exc}") from exc
    if not np.all(np.isfinite(zin)):
        raise RuntimeError("singular Jacobi system: non-finite solution")
    zeta = np.empty(n)
    zeta[0], zeta[-1] = boundary
    zeta[1:-1] = zin
    resid = jacobi_apply(curve, zeta) - fv
    mask = jacobi_interior(curve)
    return zeta, float(np.max(np.abs(resid[mask])))


# ---------------------------------------------------------------------------
# Foliation checks
# ---------------------------------------------------------------------------

def _min_distance_between(curve_a: GeneratingCurve, curve_b: GeneratingCurve):
    """Minimum distance from samples of ``a`` to the polyline of ``b``."""
    pts_b = np.column_stack([curve_b.x, curve_b.y])
    tree = cKDTree(pts_b)
    pts_a = np.column_stack([curve_a.x, curve_a.y])
    d_node, idx = tree.query(pts_a)
    # Refine against the two segments adjacent to the nearest node.
    best = d_node.copy()
    for shift in (-1, 0):
        j = np.clip(idx + shift, 0, pts_b.shape[0] - 2)
        a, b = pts_b[j], pts_b[j + 1]
        ab = b - a
        tpar = np.einsum("ij,ij->i", pts_a - a, ab) / np.einsum("ij,ij->i", ab, ab)
        tpar = np.clip(tpar, 0.0, 1.0)
        proj = a + tpar[:, None] * ab
        best = np.minimum(best, np.hypot(*(pts_a - proj).T))
    return float(np.min(best)), best


def ray_crossings(curve: GeneratingCurve, direction):
    """Number of times the ray ``R+ * direction`` crosses the sampled curve."""
    ex, ey = direction / np.hypot(*direction)
    # Signed side of each sample relative to the ray's line.
    side = curve.x * ey - curve.y * ex
    forward = curve.x * ex + curve.y * ey > 0.0
    sgn = np.sign(side)
    flips = (sgn[:-1] * sgn[1:] < 0) & forward[:-1] & forward[1:]
    return int(np.count_nonzero(flips) + np.count_nonzero(side == 0.0))


@dataclass(frozen=True)
class FoliationReport:
    pair_min_distances: dict
    all_disjoint: bool
    angle_monotone: bool
    max_ray_crossings: int


def foliation_check(curve: GeneratingCurve, scales, n_rays: int = 32) -> FoliationReport:
    """Verify disjointness of dilated copies and single ray crossings.

    For each pair of distinct scales the dilated curves must not touch;
    additionally the polar angle along the curve must be strictly
    monotone, which implies each radial ray in the open wedge between the
    axis and the cone meets the curve at most once (checked directly on a
    sample of rays through curve points).
    """
    scales = sorted(set(float(v) for v in scales))
    if len(scales) < 2 or any(v <= 0 for v in scales):
        raise ValueError("need at least two distinct positive scales")
    dil = {lam: curve.scaled(lam) for lam in scales}
    pair_min = {}
    disjoint = True
    for i, li in enumerate(scales):
        for lj in scales[i + 1:]:
            dmin, _ = _min_distance_between(dil[li], dil[lj])
            pair_min[(li, lj)] = dmin
            disjoint &= dmin > 0.0
    ang = np.arctan2(curve.y, curve.x)
    monotone = bool(np.all(np.diff(ang) > 0.0))
    idx = np.linspace(1, curve.s.size - 2, n_rays).astype(int)
    crossings = max(
        ray_crossings(curve, np.array([curve.x[i], curve.y[i]])) for i in idx
    )
    return FoliationReport(pair_min_distances=pair_min, all_disjoint=disjoint,
                           angle_monotone=monotone, max_ray_crossings=crossings)
