"""Named pipelines over the library with reproducible file artifacts.

Subcommands ``profile``, ``cone``, ``minsurf``, ``fermi``, ``solve``,
``stability`` and ``full`` wire the modules together in dependency
order, persist intermediate artifacts (curve CSV, field dumps, JSON
reports) under a run directory, and resume from artifacts whose
configuration hash still matches.  Floating-point output goes through
``repr``-exact JSON/CSV serialization (shortest round-trip, at most 17
significant digits), so identical configurations reproduce identical
bytes apart from the ``timings`` block.  The exit code is 0 iff every
check of the selected pipeline passed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import acpde, fermi, minsurf, profile1d, stability
from .cone import LinkSpec, cone_spectrum, link_geometry

PIPELINES = ("profile", "cone", "minsurf", "fermi", "solve", "stability", "full")

_STAGE_DEPS = {
    "profile": (),
    "cone": (),
    "minsurf": (),
    "fermi": ("minsurf",),
    "solve": ("minsurf",),
    "stability": ("minsurf", "solve"),
}


@dataclass(frozen=True)
class RunConfig:
    """Flat configuration for a pipeline run; flags mirror these keys."""

    n1: int = 3
    n2: int = 3
    pipeline: str = "full"
    eps: tuple = (0.25,)
    R: float = 16.0
    h: float | None = None          # default min(eps)/8
    s_max: float = 200.0
    delta_star: float = 0.5
    c_star: float = 0.2
    nu: float | None = None         # default midpoint of (-2, nu0+)
    nu_prime: float | None = None
    jmax: int = 8
    ode_tol: float = 1e-10
    newton_tol: float = 1e-11
    lambda_step: float = 1e-3
    trials: int = 100
    seed: int = 42
    outdir: str = "runs/default"

    def spec(self) -> LinkSpec:
        return LinkSpec(self.n1, self.n2)

    def grid_h(self) -> float:
        return self.h if self.h is not None else min(self.eps) / 8.0

    def resolved_nu(self) -> float:
        if self.nu is not None:
            return self.nu
        nu0 = cone_spectrum(self.spec(), 1).modes[0].nu_plus
        return 0.5 * (-2.0 + nu0)

    def validate(self):
        if self.pipeline not in PIPELINES:
            raise ValueError(f"pipeline must be one of {PIPELINES}")
        for name in ("ode_tol", "newton_tol", "lambda_step", "c_star"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.delta_star < 1.0:
            raise ValueError("delta_star must lie in (0, 1)")
        if any(e <= 0 for e in self.eps):
            raise ValueError("eps values must be positive")
        if self.grid_h() > min(self.eps) / 8.0 + 1e-12:
            raise ValueError("h must satisfy h <= min(eps)/8")
        # Weight window for the improved decay regime (equal link factors).
        # At n = 7 the window (-2, nu0+) degenerates to a point since
        # nu0+ = -2 exactly; the closed endpoint is accepted there (nu
        # only parameterizes diagnostics).
        if self.n1 == self.n2 and self.pipeline in ("fermi", "solve",
                                                    "stability", "full"):
            nu0 = cone_spectrum(self.spec(), 1).modes[0].nu_plus
            nu = self.resolved_nu()
            if nu0 < 0:
                ok = (-2.0 < nu < nu0) if nu0 > -2.0 else (nu == -2.0)
                if not ok:
                    raise ValueError(
                        f"nu = {nu} outside the window (-2, {nu0})")


# ---------------------------------------------------------------------------
# Serialization helpers
# ---------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path: Path, payload: dict):
    path.write_text(json.dumps(_jsonable(payload), indent=1, sort_keys=True)
                    + "\n")


def write_csv(path: Path, columns: dict):
    keys = list(columns)
    rows = np.broadcast_arrays(*[np.atleast_1d(columns[k]) for k in keys])
    lines = [",".join(keys)]
    for i in range(rows[0].size):
        lines.append(",".join(repr(float(c.flat[i])) for c in rows))
    path.write_text("\n".join(lines) + "\n")


def read_csv(path: Path) -> dict:
    lines = path.read_text().strip().splitlines()
    keys = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return {k: data[:, i] for i, k in enumerate(keys)}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _config_hash(config: RunConfig, keys) -> str:
    payload = {k: getattr(config, k) for k in sorted(keys)}
    return hashlib.sha256(json.dumps(_jsonable(payload),
                                     sort_keys=True).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------

_STAGE_KEYS = {
    "profile": ("n1", "n2"),
    "cone": ("n1", "n2", "jmax"),
    "minsurf": ("n1", "n2", "s_max", "ode_tol"),
    "fermi": ("n1", "n2", "s_max", "ode_tol", "eps", "c_star", "delta_star"),
    "solve": ("n1", "n2", "s_max", "ode_tol", "eps", "R", "h", "c_star",
              "delta_star", "newton_tol"),
    "stability": ("n1", "n2", "s_max", "ode_tol", "eps", "R", "h", "c_star",
                  "delta_star", "newton_tol", "lambda_step", "trials", "seed"),
}


def _curve_csv(outdir: Path) -> Path:
    return outdir / "curve.csv"


def _load_curve(config: RunConfig, outdir: Path) -> minsurf.GeneratingCurve:
    data = read_csv(_curve_csv(outdir))
    return minsurf.GeneratingCurve(spec=config.spec(), s=data["s"],
                                   x=data["x"], y=data["y"],
                                   theta=data["theta"])


def stage_profile(config: RunConfig, outdir: Path, ctx: dict) -> dict:
    mom = profile1d.profile_moments(2)
    l0 = profile1d.l0_eigencheck()
    t = np.linspace(-10.0, 10.0, 401)
    u, du, _, energy = profile1d.evaluate_profile(t)
    write_csv(outdir / "profile.csv", {"t": t, "u": u, "du": du,
                                       "energy": energy})
    out = {
        "c": mom.c, "m2": mom.m2k[0], "m4": mom.m2k[1],
        "lambda0": l0.lambda0, "lambda1": l0.lambda1,
        "spectrum_edge": l0.spectrum_edge,
        "identity_residual0": l0.identity_residual0,
        "identity_residual1": l0.identity_residual1,
        "checks": {
            "lambda0_small": abs(l0.lambda0) < 1e-3,
            "lambda1_three_halves": abs(l0.lambda1 - 1.5) < 1e-3,
            "closed_form_identities": max(l0.identity_residual0,
                                          l0.identity_residual1) < 1e-12,
            "c_closed_form": abs(mom.c - 2.0 * math.sqrt(2.0) / 3.0) < 1e-10,
        },
    }
    write_json(outdir / "profile.json", out)
    return out


def stage_cone(config: RunConfig, outdir: Path, ctx: dict) -> dict:
    spec = config.spec()
    cs = cone_spectrum(spec, config.jmax)
    geo = link_geometry(spec)
    table = [{
        "mu": m.mu, "degrees": list(m.degrees), "multiplicity": m.multiplicity,
        "gamma_plus": m.gamma_plus, "gamma_minus": m.gamma_minus,
        "nu_plus": m.nu_plus, "nu_minus": m.nu_minus,
        "complex_pair": m.complex_pair, "repeated": m.repeated,
    } for m in cs.modes]
    n = spec.n
    half = (n - 2) / 2.0
    char_res = max(
        abs(g * g + (n - 2) * g - m.mu)
        for m in cs.modes for g in (m.gamma_plus, m.gamma_minus))
    out = {
        "n": n, "rho1": geo.rho1, "rho2": geo.rho2, "normA2": geo.normA2,
        "stability": cs.stability, "modes": table,
        "nu0_plus": cs.modes[0].nu_plus, "nu0_minus": cs.modes[0].nu_minus,
        "checks": {
            "characteristic_equation": char_res < 1e-12,
            "mu0_nonpositive": cs.modes[0].mu <= 0.0,
            "strict_stability_iff_real_split": (
                (cs.stability == "strictly_stable")
                == (half * half + cs.modes[0].mu > 0.0)),
        },
    }
    if n == 7:
        out["checks"]["nu0_exact"] = (abs(cs.modes[0].nu_plus + 2.0) < 1e-12
                                      and abs(cs.modes[0].nu_minus + 3.0) < 1e-12)
    write_json(outdir / "cone.json", out)
    return out


def stage_minsurf(config: RunConfig, outdir: Path, ctx: dict) -> dict:
    spec = config.spec()
    try:
        curve = minsurf.shoot_hardt_simon(spec, s_max=config.s_max,
                                          tol=config.ode_tol)
    except minsurf.ConeCrossingError as exc:
        out = {"cone_crossing": True, "s_event": exc.s_event,
               "checks": {"cone_crossing_expected": spec.n <= 6}}
        write_json(outdir / "minsurf.json", out)
        return out
    ctx["curve"] = curve
    geo = minsurf.curve_geometry(curve)
    z0 = curve.zeta0()
    dist = curve.distance_to_cone()
    write_csv(_curve_csv(outdir), {
        "s": curve.s, "x": curve.x, "y": curve.y, "theta": curve.theta,
        "kappa_profile": geo.kappa_profile, "normA2": geo.normA2,
        "dist_to_cone": dist, "zeta0": z0,
    })
    window = (10.0, min(80.0, 0.8 * config.s_max))
    exp_d, amp_d, res_d = minsurf.fit_decay_exponent(curve.r, dist, window)
    exp_z, amp_z, res_z = minsurf.fit_decay_exponent(curve.r, np.abs(z0), window)
    jz = minsurf.jacobi_apply(curve, z0)
    mask = minsurf.jacobi_interior(curve)
    jrel = float(np.max(np.abs(jz[mask]))
                 / np.max(np.abs(z0) / curve.d_gamma**2))
    fol = minsurf.foliation_check(curve, (0.5, 1.0, 2.0))
    uv = minsurf.uv_cross_check(curve)
    endpoint_u = math.atan2(curve.y[-1], curve.x[-1])
    u_inf = minsurf.cone_angle(spec)
    out = {
        "cone_crossing": False,
        "fit_window_r": list(window),
        "cone_distance_exponent": exp_d, "cone_distance_amplitude": amp_d,
        "cone_distance_fit_residual": res_d,
        "zeta0_exponent": exp_z, "zeta0_amplitude": amp_z,
        "jacobi_relative_residual": jrel,
        "minimality_residual": geo.minimality_residual,
        "unit_speed_residual": curve.unit_speed_residual(),
        "endpoint_angles": {"u": endpoint_u, "theta": float(curve.theta[-1]),
                            "u_inf": u_inf},
        "foliation": {
            "all_disjoint": fol.all_disjoint,
            "angle_monotone": fol.angle_monotone,
            "max_ray_crossings": fol.max_ray_crossings,
            "pair_min_distances": {f"{a}:{b}": v for (a, b), v
                                   in fol.pair_min_distances.items()},
        },
        "printed_uv_comparison": uv,
        "checks": {
            "one_sided": bool(np.all(dist > 0.0)),
            "endpoint_at_cone_angle": abs(endpoint_u - u_inf) < 1e-3
            and abs(curve.theta[-1] - u_inf) < 1e-3,
            "cone_distance_exponent_window": abs(exp_d + 2.0) <= 0.15,
            "zeta0_exponent_window": abs(exp_z + 2.0) <= 0.15,
            "jacobi_residual_small": jrel <= 0.05,
            "foliation": fol.all_disjoint and fol.angle_monotone
            and fol.max_ray_crossings <= 1,
        },
    }
    write_json(outdir / "minsurf.json", out)
    return out


def stage_fermi(config: RunConfig, outdir: Path, ctx: dict) -> dict:
    curve = ctx.get("curve") or _load_curve(config, outdir)
    ctx["curve"] = curve
    eps0 = max(config.eps)
    scans = {e: fermi.residual_decay_scan(curve, e, d_window=(3.0, 30.0),
                                          c_star=config.c_star)
             for e in sorted({eps0, eps0 / 2.0})}
    scan = scans[eps0]
    write_csv(outdir / "fermi_decay.csv", {
        "d_gamma": scan.d_gamma, "sup_residual": scan.sup_inner,
        "projected_residual": scan.proj_abs,
    })
    slope_sup = minsurf.fit_decay_exponent(scan.d_gamma, scan.sup_inner,
                                           (3.0, 30.0))[0]
    slope_proj = minsurf.fit_decay_exponent(scan.d_gamma, scan.proj_abs,
                                            (3.0, 30.0))[0]
    ratios = scans[eps0].sup_inner / scans[eps0 / 2.0].sup_inner
    ratio = float(np.median(ratios))

    rng = np.random.default_rng(config.seed)
    frame = fermi.CurveFrame(curve)
    s = rng.uniform(curve.s[0] + 0.1, 0.9 * curve.s[-1], 1000)
    kp, k1, k2 = frame.curvatures(s)
    kmax = np.max(np.abs(np.stack([kp, k1, k2])), axis=0)
    z = rng.uniform(-1.0, 1.0, 1000) * 0.5 / kmax
    h_exact, h_series = fermi.parallel_mean_curvature(curve, s, z, order=12)
    bound12 = fermi.series_tail_bound(curve, s, z, order=12)
    order_tight = 34
    h_tight = fermi.parallel_mean_curvature(curve, s, z, order=order_tight)[1]
    write_csv(outdir / "fermi_hz.csv", {
        "s": s, "z": z, "h_exact": h_exact, "h_series_order12": h_series,
        "tail_bound_order12": bound12,
    })

    norms = {}
    for e in (eps0, eps0 / 2.0):
        def f(sv, tv, _e=e):
            return fermi.inner_residual(curve, np.full_like(tv, sv), tv, _e,
                                        c_star=config.c_star, frame=frame)
        d_vals = np.geomspace(3.0, 30.0, 24)
        s_vals = np.sqrt(d_vals**2 - 1.0)
        sup = np.array([np.max(np.abs(f(sv, np.linspace(
            -config.c_star * dv, config.c_star * dv, 101))))
            for sv, dv in zip(s_vals, d_vals)])
        norms[f"tube_nu_-2_over_eps2_eps={e}"] = float(
            np.max(sup * d_vals**2) / e**2)
    out = {
        "sup_residual_slope": slope_sup,
        "projected_residual_slope": slope_proj,
        "eps_ratio_median": ratio,
        "hz_order12_max_diff": float(np.max(np.abs(h_exact - h_series))),
        "hz_order12_max_tail_bound": float(np.max(bound12)),
        "hz_tight_order": order_tight,
        "hz_tight_max_diff": float(np.max(np.abs(h_exact - h_tight))),
        "weighted_norms": norms,
        "checks": {
            "sup_slope_window": abs(slope_sup + 2.0) <= 0.2,
            "eps_ratio_window": abs(ratio - 4.0) <= 0.4,
            "projected_slope": slope_proj <= -5.0,
            "hz_series_within_tail_bound": bool(np.all(
                np.abs(h_exact - h_series) <= bound12 + 1e-14)),
            "hz_tight_series_1e-10": float(np.max(np.abs(h_exact - h_tight)))
            <= 1e-10,
        },
    }
    write_json(outdir / "fermi.json", out)
    return out


def stage_solve(config: RunConfig, outdir: Path, ctx: dict) -> dict:
    curve = ctx.get("curve") or _load_curve(config, outdir)
    ctx["curve"] = curve
    h = config.grid_h()
    results = {}
    devs = {}
    for e in sorted(config.eps, reverse=True):
        grid = acpde.Grid2D(R=config.R, h=h if len(config.eps) == 1 else e / 8.0,
                            m=config.n1 + 1)
        coords = fermi.grid_fermi_coords(grid, curve, c_star=config.c_star)
        approx = fermi.build_approx_solution(grid, curve, e,
                                             delta_star=config.delta_star,
                                             coords=coords)
        sol, rep = acpde.newton_solve(grid, e, approx.field(),
                                      tol=config.newton_tol)
        np.savez_compressed(outdir / f"field_eps{e}.npz", values=sol.values,
                            R=config.R, h=grid.h, m=grid.m, eps=e)
        polys = acpde.zero_set_extract(sol)
        zero = np.vstack(polys)
        write_csv(outdir / f"zeroset_eps{e}.csv",
                  {"s1": zero[:, 0], "s2": zero[:, 1]})
        dev = acpde.zero_set_deviation(zero, curve, d_max=10.0)
        devs[e] = dev.max_dev
        results[e] = {
            "iterations": rep.iterations,
            "residual_norms": rep.residual_norms,
            "final_sup_residual": rep.final_sup_residual,
            "converged": rep.converged,
            "linear_stats": rep.linear_stats,
            "zero_components": len(polys),
            "max_principle_defect": sol.max_principle_defect(),
            "zero_max_deviation_d10": dev.max_dev,
        }
        write_json(outdir / f"newton_eps{e}.json", results[e])
        if e == max(config.eps):
            ctx["solution"] = sol
            ctx["grid"] = grid
            ctx["coords"] = coords
    out = {"per_eps": {str(e): results[e] for e in results}}
    checks = {
        "newton_converged": all(r["converged"] for r in results.values()),
        "newton_iterations_le_8": all(r["iterations"] <= 8
                                      for r in results.values()),
        "final_residual_1e-10": all(r["final_sup_residual"] < 1e-10
                                    for r in results.values()),
        "max_principle": all(r["max_principle_defect"] <= 1e-6
                             for r in results.values()),
    }
    if len(devs) >= 2:
        es = sorted(devs, reverse=True)
        ratio = devs[es[0]] / devs[es[1]]
        out["deviation_shrink_ratio"] = ratio
        checks["deviation_shrink_ge_3"] = ratio >= 3.0
    out["checks"] = checks
    write_json(outdir / "solve.json", out)
    return out


def stage_stability(config: RunConfig, outdir: Path, ctx: dict) -> dict:
    curve = ctx.get("curve") or _load_curve(config, outdir)
    eps0 = max(config.eps)
    if "solution" in ctx and ctx.get("grid") is not None:
        grid, sol = ctx["grid"], ctx["solution"]
    else:
        npz = np.load(outdir / f"field_eps{eps0}.npz")
        grid = acpde.Grid2D(R=float(npz["R"]), h=float(npz["h"]),
                            m=int(npz["m"]))
        sol = acpde.ScalarField2D(grid, npz["values"])
    spec_rep = stability.linearization_spectrum(grid, eps0, sol, k=6)
    dil = stability.phi_from_dilation(curve, grid, eps0,
                                      lambda_step=config.lambda_step, u0=sol,
                                      delta_star=config.delta_star,
                                      newton_tol=config.newton_tol)
    np.savez_compressed(outdir / "phi.npz", values=dil.phi.values)
    trials = stability.quadratic_form_check(grid, eps0, sol, dil.phi,
                                            trials=config.trials,
                                            seed=config.seed, curve=curve)
    write_csv(outdir / "qtrials.csv", {
        "q_value": [t.q_value for t in trials],
        "rhs_value": [t.rhs_value for t in trials],
        "identity_gap": [t.identity_gap for t in trials],
        "norm2": [t.norm2 for t in trials],
    })
    q_rel_min = min(t.q_value / t.norm2 for t in trials)
    gap_max = max(t.identity_gap for t in trials)
    tube_cmp = _phi_tube_comparison(curve, grid, eps0, dil, ctx.get("coords"))
    out = {
        "eigenvalues": list(spec_rep.eigenvalues),
        "orthonormality_defect": spec_rep.orthonormality_defect,
        "positivity": dil.positivity,
        "min_resolved_phi": dil.min_resolved_phi,
        "unresolved_fraction": dil.unresolved_fraction,
        "kernel_residual": dil.kernel_residual,
        "q_rel_min": q_rel_min,
        "identity_gap_max": gap_max,
        "phi_tube_agreement": tube_cmp,
        "checks": {
            "phi_positive": dil.positivity,
            "kernel_residual_1e-3": dil.kernel_residual <= 1e-3,
            "lambda_min_ge_-1e-3": spec_rep.eigenvalues[0] >= -1e-3,
            "q_trials_ge_-1e-4": q_rel_min >= -1e-4,
            "identity_gap_1e-2": gap_max <= 1e-2,
        },
    }
    write_json(outdir / "stability.json", out)
    return out


def _phi_tube_comparison(curve, grid, eps, dil, coords):
    """Relative agreement of phi with u1'(t/eps) |zeta0| / eps in the tube."""
    if coords is None:
        coords = fermi.grid_fermi_coords(grid, curve)
    z0 = np.abs(np.interp(coords.foot, curve.s, curve.zeta0()))
    predicted = profile1d.dprofile(coords.t / eps) * z0 / eps
    phiv = dil.phi.values.ravel()
    core = coords.valid & (np.abs(coords.t) <= 2.0 * eps) & (coords.d_gamma < 8.0)
    rel = np.abs(phiv[core] - predicted[core]) / np.max(np.abs(predicted[core]))
    return {"max_relative_gap_core_tube": float(np.max(rel))}


_STAGES = {
    "profile": stage_profile,
    "cone": stage_cone,
    "minsurf": stage_minsurf,
    "fermi": stage_fermi,
    "solve": stage_solve,
    "stability": stage_stability,
}

_STAGE_SENTINELS = {
    "profile": "profile.json",
    "cone": "cone.json",
    "minsurf": "minsurf.json",
    "fermi": "fermi.json",
    "solve": "solve.json",
    "stability": "stability.json",
}


def _stages_for(pipeline: str) -> list:
    if pipeline == "full":
        return ["profile", "cone", "minsurf", "fermi", "solve", "stability"]
    order = []

    def add(st):
        for dep in _STAGE_DEPS[st]:
            add(dep)
        if st not in order:
            order.append(st)

    add(pipeline)
    return order


def run_pipeline(config: RunConfig) -> dict:
    """Execute the configured pipeline, reusing valid stage artifacts.

    Returns the run report (also written to ``report.json``): config
    echo, per-stage outputs and checks, timings, and a manifest with a
    content hash per emitted file.
    """
    config.validate()
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    lock = outdir / ".lock"
    if lock.exists():
        raise RuntimeError(f"run directory locked by {lock.read_text().strip()}"
                           f" (remove {lock} if stale)")
    lock.write_text(str(os.getpid()))
    try:
        ctx: dict = {}
        stages_out = {}
        timings = {}
        resumed = []
        for name in _stages_for(config.pipeline):
            sentinel = outdir / _STAGE_SENTINELS[name]
            hash_file = outdir / f".{name}.hash"
            want = _config_hash(config, _STAGE_KEYS[name])
            if (sentinel.exists() and hash_file.exists()
                    and hash_file.read_text() == want):
                stages_out[name] = json.loads(sentinel.read_text())
                resumed.append(name)
                continue
            t0 = time.perf_counter()
            stages_out[name] = _STAGES[name](config, outdir, ctx)
            timings[name] = time.perf_counter() - t0
            hash_file.write_text(want)
        checks = {f"{st}.{k}": bool(v)
                  for st, out in stages_out.items()
                  for k, v in out.get("checks", {}).items()}
        manifest = {p.name: _sha256(p) for p in sorted(outdir.iterdir())
                    if p.suffix in (".csv", ".json", ".npz")
                    and p.name != "report.json"}
        report = {
            "schema_version": 1,
            "config": _jsonable(asdict(config)),
            "stages": stages_out,
            "resumed_stages": resumed,
            "checks": checks,
            "all_checks_pass": all(checks.values()),
            "manifest": manifest,
            "timings": timings,
        }
        write_json(outdir / "report.json", report)
        return report
    finally:
        lock.unlink(missing_ok=True)


# ---------------------------------------------------------------------------
# Plot-data emission
# ---------------------------------------------------------------------------

def emit_plot_data(outdir, kind: str) -> Path:
    """Write a documented CSV series derived from run artifacts.

    ``decay``: columns (log_r, log_value, fit) from the fermi scan.
    ``zeroset``: columns (s1, s2, source) overlaying curve and zero set.
    ``spectrum``: columns (index, eigenvalue).
    """
    outdir = Path(outdir)
    if kind == "decay":
        data = read_csv(outdir / "fermi_decay.csv")
        lr = np.log(data["d_gamma"])
        lv = np.log(data["sup_residual"])
        slope, intercept = np.polyfit(lr, lv, 1)
        path = outdir / "plot_decay.csv"
        write_csv(path, {"log_r": lr, "log_value": lv,
                         "fit": slope * lr + intercept})
        return path
    if kind == "zeroset":
        curve = read_csv(outdir / "curve.csv")
        zs = None
        for p in sorted(outdir.glob("zeroset_eps*.csv")):
            zs = read_csv(p)
        if zs is None:
            raise FileNotFoundError("no zeroset artifact; run the solve stage")
        path = outdir / "plot_zeroset.csv"
        write_csv(path, {
            "s1": np.concatenate([curve["x"], zs["s1"]]),
            "s2": np.concatenate([curve["y"], zs["s2"]]),
            "source": np.concatenate([np.zeros(curve["x"].size),
                                      np.ones(zs["s1"].size)]),
        })
        return path
    if kind == "spectrum":
        data = json.loads((outdir / "stability.json").read_text())
        vals = data["eigenvalues"]
        path = outdir / "plot_spectrum.csv"
        write_csv(path, {"index": np.arange(len(vals), dtype=float),
                         "eigenvalue": np.array(vals)})
        return path
    raise ValueError(f"unknown plot kind {kind!r}")


# ---------------------------------------------------------------------------
# Command line
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--n1", type=int, default=3)
    p.add_argument("--n2", type=int, default=3)
    p.add_argument("--eps", type=float, nargs="+", default=[0.25])
    p.add_argument("--R", type=float, default=16.0)
    p.add_argument("--h", type=float, default=None)
    p.add_argument("--smax", type=float, default=200.0, dest="s_max")
    p.add_argument("--delta-star", type=float, default=0.5, dest="delta_star")
    p.add_argument("--c-star", type=float, default=0.2, dest="c_star")
    p.add_argument("--nu", type=float, default=None)
    p.add_argument("--nu-prime", type=float, default=None, dest="nu_prime")
    p.add_argument("--jmax", type=int, default=8)
    p.add_argument("--ode-tol", type=float, default=1e-10, dest="ode_tol")
    p.add_argument("--newton-tol", type=float, default=1e-11,
                   dest="newton_tol")
    p.add_argument("--lambda-step", type=float, default=1e-3,
                   dest="lambda_step")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--outdir", type=str, default=None)
    p.add_argument("--config", type=str, default=None,
                   help="flat key = value file; flags override")
    p.add_argument("--emit", type=str, default=None,
                   choices=("decay", "zeroset", "spectrum"),
                   help="also emit a plot-data CSV after the run")


def load_config_file(path) -> dict:
    """Flat ``key = value`` config format (comments with '#')."""
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key == "eps":
            out[key] = tuple(float(v) for v in value.split())
        elif key in ("n1", "n2", "jmax", "trials", "seed"):
            out[key] = int(value)
        elif key in ("pipeline", "outdir"):
            out[key] = value
        else:
            out[key] = float(value)
    return out


def _config_from_args(args, pipeline: str) -> RunConfig:
    base = {}
    if args.config:
        base = load_config_file(args.config)
    flags = dict(
        n1=args.n1, n2=args.n2, eps=tuple(args.eps),
        R=args.R, h=args.h, s_max=args.s_max, delta_star=args.delta_star,
        c_star=args.c_star, nu=args.nu, nu_prime=args.nu_prime,
        jmax=args.jmax, ode_tol=args.ode_tol, newton_tol=args.newton_tol,
        lambda_step=args.lambda_step, trials=args.trials, seed=args.seed,
        outdir=args.outdir,
    )
    base.update({k: v for k, v in flags.items() if v is not None})
    base["pipeline"] = pipeline
    base.setdefault("outdir", f"runs/{pipeline}_{args.n1}_{args.n2}")
    return RunConfig(**base)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="phasecone",
        description="Desk-scale numerics for Allen-Cahn interfaces over "
                    "minimal cones")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in PIPELINES:
        p = sub.add_parser(name, help=f"run the {name} pipeline")
        _add_common(p)
    args = parser.parse_args(argv)
    config = _config_from_args(args, args.command)
    report = run_pipeline(config)
    if args.emit:
        emit_plot_data(config.outdir, args.emit)
    for key, ok in report["checks"].items():
        print(f"{'PASS' if ok else 'FAIL'}  {key}")
    print(f"report: {Path(config.outdir) / 'report.json'}")
    return 0 if report["all_checks_pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
