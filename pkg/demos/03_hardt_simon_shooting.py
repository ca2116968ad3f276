"""Shoot the one-sided minimal leaf asymptotic to the critical cone.

Starting on the axis at unit distance from the origin, the generating
curve of the O(4) x O(4)-invariant minimal hypersurface rises toward the
diagonal cone, approaching it like r^{-2} (the slowest rate its indicial
roots allow).  In low dimensions the same shot crosses the cone instead:
that regime is detected and reported, not integrated through.
"""

import numpy as np

from phasecone import LinkSpec, fit_decay_exponent, shoot_hardt_simon
from phasecone.minsurf import (ConeCrossingError, curve_geometry,
                               foliation_check, jacobi_apply, jacobi_interior,
                               uv_cross_check)

curve = shoot_hardt_simon(LinkSpec(3, 3), s_max=200.0)
print(f"samples: {curve.s.size}, one-sided: {bool(np.all(curve.y < curve.x))}")
print(f"endpoint angles: polar {np.arctan2(curve.y[-1], curve.x[-1]):.6f}, "
      f"tangent {curve.theta[-1]:.6f} (stationary value {np.pi/4:.6f})")

expo, amp, _ = fit_decay_exponent(curve.r, curve.distance_to_cone(),
                                  (10.0, 80.0))
print(f"cone-distance decay: {amp:.3f} * r^{expo:.3f}   (rate -2 expected)")

geo = curve_geometry(curve)
print(f"minimality residual (4th-order recheck): {geo.minimality_residual:.2e}")

# The dilation Jacobi field p.N: sign-definite, same decay rate, and
# annihilated by the Jacobi operator along the curve.
z0 = curve.zeta0()
expz, _, _ = fit_decay_exponent(curve.r, np.abs(z0), (10.0, 80.0))
mask = jacobi_interior(curve)
rel = np.max(np.abs(jacobi_apply(curve, z0)[mask])) \
    / np.max(np.abs(z0) / curve.d_gamma**2)
print(f"zeta0: sign constant {bool(np.all(z0 < 0))}, decay r^{expz:.3f}, "
      f"Jacobi residual (scaled) {rel:.1e}")

# Dilates of the leaf foliate the region between cone and axis.
rep = foliation_check(curve, (0.5, 1.0, 2.0))
print(f"foliation: disjoint={rep.all_disjoint}, "
      f"monotone angle={rep.angle_monotone}, "
      f"max ray crossings={rep.max_ray_crossings}")

# The printed angular system traces the same orbits, time-reversed.
print("printed (u,v) flow comparison:", uv_cross_check(curve))

# The subcritical control: the (1,1) shot must hit the cone.
try:
    shoot_hardt_simon(LinkSpec(1, 1), s_max=100.0)
except ConeCrossingError as exc:
    print(f"(1,1) control: {exc}")
