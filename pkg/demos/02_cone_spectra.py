"""Survey cone spectra and indicial roots across sphere-product links.

For the cone over S^{n1} x S^{n2} the radial behavior of Jacobi fields is
governed by the roots of gamma^2 + (n-2) gamma - mu_j = 0 mode by mode.
The lowest mode has mu_0 = -(n-1); its roots split (strict stability)
exactly when the ambient dimension n+1 reaches 8.
"""

from phasecone import LinkSpec, cone_spectrum, link_geometry

print(f"{'link':>8} {'n+1':>4} {'mu0':>7} {'nu0+':>8} {'nu0-':>8} "
      f"{'stability':>16}")
for n1, n2 in ((1, 1), (1, 2), (2, 2), (2, 3), (3, 3), (3, 4), (4, 4),
               (2, 4), (1, 5)):
    spec = LinkSpec(n1, n2)
    cs = cone_spectrum(spec, 1)
    m0 = cs.modes[0]
    tag = " (complex pair)" if m0.complex_pair else ""
    print(f"  ({n1},{n2}) {spec.n + 1:>4} {m0.mu:>7.1f} {m0.nu_plus:>8.3f} "
          f"{m0.nu_minus:>8.3f} {cs.stability:>16}{tag}")

print("\nFull low-lying table for the critical case (3,3):")
cs = cone_spectrum(LinkSpec(3, 3), 6)
geo = link_geometry(LinkSpec(3, 3))
print(f"link radii {geo.rho1:.4f}, {geo.rho2:.4f}; |A|^2 = {geo.normA2}")
print(f"{'(a,b)':>7} {'mu':>7} {'mult':>5} {'nu+':>8} {'nu-':>8}")
for m in cs.modes:
    print(f"  {str(m.degrees):>6} {m.mu:>7.2f} {m.multiplicity:>5} "
          f"{m.nu_plus:>8.3f} {m.nu_minus:>8.3f}")
