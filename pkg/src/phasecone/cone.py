"""Spectral data of sphere-product links and the cones over them.

A link ``S^{n1}(rho1) x S^{n2}(rho2)`` inside the unit sphere ``S^n``
(``n = n1 + n2 + 1``) is minimal when ``rho_i = sqrt(n_i / (n - 1))``.
The cone over it lives in ``R^{n+1}``.  Jacobi fields on the cone behave
like powers ``r**gamma`` where ``gamma`` solves the characteristic
equation ``gamma**2 + (n - 2) gamma - mu = 0`` mode by mode.

Sign convention for stability: the classification used here is
``mu0 >= -((n - 2) / 2)**2`` (stable) and strict inequality for strictly
stable.  This is the condition equivalent to the characteristic roots of
the lowest mode being real, i.e. nonnegative discriminant
``((n - 2)/2)**2 + mu0``; for the sphere-product family it reduces to
``n**2 - 8 n + 8 >= 0``, so strict stability starts at ambient dimension
``n + 1 = 8``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class LinkSpec:
    """Sphere-product link ``S^{n1} x S^{n2}`` in ``S^n``, n = n1 + n2 + 1."""

    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("n1 and n2 must be >= 1")

    @property
    def n(self) -> int:
        """Dimension of the ambient sphere; the cone sits in R^(n+1)."""
        return self.n1 + self.n2 + 1


@dataclass(frozen=True)
class LinkGeometry:
    rho1: float
    rho2: float
    traceH: float
    normA2: float


def link_geometry(spec: LinkSpec) -> LinkGeometry:
    """Radii, mean curvature and squared second fundamental form of the link."""
    n = spec.n
    rho1 = math.sqrt(spec.n1 / (n - 1))
    rho2 = math.sqrt(spec.n2 / (n - 1))
    traceH = spec.n1 * rho2 / rho1 - spec.n2 * rho1 / rho2
    assert abs(traceH) < 1e-12, "link of a sphere product must be minimal"
    normA2 = (rho2 / rho1) ** 2 * spec.n1 + (rho1 / rho2) ** 2 * spec.n2
    return LinkGeometry(rho1=rho1, rho2=rho2, traceH=traceH, normA2=normA2)


def _harmonic_dim(d: int, ell: int) -> int:
    """Dimension of degree-``ell`` spherical harmonics on S^d."""
    if ell == 0:
        return 1
    if ell == 1:
        return d + 1
    return math.comb(ell + d, d) - math.comb(ell + d - 2, d)


@dataclass(frozen=True)
class ConeMode:
    """One eigenvalue of the link operator with its radial exponents.

    ``gamma_plus/minus`` are the characteristic roots (complex when the
    discriminant is negative); ``nu_plus/minus`` their real parts.
    """

    mu: float
    degrees: tuple[int, int]
    multiplicity: int
    gamma_plus: complex
    gamma_minus: complex
    nu_plus: float
    nu_minus: float
    complex_pair: bool
    repeated: bool


@dataclass(frozen=True)
class ConeSpectrum:
    spec: LinkSpec
    modes: tuple[ConeMode, ...]
    stability: str

    @property
    def mu(self) -> tuple[float, ...]:
        return tuple(m.mu for m in self.modes)

    @property
    def nu_plus(self) -> tuple[float, ...]:
        return tuple(m.nu_plus for m in self.modes)

    @property
    def nu_minus(self) -> tuple[float, ...]:
        return tuple(m.nu_minus for m in self.modes)


def link_eigenvalues(spec: LinkSpec, jmax: int) -> list[tuple[float, int, int, int]]:
    """Lowest ``jmax`` eigenvalues of ``-(Laplace + |A|^2)`` on the link.

    Returns tuples ``(mu, a, b, multiplicity)`` sorted by ``mu`` ascending
    with ties broken lexicographically in the sphere degrees ``(a, b)``.
    ``mu = a(a + n1 - 1)/rho1^2 + b(b + n2 - 1)/rho2^2 - (n - 1)``.
    """
    if jmax < 1:
        raise ValueError("jmax must be >= 1")
    geo = link_geometry(spec)
    n = spec.n
    # Mode degrees beyond this bound cannot be among the lowest jmax.
    amax = jmax + 2
    while True:
        entries = []
        for a in range(amax + 1):
            for b in range(amax + 1):
                lam = (a * (a + spec.n1 - 1) / geo.rho1**2
                       + b * (b + spec.n2 - 1) / geo.rho2**2)
                entries.append((lam - (n - 1), a, b,
                                _harmonic_dim(spec.n1, a) * _harmonic_dim(spec.n2, b)))
        entries.sort(key=lambda e: (e[0], e[1], e[2]))
        # Make sure truncation at amax did not cut into the first jmax modes:
        # the cheapest excluded mode has degree amax+1 in one factor.
        cheapest_excluded = min(
            (amax + 1) * (amax + spec.n1) / geo.rho1**2,
            (amax + 1) * (amax + spec.n2) / geo.rho2**2,
        ) - (n - 1)
        if len(entries) >= jmax and entries[jmax - 1][0] < cheapest_excluded:
            return entries[:jmax]
        amax *= 2


def characteristic_roots(mu: float, n: int):
    """Roots of ``gamma**2 + (n - 2) gamma - mu = 0`` and their metadata."""
    half = (n - 2) / 2.0
    disc = half * half + mu
    if disc > 0.0:
        root = math.sqrt(disc)
        gp, gm = -half + root, -half - root
        return complex(gp), complex(gm), gp, gm, False, False
    if disc == 0.0:
        return complex(-half), complex(-half), -half, -half, False, True
    root = math.sqrt(-disc)
    gp, gm = complex(-half, root), complex(-half, -root)
    return gp, gm, -half, -half, True, False


def cone_spectrum(spec: LinkSpec, jmax: int) -> ConeSpectrum:
    """Characteristic and indicial roots for the lowest ``jmax`` modes."""
    modes = []
    for mu, a, b, mult in link_eigenvalues(spec, jmax):
        gp, gm, nup, num, cplx, rep = characteristic_roots(mu, spec.n)
        modes.append(ConeMode(mu=mu, degrees=(a, b), multiplicity=mult,
                              gamma_plus=gp, gamma_minus=gm,
                              nu_plus=nup, nu_minus=num,
                              complex_pair=cplx, repeated=rep))
    return ConeSpectrum(spec=spec, modes=tuple(modes),
                        stability=classify_stability(spec))


def classify_stability(spec: LinkSpec) -> str:
    """Classify the cone: 'strictly_stable', 'stable' or 'unstable'.

    Uses ``mu0`` of the lowest (constant) mode against ``-((n-2)/2)**2``.
    """
    mu0 = link_eigenvalues(spec, 1)[0][0]
    return classify_stability_from_mu0(mu0, spec.n)


def classify_stability_from_mu0(mu0: float, n: int) -> str:
    threshold = -(((n - 2) / 2.0) ** 2)
    if mu0 > threshold:
        return "strictly_stable"
    if mu0 == threshold:
        return "stable"
    return "unstable"
