"""One-dimensional heteroclinic interface profile and its linearization.

The profile ``u1(t) = tanh(t / sqrt(2))`` is the unique odd, increasing,
bounded solution of ``u'' + u - u**3 = 0``.  Everything in this module is
closed form except the discrete eigenvalue check and the moment
quadratures.

Note on the first integral: differentiating ``2*u'**2 - (1 - u**2)**2``
along solutions of the ODE gives ``4*u'*(u'' + u - u**3) = 0``, so this
combination (not ``4*u'**2 - (1 - u**2)**2``) is the conserved quantity,
and it vanishes identically on the heteroclinic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.linalg import eigh_tridiagonal

SQRT2 = np.sqrt(2.0)

#: Bottom of the continuous spectrum of L0 = -(d^2/dt^2 + 1 - 3 u1^2).
SPECTRUM_EDGE = 2.0

#: Quadrature truncation: |u1'(t)| <= sqrt(2) exp(-sqrt(2)|t|), so the
#: tail of any polynomial-weighted moment beyond |t| = 40 is < 1e-14.
TAIL_CUT = 40.0


class GridResolutionError(ValueError):
    """Raised when a discretization is too coarse for reliable output."""


def evaluate_profile(t):
    """Evaluate the interface profile and its conserved energy.

    Parameters
    ----------
    t : float or array_like
        Evaluation points.

    Returns
    -------
    u, du, ddu, energy : ndarray or float
        Profile value, first and second derivatives, and the conserved
        quantity ``2*du**2 - (1 - u**2)**2`` (identically zero).
    """
    t = np.asarray(t, dtype=float)
    u = np.tanh(t / SQRT2)
    sech2 = 1.0 - u * u
    du = sech2 / SQRT2
    ddu = -u * sech2
    energy = 2.0 * du * du - sech2 * sech2
    if t.ndim == 0:
        return float(u), float(du), float(ddu), float(energy)
    return u, du, ddu, energy


def profile(t):
    """Profile value ``tanh(t / sqrt(2))``."""
    return np.tanh(np.asarray(t, dtype=float) / SQRT2)


def dprofile(t):
    """First derivative of the profile, ``(1 - u**2) / sqrt(2)``."""
    u = np.tanh(np.asarray(t, dtype=float) / SQRT2)
    return (1.0 - u * u) / SQRT2


def ground_mode(t):
    """Zero mode ``w0 = cosh(t/sqrt(2))**-2`` of L0 (eigenvalue 0)."""
    return np.cosh(np.asarray(t, dtype=float) / SQRT2) ** -2.0


def excited_mode(t):
    """Mode ``w1 = sinh(t/sqrt(2)) / cosh(t/sqrt(2))**2`` (eigenvalue 3/2)."""
    x = np.asarray(t, dtype=float) / SQRT2
    return np.sinh(x) / np.cosh(x) ** 2


def l0_apply_exact(t, which):
    """Apply L0 to one of the closed-form modes using exact derivatives.

    ``which`` is ``0`` for the ground mode or ``1`` for the excited mode.
    Returns ``L0 w``; for the exact eigenfunctions this equals
    ``0 * w0`` resp. ``1.5 * w1`` up to roundoff.
    """
    x = np.asarray(t, dtype=float) / SQRT2
    s = 1.0 / np.cosh(x)
    th = np.tanh(x)
    u2 = th * th
    if which == 0:
        w = s * s
        # d^2/dt^2 w0 = 2 sech^2 tanh^2 - sech^4   (chain rule, dt = sqrt(2) dx)
        d2 = 2.0 * s * s * th * th - s ** 4
    elif which == 1:
        w = np.sinh(x) * s * s
        # d^2/dt^2 w1 = (1/2)(6 sinh^3 sech^4 - 5 sinh sech^2)
        d2 = 0.5 * (6.0 * np.sinh(x) ** 3 * s ** 4 - 5.0 * np.sinh(x) * s * s)
    else:
        raise ValueError("which must be 0 or 1")
    return -(d2 + w - 3.0 * u2 * w)


@dataclass(frozen=True)
class L0Spectrum:
    """Two lowest eigenvalues of the discretized L0 plus exact-mode residuals."""

    lambda0: float
    lambda1: float
    spectrum_edge: float
    identity_residual0: float
    identity_residual1: float


def l0_eigencheck(grid_halfwidth: float = 20.0, spacing: float = 0.01) -> L0Spectrum:
    """Two lowest Dirichlet eigenvalues of L0 on ``[-L, L]``.

    Uses second-order central differences on a uniform grid.  Also
    evaluates the closed-form eigenfunction identities ``L0 w0 = 0`` and
    ``L0 w1 = 1.5 w1`` pointwise on a dense sample and reports the
    maximal residuals.

    Raises
    ------
    GridResolutionError
        If ``spacing > 0.05`` or ``grid_halfwidth < 15`` (eigenvalues
        would be unreliable).
    """
    if spacing > 0.05:
        raise GridResolutionError(f"spacing {spacing} too coarse; need <= 0.05")
    if grid_halfwidth < 15.0:
        raise GridResolutionError(
            f"grid halfwidth {grid_halfwidth} too small; need >= 15"
        )
    L = float(grid_halfwidth)
    h = float(spacing)
    n = int(round(2.0 * L / h)) - 1
    t = -L + h * np.arange(1, n + 1)
    u = profile(t)
    potential = -(1.0 - 3.0 * u * u)
    diag = 2.0 / h**2 + potential
    off = -np.ones(n - 1) / h**2
    vals = eigh_tridiagonal(diag, off, select="i", select_range=(0, 1))[0]

    ts = np.linspace(-30.0, 30.0, 4001)
    res0 = float(np.max(np.abs(l0_apply_exact(ts, 0))))
    res1 = float(np.max(np.abs(l0_apply_exact(ts, 1) - 1.5 * excited_mode(ts))))
    return L0Spectrum(float(vals[0]), float(vals[1]), SPECTRUM_EDGE, res0, res1)


@dataclass(frozen=True)
class ProfileMoments:
    """Moments of ``(u1')**2``: the normalization ``c`` and ``m2k``.

    ``c = integral (u1')**2 dt`` and ``m2k[k-1] = integral t**(2k) (u1')**2 dt``
    for ``k = 1..K``.  Odd moments vanish by parity and are not stored.
    """

    c: float
    m2k: tuple[float, ...]


def profile_moments(K: int = 2) -> ProfileMoments:
    """Compute ``c`` and the even moments ``m2k`` by adaptive quadrature.

    Integration is over ``[-T, T]`` with ``T = TAIL_CUT``; the exponential
    tail of ``(u1')**2`` puts the truncation error below 1e-14 for any
    polynomial weight of the orders used here.
    """
    if K < 0:
        raise ValueError("K must be >= 0")

    def integrand(t, p):
        return t**p * dprofile(t) ** 2

    c = quad(integrand, -TAIL_CUT, TAIL_CUT, args=(0,), limit=200,
             epsabs=1e-14, epsrel=1e-13)[0]
    m2k = tuple(
        quad(integrand, -TAIL_CUT, TAIL_CUT, args=(2 * k,), limit=200,
             epsabs=1e-14, epsrel=1e-13)[0]
        for k in range(1, K + 1)
    )
    return ProfileMoments(c=c, m2k=m2k)
