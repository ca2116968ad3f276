import numpy as np
import pytest

from phasecone.cone import LinkSpec
from phasecone import minsurf


@pytest.fixture(scope="session")
def curve33():
    """Short (3,3) leaf for tube/solver tests."""
    return minsurf.shoot_hardt_simon(LinkSpec(3, 3), s_max=40.0)


@pytest.fixture(scope="session")
def curve33_long():
    """Leaf reaching r ~ 100 for decay-window fits."""
    return minsurf.shoot_hardt_simon(LinkSpec(3, 3), s_max=120.0)


def make_cone_curve(n1, n2, s_lo=2.0, s_hi=30.0, h=0.01, r0=1.0):
    """Synthetic exact-cone generating curve (not a shot leaf).

    Samples the ray through the stationary angle; theta is constant, so
    the curvature set is exactly {0, sin(u)/x * n1, -cos(u)/y * n2}.
    """
    spec = LinkSpec(n1, n2)
    u = minsurf.cone_angle(spec)
    s = np.arange(s_lo, s_hi, h)
    return minsurf.GeneratingCurve(
        spec=spec, s=s,
        x=(r0 + s) * np.cos(u), y=(r0 + s) * np.sin(u),
        theta=np.full_like(s, u))
