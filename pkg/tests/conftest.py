import random

import pytest

from reclass.corpus import make_frame, pose_offsets
from reclass.rig import Rig, sensor_carrier_geometry


@pytest.fixture
def home_rig():
    return Rig(geometry=sensor_carrier_geometry())


@pytest.fixture
def frame_maker(home_rig):
    """Render a canonical pose into a sensor-frame skeleton at (t, x, z)."""

    def make(pose="neutral", t=0.0, x=3.0, z=1.5, rng=None, sigma=0.0, dropout=0.0, present=True):
        return make_frame(
            t, x, z, pose_offsets(pose), home_rig,
            rng=rng, sigma=sigma, dropout=dropout, present=present,
        )

    return make


@pytest.fixture
def rng():
    return random.Random(20260810)
