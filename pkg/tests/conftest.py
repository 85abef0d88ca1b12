"""Shared fixtures: one cover/payload/spec combination at the working point.

Session scope keeps the FFT-heavy setup to a single run; every fixture value
is immutable, so sharing across tests is safe.
"""

import pytest

from ringmark.codec import DetectorConfig, embed_digital
from ringmark.model import DEFAULT_LAYOUT, Payload, WatermarkSpec
from ringmark.synthetic import procedural_cover

#: Embedding strength with a 2x margin over the weakest clean round trip
#: (find_working_strength at the default layout and threshold).
WORKING_STRENGTH = 64.0

#: Projector gain with a 2x margin over the weakest clean capture decode
#: (find_working_gain at the default layout).
WORKING_GAIN = 0.64

#: Reference canvas: the ID-photo size the working points were tuned on.
WORKING_SIZE = (567, 390)


@pytest.fixture(scope="session")
def payload24() -> Payload:
    """24-bit payload with 13 ones; dense enough to be detectable."""
    return Payload.from_string("101101001110010110100101")


@pytest.fixture(scope="session")
def spec64(payload24) -> WatermarkSpec:
    return WatermarkSpec(layout=DEFAULT_LAYOUT, payload=payload24, strength=WORKING_STRENGTH)


@pytest.fixture(scope="session")
def cover567():
    return procedural_cover(*WORKING_SIZE, seed=1)


@pytest.fixture(scope="session")
def marked567(cover567, spec64):
    return embed_digital(cover567, spec64)


@pytest.fixture(scope="session")
def detector() -> DetectorConfig:
    return DetectorConfig()
