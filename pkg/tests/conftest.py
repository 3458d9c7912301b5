import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from inkblend.blending import landmark_depth_fallback
from inkblend.geometry import build_regions, extend_forehead
from inkblend.samples import synthetic_face, synthetic_landmarks, template_pack

FACE_W, FACE_H = 224, 280


@pytest.fixture(scope="session")
def lm():
    return synthetic_landmarks(FACE_W, FACE_H)


@pytest.fixture(scope="session")
def ext(lm):
    return extend_forehead(lm)


@pytest.fixture(scope="session")
def regions(ext):
    return build_regions(ext, FACE_W, FACE_H)


@pytest.fixture(scope="session")
def face(lm):
    return synthetic_face(lm)


@pytest.fixture(scope="session")
def catalog():
    return template_pack()


@pytest.fixture(scope="session")
def fallback_depth(ext):
    return landmark_depth_fallback(ext, FACE_W, FACE_H)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
