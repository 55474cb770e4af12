import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def _normalize(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


coords = st.floats(-1, 1, allow_nan=False, allow_infinity=False)
vec3 = st.tuples(coords, coords, coords).filter(lambda v: np.linalg.norm(v) > 1e-3)
unit_vectors = vec3.map(_normalize)
ball_vectors = st.tuples(vec3, st.floats(0, 1)).map(lambda p: _normalize(p[0]) * p[1])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rand_units(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)
