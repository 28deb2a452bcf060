import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracns.grid import (GaussianBump, Mode, RandomModes, SpaceGrid, TaylorGreen, TimeGrid,
                         VectorField, descriptor_from_dict, force_B, forward_transform, from_bytes,
                         from_csv, inverse_transform, is_divergence_free, parseval_sides,
                         sample_analytic, to_bytes, to_csv)


def test_single_mode_hits_two_coefficients():
    g = SpaceGrid(1, 16, math.pi)
    spec = forward_transform(sample_analytic(Mode((1.0,), (1.0,)), g))
    mag = np.abs(spec.coeffs[0])
    assert np.isclose(mag[1], 0.5) and np.isclose(mag[-1], 0.5)
    mag[[1, -1]] = 0
    assert mag.max() < 1e-14


def test_roundtrip_and_parseval(rng):
    g = SpaceGrid(3, 8, 2.0)
    f = VectorField(g, rng.standard_normal((3,) + g.shape))
    back = inverse_transform(forward_transform(f))
    assert np.abs(back.data - f.data).max() < 1e-12
    a, b = parseval_sides(f)
    assert math.isclose(a, b, rel_tol=1e-12)


def test_time_grid_graded_and_exact_end():
    tg = TimeGrid(4.0, 64)
    assert tg.nodes[-1] == 4.0 and np.all(np.diff(tg.nodes) > 0)
    assert tg.edges[0] == 0.0
    assert np.allclose(tg.refined(4).nodes[3::4], tg.nodes)


def test_rejects_nonfinite():
    g = SpaceGrid(1, 4, 1.0)
    with pytest.raises(ValueError):
        VectorField(g, np.array([[0.0, np.nan, 0.0, 0.0]]))


def test_taylor_green_divergence_free():
    g = SpaceGrid(3, 16, math.pi)
    assert is_divergence_free(forward_transform(sample_analytic(TaylorGreen(3), g)))
    assert is_divergence_free(forward_transform(sample_analytic(RandomModes(3, 5, solenoidal=True), g)))


def test_force_B_values():
    g, tg = SpaceGrid(3, 8, math.pi), TimeGrid(1.0, 4)
    f = sample_analytic(force_B((1.0, 0, 0), (0, 1.0, 0)), g, tg)
    c = (slice(None), 1, 4, 4, 4)  # x = 0
    assert np.allclose(f.data[c], tg.nodes ** -0.4)


def test_serialization_roundtrip(rng):
    g = SpaceGrid(2, 8, 1.5)
    f = VectorField(g, rng.standard_normal((2,) + g.shape))
    assert np.array_equal(from_bytes(to_bytes(f)).data, f.data)
    assert np.abs(from_csv(to_csv(f), g.L).data - f.data).max() < 1e-15


def test_descriptor_dict_roundtrip():
    d = GaussianBump(center=(0.0, 0.0), width=0.3, v=(1.0, 0.0))
    assert descriptor_from_dict(d.to_dict()) == d


@settings(max_examples=25, deadline=None)
@given(n=st.sampled_from([4, 8, 16]), L=st.floats(0.5, 10), seed=st.integers(0, 10**6))
def test_roundtrip_property(n, L, seed):
    g = SpaceGrid(2, n, L)
    f = VectorField(g, np.random.default_rng(seed).standard_normal((2,) + g.shape))
    assert np.abs(inverse_transform(forward_transform(f)).data - f.data).max() < 1e-12
