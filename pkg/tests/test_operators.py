import math

import numpy as np
import pytest
from scipy.integrate import quad

from fracns.grid import SpaceGrid, SpaceTimeVectorField, SpectralField, TimeGrid, VectorField, forward_transform
from fracns.operators import (MeanNotZeroError, RieszConfig, calpha_margin,
                              fractional_laplacian_power, leray_project, parabolic_riesz_potential,
                              self_cell_integral, unit_cylinder_volume, valpha_sandwich_bounds)

A = 1.5


def test_negative_power_needs_zero_mean():
    g = SpaceGrid(1, 8, 1.0)
    spec = forward_transform(VectorField(g, np.ones((1, 8))))
    with pytest.raises(MeanNotZeroError):
        fractional_laplacian_power(spec, -0.5)
    assert fractional_laplacian_power(spec, 0.5).norm() < 1e-14


def test_leray_keeps_zero_mode(rng):
    g = SpaceGrid(2, 8, 1.0)
    c = np.zeros((2, 8, 8), complex)
    c[:, 0, 0] = [1.0, 2.0]
    assert np.allclose(leray_project(SpectralField(g, c)).coeffs, c)


def test_unit_cylinder_volume():
    assert math.isclose(unit_cylinder_volume(3, 1.5), 1.2767, rel_tol=1e-3)
    # d = 1 by direct quadrature of 2 * 2 (1 - |t|^{1/alpha})
    v = 2 * quad(lambda t: 2 * (1 - t ** (1 / 1.5)), 0, 1)[0]
    assert math.isclose(unit_cylinder_volume(1, 1.5), v, rel_tol=1e-12)


@pytest.mark.parametrize("s", [0.3, 0.5, 0.9])
@pytest.mark.parametrize("U", [1e-4, 0.05, 3.0])
def test_self_cell_exact_d1(s, U):
    h, m = 0.3, 1 + A - s
    exact = 2 * quad(lambda t: ((t ** (1 / A)) ** (1 - m) - (t ** (1 / A) + h / 2) ** (1 - m)) / (m - 1),
                     0, U, epsabs=1e-15, epsrel=1e-13, limit=400)[0]
    assert math.isclose(self_cell_integral(1, A, s, h, U), exact, rel_tol=1e-10)


def _cylinder_indicator(d, n, L, N):
    g, tg = SpaceGrid(d, n, L), TimeGrid(2.0, N, 1.0)
    r = np.sqrt(sum(x * x for x in g.mesh()))
    data = np.array([((abs(t - 1) ** (1 / A) + r) < 1).astype(float) for t in tg.nodes])
    return SpaceTimeVectorField(g, tg, data)


def test_riesz_cylinder_oracle_d1():
    # I_{alpha-1} of the unit cylinder at its centre equals 4 (alpha/(alpha-1) - 1) = 8 in d = 1
    f = _cylinder_indicator(1, 32, 1.5, 64)
    out = parabolic_riesz_potential(f, RieszConfig(A - 1, A))
    k = int(np.argmin(abs(f.tgrid.nodes - 1)))
    assert abs(out.data[k, 0, 16] / 8.0 - 1) < 1e-2


def test_riesz_cylinder_oracle_d3():
    f = _cylinder_indicator(3, 16, 1.5, 32)
    out = parabolic_riesz_potential(f, RieszConfig(A - 1, A))
    k = int(np.argmin(abs(f.tgrid.nodes - 1)))
    assert abs(out.data[k, 0, 8, 8, 8] / 11.473054625976914 - 1) < 1e-2


def test_riesz_guards():
    f = _cylinder_indicator(1, 8, 1.5, 4)
    with pytest.raises(ValueError):
        parabolic_riesz_potential(f, RieszConfig(3.0, A))
    big = _cylinder_indicator(1, 64, 1.5, 4)
    with pytest.raises(ValueError):
        parabolic_riesz_potential(big, RieszConfig(0.5, A, max_n=32))


def _decay_field(eps, n=16, N=16):
    g, tg = SpaceGrid(1, n, 4.0), TimeGrid(4.0, N)
    x = np.abs(g.coords())
    data = np.array([eps * (t ** (1 / A) + x) ** (-(A - 1)) for t in tg.nodes])
    return SpaceTimeVectorField(g, tg, data[:, None])


def test_calpha_small_member_large_not():
    small = calpha_margin(_decay_field(0.05), A)
    large = calpha_margin(_decay_field(50.0), A)
    assert small.member and not large.member
    assert calpha_margin(_decay_field(0.0), A).member


def test_calpha_rejects_negative():
    f = _decay_field(-1.0)
    with pytest.raises(ValueError):
        calpha_margin(f, A)


def test_valpha_sandwich_consistent():
    g, tg = SpaceGrid(3, 8, math.pi), TimeGrid(4.0, 8)
    x = g.mesh()
    prof = np.stack([np.sin(x[1]), np.sin(x[2]), np.sin(x[0])])
    data = np.array([np.exp(-t) * prof for t in tg.nodes])
    b = valpha_sandwich_bounds(SpaceTimeVectorField(g, tg, data), "V", 2.5, A)
    assert b.consistent and b.lower <= b.holder_constant * b.upper * 1.05
    bi = valpha_sandwich_bounds(SpaceTimeVectorField(g, tg, data), "Vinv", 2.5, A)
    assert bi.direct is not None and bi.direct > 0
