import math
from fractions import Fraction

import numpy as np
import pytest

from fracns.grid import (Mode, SpaceGrid, SpaceTimeVectorField, TimeGrid, VectorField, force_A,
                         sample_analytic)
from fracns.norms import (MorreyScan, besov_thermic_norm, cylinder_profile, force_F_norm,
                          linfty_alpha_norm, parabolic_morrey_norm, rescale)
from fracns.params import ModelParams, derive_force_indices

A = 1.5


def test_besov_closed_forms():
    psi = sample_analytic(Mode((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)), SpaceGrid(3, 8, math.pi))
    frac = besov_thermic_norm(psi, A - 1, "fractional", A).value
    heat = besov_thermic_norm(psi, A - 1, "heat", A).value
    assert math.isclose(frac, (1 / 3) ** (1 / 3) * math.exp(-1 / 3), rel_tol=1e-8)
    assert math.isclose(heat, (1 / 4) ** (1 / 4) * math.exp(-1 / 4), rel_tol=1e-8)


def test_besov_argument_checks():
    psi = sample_analytic(Mode((1.0,), (1.0,)), SpaceGrid(1, 8, math.pi))
    with pytest.raises(ValueError):
        besov_thermic_norm(psi, 0.0)
    with pytest.raises(ValueError):
        besov_thermic_norm(psi, 0.5, "bogus")


def test_linfty_alpha_of_power_law():
    g, tg = SpaceGrid(1, 8, 1.0), TimeGrid(2.0, 16)
    data = np.array([t ** (-(A - 1) / A) * np.ones((1, 8)) for t in tg.nodes])
    rep = linfty_alpha_norm(SpaceTimeVectorField(g, tg, data), A)
    assert math.isclose(rep.value, 1.0, rel_tol=1e-12)


def test_morrey_p_equals_q_bounded_by_global_lp():
    # with p = q and cylinders narrower than the box, the Morrey norm is at most the L^p norm
    g, tg = SpaceGrid(1, 32, math.pi), TimeGrid(1.0, 32)
    x = g.coords()
    data = np.array([np.exp(-x**2) * np.exp(-t) for t in tg.nodes])[:, None]
    f = SpaceTimeVectorField(g, tg, data)
    m = parabolic_morrey_norm(f, 2.0, 2.0, MorreyScan(-3, 1, 1.0, stride=1, splits=16), A).value
    ref = math.sqrt((1 - math.exp(-2)) / 2 * math.sqrt(math.pi / 2))
    assert 0.5 * ref < m <= ref * 1.001


def test_scan_needs_four_levels():
    with pytest.raises(ValueError):
        MorreyScan(0, 2)


def test_cylinder_profile_monotone():
    g, tg = SpaceGrid(1, 32, math.pi), TimeGrid(4.0, 16)
    f = SpaceTimeVectorField(g, tg, np.ones((16, 1, 32)))
    prof = cylinder_profile(f, 1.0, MorreyScan(-2, 1, 1.0, center=(0.0, (16,))), A)
    assert np.all(np.diff(prof) > 0)


def test_force_F_norm_and_scaling():
    P = ModelParams(Fraction(3, 2), 3)
    t1 = derive_force_indices(P, 3, Fraction(1, 3))
    g, tg = SpaceGrid(3, 16, math.pi), TimeGrid(4.0, 8)
    f = sample_analytic(force_A(3, math.pi, float(t1.rho)), g, tg)
    v = force_F_norm(f, t1).value
    for lam in (0.5, 2.0):
        assert math.isclose(force_F_norm(rescale(f, lam, "force", A), t1).value, v, rel_tol=1e-10)


def test_rescale_rejects_bad_kind():
    g = SpaceGrid(1, 8, 1.0)
    with pytest.raises(ValueError):
        rescale(VectorField(g, np.zeros((1, 8))), 2.0, "velocity", A)
    with pytest.raises(ValueError):
        rescale(VectorField(g, np.zeros((1, 8))), -1.0, "initial", A)
