import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from fracns.params import (INF, InadmissibleIndices, ModelParams, as_exact, check_embedding_F_to_W,
                           check_embedding_W_to_Vinv, derive_force_indices, derive_morrey_indices,
                           parse_exponent, to_json_number, verdict_json)

P = ModelParams(Fraction(3, 2), 3)


def test_alpha_range_enforced():
    for bad in (1, 2, 0.5, 2.5):
        with pytest.raises(ValueError):
            ModelParams(bad, 3)
    with pytest.raises(ValueError):
        ModelParams(1.5, 0)


def test_dimension_warnings():
    assert ModelParams(1.5, 2).warnings and "marginal" in ModelParams(1.5, 2).warnings[0]
    assert ModelParams(1.5, 3).warnings == []


def test_float_inputs_read_exactly():
    assert as_exact(2.9) == Fraction(29, 10)
    assert as_exact("7/5") == Fraction(7, 5)
    assert parse_exponent("inf") is INF


def test_known_indices():
    assert derive_force_indices(P, 3, Fraction(1, 3)).rho == Fraction(4, 9)
    t2 = derive_morrey_indices(P, 2.9, 1.4)
    assert t2.frak_p == Fraction(29, 12) and t2.frak_q == Fraction(15, 2)


def test_inadmissible_raises_with_violations():
    with pytest.raises(InadmissibleIndices) as exc:
        derive_force_indices(P, 3, 1)
    names = [c.name for c in exc.value.violations]
    assert "beta < alpha - d/p0" in names
    loose = derive_force_indices(P, 3, 1, strict=False)
    assert not loose.admissible


def test_p1_two_warns():
    t2 = derive_morrey_indices(P, 2, Fraction(7, 5), strict=False)
    assert any("p1 = 2" in w for w in t2.warnings)
    assert not t2.admissible


def test_embedding_verdicts():
    t1 = derive_force_indices(P, 3, Fraction(1, 3))
    t2 = derive_morrey_indices(P, 2.9, 1.4)
    v = check_embedding_F_to_W(t1, t2)
    assert not v.holds
    assert {c.name for c in v.violated_conditions} >= {"rho*frak_p < 1", "beta == gamma"}
    assert not check_embedding_W_to_Vinv(P, derive_morrey_indices(P, 2.5, 1.4)).holds


def test_json_number_carries_exact_value():
    out = to_json_number(Fraction(29, 12))
    assert out["exact"] == "29/12" and math.isclose(out["value"], 29 / 12)
    doc = verdict_json(P, derive_force_indices(P, 3, Fraction(1, 3)))
    assert doc["admissible"] and doc["derived"]["rho"]["exact"] == "4/9"


@settings(max_examples=60, deadline=None)
@given(a=st.fractions(Fraction(101, 100), Fraction(199, 100)), d=st.integers(1, 5),
       p0=st.integers(2, 20), beta=st.fractions(Fraction(1, 100), Fraction(3, 2)))
def test_rho_formula_exact(a, d, p0, beta):
    idx = derive_force_indices(ModelParams(a, d), p0, beta, strict=False)
    assert idx.rho == 2 - (beta + Fraction(d, p0) + 1) / a
    assert idx.admissible == all(c.holds for c in idx.conditions)


@settings(max_examples=60, deadline=None)
@given(a=st.fractions(Fraction(101, 100), Fraction(199, 100)), d=st.integers(1, 5),
       p1=st.fractions(Fraction(201, 100), Fraction(10, 1)), g=st.fractions(Fraction(0), Fraction(2)))
def test_frak_indices_consistent(a, d, p1, g):
    t2 = derive_morrey_indices(ModelParams(a, d), p1, g, strict=False)
    if 2 * a - 1 - g > 0:
        # frak_q / frak_p relation is independent of gamma
        assert t2.frak_q / t2.frak_p == Fraction(d) / ((a - 1) * p1) + a / ((a - 1) * p1)


def test_dimension_gate_for_index_bundles():
    with pytest.raises(InadmissibleIndices):
        derive_force_indices(ModelParams(1.5, 1), 3, Fraction(1, 3))
    t = derive_morrey_indices(ModelParams(Fraction(3, 2), 2), Fraction(5, 2), Fraction(7, 5), strict=False)
    assert any("marginal" in w for w in t.warnings)
