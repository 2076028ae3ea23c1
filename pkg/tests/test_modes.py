import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nfnls.modes import (
    FLParams,
    ModeVector,
    fl_norm,
    gauge_transform,
    interaction_representation,
    mass,
)


def test_norm_hand_values():
    u = ModeVector.from_dict(3, {0: 3 + 4j, 2: 1.0})
    assert fl_norm(u, FLParams(0, 1)) == pytest.approx(6.0, rel=1e-14)
    assert fl_norm(u, FLParams(0, 2)) == pytest.approx(math.sqrt(26.0), rel=1e-14)
    assert fl_norm(u, FLParams(0, math.inf)) == pytest.approx(5.0, rel=1e-14)
    # weight <2> = sqrt(5)
    assert fl_norm(u, FLParams(1, 1)) == pytest.approx(5.0 + math.sqrt(5.0), rel=1e-14)


def test_norm_rejects_bad_params():
    with pytest.raises(ValueError):
        FLParams(0, 0.5)
    with pytest.raises(ValueError):
        FLParams(math.nan, 2)


def test_mass_matches_squared_l2():
    rng = np.random.default_rng(0)
    u = ModeVector(5, rng.standard_normal(11) + 1j * rng.standard_normal(11))
    assert mass(u) == pytest.approx(fl_norm(u, FLParams(0, 2)) ** 2, rel=1e-13)


@settings(deadline=None, max_examples=60)
@given(
    data=st.lists(
        st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=9
    ),
    p_lo=st.floats(1.0, 6.0),
    p_delta=st.floats(0.0, 6.0),
)
def test_norm_monotone_in_p(data, p_lo, p_delta):
    # l^p norms shrink as p grows, so the space scale is increasing in p
    coeffs = [re + 1j * im for re, im in data]
    coeffs += [0.0] * (9 - len(coeffs))
    u = ModeVector(4, coeffs)
    lo = fl_norm(u, FLParams(0, p_lo))
    hi = fl_norm(u, FLParams(0, p_lo + p_delta))
    assert hi <= lo + 1e-9 * max(1.0, lo)
    assert fl_norm(u, FLParams(0, math.inf)) <= lo + 1e-9 * max(1.0, lo)


def test_gauge_preserves_modulus_and_roundtrips():
    rng = np.random.default_rng(1)
    u = ModeVector(4, rng.standard_normal(9) + 1j * rng.standard_normal(9))
    for sign in (1, -1):
        g = gauge_transform(u, 0.7, sign)
        assert np.allclose(np.abs(g.coeffs), np.abs(u.coeffs), atol=1e-14)
        back = gauge_transform(g, 0.7, sign, direction="inverse")
        assert np.allclose(back.coeffs, u.coeffs, atol=1e-13)
    with pytest.raises(ValueError):
        gauge_transform(u, 0.1, 2)
    with pytest.raises(ValueError):
        gauge_transform(u, 0.1, 1, direction="sideways")


def test_interaction_representation_roundtrip():
    rng = np.random.default_rng(2)
    u = ModeVector(6, rng.standard_normal(13) + 1j * rng.standard_normal(13))
    prof = interaction_representation(u, 0.3)
    # mode n picks up exactly the phase n^2 t
    assert prof.get(3) == pytest.approx(u.get(3) * np.exp(9j * 0.3), rel=1e-13)
    back = interaction_representation(prof, 0.3, direction="inverse")
    assert np.allclose(back.coeffs, u.coeffs, atol=1e-13)
    same = interaction_representation(u, 0.0)
    assert np.array_equal(same.coeffs, u.coeffs)


def test_mode_vector_construction_and_access():
    u = ModeVector.from_dict(2, {-2: 1j, 1: 2.0})
    assert u.get(-2) == 1j
    assert u.get(5) == 0.0
    assert u.truncated(1).get(-2) == 0.0
    assert u.truncated(1).get(1) == 2.0
    with pytest.raises(ValueError):
        ModeVector.from_dict(2, {3: 1.0})
    with pytest.raises(ValueError):
        ModeVector(-1)
    with pytest.raises(ValueError):
        ModeVector(2, [1.0, 2.0])


def test_arithmetic_requires_matching_lattice():
    a = ModeVector(2)
    b = ModeVector(3)
    with pytest.raises(ValueError):
        _ = a + b


def test_json_roundtrip_and_sorted_schema():
    rng = np.random.default_rng(3)
    u = ModeVector(3, rng.standard_normal(7) + 1j * rng.standard_normal(7))
    doc = json.loads(u.to_json())
    ns = [row[0] for row in doc["coeffs"]]
    assert ns == sorted(ns) == list(range(-3, 4))
    v = ModeVector.from_json(u.to_json())
    assert np.array_equal(u.coeffs, v.coeffs)


def test_json_rejects_malformed_documents():
    with pytest.raises(ValueError):
        ModeVector.from_json_dict({"coeffs": []})
    with pytest.raises(ValueError):
        ModeVector.from_json_dict({"n_max": 1, "coeffs": [[5, 0.0, 0.0]]})
    with pytest.raises(ValueError):
        ModeVector.from_json_dict(
            {"n_max": 1, "coeffs": [[0, 1.0, 0.0], [0, 2.0, 0.0]]}
        )
