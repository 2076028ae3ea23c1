import math

import numpy as np
import pytest

from nfnls.dynamics import ModelSpec, integrate_reference
from nfnls.modes import ModeVector
from nfnls.normal_form import ModulationConfig
from nfnls.solver import SolverConfig
from nfnls.verify import (
    approximation_stability,
    compare_solutions,
    divisor_count,
    divisor_growth_check,
    remainder_decay_study,
    telescoping_residual,
)

SMALL_CUTS = ModulationConfig(cutoff_override={1: 2.0, 2: 2.0, 3: 2.0})


def test_divisor_count_hand_values():
    assert [divisor_count(n) for n in (1, 2, 6, 12, 16, 28, 97)] == [
        1,
        2,
        4,
        6,
        5,
        6,
        2,
    ]
    with pytest.raises(ValueError):
        divisor_count(0)


def test_divisor_growth_bounded():
    ratio, argmax = divisor_growth_check(10000, 0.5)
    assert argmax == 12
    assert ratio == pytest.approx(6.0 / math.sqrt(12.0), rel=1e-12)
    # larger delta shrinks the maximum
    smaller, _ = divisor_growth_check(10000, 1.0)
    assert smaller < ratio
    with pytest.raises(ValueError):
        divisor_growth_check(1, 0.5)
    with pytest.raises(ValueError):
        divisor_growth_check(100, 0.0)


def _profile_trajectory(dt, model=ModelSpec("renormalized", 1)):
    u0 = ModeVector.from_dict(3, {-1: 0.6 + 0.2j, 1: 0.5 - 0.1j})
    return integrate_reference(u0, 0.4, dt, model)


def test_telescoping_residual_fourth_order():
    residuals = [
        telescoping_residual(1, _profile_trajectory(dt), SMALL_CUTS, ModelSpec("renormalized", 1))
        for dt in (0.02, 0.01)
    ]
    order = math.log2(residuals[0] / residuals[1])
    assert residuals[1] < 1e-6
    assert 3.5 <= order <= 4.5


def test_telescoping_holds_for_all_model_variants():
    for renorm in ("renormalized", "full"):
        for sign in (1, -1):
            model = ModelSpec(renorm, sign)
            res = telescoping_residual(
                1, _profile_trajectory(0.01, model), SMALL_CUTS, model
            )
            assert res < 1e-6


def test_unsigned_convention_breaks_telescoping():
    model = ModelSpec("renormalized", 1)
    traj = _profile_trajectory(0.01)
    good = telescoping_residual(1, traj, SMALL_CUTS, model)
    bad = telescoping_residual(1, traj, SMALL_CUTS, model, sign_convention="unsigned")
    assert bad > 1e-4
    assert bad / good > 1e3
    with pytest.raises(ValueError):
        telescoping_residual(1, traj, SMALL_CUTS, model, sign_convention="upside-down")


def _decay_data():
    rng = np.random.default_rng(3)
    coeffs = {
        n: 0.35 * 2.0 ** (-abs(n)) * np.exp(2j * np.pi * rng.uniform())
        for n in range(-4, 5)
    }
    return ModeVector.from_dict(4, coeffs)


def test_remainder_decay_study():
    cfg = ModulationConfig(cutoff_override={1: 8.0, 2: 20.0, 3: 40.0})
    table = remainder_decay_study(_decay_data(), [1, 2, 3], cfg)
    sups = [row.sup_norm for row in table.rows]
    assert sups[0] > sups[1] > sups[2] > 0.0
    assert table.rows[0].envelope == pytest.approx(sups[0])
    for row in table.rows[1:]:
        assert row.sup_norm <= row.envelope
    with pytest.raises(ValueError):
        remainder_decay_study(_decay_data(), [], cfg)


def test_compare_solutions_small():
    u0 = ModeVector.from_dict(2, {1: 0.5 + 0.3j})
    cfg = SolverConfig(
        model=ModelSpec("renormalized", 1),
        mod_cfg=ModulationConfig(cutoff_override={1: 6.0}),
        J_max=1,
        n_max=2,
        T=0.1,
        time_grid_size=41,
        picard_tol=1e-12,
        quadrature="simpson",
    )
    result = compare_solutions(u0, cfg, dt_ref=1e-3)
    assert result.distances[0] == 0.0
    assert result.max_distance < 1e-7
    assert result.max_distance == float(np.max(result.distances))
    with pytest.raises(ValueError):
        compare_solutions(u0, cfg, dt_ref=0.0)


def test_approximation_stability_rows():
    u0 = ModeVector.from_dict(
        4, {n: 0.4 * 2.0 ** (-abs(n)) for n in range(-4, 5)}
    )
    cfg = SolverConfig(
        model=ModelSpec("renormalized", 1),
        mod_cfg=ModulationConfig(cutoff_override={1: 6.0}),
        J_max=1,
        n_max=4,
        T=0.1,
        time_grid_size=21,
        picard_tol=1e-10,
    )
    rows = approximation_stability(u0, [1, 2, 3], cfg)
    assert [(r.m_lo, r.m_hi) for r in rows] == [(1, 2), (2, 3)]
    for row in rows:
        assert row.solution_distance <= 2.0 * row.data_distance
        assert row.ratio == pytest.approx(row.solution_distance / row.data_distance)
    # tail truncation distances shrink for decaying data
    assert rows[1].data_distance < rows[0].data_distance
    with pytest.raises(ValueError):
        approximation_stability(u0, [2], cfg)
