import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chaosctl import (
    ControlConfig,
    DomainSpec,
    MapModel,
    controlled_map,
    cost_per_step,
    find_fixed_point,
    iterate_orbit,
    norm,
)


def test_zero_intensity_costs_nothing(lpa, lpa_k):
    cfg = ControlConfig("VMTOC", 0.0, tuple(lpa_k))
    orbit = iterate_orbit(lpa, cfg, np.array([10.0, 10.0, 10.0]), 10, 20)
    assert cost_per_step(lpa, cfg, orbit).value == 0.0


def test_cost_vanishes_when_target_is_uncontrolled_fixed_point(lpa, lpa_k):
    cfg = ControlConfig("VMTOC", 0.5, tuple(lpa_k))
    orbit = iterate_orbit(lpa, cfg, np.array([10.0, 10.0, 10.0]), 2000, 50)
    est = cost_per_step(lpa, cfg, orbit)
    assert est.value < 1e-9


def test_cost_at_off_equilibrium_target_matches_formula(lpa):
    t = (30.0, 200.0, 30.0)
    c = 0.8
    cfg = ControlConfig("VMTOC", c, t)
    orbit = iterate_orbit(lpa, cfg, np.array([10.0, 10.0, 10.0]), 3000, 50)
    est = cost_per_step(lpa, cfg, orbit)
    x_star = find_fixed_point(controlled_map(lpa, cfg),
                              np.array([10.0, 10.0, 10.0]), tol=1e-12)
    expected = c * norm(lpa.evaluate(x_star) - np.array(t), "euclidean")
    assert est.value == pytest.approx(expected, rel=1e-9)
    assert est.window == (0, 50)


@given(st.lists(st.floats(0, 300), min_size=3, max_size=3),
       st.lists(st.floats(0, 300), min_size=3, max_size=3),
       st.floats(0.0, 0.99))
def test_summand_forms_agree(fx, t, c):
    fx, t = np.array(fx), np.array(t)
    direct = norm(c * t + (1 - c) * fx - fx, "euclidean")
    factored = c * norm(fx - t, "euclidean")
    assert abs(direct - factored) < 1e-12 * (1 + factored)


def test_cost_nonincreasing_in_window_start():
    # linear contraction toward x*; target = f(x*) so the summand decays
    k = np.array([5.0, 5.0])
    f = MapModel(dimension=2,
                 evaluate=lambda x: 0.5 * (np.asarray(x, float) - k) + k,
                 domain=DomainSpec.full_space(2))
    cfg = ControlConfig("VMTOC", 0.3, tuple(k))
    orbit = iterate_orbit(f, cfg, np.array([40.0, -10.0]), 0, 30)
    costs = [cost_per_step(f, cfg, orbit, window=(s, 10)).value
             for s in range(0, 20)]
    assert all(b <= a + 1e-15 for a, b in zip(costs, costs[1:]))


def test_diagonal_control_cost():
    k = np.array([2.0, 3.0])
    f = MapModel(dimension=2, evaluate=lambda x: np.array([1.0, 1.0]),
                 domain=DomainSpec.full_space(2))
    cfg = ControlConfig("DIAG-VMTOC", (0.5, 0.0), tuple(k))
    orbit = np.array([[0.0, 0.0], [1.0, 1.0]])
    est = cost_per_step(f, cfg, orbit, norm_kind="max")
    # only the first component is controlled: |0.5*(1 - 2)| = 0.5 each step
    assert est.value == pytest.approx(0.5)


def test_cost_window_validation(lpa, lpa_k):
    cfg = ControlConfig("VMTOC", 0.5, tuple(lpa_k))
    orbit = iterate_orbit(lpa, cfg, np.array([10.0, 10.0, 10.0]), 5, 10)
    with pytest.raises(ValueError, match="window"):
        cost_per_step(lpa, cfg, orbit, window=(0, 0))
    with pytest.raises(ValueError, match="window"):
        cost_per_step(lpa, cfg, orbit, window=(5, 20))
    with pytest.raises(ValueError, match="post-map"):
        cost_per_step(lpa, ControlConfig("PF", 0.5, None), orbit)
