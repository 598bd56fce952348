import math

import pytest

from leomec.Analysis.association import associate
from leomec.Analysis.coverage import (
    CoverageResult,
    cov_down_cs,
    cov_down_sat,
    cov_up_cs,
    cov_up_sat,
    tau_grid,
    total_cov,
    total_cov_down,
    uplink_sat_success,
)
from leomec.Analysis.geometry import visibility_weight
from leomec.params import DEFAULT_CONFIG, from_config, set_config_value


def _scenario(**overrides):
    raw = DEFAULT_CONFIG
    for key, value in overrides.items():
        raw = set_config_value(raw, key.replace("__", "."), value)
    return from_config(raw)


def test_coverage_is_a_probability():
    params, geom = _scenario()
    for value in (
        cov_down_sat(1.0, 250, params, geom),
        cov_up_sat(1.0, 250, params, geom),
        cov_down_cs(1.0, params),
        cov_up_cs(1.0, params),
    ):
        assert 0.0 <= value <= 1.0


@pytest.mark.parametrize("link", ["cs_down", "cs_up", "sat_down"])
def test_coverage_nonincreasing_in_threshold(link):
    params, geom = _scenario()
    evaluate = {
        "cs_down": lambda tau: cov_down_cs(tau, params),
        "cs_up": lambda tau: cov_up_cs(tau, params),
        "sat_down": lambda tau: cov_down_sat(tau, 250, params, geom),
    }[link]
    values = [evaluate(tau) for tau in tau_grid(-10.0, 20.0, 7)]
    assert all(b <= a + 1e-9 for a, b in zip(values, values[1:]))
    assert values[0] > values[-1]


def test_uplink_satellite_coverage_nonincreasing_in_threshold():
    params, geom = _scenario()
    values = [cov_up_sat(tau, 250, params, geom) for tau in tau_grid(-10.0, 40.0, 6)]
    assert all(b <= a + 1e-9 for a, b in zip(values, values[1:]))
    assert values[0] > values[-1]


@pytest.mark.parametrize("cap_law", ["arc", "area"])
@pytest.mark.parametrize("n_i", [1, 10, 250])
def test_uplink_satellite_coverage_tends_to_visibility(cap_law, n_i):
    params, geom = _scenario(constellation__cap_law=cap_law)
    assert cov_up_sat(1e-12, n_i, params, geom) == pytest.approx(visibility_weight(n_i, geom), abs=1e-6)


def test_cloud_server_coverage_at_vanishing_threshold():
    params, _ = _scenario()
    assert cov_down_cs(1e-12, params) == pytest.approx(1.0, abs=1e-6)


def test_no_offloadable_satellite_has_no_satellite_coverage():
    params, geom = _scenario()
    assert cov_down_sat(1.0, 0, params, geom) == 0.0
    assert cov_up_sat(1.0, 0, params, geom) == 0.0


@pytest.mark.parametrize("tau", [0.0, -1.0])
def test_threshold_must_be_positive(tau):
    params, geom = _scenario()
    with pytest.raises(ValueError, match="tau must be > 0"):
        cov_down_sat(tau, 250, params, geom)
    with pytest.raises(ValueError, match="tau must be > 0"):
        cov_down_cs(tau, params)


def test_uplink_satellite_coverage_is_visibility_at_default_power():
    params, geom = _scenario()
    conditional = uplink_sat_success(params.tau, params, geom)
    assert conditional == pytest.approx(1.0, abs=1e-4)
    expected = visibility_weight(250, geom) * conditional
    assert cov_up_sat(params.tau, 250, params, geom) == pytest.approx(expected)
    assert cov_up_sat(params.tau, 250, params, geom, conditional=0.5) == pytest.approx(0.5 * visibility_weight(250, geom))


def test_fading_models_close():
    bound_params, geom = _scenario()
    exact_params, _ = _scenario(fading__model="exact-series")
    bound = cov_down_sat(1.0, 250, bound_params, geom)
    exact = cov_down_sat(1.0, 250, exact_params, geom)
    assert abs(bound - exact) < 0.1


def test_total_coverage_mixture():
    assert total_cov([0.5, 0.5], [1.0, 0.0], [0.0, 1.0], [0.8, 0.1], [0.2, 0.6]) == pytest.approx(0.7)
    assert total_cov([1.0], [0.3], [0.7], [1.0], [1.0]) == pytest.approx(1.0)


def test_total_coverage_from_results():
    params, geom = _scenario()
    association = associate(250, params, geom)
    p_cs = cov_down_cs(params.tau, params)
    p_sat = cov_down_sat(params.tau, 250, params, geom)
    coverage = CoverageResult(
        p_su_down=p_sat, p_cu_down=p_cs, p_us_up=0.0, p_uc_up=0.0,
        total_down=0.0, total_up=0.0, tau=params.tau,
    )
    total = total_cov_down([1.0], [association], [coverage])
    assert total == pytest.approx(association.a_sat * p_sat + association.a_cs * p_cs)
    assert min(p_sat, p_cs) - 1e-12 <= total <= max(p_sat, p_cs) + 1e-12
    assert not math.isnan(total)
