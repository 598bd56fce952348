import numpy as np
import pytest

from leomec.Analysis.association import (
    assoc_prob_cs,
    assoc_prob_sat,
    associate,
    q_s_constant,
    sat_wins,
)
from leomec.Analysis.geometry import contact_cdf_nearest_sat, horizon
from leomec.Core.Types import CapLaw
from leomec.params import DEFAULT_CONFIG, from_config, set_config_value


def _scenario(**overrides):
    raw = DEFAULT_CONFIG
    for key, value in overrides.items():
        raw = set_config_value(raw, key.replace("__", "."), value)
    return from_config(raw)


def test_q_s_constant_default():
    params, geom = _scenario()
    assert q_s_constant(params, geom) == pytest.approx(0.0248, rel=5e-3)


@pytest.mark.parametrize("law", ["arc", "area"])
@pytest.mark.parametrize("n_i", [0.5, 10.0, 250.0])
def test_association_partition(law, n_i):
    params, geom = _scenario(constellation__cap_law=law)
    result = associate(n_i, params, geom)
    assert 0.0 <= result.a_sat <= 1.0
    assert result.a_sat + result.a_cs == pytest.approx(1.0, abs=1e-6)
    assert result.n_offloadable == n_i


@pytest.mark.parametrize("n_i", [0.0, -3.0])
def test_no_offloadable_satellite(n_i):
    params, geom = _scenario()
    assert assoc_prob_sat(n_i, params, geom) == 0.0
    assert assoc_prob_cs(n_i, params, geom) == 1.0


def test_satellite_share_grows_with_offloadable_satellites():
    params, geom = _scenario()
    shares = [assoc_prob_sat(n, params, geom) for n in (10.0, 50.0, 250.0)]
    assert shares == sorted(shares)
    assert shares[0] < shares[-1]


def test_overwhelming_bias_reduces_to_visibility():
    params, geom = _scenario(link__bias_ratio=1e12, constellation__cap_law="area")
    d_max = horizon(geom).d_max_down
    visible = contact_cdf_nearest_sat(d_max, 250, geom)
    assert assoc_prob_sat(250, params, geom) == pytest.approx(visible, abs=1e-5)


def test_sat_wins_rule():
    params, _ = _scenario()
    q_s = q_s_constant(params)
    d_sat = np.array([5e5, 5e5, 1e6])
    threshold = q_s * d_sat ** (2.0 / params.alpha)
    wins = sat_wins(d_sat, np.array([threshold[0] * 1.01, threshold[1] * 0.99, np.inf]), params)
    assert wins.tolist() == [True, False, True]


def test_association_uses_cap_law():
    params, arc = _scenario()
    _, area = _scenario(constellation__cap_law="area")
    assert arc.cap_law == CapLaw.ARC
    assert assoc_prob_sat(250, params, arc) != pytest.approx(assoc_prob_sat(250, params, area), abs=1e-6)
