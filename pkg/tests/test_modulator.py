import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ipa_cvqkd.errors import DomainError, SingularOperatingPointError
from ipa_cvqkd.modulator import (
    DeviceSetting,
    ModulatorConfig,
    cascade_impact,
    gain_factor,
    impact_from_devices,
    transfer_intensity,
)


def test_transfer_at_peak_and_null():
    cfg = ModulatorConfig(v_pi=2.0)
    assert transfer_intensity(cfg, 1.0, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert transfer_intensity(cfg, 1.0, 1.0) == pytest.approx(0.0, abs=1e-15)


def test_transfer_with_bias_and_pe_phase():
    # phi0 = pi/2 plus a pi/2 photorefractive shift lands on the null
    cfg = ModulatorConfig(v_pi=4.0, v_bias=1.0, delta_theta_pe=math.pi / 2)
    assert cfg.phi0 == pytest.approx(math.pi / 2)
    assert transfer_intensity(cfg, 1.0, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_transfer_vectorizes():
    cfg = ModulatorConfig(v_pi=2.0)
    out = transfer_intensity(cfg, 1.0, np.array([0.0, 0.5, 1.0]))
    np.testing.assert_allclose(out, [1.0, 0.5, 0.0], atol=1e-15)


@pytest.mark.parametrize("i_in, v_mod", [(-1.0, 0.0), (math.nan, 0.0), (1.0, math.inf)])
def test_transfer_rejects_bad_input(i_in, v_mod):
    with pytest.raises(DomainError):
        transfer_intensity(ModulatorConfig(v_pi=2.0), i_in, v_mod)


@pytest.mark.parametrize("v_pi", [0.0, -1.0, math.nan])
def test_config_requires_positive_v_pi(v_pi):
    with pytest.raises(DomainError):
        ModulatorConfig(v_pi=v_pi)


@given(
    v_pi=st.floats(0.1, 20),
    v_bias=st.floats(-20, 20),
    pe=st.floats(-10, 10),
    i_in=st.floats(0, 1e3),
    v_mod=st.floats(-20, 20),
)
def test_transfer_bounded(v_pi, v_bias, pe, i_in, v_mod):
    out = transfer_intensity(ModulatorConfig(v_pi, v_bias, pe), i_in, v_mod)
    assert 0.0 <= out <= i_in


def test_transfer_periodic_in_each_phase_term():
    two_pi = 2 * math.pi
    for v_bias, pe, v_mod in itertools.product([-0.7, 0.0, 1.3], [-2.0, 0.4], [-1.1, 0.0, 0.9]):
        v_pi = 3.0
        ref = transfer_intensity(ModulatorConfig(v_pi, v_bias, pe), 1.0, v_mod)
        # phi0 shifts by 2 pi when v_bias shifts by v_pi; same for k * v_mod
        assert transfer_intensity(ModulatorConfig(v_pi, v_bias + v_pi, pe), 1.0, v_mod) == pytest.approx(ref, abs=1e-12)
        assert transfer_intensity(ModulatorConfig(v_pi, v_bias, pe + two_pi), 1.0, v_mod) == pytest.approx(ref, abs=1e-12)
        assert transfer_intensity(ModulatorConfig(v_pi, v_bias, pe), 1.0, v_mod + v_pi) == pytest.approx(ref, abs=1e-12)


def test_gain_factor_identity_without_bias():
    assert gain_factor(ModulatorConfig(v_pi=4.0, v_bias=0.3), 2.0, 0.7) == 1.0


def test_gain_factor_worked_value():
    cfg = ModulatorConfig(v_pi=4.0, v_bias=1.0, delta_theta_pe=-math.pi / 3)
    expected = (1 + math.cos(math.pi / 6)) / (1 + math.cos(math.pi / 2))
    assert gain_factor(cfg, 1.0, 0.0) == pytest.approx(expected, rel=1e-12)
    assert gain_factor(cfg, 1.0, 0.0) == pytest.approx(1.8660, abs=5e-5)


def test_gain_factor_full_turn_is_identity():
    cfg = ModulatorConfig(v_pi=4.0, v_bias=1.0, delta_theta_pe=2 * math.pi)
    assert gain_factor(cfg, 1.0, 0.0) == pytest.approx(1.0, abs=1e-12)


def test_gain_factor_singular_at_null():
    cfg = ModulatorConfig(v_pi=2.0, delta_theta_pe=0.3)
    with pytest.raises(SingularOperatingPointError):
        gain_factor(cfg, 1.0, 1.0)


@given(v_bias=st.floats(-3, 3), v_mod=st.floats(-3, 3), turns=st.integers(-3, 3))
def test_gain_factor_one_iff_bias_multiple_of_two_pi(v_bias, v_mod, turns):
    cfg = ModulatorConfig(4.0, v_bias, 2 * math.pi * turns)
    try:
        g = gain_factor(cfg, 1.0, v_mod)
    except SingularOperatingPointError:
        return
    assert g == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize(
    "factors, total",
    [([1, 1, 1], 1.0), ([1.2, 1.25, 1.0], 1.5), ([21], 21.0)],
)
def test_cascade_impact(factors, total):
    out = cascade_impact(factors)
    assert out.m_total == pytest.approx(total, rel=1e-12)
    assert out.m_per_device == tuple(float(f) for f in factors)


@pytest.mark.parametrize("bad", [[], [1.0, 0.0], [-2.0], [math.inf]])
def test_cascade_rejects(bad):
    with pytest.raises(DomainError):
        cascade_impact(bad)


@given(st.lists(st.floats(0.05, 20), min_size=1, max_size=6), st.randoms())
def test_cascade_commutes(factors, rnd):
    shuffled = factors[:]
    rnd.shuffle(shuffled)
    assert cascade_impact(shuffled).m_total == pytest.approx(cascade_impact(factors).m_total, rel=1e-12)


def test_impact_from_three_devices_is_product_of_gains():
    settings = [
        DeviceSetting(ModulatorConfig(4.0, 1.0, -0.4, "IM_1")),
        DeviceSetting(ModulatorConfig(4.0, 1.2, -0.2, "IM_2"), v_mod=0.1),
        DeviceSetting(ModulatorConfig(5.0, 1.0, -0.1, "VOA")),
    ]
    gains = [gain_factor(s.config, s.i_in, s.v_mod) for s in settings]
    impact = impact_from_devices(settings)
    assert all(g > 1 for g in gains)
    assert impact.m_total == pytest.approx(math.prod(gains), rel=1e-12)
