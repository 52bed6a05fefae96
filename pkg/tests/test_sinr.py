import math

import numpy as np
import pytest

from asyncofdm.sinr import (
    NetworkParams,
    NetworkSnapshot,
    cp_weight,
    cp_weight_clipped,
    db_to_linear,
    hypothesis_set,
    hypothesis_weight,
    linear_to_db,
    self_interference_factor,
    snapshot_sinr,
    snapshot_sinr_all,
)
from tests.conftest import budget_params


# ------------------------------------------------------------------ parameters

def test_params_validation():
    with pytest.raises(ValueError):
        NetworkParams(0.0, 4.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        NetworkParams(1.0, 2.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        NetworkParams(1.0, 4.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        NetworkParams(1.0, 4.0, 1.0, 0.0)


def test_power_budget_snr():
    # 23 dBm minus (-174 + 70 + 9) dBm noise floor = 118 dB
    p = budget_params(1 / 400 ** 2, 3.8, -12.0)
    assert linear_to_db(p.snr) == pytest.approx(118.0, abs=1e-9)
    assert p.threshold == pytest.approx(db_to_linear(-12.0))


def test_interference_limited_variant():
    p = budget_params(1e-4, 3.8, -6.0)
    il = p.interference_limited()
    assert math.isinf(il.snr) and il.noise_over_e == 0.0
    assert p.noise_over_e == pytest.approx(1.0 / p.snr)


def test_threshold_helpers():
    p = NetworkParams(1e-4, 4.0, 100.0, 1.0)
    assert p.with_threshold(2.0).threshold == 2.0
    assert p.with_threshold_db(3.0).threshold == pytest.approx(db_to_linear(3.0))


# ---------------------------------------------------------------- weight g(d)

def test_weight_cp_covered(cfg):
    assert cp_weight(cfg, 0.0) == 1.0
    assert cp_weight(cfg, 71.9) == 1.0
    x = np.linspace(0.0, cfg.n_cp - 1e-9, 50)
    assert np.all(cp_weight(cfg, x) == 1.0)


def test_weight_direct_values(cfg):
    assert cp_weight(cfg, -512.0) == pytest.approx(0.25, abs=1e-15)
    assert cp_weight(cfg, 200.0) == pytest.approx(0.765625, abs=1e-15)
    assert cp_weight(cfg, -1050.0) == 0.0


def test_weight_domain_and_range(cfg):
    with pytest.raises(ValueError):
        cp_weight(cfg, cfg.n + cfg.n_cp)
    with pytest.raises(ValueError):
        cp_weight(cfg, -(cfg.n + cfg.n_cp) - 1e-9)
    x = np.linspace(-(cfg.n + cfg.n_cp), cfg.n + cfg.n_cp - 1e-6, 1001)
    g = cp_weight(cfg, x)
    assert np.all((g >= 0.0) & (g <= 1.0))
    # continuity: small steps produce small changes
    assert np.max(np.abs(np.diff(g))) < 0.01
    # clipped variant extends by zero
    assert cp_weight_clipped(cfg, np.array([-5000.0, 5000.0])).tolist() == [0.0, 0.0]


def test_weight_zero_on_fully_early_range(cfg):
    x = np.linspace(-(cfg.n + cfg.n_cp), -cfg.n - 1e-9, 50)
    assert np.all(cp_weight(cfg, x) == 0.0)


# ----------------------------------------------------- self-interference factor

def test_factor_inside_cp_equals_threshold(cfg):
    for t in (0.1, 1.0, 4.0):
        assert self_interference_factor(cfg, 10.0, t) == pytest.approx(t)


def test_factor_hand_value(cfg):
    t = 10.0 ** -1.2
    h = self_interference_factor(cfg, -512.0, t)  # g = 0.25
    assert h == pytest.approx(t / ((1.0 + t) * 0.25 - t), rel=1e-12)
    assert h == pytest.approx(0.3113, abs=1e-4)
    assert h >= t


def test_factor_excluded_at_boundary(cfg):
    # g = 0.5 at d = n(sqrt(0.5)-1); with T=1 the denominator hits zero there,
    # so anything at or below that weight is excluded (nudge for float rounding)
    d = cfg.n * (math.sqrt(0.5) - 1.0) - 1e-9
    assert self_interference_factor(cfg, d, 1.0) is None
    assert self_interference_factor(cfg, -1050.0, 0.1) is None
    with pytest.raises(ValueError):
        self_interference_factor(cfg, 0.0, 0.0)


# -------------------------------------------------------------- snapshot SINR

def test_single_transmitter_noise_only(cfg):
    snap = NetworkSnapshot([10.0], [2.0], [0.0], noise_over_e=1e-4, alpha=4.0)
    expect = 2.0 * 10.0 ** -4.0 / 1e-4
    assert snapshot_sinr(snap, 0, cfg) == pytest.approx(expect)


def test_two_equal_transmitters_symmetric(cfg):
    snap = NetworkSnapshot([5.0, 5.0], [1.0, 1.0], [0.0, 0.0], 0.0, 3.8)
    sinr = snapshot_sinr_all(snap, cfg)
    assert np.allclose(sinr, 1.0)


def test_fully_misaligned_transmitter_zero(cfg):
    snap = NetworkSnapshot([5.0, 7.0], [1.0, 1.0], [-1050.0, 0.0], 0.0, 3.8)
    assert snapshot_sinr(snap, 0, cfg) == 0.0


def test_scale_invariance_without_noise(cfg):
    rng = np.random.default_rng(0)
    r, f = rng.uniform(1, 100, 20), rng.exponential(1.0, 20)
    d = rng.uniform(-500, 500, 20)
    a = snapshot_sinr_all(NetworkSnapshot(r, f, d, 0.0, 3.8), cfg)
    b = snapshot_sinr_all(NetworkSnapshot(r, 7.0 * f, d, 0.0, 3.8), cfg)
    assert np.allclose(a, b, rtol=1e-12)


def test_cp_covered_offsets_match_synchronized(cfg):
    rng = np.random.default_rng(1)
    r, f = rng.uniform(1, 100, 15), rng.exponential(1.0, 15)
    d = rng.uniform(0.0, cfg.n_cp - 1e-9, 15)
    a = snapshot_sinr_all(NetworkSnapshot(r, f, d, 1e-6, 3.8), cfg)
    b = snapshot_sinr_all(NetworkSnapshot(r, f, np.zeros(15), 1e-6, 3.8), cfg)
    assert np.allclose(a, b, rtol=1e-12)


def test_snapshot_validation(cfg):
    with pytest.raises(ValueError):
        NetworkSnapshot([1.0], [1.0, 2.0], [0.0], 0.0, 4.0)
    with pytest.raises(ValueError):
        NetworkSnapshot([-1.0], [1.0], [0.0], 0.0, 4.0)
    with pytest.raises(ValueError):
        snapshot_sinr(NetworkSnapshot([], [], [], 0.0, 4.0), 0, cfg)


# ------------------------------------------------------------------ hypotheses

def test_hypothesis_set_layout():
    assert hypothesis_set(1, 1, 72.0) == (-72.0, 0.0, 72.0)
    assert hypothesis_set(0, 0, 10.0) == (0.0,)
    with pytest.raises(ValueError):
        hypothesis_set(-1, 0, 10.0)
    with pytest.raises(ValueError):
        hypothesis_set(1, 1, 0.0)


def test_hypothesis_weight_reductions(cfg):
    x = np.linspace(-1000.0, 1000.0, 201)
    assert np.allclose(hypothesis_weight(cfg, (0.0,), x), cp_weight(cfg, x))
    # a hypothesis exactly at the offset restores full weight
    assert hypothesis_weight(cfg, (0.0, 150.0), 150.0) == 1.0
    # adding hypotheses never hurts
    base = hypothesis_weight(cfg, (0.0,), x)
    more = hypothesis_weight(cfg, (-150.0, 0.0, 150.0), x)
    assert np.all(more >= base)


def test_hypothesis_weight_validation(cfg):
    with pytest.raises(ValueError):
        hypothesis_weight(cfg, (), 0.0)
    with pytest.raises(ValueError):
        hypothesis_weight(cfg, (0.0,), 5000.0)


try:
    from hypothesis import given, settings
    from hypothesis import strategies as st

    @given(st.floats(-1096.0, 1095.999))
    @settings(max_examples=100, deadline=None)
    def test_weight_matches_branch_formulas(d):
        from asyncofdm.link import OfdmConfig
        c = OfdmConfig.centered(1024, 72, -300, 299)
        g = cp_weight(c, d)
        if d < -1024:
            expect = 0.0
        elif d < 0:
            expect = ((1024 + d) / 1024) ** 2
        elif d < 72:
            expect = 1.0
        else:
            expect = ((1024 + 72 - d) / 1024) ** 2
        assert g == pytest.approx(expect, abs=1e-12)
        assert 0.0 <= g <= 1.0
except ImportError:  # pragma: no cover - property tests are optional extras
    pass
