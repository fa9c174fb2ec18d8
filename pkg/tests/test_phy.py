import itertools

import numpy as np
import pytest
from conftest import random_instance
from hypothesis import given, settings
from hypothesis import strategies as st

import rate_oracle as oracle
from starcache.catalog import PowerTariff
from starcache.channel import ChannelSet
from starcache.phy import (
    BeamformingDecision,
    Mode,
    evaluate_link,
    noise_power,
    rate_ca,
    rate_ct,
    rate_hm,
    select_mode,
    system_power,
    wireless_power,
)
from starcache.stars import coefficient_matrices

B = 1e6
S2 = noise_power()


def _unit_channels(hd_T=1.0, hd_R=1.0, N=2, M=1):
    return ChannelSet(np.ones((N, M), complex), np.ones(N, complex), np.ones(N, complex), complex(hd_T), complex(hd_R))


def test_noise_power_conversion():
    assert S2 == pytest.approx(10 ** -12.52, rel=1e-12)
    assert noise_power(-95.2, 2e6) == pytest.approx(2 * 10 ** -12.52, rel=1e-12)


@pytest.mark.parametrize(
    "hits, mode, ctrl",
    [((True, True), Mode.CT, (True, True)), ((False, False), Mode.CA, (False, False)),
     ((True, False), Mode.HM, (True, False)), ((False, True), Mode.HM, (False, True))],
)
def test_select_mode_exhaustive(hits, mode, ctrl):
    assert select_mode(hits) == (mode, ctrl)


class TestCT:
    def test_zero_power_zero_rate(self):
        R = rate_ct(_unit_channels(), 0.0, 1.0, False, B, S2)
        assert R[0] == 0.0

    def test_unit_snr_same_content(self):
        assert rate_ct(_unit_channels(), S2, S2, True, B, S2) == pytest.approx((B, B), rel=1e-14)

    def test_unit_sinr_split_different_content(self):
        R = rate_ct(_unit_channels(), S2, S2, False, B, S2)
        assert R == pytest.approx((B * np.log2(1.5),) * 2, rel=1e-14)


class TestCA:
    def test_zero_beamformer(self, rng):
        ch, prof, Pb, _ = random_instance(rng)
        T, R = coefficient_matrices(prof)
        rt, rr = rate_ca(ch, T, R, np.zeros(4), Pb[1], False, B, S2)
        assert rt == 0.0 and rr > 0.0

    def test_starved_side(self, rng):
        ch, prof, Pb, _ = random_instance(rng)
        T, _ = coefficient_matrices(prof)
        rt, rr = rate_ca(ch, T, np.zeros_like(T), Pb[0], Pb[1], False, B, S2)
        assert rr == 0.0 and rt > 0.0

    def test_dimension_mismatch(self, rng):
        ch, prof, Pb, _ = random_instance(rng)
        T, R = coefficient_matrices(prof)
        with pytest.raises(ValueError):
            rate_ca(ch, T, R, np.zeros(3), Pb[1], False, B, S2)

    def test_diagonal_vector_input_matches_matrix(self, rng):
        ch, prof, Pb, _ = random_instance(rng)
        T, R = coefficient_matrices(prof)
        assert rate_ca(ch, T, R, *Pb, False, B, S2) == rate_ca(ch, np.diag(T), np.diag(R), *Pb, False, B, S2)


class TestHM:
    def test_no_controller_power_removes_cross_interference(self, rng):
        ch, prof, Pb, _ = random_instance(rng)
        T, R = coefficient_matrices(prof)
        _, r_bs = rate_hm(ch, T, R, 0, Pb[1], 0.0, B, S2)
        g = abs(ch.h_R.conj() @ R @ ch.G_b @ Pb[1]) ** 2
        assert r_bs == pytest.approx(B * np.log2(1 + g / S2), rel=1e-12)

    def test_no_bs_power_reduces_to_single_user(self, rng):
        ch, prof, _, Pc = random_instance(rng)
        T, R = coefficient_matrices(prof)
        r_c, _ = rate_hm(ch, T, R, 1, np.zeros(4), Pc[1], B, S2)
        assert r_c == pytest.approx(rate_ct(ch, Pc[0], Pc[1], True, B, S2)[1], rel=1e-14)


def test_against_oracle_sample(rng):
    for _ in range(25):
        ch, prof, Pb, Pc = random_instance(rng)
        T, R = coefficient_matrices(prof)
        G, h, hd, Th = oracle.to_lists(ch, T, R)
        for same in (False, True):
            np.testing.assert_allclose(rate_ct(ch, *Pc, same, B, S2), oracle.ct(hd, Pc, same, B, S2), rtol=1e-12)
            np.testing.assert_allclose(rate_ca(ch, T, R, *Pb, same, B, S2),
                                       oracle.ca(h, Th, G, Pb, same, B, S2), rtol=1e-12)
        for k in (0, 1):
            np.testing.assert_allclose(rate_hm(ch, T, R, k, Pb[1 - k], Pc[k], B, S2),
                                       oracle.hm(h, hd, Th, G, k, Pb[1 - k], Pc[k], B, S2), rtol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1.01, 10.0))
def test_rate_monotonicity(seed, factor):
    rng = np.random.default_rng(seed)
    ch, prof, Pb, Pc = random_instance(rng)
    T, R = coefficient_matrices(prof)
    base = rate_ca(ch, T, R, *Pb, False, B, S2)
    more_own = rate_ca(ch, T, R, Pb[0] * np.sqrt(factor), Pb[1], False, B, S2)
    assert more_own[0] >= base[0]
    assert more_own[1] <= base[1]
    same = rate_ca(ch, T, R, *Pb, True, B, S2)
    assert same[0] >= base[0] and same[1] >= base[1]
    ct = rate_ct(ch, Pc[0] * factor, Pc[1], False, B, S2)
    ct0 = rate_ct(ch, *Pc, False, B, S2)
    assert ct[0] >= ct0[0] and ct[1] <= ct0[1]
    assert min(base + ct) >= 0.0


class TestPower:
    def test_ct_sum(self):
        d = BeamformingDecision(np.zeros(2), np.zeros(2), 0.1, 0.2)
        assert wireless_power(Mode.CT, d) == pytest.approx(0.3)

    def test_ca_zero(self):
        assert wireless_power(Mode.CA, BeamformingDecision(np.zeros(2), np.zeros(2), 0.4, 0.4)) == 0.0

    def test_hm(self):
        d = BeamformingDecision(np.zeros(2, complex), np.array([0.3 + 0.4j, 0.0]), 0.1, 7.0)
        assert wireless_power(Mode.HM, d, stars_user=0) == pytest.approx(0.35)
        with pytest.raises(ValueError):
            wireless_power(Mode.HM, d)

    @pytest.mark.parametrize("P_w, lr, lu, expected", [(0.3, 0, 0, 0.3), (0.3, 2, 0, 0.7), (0.3, 0, 4, 0.5)])
    def test_system_power(self, P_w, lr, lu, expected):
        assert system_power(P_w, lr, lu, PowerTariff(0.05, 0.2)) == pytest.approx(expected)

    @given(st.floats(0, 10), st.integers(0, 2), st.integers(0, 30))
    def test_system_power_dominates_wireless(self, P_w, lr, lu):
        assert system_power(P_w, lr, lu, PowerTariff()) >= P_w


def test_evaluate_link_routes_every_mode(rng):
    ch, prof, Pb, Pc = random_instance(rng)
    T, R = coefficient_matrices(prof)
    d = BeamformingDecision(Pb[0], Pb[1], Pc[0], Pc[1])
    for hits in itertools.product((False, True), repeat=2):
        mode, rates, P_w = evaluate_link(ch, T, R, d, hits, False, B, S2)
        assert mode is select_mode(hits)[0]
        assert all(r >= 0 for r in rates) and P_w >= 0
    mode, rates, _ = evaluate_link(ch, T, R, d, (False, True), False, B, S2)
    r_k, r_b = rate_hm(ch, T, R, 1, Pb[0], Pc[1], B, S2)
    assert rates == (r_b, r_k)
