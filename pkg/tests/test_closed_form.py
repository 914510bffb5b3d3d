"""Closed-form formulas: frozen values, branch choices, cross identities.

Frozen expectations were computed from the formulas themselves at full
precision (derivations noted inline); printed literature-style values
like 3.04193 are checked at their display precision.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coalesce import (
    AboveThresholdError,
    CavitySystem,
    InvalidParameterError,
    NotBracketedError,
    bare_linewidth,
    bare_resonance,
    coalescence_threshold,
    lossless_eigenmodes,
    lossless_pair,
    mode_splitting,
    multilayer_threshold,
    pair_center,
    peak_positions,
    report,
    resonant_transmission,
)

TWO_PI = 2.0 * math.pi


class TestBareResonance:
    def test_perfect_mirror_limit(self):
        # arccos(-1) = pi, so omega_n -> n pi
        for n in (1, 2, 5):
            assert bare_resonance(n, -1e9) == pytest.approx(n * math.pi,
                                                            abs=1e-8)

    def test_frozen_value(self):
        # pi - arctan(1/10) = 3.0419240010986313
        assert bare_resonance(1, -10.0) == pytest.approx(3.0419240010986313,
                                                         abs=1e-14)
        assert bare_resonance(1, -10.0) == pytest.approx(3.04193, abs=1e-5)

    def test_spacing_is_one_fsr(self):
        assert bare_resonance(3, -7.0) - bare_resonance(2, -7.0) == \
            pytest.approx(math.pi, abs=1e-14)

    def test_bad_index(self):
        with pytest.raises(InvalidParameterError):
            bare_resonance(0, -10.0)
        with pytest.raises(InvalidParameterError):
            bare_resonance(1.5, -10.0)


class TestBareLinewidth:
    def test_frozen_values(self):
        # 1/(2 * 10 * sqrt(101)) and 1/(2 sqrt 2)
        assert bare_linewidth(-10.0) == pytest.approx(4.975185951049945e-3,
                                                      rel=1e-13)
        assert bare_linewidth(-1.0) == pytest.approx(0.35355339059327373,
                                                     rel=1e-13)

    def test_decreasing_in_mirror_quality(self):
        values = [bare_linewidth(z) for z in (-1.0, -3.0, -10.0, -100.0)]
        assert values == sorted(values, reverse=True)
        assert bare_linewidth(-1e8) < 1e-15

    def test_no_mirror_rejected(self):
        with pytest.raises(InvalidParameterError):
            bare_linewidth(0.0)


class TestModeSplitting:
    def test_transparent_gives_bare_fsr(self):
        assert mode_splitting(0.0) == pytest.approx(math.pi, abs=1e-15)

    def test_unit_polarizability(self):
        # |atan2(-2, 0)| = pi/2
        assert mode_splitting(-1.0) == pytest.approx(math.pi / 2, abs=1e-15)

    def test_frozen_value(self):
        assert mode_splitting(-196.6) == pytest.approx(0.010172852248981543,
                                                       rel=1e-13)

    @given(st.floats(-300.0, 300.0).filter(lambda z: abs(z) > 1e-6))
    @settings(derandomize=True, max_examples=400)
    def test_arctan_identity(self, zeta_m):
        assert mode_splitting(zeta_m) == pytest.approx(
            2.0 * math.atan(1.0 / abs(zeta_m)), abs=1e-12)

    def test_monotone_decreasing(self):
        values = [mode_splitting(z) for z in (-0.1, -1.0, -5.0, -100.0)]
        assert values == sorted(values, reverse=True)


class TestCoalescenceThreshold:
    def test_frozen_values(self):
        # 2 zeta sqrt(zeta^2 + 1)
        assert coalescence_threshold(-10.0) == pytest.approx(
            -200.9975124224178, rel=1e-14)
        assert coalescence_threshold(-1.0) == pytest.approx(
            -2.8284271247461903, rel=1e-14)
        assert coalescence_threshold(0.0) == 0.0

    @given(st.floats(-100.0, 100.0))
    @settings(derandomize=True, max_examples=200)
    def test_sign_and_magnitude(self, zeta):
        star = coalescence_threshold(zeta)
        assert math.copysign(1.0, star) == math.copysign(1.0, zeta) \
            or star == 0.0
        assert abs(star) >= 2.0 * abs(zeta)


class TestPeakPositions:
    def test_frozen_cosines(self):
        # direct evaluation of the printed cos(eps) expression
        pair = peak_positions(-10.0, -196.6)
        assert math.cos(TWO_PI - pair.k_odd) == pytest.approx(
            0.9946282892066668, abs=1e-12)
        assert math.cos(TWO_PI - pair.k_even) == pytest.approx(
            0.994407002132227, abs=1e-12)
        assert pair.gap == pytest.approx(0.002116292190983138, rel=1e-10)

    def test_gap_matches_two_mode_form(self):
        # cross oracle: 2 sqrt(delta^2 - kappa^2)
        delta = 0.5 * mode_splitting(-196.6)
        kappa = bare_linewidth(-10.0)
        two_mode_gap = 2.0 * math.sqrt(delta ** 2 - kappa ** 2)
        assert two_mode_gap == pytest.approx(0.002115897419420383, rel=1e-12)
        assert peak_positions(-10.0, -196.6).gap == pytest.approx(
            two_mode_gap, rel=0.01)

    def test_gap_vanishes_at_threshold(self):
        pair = peak_positions(-10.0, coalescence_threshold(-10.0))
        assert pair.gap == 0.0
        assert pair.k_even == pair.k_odd

    def test_above_threshold_raises(self):
        with pytest.raises(AboveThresholdError):
            peak_positions(-10.0, -250.0)

    def test_no_mirror_rejected(self):
        with pytest.raises(InvalidParameterError):
            peak_positions(0.0, -10.0)

    @given(st.floats(-200.0, 200.0))
    @settings(derandomize=True, max_examples=300)
    def test_threshold_consistency(self, zeta_m):
        # |zeta_m| <= |zeta_m_star| iff the discriminant is >= 0
        zeta = -10.0
        star = coalescence_threshold(zeta)
        disc = 4 * zeta ** 2 * (zeta ** 2 + 1) - zeta_m ** 2
        assert (abs(zeta_m) <= abs(star)) == (disc >= 0.0)

    def test_pair_center_midpoint(self):
        pair = peak_positions(-10.0, -196.6)
        assert pair_center(-10.0, -196.6) == pytest.approx(
            0.5 * (pair.k_even + pair.k_odd), rel=1e-15)
        assert pair_center(-10.0, -196.6) == pytest.approx(6.1784302285639345,
                                                           rel=1e-13)


class TestResonantTransmission:
    def test_centered_is_unity(self):
        assert resonant_transmission(0.0, -50.0, 6.18) == 1.0

    def test_quarter_phase(self):
        # 2 k x = pi/2 makes sin = 1: T = 1/(1 + zeta_m^2)
        k = 6.0
        x = math.pi / (4.0 * k)
        assert resonant_transmission(x, -5.0, k) == pytest.approx(1.0 / 26.0,
                                                                  rel=1e-12)

    def test_out_of_range_rejected(self):
        with pytest.raises(InvalidParameterError):
            resonant_transmission(0.3, -5.0, 6.0)
        with pytest.raises(InvalidParameterError):
            resonant_transmission(0.0, -5.0, -1.0)

    def test_matches_full_numerics_loosely(self):
        # tracked-peak height vs the displacement formula at zeta_m = -5
        from coalesce.experiments import track_resonance, _start_wavenumber
        xs = np.linspace(0.0, 0.1, 11)
        k0 = _start_wavenumber(-10.0, -5.0, 1)
        tracked = track_resonance(-10.0, -5.0, xs, k0)
        worst = max(abs(t - resonant_transmission(float(x), -5.0, k))
                    for x, (k, t) in zip(xs, tracked))
        assert worst <= 0.02


class TestLosslessEigenmodes:
    def test_transparent_scatterer_keeps_odd_modes(self):
        # cot(k/2) = 0 at k = pi (mod 2 pi)
        root = lossless_eigenmodes(0.0, 0.0, (2.8, 3.4))
        assert root == pytest.approx(math.pi, abs=1e-11)

    def test_strong_scatterer_approaches_even_multiple(self):
        root = lossless_eigenmodes(-1e7, 0.0, (TWO_PI - 0.3, TWO_PI - 1e-12))
        assert TWO_PI - root == pytest.approx(2e-7, rel=1e-4)

    @pytest.mark.parametrize("zeta_m", [-1.0, -5.0, -50.0, -196.6])
    def test_pair_separation_equals_splitting(self, zeta_m):
        split = mode_splitting(zeta_m)
        root = lossless_eigenmodes(zeta_m, 0.0,
                                   (TWO_PI - split - 0.4, TWO_PI - 1e-9))
        assert TWO_PI - root == pytest.approx(split, abs=1e-10)

    def test_not_bracketed(self):
        with pytest.raises(NotBracketedError):
            lossless_eigenmodes(-50.0, 0.0, (4.0, 5.0))

    def test_pole_bracket_rejected(self):
        # sign change across the cotangent pole at 2 pi is not a root
        with pytest.raises(NotBracketedError):
            lossless_eigenmodes(-50.0, 0.0, (TWO_PI - 1e-3, TWO_PI + 1e-3))

    def test_displaced_pair_brackets(self):
        lo, hi = lossless_pair(-196.6, 0.001)
        assert lo < TWO_PI < hi
        gap0 = mode_splitting(-196.6)
        assert hi - lo > gap0  # displacement widens the avoided crossing


class TestMultilayerThreshold:
    def test_frozen_values(self):
        # (zeta^2 / 2^(N-2))^(1/N) for zeta = -10
        assert multilayer_threshold(-10.0, 2) == pytest.approx(10.0,
                                                               abs=1e-6)
        assert multilayer_threshold(-10.0, 3) == pytest.approx(
            3.6840314986403864, abs=1e-6)
        assert multilayer_threshold(-10.0, 4) == pytest.approx(
            2.23606797749979, abs=1e-6)

    def test_decreasing_in_layer_count(self):
        values = [multilayer_threshold(-10.0, n) for n in range(2, 8)]
        assert values == sorted(values, reverse=True)

    def test_bad_layer_count(self):
        with pytest.raises(InvalidParameterError):
            multilayer_threshold(-10.0, 1)


class TestReport:
    def test_below_threshold_fields(self):
        rep = report(-10.0, -196.6)
        assert rep.kappa == pytest.approx(4.975185951049945e-3, rel=1e-12)
        assert rep.delta == pytest.approx(0.005086426124490772, rel=1e-12)
        assert rep.zeta_m_star == pytest.approx(-200.9975124224178, rel=1e-12)
        assert rep.pair_gap == pytest.approx(abs(rep.eps_minus - rep.eps_plus),
                                             rel=1e-12)

    def test_above_threshold_fields_absent(self):
        rep = report(-10.0, -300.0)
        assert rep.eps_plus is None
        assert rep.eps_minus is None
        assert rep.pair_gap is None
        assert rep.kappa > 0


class TestOracleAgreementWithNumerics:
    @pytest.mark.parametrize("zeta_m", [-150.0, -180.0, -196.6])
    def test_pair_gap_matches_refined_peaks(self, zeta_m):
        from coalesce import find_peaks
        pair = peak_positions(-10.0, zeta_m)
        center = pair_center(-10.0, zeta_m)
        sys_m = CavitySystem.with_middle(-10.0, zeta_m)
        peaks = find_peaks(sys_m, center - 0.05, center + 0.05)
        assert len(peaks) == 2
        numeric_gap = peaks[1].k_peak - peaks[0].k_peak
        assert numeric_gap == pytest.approx(pair.gap, rel=0.05)

    def test_bare_resonance_matches_refined_peak(self):
        from coalesce import find_peaks
        sys10 = CavitySystem.empty(-10.0)
        peaks = find_peaks(sys10, 2.9, 3.2)
        assert len(peaks) == 1
        assert peaks[0].k_peak == pytest.approx(bare_resonance(1, -10.0),
                                                abs=1e-6)
