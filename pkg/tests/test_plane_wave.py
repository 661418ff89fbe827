"""Tests for plane-wave recombination and the measured single-mode walk."""

import pytest
import numpy as np
from pathlib import Path
from hypothesis import given, settings, strategies as st

# Add parent to path
import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from qwalk.config import EQUAL_AMPLITUDE, PRESET_THETA
from qwalk.plane_wave import (
    MeasuredStepResult, branch_amplitudes, closed_form_probabilities, combine_modes,
    displacement_scan, measured_moments, measured_schedule, measured_step, schedule_moments,
)


def _direct_branches(a_R, a_L, theta, k, l):
    """R(theta) U on (a_R, a_L) e^{ikx}, written out with complex numbers."""
    rotation = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    shifted = np.array([a_R * np.exp(-1j * k * l), a_L * np.exp(1j * k * l)])
    return rotation @ shifted


def test_combine_in_phase():
    """Two equal in-phase waves double."""
    mode = combine_modes(1.0, 0.0, 1.0, 0.0, 1.0)
    assert mode.amplitude == pytest.approx(2.0)
    assert mode.offset == pytest.approx(0.0, abs=1e-15)
    assert not mode.cancelled


def test_combine_antiphase_cancels():
    """Antiphase waves cancel and carry the cancellation flag."""
    mode = combine_modes(1.0, np.pi, 1.0, 0.0, 1.0)
    assert mode.amplitude < 1e-14
    assert mode.cancelled
    assert mode.offset == 0.0


def test_combine_example():
    """A=1, a=0.3, B=0.5, b=-0.7, k=2 against complex addition."""
    mode = combine_modes(1.0, 0.3, 0.5, -0.7, 2.0)
    direct = np.exp(2j * 0.3) + 0.5 * np.exp(2j * -0.7)
    assert abs(mode.phasor - direct) < 1e-12
    assert mode.k == 2.0
    assert -np.pi / 2 < mode.offset <= np.pi / 2


@given(
    st.floats(min_value=0.0, max_value=5.0),
    st.floats(min_value=-10.0, max_value=10.0),
    st.floats(min_value=0.0, max_value=5.0),
    st.floats(min_value=-10.0, max_value=10.0),
    st.floats(min_value=0.05, max_value=20.0),
    st.booleans(),
)
@settings(max_examples=1000, deadline=None)
def test_combine_matches_complex_addition(A, a, B, b, k, negative):
    """C e^{ikc} equals A e^{ika} + B e^{ikb}, and C follows the cosine rule."""
    k = -k if negative else k
    mode = combine_modes(A, a, B, b, k)
    direct = A * np.exp(1j * k * a) + B * np.exp(1j * k * b)
    assert mode.k == k
    if mode.cancelled:
        assert abs(direct) < 1e-13
        return
    assert abs(mode.phasor - direct) < 1e-12
    cosine_rule = A ** 2 + B ** 2 + 2 * A * B * np.cos(k * (a - b))
    assert abs(mode.amplitude ** 2 - cosine_rule) < 1e-10 * max(1.0, cosine_rule)


def test_combine_rejects_bad_input():
    """Negative amplitudes and k = 0 are refused."""
    with pytest.raises(ValueError):
        combine_modes(-1.0, 0.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        combine_modes(1.0, 0.0, 1.0, 0.0, 0.0)


def test_same_wave_modulo_period():
    """Offsets differing by 2*pi/k describe the same wave."""
    k = 3.0
    first = combine_modes(1.0, 0.2, 0.0, 0.0, k)
    second = combine_modes(1.0, 0.2 + 2 * np.pi / k, 0.0, 0.0, k)
    assert first.same_wave(second)
    assert not first.same_wave(combine_modes(1.0, 0.5, 0.0, 0.0, k))


def test_frozen_coin_step():
    """a_R=1, theta=0: the R branch takes everything and gains offset -l."""
    step = measured_step(1.0, 0.0, 0.0, 1.0, 0.01)
    assert step.p_R == pytest.approx(1.0, abs=1e-15)
    assert step.l1 == pytest.approx(-0.01, abs=1e-15)
    assert step.p_L == 0.0
    assert not step.l2_defined
    assert step.degenerate


@pytest.mark.parametrize("k,l", [(1.0, 0.01), (2.5, 0.3), (-4.0, 1.0)])
def test_quarter_turn_coin(k, l):
    """Equal amplitudes with theta = pi/4 give p_R = sin^2(kl), p_L = cos^2(kl)."""
    step = measured_step(EQUAL_AMPLITUDE, EQUAL_AMPLITUDE, np.pi / 4, k, l)
    assert step.p_R == pytest.approx(np.sin(k * l) ** 2, abs=1e-14)
    assert step.p_L == pytest.approx(np.cos(k * l) ** 2, abs=1e-14)


def test_random_steps_reconstruct_branches():
    """1000 random inputs: probabilities sum to 1 and branches rebuild R(theta) U exactly."""
    rng = np.random.default_rng(7)
    for _ in range(1000):
        angle = rng.uniform(0, 2 * np.pi)
        a_R, a_L = np.cos(angle), np.sin(angle)
        theta = rng.uniform(-np.pi, np.pi)
        k = rng.uniform(0.1, 10.0) * rng.choice([-1, 1])
        l = rng.uniform(0.001, 2.0)
        step = measured_step(a_R, a_L, theta, k, l)
        assert abs(step.p_R + step.p_L - 1.0) < 1e-12
        assert 0.0 <= step.p_R <= 1.0 + 1e-15
        psi_R, psi_L = step.branch_amplitudes()
        direct = _direct_branches(a_R, a_L, theta, k, l)
        assert abs(psi_R - direct[0]) < 1e-12
        assert abs(psi_L - direct[1]) < 1e-12
        p_R, p_L = closed_form_probabilities(a_R, a_L, theta, k, l)
        assert abs(p_R - step.p_R) < 1e-12
        assert abs(p_L - step.p_L) < 1e-12


def test_branch_amplitudes_vectorized():
    """Array k gives the same amplitudes as scalar calls."""
    ks = np.linspace(-5, 5, 11)
    psi_R, psi_L = branch_amplitudes(0.6, 0.8, 0.4, ks, 0.2)
    for k, r, left in zip(ks, psi_R, psi_L):
        direct = _direct_branches(0.6, 0.8, 0.4, k, 0.2)
        assert abs(r - direct[0]) < 1e-15
        assert abs(left - direct[1]) < 1e-15


def test_measured_step_is_pure():
    """Repeated evaluation gives identical results."""
    first = measured_step(0.6, 0.8, 1.3, 2.0, 0.05)
    second = measured_step(0.6, 0.8, 1.3, 2.0, 0.05)
    assert first == second


def test_measured_step_input_checks():
    """Complex amplitudes raise TypeError, unnormalized ones ValueError."""
    with pytest.raises(TypeError):
        measured_step(1 / np.sqrt(2), 1j / np.sqrt(2), 0.3, 1.0, 0.01)
    with pytest.raises(ValueError):
        measured_step(1.0, 1.0, 0.3, 1.0, 0.01)


def test_small_k_left_displacement():
    """Near k = 0 the L branch offset tends to 19 l for tan(theta) = -0.9."""
    step = measured_step(EQUAL_AMPLITUDE, EQUAL_AMPLITUDE, PRESET_THETA, 1e-3, 0.01)
    assert step.l2 == pytest.approx(0.19, rel=0.02)
    assert step.l2 > 10 * 0.01


def test_moments_trivial_cases():
    """t = 0 gives no displacement; a certain branch gives no spread."""
    step = measured_step(0.6, 0.8, 0.4, 1.5, 0.1)
    assert measured_moments(step, 0) == (0.0, 0.0)
    certain = MeasuredStepResult(p_R=1.0, l1=-0.01, p_L=0.0, l2=float("nan"), k=1.0, l=0.01)
    mean, variance = measured_moments(certain, 50)
    assert mean == pytest.approx(-0.5)
    assert variance == 0.0
    with pytest.raises(ValueError):
        measured_moments(step, -1)


def test_moments_formula():
    """mean = t(p_R l1 + p_L l2), variance = t p_R p_L (l1 - l2)^2."""
    step = measured_step(EQUAL_AMPLITUDE, EQUAL_AMPLITUDE, 0.7, 1.0, 0.01)
    mean, variance = measured_moments(step, 1000)
    assert mean == pytest.approx(1000 * (step.p_R * step.l1 + step.p_L * step.l2))
    assert variance == pytest.approx(1000 * step.p_R * step.p_L * (step.l1 - step.l2) ** 2)


def test_schedule_constant_theta():
    """A constant schedule accumulates to the closed-form moments."""
    steps = measured_schedule(0.6, 0.8, [0.9] * 25, 2.0, 0.03)
    assert len(steps) == 25
    mean, variance = schedule_moments(steps)
    expected_mean, expected_variance = measured_moments(steps[0], 25)
    assert mean == pytest.approx(expected_mean, rel=1e-12)
    assert variance == pytest.approx(expected_variance, rel=1e-12)


def test_schedule_varying_theta():
    """A varying schedule sums the per-step moments."""
    thetas = [0.1, 0.5, -0.3]
    steps = measured_schedule(EQUAL_AMPLITUDE, EQUAL_AMPLITUDE, thetas, 1.0, 0.1)
    mean, _ = schedule_moments(steps)
    assert mean == pytest.approx(sum(measured_moments(s, 1)[0] for s in steps))


def test_theta_scan_at_zero():
    """At theta = 0 the scan gives (l1, l2) = (-l, +l)."""
    rows = displacement_scan("theta", 0.0, 2 * np.pi, 2000, EQUAL_AMPLITUDE, EQUAL_AMPLITUDE, k=1.0, l=0.01)
    assert len(rows) == 2000
    assert rows[0].value == 0.0
    assert rows[0].l1 == pytest.approx(-0.01, abs=1e-14)
    assert rows[0].l2 == pytest.approx(0.01, abs=1e-14)
    assert rows[-1].value < 2 * np.pi


def test_theta_scan_shows_lopsided_regions():
    """Somewhere on the theta scan one offset dwarfs the other."""
    rows = displacement_scan("theta", 0.0, 2 * np.pi, 2000, EQUAL_AMPLITUDE, EQUAL_AMPLITUDE, k=1.0, l=0.01)
    l1 = np.array([r.l1 for r in rows])
    l2 = np.array([r.l2 for r in rows])
    assert np.any(np.abs(l2) > 10 * np.abs(l1))
    assert np.any(np.abs(l1) > 10 * np.abs(l2))


def test_k_scan_conserves_probability():
    """Every k-scan row has p_R + p_L = 1 and keeps the scanned k."""
    rows = displacement_scan("k", 0.005, 10.0, 500, EQUAL_AMPLITUDE, EQUAL_AMPLITUDE,
                             theta=5.55, l=1.0, endpoint=True)
    assert rows[-1].value == 10.0
    for row in rows:
        assert abs(row.p_R + row.p_L - 1.0) < 1e-12


def test_scan_flags_degenerate_rows():
    """Rows with an empty branch are kept and flagged."""
    rows = displacement_scan("theta", 0.0, np.pi, 4, 1.0, 0.0, k=1.0, l=0.01)
    assert len(rows) == 4
    assert rows[0].flagged
    assert np.isnan(rows[0].l2)


def test_scan_rejects_bad_arguments():
    """Unknown axis, too few samples and infinite ranges are refused."""
    with pytest.raises(ValueError):
        displacement_scan("x", 0.0, 1.0, 10, 1.0, 0.0)
    with pytest.raises(ValueError):
        displacement_scan("k", 0.0, 1.0, 1, 1.0, 0.0)
    with pytest.raises(ValueError):
        displacement_scan("k", 0.0, np.inf, 10, 1.0, 0.0)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
