"""Brute-force engines and their agreement with the closed forms."""

import pytest
import numpy as np
from pathlib import Path

# Add parent to path
import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from qwalk.coin_walk import CoinSpec
from qwalk.config import EQUAL_AMPLITUDE, PRESET_THETA, MonteCarloConfig, Settings
from qwalk.oracle import (
    LatticeField, RngSeed, binomial_branch_check, lattice_evolve, mode_matrix_power,
    monte_carlo_measured_mode, monte_carlo_particle_walk,
)
from qwalk.plane_wave import MeasuredStepResult, measured_moments, measured_step
from qwalk.unmeasured_evolution import step_operator
from qwalk.wave_packet import (
    SpatialGrid, SpectralGrid, evolve_measured_all_left, evolve_unmeasured, gaussian_packet,
)

# dx = 0.005, so one step of l = 0.01 moves two sites
LATTICE_GRID = SpatialGrid(-10.0, 10.0, 4001)
LATTICE_SPECTRAL = SpectralGrid.symmetric(8.0, 1024)
STEP = 0.01


def _lattice_gaussian(a_R=EQUAL_AMPLITUDE, a_L=EQUAL_AMPLITUDE):
    packet = gaussian_packet(LATTICE_GRID)
    return packet, LatticeField.from_components(a_R * packet.values, a_L * packet.values,
                                                LATTICE_GRID.dx, LATTICE_GRID.x_min)


def test_rng_seed_reproducible():
    """Equal seeds give equal streams, including spawned children."""
    first = RngSeed(42).rng().random(5)
    second = RngSeed(42).rng().random(5)
    assert np.array_equal(first, second)
    children_a = [g.random(3) for g in RngSeed(42).spawn(3)]
    children_b = [g.random(3) for g in RngSeed(42).spawn(3)]
    assert all(np.array_equal(a, b) for a, b in zip(children_a, children_b))
    assert not np.array_equal(children_a[0], children_a[1])


def test_rng_seed_validation():
    """Negative seeds and unknown generators are refused."""
    with pytest.raises(ValueError):
        RngSeed(-1)
    with pytest.raises(ValueError):
        RngSeed(1, generator="MT19937")


def test_matrix_power_zero_steps():
    """t = 0 is the identity."""
    phi_R, phi_L = mode_matrix_power(0.6, 0.8j, 1.3, 0.2, 0.7, 0)
    assert complex(phi_R) == 0.6
    assert complex(phi_L) == 0.8j


def test_matrix_power_two_steps_half_turn():
    """theta = pi/2, two steps, against an explicit 2x2 product."""
    k, l = 0.7, 0.4
    m = step_operator(k, l, np.pi / 2)
    explicit = m @ m @ np.array([0.6, 0.8])
    phi_R, phi_L = mode_matrix_power(0.6, 0.8, k, l, np.pi / 2, 2)
    assert abs(complex(phi_R) - explicit[0]) < 1e-15
    assert abs(complex(phi_L) - explicit[1]) < 1e-15
    # for theta = pi/2 the squared operator is -I
    assert np.allclose(m @ m, -np.eye(2), atol=1e-15)


def test_matrix_power_long_runs():
    """Eigenphase powers stay unitary and match numpy's matrix_power."""
    rng = np.random.default_rng(9)
    for _ in range(20):
        k, l, theta = rng.uniform(-5, 5), rng.uniform(0.01, 1), rng.uniform(-np.pi, np.pi)
        phi_R, phi_L = mode_matrix_power(0.6, 0.8, k, l, theta, 10_000)
        assert abs(abs(complex(phi_R)) ** 2 + abs(complex(phi_L)) ** 2 - 1) < 1e-12
        reference = np.linalg.matrix_power(step_operator(k, l, theta), 1500) @ np.array([0.6, 0.8])
        power_R, power_L = mode_matrix_power(0.6, 0.8, k, l, theta, 1500)
        assert abs(complex(power_R) - reference[0]) < 1e-10
        assert abs(complex(power_L) - reference[1]) < 1e-10


def test_matrix_power_vectorized():
    """Array k matches node-by-node evaluation on both sides of the exact-power limit."""
    ks = np.linspace(-3, 3, 9)
    for t in (37, 1200):
        phi_R, _ = mode_matrix_power(0.6, 0.8, ks, 0.3, 0.5, t)
        for k, value in zip(ks, phi_R):
            single, _ = mode_matrix_power(0.6, 0.8, float(k), 0.3, 0.5, t)
            assert abs(value - complex(single)) < 1e-10


def test_lattice_frozen_coin_translates():
    """theta = 0, coherent, R-only: the field moves t*l to the right."""
    values = np.zeros(200, dtype=complex)
    values[50] = 1.0
    lattice = LatticeField.from_components(values, np.zeros(200), spacing=0.005)
    out, record = lattice_evolve(lattice, 0.0, 5, STEP)
    assert record is None
    assert out.values[60, 0] == 1.0
    assert np.sum(np.abs(out.values)) == 1.0


def test_lattice_requires_commensurate_step():
    """The step must move a whole number of sites."""
    lattice = LatticeField(np.zeros((10, 2)), spacing=0.004)
    with pytest.raises(ValueError):
        lattice_evolve(lattice, 0.3, 1, STEP)


def test_lattice_coherent_norm():
    """Coherent lattice evolution keeps the norm."""
    _, lattice = _lattice_gaussian()
    out, _ = lattice_evolve(lattice, PRESET_THETA, 50, STEP)
    assert abs(out.norm - lattice.norm) < 1e-12


@pytest.mark.slow
def test_lattice_matches_spectral_coherent_evolution():
    """100 coherent steps on a commensurate grid agree with Fourier synthesis."""
    packet, lattice = _lattice_gaussian()
    lattice_out, _ = lattice_evolve(lattice, PRESET_THETA, 100, STEP)
    spectral_out = evolve_unmeasured(packet, EQUAL_AMPLITUDE, EQUAL_AMPLITUDE, PRESET_THETA, STEP, 100,
                                     spectral=LATTICE_SPECTRAL)
    assert np.max(np.abs(lattice_out.values[:, 0] - spectral_out.field_R)) < 1e-6
    assert np.max(np.abs(lattice_out.values[:, 1] - spectral_out.field_L)) < 1e-6


def test_lattice_forced_all_left_matches_spectral():
    """A forced all-left record reproduces the measured packet branch."""
    packet, lattice = _lattice_gaussian()
    _, record = lattice_evolve(lattice, PRESET_THETA, 5, STEP, measure_each_step=True,
                               forced_outcomes=["L"] * 5)
    assert record.outcomes == ["L"] * 5
    assert all(0.0 < p < 1.0 for p in record.probabilities)
    spectral_out = evolve_measured_all_left(packet, EQUAL_AMPLITUDE, EQUAL_AMPLITUDE, PRESET_THETA, STEP, 5,
                                            spectral=LATTICE_SPECTRAL)
    assert np.max(np.abs(record.profile - spectral_out.field_L)) < 1e-8


def test_lattice_sampled_measurement_is_seeded():
    """Sampled outcomes are reproducible from the seed."""
    _, lattice = _lattice_gaussian()
    _, first = lattice_evolve(lattice, 0.7, 8, STEP, measure_each_step=True, seed=123)
    _, second = lattice_evolve(lattice, 0.7, 8, STEP, measure_each_step=True, seed=123)
    assert first.outcomes == second.outcomes
    assert first.seed == 123
    assert first.generator == "PCG64"
    assert len(first.outcomes) == 8


def test_lattice_theta_schedule():
    """A schedule of angles replaces the fixed coin; its length must match t."""
    _, lattice = _lattice_gaussian()
    scheduled, _ = lattice_evolve(lattice, 0.0, 3, STEP, theta_schedule=[0.2, 0.2, 0.2])
    fixed, _ = lattice_evolve(lattice, 0.2, 3, STEP)
    assert np.array_equal(scheduled.values, fixed.values)
    with pytest.raises(ValueError):
        lattice_evolve(lattice, 0.0, 3, STEP, theta_schedule=[0.2])
    with pytest.raises(ValueError):
        lattice_evolve(lattice, 0.0, 2, STEP, measure_each_step=True, forced_outcomes=["L", "X"])


def test_monte_carlo_certain_branch():
    """p_R = 1 gives every trajectory the same displacement t*l1."""
    step = MeasuredStepResult(p_R=1.0, l1=-0.01, p_L=0.0, l2=float("nan"), k=1.0, l=0.01)
    estimate = monte_carlo_measured_mode(step, 100, n_samples=10_000, seed=1)
    assert estimate.mean == pytest.approx(-1.0)
    assert estimate.variance == pytest.approx(0.0, abs=1e-20)


def test_monte_carlo_symmetric_branches():
    """p_R = 1/2 with l1 = -l2 centres on zero."""
    step = MeasuredStepResult(p_R=0.5, l1=-0.02, p_L=0.5, l2=0.02, k=1.0, l=0.01)
    estimate = monte_carlo_measured_mode(step, 400, n_samples=100_000, seed=2)
    assert abs(estimate.mean) < 4 * estimate.mean_stderr


def test_monte_carlo_rejects_small_runs():
    """Fewer than 10^4 samples are refused."""
    step = measured_step(0.6, 0.8, 0.3, 1.0, 0.01)
    with pytest.raises(ValueError):
        monte_carlo_measured_mode(step, 10, n_samples=100)


def test_monte_carlo_is_deterministic():
    """Identical seeds give identical estimates; the seed is recorded."""
    step = measured_step(0.6, 0.8, 0.3, 1.0, 0.01)
    first = monte_carlo_measured_mode(step, 50, n_samples=20_000, seed=77, chunk_size=5_000)
    second = monte_carlo_measured_mode(step, 50, n_samples=20_000, seed=77, chunk_size=5_000)
    assert first == second
    assert first.seed == 77


def test_monte_carlo_defaults_follow_settings(monkeypatch):
    """Unset sample count, chunk size and seed come from the Monte Carlo settings."""
    custom = Settings(monte_carlo=MonteCarloConfig(n_samples=20_000, chunk_size=5_000, seed=11))
    monkeypatch.setattr("qwalk.oracle.settings", custom)
    step = measured_step(0.6, 0.8, 0.3, 1.0, 0.01)
    estimate = monte_carlo_measured_mode(step, 50)
    assert estimate.n_samples == 20_000
    assert estimate.seed == 11
    assert estimate == monte_carlo_measured_mode(step, 50, n_samples=20_000, seed=11, chunk_size=5_000)
    walk = monte_carlo_particle_walk(CoinSpec.hadamard(), 1.0, 0.0, 20)
    assert (walk.n_samples, walk.seed) == (20_000, 11)


@pytest.mark.slow
def test_measured_moments_match_monte_carlo():
    """10^6 trajectories of 1000 measured steps match the closed-form moments."""
    rng = np.random.default_rng(1001)
    for i in range(5):
        step = measured_step(EQUAL_AMPLITUDE, EQUAL_AMPLITUDE, rng.uniform(0, 2 * np.pi), 1.0, 0.01)
        mean, variance = measured_moments(step, 1000)
        estimate = monte_carlo_measured_mode(step, 1000, n_samples=1_000_000, seed=500 + i)
        assert abs(estimate.mean - mean) < 4 * estimate.mean_stderr
        assert abs(estimate.variance - variance) < 4 * estimate.variance_stderr


def test_measured_particle_walk_is_diffusive():
    """With a read-out every step the variance grows linearly: sigma^2(200)/sigma^2(100) near 2."""
    coin = CoinSpec.hadamard()
    short = monte_carlo_particle_walk(coin, 1.0, 0.0, 100, n_samples=100_000, seed=3)
    long = monte_carlo_particle_walk(coin, 1.0, 0.0, 200, n_samples=100_000, seed=4)
    assert 1.9 <= long.variance / short.variance <= 2.1
    assert short.variance == pytest.approx(100.0, rel=0.03)


def test_branch_check_single_step():
    """One step: enumeration and composition coincide."""
    check = binomial_branch_check(0.4, 1.0, 0.01, 1)
    assert check.passed
    assert check.max_deviation < 1e-14
    assert check.probability_sum == pytest.approx(1.0, abs=1e-15)


def test_branch_check_random():
    """Ten steps for random parameters agree to 1e-12 and sum to one."""
    rng = np.random.default_rng(21)
    for _ in range(20):
        angle = rng.uniform(0, 2 * np.pi)
        check = binomial_branch_check(rng.uniform(-np.pi, np.pi), rng.uniform(0.1, 5), rng.uniform(0.001, 1), 10,
                                      a_R=float(np.cos(angle)), a_L=float(np.sin(angle)))
        assert check.passed, check.counterexample
        assert abs(check.probability_sum - 1.0) < 1e-12


def test_branch_check_limits():
    """Enumeration stops at 30 steps."""
    assert binomial_branch_check(0.4, 1.0, 0.01, 30).passed
    with pytest.raises(ValueError):
        binomial_branch_check(0.4, 1.0, 0.01, 31)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
