"""Tests for the particle walk on a lattice."""

import pytest
import numpy as np
from pathlib import Path
from hypothesis import given, settings, strategies as st

# Add parent to path
import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from qwalk.coin_walk import (
    CoinSpec, LatticeWalkState, OperatorOrder, coin_matrix, position_distribution,
    position_statistics, start_state, walk_evolve, walk_step,
)

angles = st.floats(min_value=-2 * np.pi, max_value=2 * np.pi, allow_nan=False)
HADAMARD = CoinSpec.hadamard()


def test_hadamard_matrix():
    """All-zero angles give the Hadamard coin."""
    expected = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    assert np.allclose(coin_matrix(HADAMARD), expected, atol=1e-15)


@given(angles, angles, angles, angles)
@settings(max_examples=200, deadline=None)
def test_coin_matrix_unitary(eta, phi, theta_c, varphi):
    """Every parametrized coin is unitary."""
    m = coin_matrix(CoinSpec(eta, phi, theta_c, varphi))
    assert np.max(np.abs(m @ m.conj().T - np.eye(2))) < 1e-12


def test_coin_matrix_factors():
    """The coin equals the product of its three factor matrices."""
    phi, theta_c = np.pi / 4, np.pi / 6
    left = np.array([[np.exp(1j * phi), 0], [0, np.exp(-1j * phi)]])
    middle = np.array([[np.exp(1j * theta_c), np.exp(-1j * theta_c)],
                       [np.exp(1j * theta_c), -np.exp(-1j * theta_c)]])
    expected = left @ middle / np.sqrt(2)
    assert np.allclose(coin_matrix(CoinSpec(eta=0.0, phi=phi, theta_c=theta_c)), expected, atol=1e-15)


def test_general_coin_keeps_norm():
    """A coin with theta_c off 0 and pi/2 stays unitary and walks without gaining norm."""
    coin = CoinSpec(phi=0.785, theta_c=0.5236)
    m = coin_matrix(coin)
    assert np.max(np.abs(m @ m.conj().T - np.eye(2))) < 1e-12
    state = walk_evolve(start_state("R"), coin, t=5)
    assert state.norm == pytest.approx(1.0, abs=1e-12)


def test_coin_rejects_bad_input():
    """Non-unitary matrices and non-finite angles are refused."""
    with pytest.raises(ValueError):
        CoinSpec.from_matrix([[1, 1], [0, 1]])
    with pytest.raises(ValueError):
        coin_matrix(CoinSpec(eta=np.inf))


def test_single_hadamard_step():
    """|0>|R> splits into 1/sqrt(2) at +1 (R) and -1 (L)."""
    state = walk_step(start_state("R"), HADAMARD)
    assert np.allclose(state.amplitude_at(1), [1 / np.sqrt(2), 0])
    assert np.allclose(state.amplitude_at(-1), [0, 1 / np.sqrt(2)])
    assert np.allclose(state.amplitude_at(0), [0, 0])


def test_hadamard_two_steps_exact():
    """Two Hadamard steps give 1/4, 1/2, 1/4 at x = 2, 0, -2."""
    state = walk_evolve(start_state("R"), HADAMARD, t=2)
    x, p = position_distribution(state)
    expected = {2: 0.25, 0: 0.5, -2: 0.25, 1: 0.0, -1: 0.0}
    for site, prob in expected.items():
        assert abs(p[list(x).index(site)] - prob) < 1e-14


def test_identity_coin_translates():
    """With a frozen coin the R component moves t sites right."""
    state = walk_evolve(start_state("R", step_length=0.5), CoinSpec.identity(), t=7)
    x, p = position_distribution(state)
    assert x[np.argmax(p)] == pytest.approx(3.5)
    assert p.max() == pytest.approx(1.0, abs=1e-15)


def test_zero_steps_is_identity():
    """t = 0 returns the input."""
    initial = start_state("symmetric")
    state = walk_evolve(initial, HADAMARD, t=0)
    assert state.min_site == initial.min_site
    assert np.array_equal(state.amplitudes, initial.amplitudes)


def test_evolve_matches_step_composition():
    """walk_evolve(t=3) is three walk_step calls."""
    state = start_state("R")
    manual = walk_step(walk_step(walk_step(state, HADAMARD), HADAMARD), HADAMARD)
    evolved = walk_evolve(state, HADAMARD, t=3)
    assert np.allclose(evolved.amplitudes, manual.amplitudes, atol=0)


def test_symmetric_start_is_symmetric():
    """(|R> + i|L>)/sqrt(2) spreads symmetrically under the Hadamard coin."""
    state = walk_evolve(start_state("symmetric"), HADAMARD, t=100)
    p = state.probabilities
    assert np.max(np.abs(p - p[::-1])) < 1e-10


@given(angles, angles, angles, st.sampled_from(list(OperatorOrder)), st.integers(min_value=1, max_value=40))
@settings(max_examples=50, deadline=None)
def test_norm_conserved(eta, phi, theta_c, order, t):
    """Evolution keeps the total probability at 1."""
    state = walk_evolve(start_state("symmetric"), CoinSpec(eta, phi, theta_c), order, t)
    assert abs(state.norm - 1.0) < 1e-12
    assert state.min_site >= -t
    assert state.min_site + len(state.amplitudes) - 1 <= t


@pytest.mark.parametrize("order", list(OperatorOrder))
def test_adjoint_reverses_evolution(order):
    """t inverse steps after t forward steps recover the start."""
    coin = CoinSpec(eta=0.3, phi=-1.1, theta_c=0.7, varphi=0.2)
    initial = start_state("symmetric")
    forward = walk_evolve(initial, coin, order, t=25)
    back = walk_evolve(forward, coin, order, t=25, adjoint=True)
    recovered = back.window(-50, 50)
    expected = initial.window(-50, 50)
    assert np.max(np.abs(recovered - expected)) < 1e-10


def test_operator_orders_differ():
    """Coin-then-shift and shift-then-coin give different distributions."""
    start = start_state("R")
    a = walk_evolve(start, HADAMARD, OperatorOrder.COIN_THEN_SHIFT, 10)
    b = walk_evolve(start, HADAMARD, OperatorOrder.SHIFT_THEN_COIN, 10)
    pa = np.sum(np.abs(a.window(-11, 11)) ** 2, axis=1)
    pb = np.sum(np.abs(b.window(-11, 11)) ** 2, axis=1)
    assert np.max(np.abs(pa - pb)) > 1e-3


def test_position_statistics_simple():
    """Point state and a symmetric two-point state."""
    assert position_statistics(start_state("R")) == (0.0, 0.0)
    two_point = LatticeWalkState(
        np.array([[1 / np.sqrt(2), 0], [0, 0], [0, 1 / np.sqrt(2)]]), min_site=-1, step_length=0.5)
    mean, variance = position_statistics(two_point)
    assert mean == pytest.approx(0.0, abs=1e-15)
    assert variance == pytest.approx(0.25)


def test_coherent_spread_is_ballistic():
    """Hadamard variance grows quadratically: sigma^2(200) / sigma^2(100) near 4."""
    _, var_100 = position_statistics(walk_evolve(start_state("R"), HADAMARD, t=100))
    _, var_200 = position_statistics(walk_evolve(start_state("R"), HADAMARD, t=200))
    assert 3.6 <= var_200 / var_100 <= 4.4


def test_unknown_start_state():
    """Unknown start names are rejected."""
    with pytest.raises(ValueError):
        start_state("up")


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
