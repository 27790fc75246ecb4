import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import dense_branches, dense_evolve
from polwalk.errors import NormLossError, PolwalkError
from polwalk.walk import (
    HADAMARD,
    CoinOperator,
    PositionDistribution,
    WalkState,
    classical_walk,
    coin_reduced_density,
    entanglement_entropy,
    evolve,
    position_distribution,
    spread_speed,
    step,
)

FIG3 = [(0.8, -1, 0), (0.6, 1, 0)]


def fig3_state():
    return WalkState.from_terms(FIG3)


@st.composite
def walk_states(draw, max_sites=4, spread=3):
    n = draw(st.integers(1, max_sites))
    xs = draw(st.lists(st.integers(-spread, spread), min_size=n, max_size=n))
    parity = xs[0] % 2
    terms = []
    for x in xs:
        x = x if x % 2 == parity else x + 1
        for c in (0, 1):
            re = draw(st.floats(-1, 1))
            im = draw(st.floats(-1, 1))
            terms.append((complex(re, im), x, c))
    if sum(abs(a) ** 2 for a, _, _ in terms) < 1e-6:
        terms[0] = (1.0, terms[0][1], 0)
    return WalkState.from_terms(terms)


def test_coin_rejects_out_of_range():
    for bad in (0.0, 90.0, -5.0, 120.0):
        with pytest.raises(PolwalkError, match="open interval"):
            CoinOperator(bad)


def test_coin_matrix_is_rotation():
    m = CoinOperator(30.0).matrix
    assert np.allclose(m @ m.T, np.eye(2))
    assert np.isclose(np.linalg.det(m), 1.0)
    assert np.allclose(HADAMARD.matrix, np.array([[1, -1], [1, 1]]) / np.sqrt(2))


def test_two_step_hand_values():
    s = evolve(fig3_state(), HADAMARD, 2)
    amps = s.as_dict()
    expect = {-3: (0.4, 0.0), -1: (-0.1, 0.4), 1: (-0.3, 0.7), 3: (0.0, 0.3)}
    assert set(amps) == set(expect)
    for x, (a, b) in expect.items():
        assert abs(amps[x][0] - a) < 1e-12
        assert abs(amps[x][1] - b) < 1e-12
    d = position_distribution(s).as_dict()
    for x, p in {-3: 0.16, -1: 0.17, 1: 0.58, 3: 0.09}.items():
        assert abs(d[x] - p) < 1e-12


def test_localized_coin0_one_step():
    s = step(WalkState.localized(0, (1, 0)))
    h = 1 / np.sqrt(2)
    assert np.allclose(s.amplitude(-1), (h, 0))
    assert np.allclose(s.amplitude(1), (0, h))


def test_zero_steps_is_identity():
    s = fig3_state()
    t = evolve(s, 45, 0)
    assert t.start == s.start and np.array_equal(t.a, s.a) and np.array_equal(t.b, s.b)


def test_negative_steps_rejected():
    with pytest.raises(PolwalkError):
        evolve(fig3_state(), 45, -1)


def test_unnormalized_state_rejected():
    with pytest.raises(PolwalkError, match="normalized"):
        WalkState(0, [1.0], [1.0])


def test_state_arrays_are_read_only():
    s = fig3_state()
    with pytest.raises(ValueError):
        s.a[0] = 2


@pytest.mark.parametrize("psi", [45.0, 20.0, 71.3])
@pytest.mark.parametrize("n", [1, 3, 8])
def test_matches_dense_unitary_oracle(psi, n):
    terms = [(0.3 + 0.1j, -2, 0), (0.5, 0, 1), (-0.2j, 2, 0), (0.4, 2, 1)]
    width = 2 + n + 1
    dense = dense_evolve(terms, psi, n, width)
    xs, da, db = dense_branches(dense, width)
    s = evolve(WalkState.from_terms(terms), psi, n)
    a, b = s.window(-width, width)
    assert np.max(np.abs(a - da)) < 1e-12
    assert np.max(np.abs(b - db)) < 1e-12


@given(walk_states(), st.floats(1.0, 89.0), st.integers(1, 12))
def test_norm_conserved(state, psi, n):
    s = evolve(state, psi, n)
    assert abs(np.sum(np.abs(s.a) ** 2) + np.sum(np.abs(s.b) ** 2) - 1.0) < 1e-12


@given(walk_states(), st.integers(1, 10))
def test_parity_alternates(state, n):
    par = {x % 2 for x in state.occupied()}
    s = evolve(state, 45, n)
    for x in s.occupied():
        assert (x - n) % 2 in par


@given(walk_states(), st.floats(0, 2 * np.pi), st.integers(1, 8))
def test_global_phase_commutes(state, g, n):
    # a global phase passes straight through the walk
    phase = np.exp(1j * g)
    lhs = evolve(WalkState(state.start, state.a * phase, state.b * phase), 45, n)
    rhs = evolve(state, 45, n)
    assert np.allclose(lhs.a, rhs.a * phase, atol=1e-12)
    assert np.allclose(lhs.b, rhs.b * phase, atol=1e-12)


def test_pruning_loss_raises():
    # the tail below the pruning threshold must not hide real probability
    from polwalk.walk import _pruned

    with pytest.raises(NormLossError):
        _pruned(0, np.array([1e-16] * 10 ** 5, dtype=complex), np.zeros(10 ** 5, dtype=complex))


def test_distribution_stats():
    d = PositionDistribution.from_dict({-1: 0.25, 1: 0.75})
    assert d.mean() == pytest.approx(0.5)
    assert d.variance() == pytest.approx(0.75)
    assert d.total_variation(PositionDistribution.from_dict({-1: 0.75, 1: 0.25})) == pytest.approx(0.5)


def test_distribution_must_sum_to_one():
    with pytest.raises(PolwalkError):
        PositionDistribution(0, [0.5, 0.4])


def test_spread_speed_hadamard_is_ballistic():
    s0 = WalkState.localized(0, np.array([1, 1j]) / np.sqrt(2))
    d0 = position_distribution(s0)
    speeds = [spread_speed(position_distribution(evolve(s0, 45, n)), d0, n) for n in (50, 100, 200)]
    # sigma grows linearly; the slope tends to sqrt(1 - 1/sqrt(2))
    assert abs(speeds[-1] - np.sqrt(1 - 1 / np.sqrt(2))) < 0.01
    assert np.ptp(speeds) < 0.01


def test_spread_speed_needs_positive_n():
    d = PositionDistribution(0, [1.0])
    with pytest.raises(PolwalkError):
        spread_speed(d, d, 0)


def test_classical_walk_binomial():
    d = classical_walk(PositionDistribution(0, [1.0]), 4)
    expect = {-4: 1 / 16, -2: 4 / 16, 0: 6 / 16, 2: 4 / 16, 4: 1 / 16}
    got = d.as_dict(tol=0)
    for x, p in expect.items():
        assert got[x] == pytest.approx(p, abs=1e-15)
    assert d.std() == pytest.approx(2.0)


@given(st.floats(-0.99, 0.99), st.integers(1, 30))
def test_classical_spread_symmetric(alpha, n):
    d = PositionDistribution.from_dict({-1: alpha ** 2, 1: 1 - alpha ** 2})
    m = PositionDistribution.from_dict({-1: 1 - alpha ** 2, 1: alpha ** 2})
    assert spread_speed(classical_walk(d, n), d, n) == pytest.approx(spread_speed(classical_walk(m, n), m, n), abs=1e-12)


def test_entropy_limits():
    assert entanglement_entropy(np.diag([1.0, 0.0])) == 0.0
    assert entanglement_entropy(np.eye(2) / 2) == pytest.approx(np.log(2))


def test_entropy_rejects_bad_matrices():
    with pytest.raises(PolwalkError, match="Hermitian"):
        entanglement_entropy(np.array([[0.5, 0.1], [0.2, 0.5]]))
    with pytest.raises(PolwalkError, match="trace"):
        entanglement_entropy(np.eye(2))
    with pytest.raises(PolwalkError, match="positive"):
        entanglement_entropy(np.diag([1.5, -0.5]))


@given(walk_states(), st.integers(0, 10))
def test_coin_density_is_valid_state(state, n):
    rho = coin_reduced_density(evolve(state, 45, n))
    assert np.allclose(rho, rho.conj().T)
    assert abs(np.trace(rho) - 1) < 1e-12
    assert np.min(np.linalg.eigvalsh(rho)) > -1e-12
    assert -1e-12 <= entanglement_entropy(rho) <= np.log(2) + 1e-12


@given(walk_states(), st.floats(0, 6.3), st.floats(0, 6.3), st.integers(0, 8))
def test_entropy_ignores_branch_phases(state, g, d, n):
    s = evolve(state, 45, n)
    e0 = entanglement_entropy(coin_reduced_density(s))
    e1 = entanglement_entropy(coin_reduced_density(s.with_branch_phases(g, d)))
    assert abs(e0 - e1) < 1e-12


def test_from_terms_sums_duplicates():
    s = WalkState.from_terms([(0.5, 0, 0), (0.5, 0, 0)])
    assert s.amplitude(0) == (1.0, 0.0)


def test_from_terms_rejects_bad_coin():
    with pytest.raises(PolwalkError):
        WalkState.from_terms([(1.0, 0, 2)])
