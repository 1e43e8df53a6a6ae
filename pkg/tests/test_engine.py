import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lackwalk.engine import (
    OracleSpec,
    apply_coin,
    apply_oracle,
    apply_shift,
    coin_vector,
    default_budget,
    first_peak,
    initial_state,
    inverse_step,
    run_walk,
    step,
    success_probability,
)
from lackwalk.hypercube import HypercubeDims
from lackwalk.reference import build_dense, evolve_dense
from lackwalk.weights import CoinSpec, WeightScheme, make_coin_spec


def random_state(rng, N, d):
    psi = rng.normal(size=(N, d)) + 1j * rng.normal(size=(N, d))
    return psi / np.linalg.norm(psi)


def test_initial_state_n12_m1():
    dims = HypercubeDims(12)
    l = 12 / 4096
    coin = CoinSpec(12, 1, l)
    psi = initial_state(dims, coin)
    edge = 1 / (math.sqrt(12 + l) * 64)
    assert edge == pytest.approx(0.00451, abs=1e-6)
    np.testing.assert_allclose(psi[:, :12].real, edge, rtol=1e-15)
    np.testing.assert_allclose(psi[:, 12].real, math.sqrt(0.0029296875) / (math.sqrt(12.0029296875) * 64), rtol=1e-15)
    assert abs(np.vdot(psi, psi).real - 1) < 1e-12


def test_initial_state_n3_m2_hand_values():
    # l' = 0.5, m = 2 -> l = 1: edge 1/(2*sqrt(8)), loop sqrt(.5)/(2*sqrt(8)) = 1/8
    psi = initial_state(HypercubeDims(3), CoinSpec(3, 2, 1.0))
    assert psi.shape == (8, 5)
    np.testing.assert_allclose(psi[:, :3], 0.17677669529663687, rtol=1e-15)
    np.testing.assert_allclose(psi[:, 3:], 0.125, rtol=1e-15)
    assert np.all(psi.imag == 0)


def test_single_loop_reduces_to_lqw_initial_state():
    dims, l = HypercubeDims(5), 0.37
    psi = initial_state(dims, CoinSpec(5, 1, l))
    scale = 1 / (math.sqrt(dims.N) * math.sqrt(dims.n + l))
    np.testing.assert_allclose(psi[:, -1], math.sqrt(l) * scale, rtol=4e-16, atol=0)
    np.testing.assert_allclose(psi[:, :-1], scale, rtol=4e-16, atol=0)


def test_oracle_partial_inversion_signs():
    n, m = 4, 4
    dims, coin = HypercubeDims(n), CoinSpec(n, m, 0.4)
    psi = np.ones((dims.N, n + m), dtype=complex)
    apply_oracle(psi, OracleSpec([6], s=1), coin)
    np.testing.assert_array_equal(psi[6].real, [-1, -1, -1, -1, -1, 1, 1, 1])
    assert np.all(np.delete(psi, 6, axis=0) == 1)


def test_oracle_full_inversion_when_m1():
    coin = CoinSpec(3, 1, 0.2)
    psi = np.ones((8, 4), dtype=complex)
    apply_oracle(psi, OracleSpec([2, 5]), coin)
    assert np.all(psi[[2, 5]] == -1) and np.all(psi[[0, 1, 3, 4, 6, 7]] == 1)


def test_oracle_errors():
    dims, coin = HypercubeDims(3), CoinSpec(3, 2, 0.2)
    psi = initial_state(dims, coin)
    with pytest.raises(ValueError):
        apply_oracle(psi, OracleSpec([8]), coin)
    with pytest.raises(ValueError):
        apply_oracle(psi, OracleSpec([0], s=3), coin)
    with pytest.raises(ValueError):
        OracleSpec([1, 1])
    with pytest.raises(ValueError):
        OracleSpec([])


def test_coin_fixes_coin_state_and_negates_orthogonal():
    coin = CoinSpec(3, 2, 0.7)
    sc = coin_vector(coin)
    psi = np.zeros((8, 5), dtype=complex)
    psi[4] = sc
    orth = np.array([1.0, -1.0, 0, 0, 0])
    psi[6] = orth
    apply_coin(psi, coin)
    np.testing.assert_allclose(psi[4], sc, atol=1e-15)
    np.testing.assert_allclose(psi[6], -orth, atol=1e-15)


def test_coin_matches_dense():
    rng = np.random.default_rng(5)
    dims, coin = HypercubeDims(3), CoinSpec(3, 2, 0.3)
    psi = random_state(rng, 8, 5)
    expected = evolve_dense(build_dense("coin", dims, coin), psi, 1)
    assert np.abs(apply_coin(psi.copy(), coin) - expected).max() < 1e-12


def test_coin_non_contiguous_fallback():
    rng = np.random.default_rng(9)
    dims, coin = HypercubeDims(3), CoinSpec(3, 2, 0.3)
    big = random_state(rng, 8, 10)
    view = big[:, ::2]
    expected = evolve_dense(build_dense("coin", dims, coin), view.copy(), 1)
    apply_coin(view, coin)
    assert np.abs(view - expected).max() < 1e-12


def test_shift_single_edge():
    dims, coin = HypercubeDims(3), CoinSpec(3, 1, 0.1)
    psi = np.zeros((8, 4), dtype=complex)
    psi[0, 0] = 1
    apply_shift(psi, dims, coin)
    assert psi[1, 0] == 1 and np.count_nonzero(psi) == 1


def test_shift_keeps_self_loops():
    rng = np.random.default_rng(2)
    dims, coin = HypercubeDims(4), CoinSpec(4, 3, 0.1)
    psi = random_state(rng, 16, 7)
    loops = psi[:, 4:].copy()
    apply_shift(psi, dims, coin)
    np.testing.assert_array_equal(psi[:, 4:], loops)


def test_shift_matches_permutation_reference():
    rng = np.random.default_rng(3)
    dims, coin = HypercubeDims(3), CoinSpec(3, 1, 0.1)
    psi = random_state(rng, 8, 4)
    expected = evolve_dense(build_dense("shift", dims, coin), psi, 1)
    np.testing.assert_array_equal(apply_shift(psi.copy(), dims, coin), expected)


def test_step_matches_dense_n3_m2():
    dims, coin, oracle = HypercubeDims(3), CoinSpec(3, 2, 0.5), OracleSpec([0])
    psi0 = initial_state(dims, coin)
    expected = evolve_dense(build_dense("step", dims, coin, oracle), psi0, 1)
    got = step(psi0.copy(), dims, coin, oracle)
    assert np.abs(got - expected).max() < 1e-12
    assert abs(np.vdot(got, got).real - 1) < 1e-12


def test_step_reversibility():
    dims = HypercubeDims(8)
    coin = make_coin_spec(WeightScheme.N2_OVER, dims, 3, 5)
    oracle = OracleSpec([0, 1, 2], s=2)
    psi0 = initial_state(dims, coin)
    psi = psi0.copy()
    for _ in range(100):
        step(psi, dims, coin, oracle)
    for _ in range(100):
        inverse_step(psi, dims, coin, oracle)
    assert np.abs(psi - psi0).max() < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(1, 5), st.floats(0.01, 3.0), st.integers(0, 2**32 - 1))
def test_involutions(n, m, l, seed):
    rng = np.random.default_rng(seed)
    dims, coin = HypercubeDims(n), CoinSpec(n, m, l)
    psi = random_state(rng, dims.N, n + m)
    s = int(rng.integers(1, m + 1))
    marked = rng.choice(dims.N, size=min(3, dims.N), replace=False)
    oracle = OracleSpec(marked, s)

    twice = apply_oracle(apply_oracle(psi.copy(), oracle, coin), oracle, coin)
    np.testing.assert_array_equal(twice, psi)
    twice = apply_shift(apply_shift(psi.copy(), dims, coin), dims, coin)
    np.testing.assert_array_equal(twice, psi)
    twice = apply_coin(apply_coin(psi.copy(), coin), coin)
    assert np.abs(twice - psi).max() < 1e-12
    after = step(psi.copy(), dims, coin, oracle)
    assert abs(np.vdot(after, after).real - 1) < 1e-12


def test_success_probability_examples():
    dims = HypercubeDims(6)
    coin = CoinSpec(6, 3, 0.2)
    psi = initial_state(dims, coin)
    assert success_probability(psi, OracleSpec([3, 9, 40])) == pytest.approx(3 / 64, abs=1e-15)
    conc = np.zeros_like(psi)
    conc[[3, 9], 0] = 1 / math.sqrt(2)
    assert success_probability(conc, OracleSpec([3, 9])) == pytest.approx(1.0, abs=1e-15)


def test_success_probability_brute_force():
    rng = np.random.default_rng(17)
    psi = random_state(rng, 8, 5)
    brute = 0.0
    for x in (0, 1):
        for c in range(5):
            brute += abs(psi[x, c]) ** 2
    assert success_probability(psi, OracleSpec([0, 1])) == pytest.approx(brute, rel=1e-14)


def test_run_walk_zero_budget():
    dims = HypercubeDims(12)
    coin = make_coin_spec(WeightScheme.N_OVER, dims, 3, 2)
    res = run_walk(dims, coin, OracleSpec([0, 1, 2]), t_budget=0, keep_history=True)
    assert res.t_max == 0 and res.t_peak == 0
    assert res.p_max == pytest.approx(3 / 4096, rel=1e-12)


def test_run_walk_history_invariants(tmp_path):
    dims = HypercubeDims(7)
    coin = make_coin_spec(WeightScheme.N2_OVER_TIMES_K, dims, 3, 4)
    res = run_walk(dims, coin, OracleSpec([0, 1, 2]), keep_history=True)
    h = res.p_history
    assert len(h) == res.t_budget + 1
    assert h[res.t_max] == res.p_max == h.max()
    assert np.all(h[: res.t_max] < res.p_max)
    assert h[res.t_peak] == res.p_peak <= res.p_max
    res.write_trace(tmp_path / "trace.csv")
    lines = (tmp_path / "trace.csv").read_text().splitlines()
    assert lines[0] == "step,p" and len(lines) == res.t_budget + 2


def test_all_loops_inverted_matches_single_loop():
    # with s = m the loops stay symmetric and act as one loop of weight l
    dims = HypercubeDims(8)
    multi = run_walk(dims, CoinSpec(8, 4, 0.3), OracleSpec([0, 1, 2], s=4), 200, keep_history=True)
    single = run_walk(dims, CoinSpec(8, 1, 0.3), OracleSpec([0, 1, 2], s=1), 200, keep_history=True)
    np.testing.assert_allclose(multi.p_history, single.p_history, atol=1e-12)


def test_default_budget():
    dims = HypercubeDims(12)
    assert default_budget(dims, 9, 3) == 3 * math.ceil(math.pi / 2 * math.sqrt(4096 * 21 / 3))
    assert default_budget(dims, 9, 3, 1) == 266


def test_first_peak():
    ps = [0.0, 0.2, 0.6, 0.5, 0.62, 0.2, 0.0, 0.9, 0.1]
    assert first_peak(ps) == (4, 0.62)
    assert first_peak([0.1, 0.2, 0.3]) == (2, 0.3)
