"""Structured state-vector evolution of the partial-phase-inversion walk.

A state is a C-contiguous ``complex128`` array of shape ``(N, n + m)``:
row ``x`` holds the coin amplitudes of vertex ``x``.  Coin columns
``0..n-1`` are the edge directions and ``n..n+m-1`` the self-loops.
All operators act in place on that single buffer.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import blas

from lackwalk.hypercube import HypercubeDims
from lackwalk.weights import CoinSpec


@dataclass(frozen=True)
class OracleSpec:
    """Marked vertices and the number ``s`` of self-loops inverted at each."""

    marked: tuple[int, ...]
    s: int = 1

    def __init__(self, marked: Iterable[int], s: int = 1):
        marked = tuple(int(v) for v in marked)
        if not marked:
            raise ValueError("at least one marked vertex is required")
        if len(set(marked)) != len(marked):
            raise ValueError(f"duplicate marked vertices in {marked}")
        if s < 1:
            raise ValueError(f"s must be >= 1, got {s}")
        object.__setattr__(self, "marked", marked)
        object.__setattr__(self, "s", int(s))

    @property
    def k(self) -> int:
        return len(self.marked)

    def indices(self) -> np.ndarray:
        return np.fromiter(self.marked, dtype=np.intp, count=len(self.marked))


@dataclass
class WalkResult:
    """Outcome of one walk.

    ``p_max``/``t_max`` are the global maximum of the success probability
    over the budget window and its earliest step.  ``t_peak``/``p_peak``
    locate the maximum of the first lobe of the probability curve, which
    is the quantity that behaves like a hitting time.
    """

    p_max: float
    t_max: int
    t_peak: int
    p_peak: float
    t_budget: int
    p_history: np.ndarray | None = field(default=None, repr=False)

    def write_trace(self, path) -> None:
        if self.p_history is None:
            raise ValueError("walk was run without keep_history")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "p"])
            for t, p in enumerate(self.p_history):
                writer.writerow([t, f"{p:.12g}"])


def coin_vector(coin: CoinSpec) -> np.ndarray:
    """Real unit vector the weighted Grover coin reflects about."""
    sc = np.empty(coin.coin_dim)
    sc[: coin.n] = 1.0
    sc[coin.n :] = math.sqrt(coin.l_prime)
    sc /= math.sqrt(coin.n + coin.l)
    return sc


def _check(state: np.ndarray, coin: CoinSpec) -> None:
    if state.ndim != 2 or state.shape[1] != coin.coin_dim:
        raise ValueError(f"state shape {state.shape} does not match coin dimension {coin.coin_dim}")


def initial_state(dims: HypercubeDims, coin: CoinSpec) -> np.ndarray:
    if coin.n != dims.n:
        raise ValueError(f"coin built for n={coin.n}, hypercube has n={dims.n}")
    row = coin_vector(coin) / math.sqrt(dims.N)
    return np.tile(row.astype(np.complex128), (dims.N, 1))


def apply_oracle(state: np.ndarray, oracle: OracleSpec, coin: CoinSpec) -> np.ndarray:
    """Negate the edge amplitudes and the first ``s`` self-loops at marked vertices."""
    _check(state, coin)
    if oracle.s > coin.m:
        raise ValueError(f"s={oracle.s} exceeds the number of self-loops m={coin.m}")
    idx = oracle.indices()
    if idx.min() < 0 or idx.max() >= state.shape[0]:
        raise ValueError(f"marked vertex outside [0, {state.shape[0]})")
    state[idx, : coin.n + oracle.s] *= -1
    return state


def apply_coin(state: np.ndarray, coin: CoinSpec, _sc: np.ndarray | None = None) -> np.ndarray:
    """Reflect every vertex's coin block about the weighted uniform coin state.

    Rank-one update ``psi <- 2 <s|psi> s - psi``; the dense coin matrix is
    never formed.
    """
    _check(state, coin)
    sc = coin_vector(coin) if _sc is None else _sc
    sc = sc.astype(np.complex128)
    proj = state @ sc
    np.negative(state, out=state)
    if state.flags.c_contiguous:
        # state.T is Fortran-ordered, so BLAS updates the buffer in place
        blas.zgeru(2.0, sc, proj, a=state.T, overwrite_a=1)
    else:
        state += 2.0 * proj[:, None] * sc
    return state


def apply_shift(state: np.ndarray, dims: HypercubeDims, coin: CoinSpec) -> np.ndarray:
    """Flip-flop shift: swap ``psi(c, x)`` with ``psi(c, x ^ 2**c)`` for each edge direction."""
    _check(state, coin)
    N, d = state.shape
    if N != dims.N:
        raise ValueError(f"state has {N} vertices, hypercube has {dims.N}")
    for c in range(dims.n):
        view = state.reshape(N >> (c + 1), 2, 1 << c, d)
        low = view[:, 0, :, c].copy()
        view[:, 0, :, c] = view[:, 1, :, c]
        view[:, 1, :, c] = low
    return state


def step(state, dims: HypercubeDims, coin: CoinSpec, oracle: OracleSpec, _sc=None) -> np.ndarray:
    """One walk step: oracle, then coin, then shift."""
    apply_oracle(state, oracle, coin)
    apply_coin(state, coin, _sc)
    apply_shift(state, dims, coin)
    return state


def inverse_step(state, dims: HypercubeDims, coin: CoinSpec, oracle: OracleSpec) -> np.ndarray:
    """Undo :func:`step`; every factor is self-adjoint, so only the order flips."""
    apply_shift(state, dims, coin)
    apply_coin(state, coin)
    apply_oracle(state, oracle, coin)
    return state


def success_probability(state: np.ndarray, oracle: OracleSpec) -> float:
    block = state[oracle.indices()]
    return float(np.vdot(block, block).real)


def default_budget(dims: HypercubeDims, m: int, k: int, multiplier: float = 3) -> int:
    """Step budget: ``multiplier`` times the expected hitting time."""
    base = math.ceil(math.pi / 2 * math.sqrt(dims.N * (dims.n + m) / k))
    return max(1, math.ceil(base * multiplier))


def first_peak(history: Sequence[float]) -> tuple[int, float]:
    """Step and value of the maximum of the first probability lobe.

    The lobe ends at the first step where the probability drops below half
    of its running maximum, once that maximum exceeds twice the starting
    value.  If it never closes the whole history is one lobe.
    """
    ps = np.asarray(history, dtype=float)
    running = np.maximum.accumulate(ps)
    closed = np.flatnonzero((ps < running / 2) & (running > 2 * ps[0]))
    end = closed[0] if closed.size else ps.size
    t = int(np.argmax(ps[:end]))
    return t, float(ps[t])


def run_walk(
    dims: HypercubeDims,
    coin: CoinSpec,
    oracle: OracleSpec,
    t_budget: int | None = None,
    keep_history: bool = False,
) -> WalkResult:
    """Evolve from the initial state for ``t_budget`` steps tracking success probability."""
    if t_budget is None:
        t_budget = default_budget(dims, coin.m, oracle.k)
    if t_budget < 0:
        raise ValueError(f"step budget must be non-negative, got {t_budget}")
    if oracle.s > coin.m:
        raise ValueError(f"s={oracle.s} exceeds the number of self-loops m={coin.m}")
    idx = oracle.indices()
    if idx.max() >= dims.N:
        raise ValueError(f"marked vertex outside [0, {dims.N})")

    state = initial_state(dims, coin)
    sc = coin_vector(coin)
    history = np.empty(t_budget + 1)
    history[0] = success_probability(state, oracle)
    for t in range(1, t_budget + 1):
        step(state, dims, coin, oracle, sc)
        block = state[idx]
        history[t] = np.vdot(block, block).real

    t_max = int(np.argmax(history))
    t_peak, p_peak = first_peak(history)
    return WalkResult(
        p_max=float(history[t_max]),
        t_max=t_max,
        t_peak=t_peak,
        p_peak=p_peak,
        t_budget=t_budget,
        p_history=history if keep_history else None,
    )
