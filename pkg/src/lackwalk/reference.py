"""Dense matrix versions of the walk operators for small hypercubes.

Used as an independent check on :mod:`lackwalk.engine`.  Matrices act on
the flattened vertex-major state, index ``x * (n + m) + c``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from lackwalk.hypercube import HypercubeDims
from lackwalk.weights import CoinSpec

MAX_DENSE_DIM = 4096


class OperatorLabel(str, enum.Enum):
    COIN = "coin"
    SHIFT = "shift"
    ORACLE = "oracle"
    STEP = "step"


@dataclass
class DenseOperator:
    matrix: np.ndarray
    label: OperatorLabel

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def adjoint(self) -> "DenseOperator":
        return DenseOperator(self.matrix.conj().T, self.label)

    def unitarity_error(self) -> float:
        u = self.matrix
        return float(np.abs(u.conj().T @ u - np.eye(self.dim)).max())


def _dense_coin(dims: HypercubeDims, coin: CoinSpec) -> np.ndarray:
    # coin state written out term by term, independently of the engine's helper
    n, m = dims.n, coin.m
    s = np.array([1.0] * n + [np.sqrt(coin.l / m)] * m) / np.sqrt(n + coin.l)
    local = 2.0 * np.outer(s, s) - np.eye(n + m)
    return np.kron(np.eye(dims.N), local).astype(complex)


def _dense_shift(dims: HypercubeDims, coin: CoinSpec) -> np.ndarray:
    d = dims.n + coin.m
    size = dims.N * d
    perm = np.zeros((size, size), dtype=complex)
    for x in range(dims.N):
        for c in range(d):
            target = x ^ (1 << c) if c < dims.n else x
            perm[target * d + c, x * d + c] = 1.0
    return perm


def _dense_oracle(dims: HypercubeDims, coin: CoinSpec, marked, s: int) -> np.ndarray:
    d = dims.n + coin.m
    diag = np.ones(dims.N * d)
    for w in marked:
        for c in range(dims.n):
            diag[w * d + c] = -1.0
        for tau in range(s):
            diag[w * d + dims.n + tau] = -1.0
    return np.diag(diag).astype(complex)


def build_dense(label, dims: HypercubeDims, coin: CoinSpec, oracle=None) -> DenseOperator:
    """Explicit ``(n+m)N`` square matrix for one operator or a full step.

    ``oracle`` may be an :class:`~lackwalk.engine.OracleSpec` or ``None``
    (no marked vertices, i.e. the identity).
    """
    label = OperatorLabel(label)
    size = dims.N * (dims.n + coin.m)
    if size > MAX_DENSE_DIM:
        raise ValueError(f"dense dimension {size} exceeds {MAX_DENSE_DIM}")
    marked = () if oracle is None else oracle.marked
    s = 1 if oracle is None else oracle.s
    if s > coin.m:
        raise ValueError(f"s={s} exceeds the number of self-loops m={coin.m}")
    if any(not 0 <= w < dims.N for w in marked):
        raise ValueError(f"marked vertex outside [0, {dims.N})")

    if label is OperatorLabel.COIN:
        matrix = _dense_coin(dims, coin)
    elif label is OperatorLabel.SHIFT:
        matrix = _dense_shift(dims, coin)
    elif label is OperatorLabel.ORACLE:
        matrix = _dense_oracle(dims, coin, marked, s)
    else:
        matrix = _dense_shift(dims, coin) @ _dense_coin(dims, coin) @ _dense_oracle(dims, coin, marked, s)
    return DenseOperator(matrix, label)


def evolve_dense(op: DenseOperator, state: np.ndarray, t: int) -> np.ndarray:
    """Apply ``op`` ``t`` times to a flat or ``(N, n+m)`` state; returns the same shape."""
    shape = state.shape
    vec = np.array(state, dtype=complex).reshape(-1)
    if vec.size != op.dim:
        raise ValueError(f"state size {vec.size} does not match operator dimension {op.dim}")
    for _ in range(t):
        vec = op.matrix @ vec
    return vec.reshape(shape)
