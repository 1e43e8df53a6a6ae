"""Self-loop weight schemes and their split over ``m`` loops."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from lackwalk.hypercube import HypercubeDims

MAX_LOOPS = 30


class WeightScheme(str, enum.Enum):
    """Total self-loop weight ``l`` as a function of ``n``, ``N`` and ``k``."""

    N_OVER = "n_over_N"
    N_OVER_TIMES_K = "n_over_N_times_k"
    N2_OVER = "n2_over_N"
    N2_OVER_TIMES_K = "n2_over_N_times_k"

    @classmethod
    def parse(cls, text: "str | WeightScheme") -> "WeightScheme":
        if isinstance(text, cls):
            return text
        for scheme in cls:
            if text in (scheme.value, scheme.name, scheme.name.lower()):
                return scheme
        raise ValueError(f"unknown weight scheme {text!r}")

    def __str__(self) -> str:
        return self.value


def compute_weight(scheme: WeightScheme, dims: HypercubeDims, k: int) -> float:
    """Total self-loop weight for ``k`` marked vertices.

    ``k`` only enters the ``*_TIMES_K`` schemes but must be positive for all.
    """
    if k < 1:
        raise ValueError(f"number of marked vertices must be >= 1, got {k}")
    scheme = WeightScheme.parse(scheme)
    n, N = dims.n, dims.N
    if scheme is WeightScheme.N_OVER:
        return n / N
    if scheme is WeightScheme.N_OVER_TIMES_K:
        return n / N * k
    if scheme is WeightScheme.N2_OVER:
        return n * n / N
    return n * n / N * k


@dataclass(frozen=True)
class CoinSpec:
    n: int
    m: int
    l: float
    scheme: WeightScheme | None = None

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"number of self-loops must be >= 1, got {self.m}")
        if self.m > MAX_LOOPS:
            raise ValueError(f"number of self-loops m={self.m} exceeds {MAX_LOOPS}")
        if not self.l > 0:
            raise ValueError(f"self-loop weight must be positive, got {self.l}")

    @property
    def l_prime(self) -> float:
        return self.l / self.m

    @property
    def coin_dim(self) -> int:
        return self.n + self.m


def make_coin_spec(scheme: WeightScheme, dims: HypercubeDims, k: int, m: int) -> CoinSpec:
    if m < 1:
        raise ValueError(f"number of self-loops must be >= 1, got {m}")
    scheme = WeightScheme.parse(scheme)
    return CoinSpec(n=dims.n, m=m, l=compute_weight(scheme, dims, k), scheme=scheme)
