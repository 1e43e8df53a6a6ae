"""Marked-vertex sets for the two experiment scenarios.

Adjacent clusters are stars: a center plus some of its neighbors.  Mixed
samples add ``a - 1`` vertices placed uniformly at random, each at Hamming
distance at least 2 from every other marked vertex.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from lackwalk.hypercube import HypercubeDims, hamming_distance

MAX_DRAWS = 10**6
# seed offset between consecutive groups; samples within a group add their index
GROUP_SEED_STRIDE = 1000


class SamplingError(RuntimeError):
    """Rejection sampling could not place the requested vertices."""


class ScenarioKind(str, enum.Enum):
    MIXED = "mixed"
    ADJACENT_ONLY = "adjacent"

    @classmethod
    def parse(cls, text: "str | ScenarioKind") -> "ScenarioKind":
        if isinstance(text, cls):
            return text
        for kind in cls:
            if text in (kind.value, kind.name, kind.name.lower()):
                return kind
        raise ValueError(f"unknown scenario {text!r}")

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class MarkedSample:
    adjacent: tuple[int, ...]
    non_adjacent: tuple[int, ...] = ()
    seed: int = 0
    index: int = 0

    @property
    def a(self) -> int:
        return len(self.adjacent)

    @property
    def marked(self) -> tuple[int, ...]:
        return self.adjacent + self.non_adjacent

    @property
    def total(self) -> int:
        return len(self.adjacent) + len(self.non_adjacent)

    def audit(self, dims: HypercubeDims) -> None:
        """Raise ``ValueError`` if the sample breaks any structural rule."""
        marked = self.marked
        if len(set(marked)) != len(marked):
            raise ValueError(f"repeated vertex in {marked}")
        for v in marked:
            dims.check_vertex(v)
        center, *leaves = self.adjacent
        for v in leaves:
            if hamming_distance(center, v) != 1:
                raise ValueError(f"{v} is not a neighbor of cluster center {center}")
        for i, v in enumerate(self.non_adjacent):
            others = self.adjacent + self.non_adjacent[:i] + self.non_adjacent[i + 1 :]
            if any(hamming_distance(v, u) < 2 for u in others):
                raise ValueError(f"non-adjacent vertex {v} touches another marked vertex")

    def to_json(self) -> dict:
        return {"adjacent": list(self.adjacent), "non_adjacent": list(self.non_adjacent), "seed": self.seed}

    @classmethod
    def from_json(cls, obj: dict, index: int = 0) -> "MarkedSample":
        return cls(tuple(obj["adjacent"]), tuple(obj.get("non_adjacent", ())), int(obj.get("seed", 0)), index)


@dataclass(frozen=True)
class ScenarioSpec:
    """Which groups to build and how many samples per group.

    ``groups`` lists the adjacent-cluster sizes ``a``.  Mixed samples carry
    ``2a - 1`` marked vertices; adjacent-only samples carry ``a`` and there is
    always exactly one per group.
    """

    kind: ScenarioKind
    groups: tuple[int, ...] = tuple(range(2, 14))
    samples: int = 10
    base_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", ScenarioKind.parse(self.kind))
        if isinstance(self.groups, int):
            object.__setattr__(self, "groups", (self.groups,))
        object.__setattr__(self, "groups", tuple(int(a) for a in self.groups))
        if not self.groups:
            raise ValueError("no groups requested")
        if any(a < 2 for a in self.groups):
            raise ValueError(f"group sizes must be >= 2, got {self.groups}")
        if self.samples < 1:
            raise ValueError(f"samples per group must be >= 1, got {self.samples}")

    @property
    def samples_per_group(self) -> int:
        return 1 if self.kind is ScenarioKind.ADJACENT_ONLY else self.samples

    def total_marked(self, a: int) -> int:
        return a if self.kind is ScenarioKind.ADJACENT_ONLY else 2 * a - 1


def adjacent_cluster(
    dims: HypercubeDims, a: int, center: int = 0, directions: Sequence[int] | None = None
) -> list[int]:
    """``center`` followed by its neighbors along ``directions`` (default ``0, 1, ...``)."""
    if a < 1:
        raise ValueError(f"cluster size must be >= 1, got {a}")
    if a > dims.n + 1:
        raise ValueError(f"a={a} exceeds n+1={dims.n + 1}: a vertex has only {dims.n} neighbors")
    dims.check_vertex(center)
    if directions is None:
        directions = range(a - 1)
    directions = list(directions)
    if len(directions) != a - 1:
        raise ValueError(f"need {a - 1} directions, got {len(directions)}")
    if len(set(directions)) != len(directions):
        raise ValueError(f"repeated direction in {directions}")
    if any(not 0 <= i < dims.n for i in directions):
        raise ValueError(f"direction outside [0, {dims.n}) in {directions}")
    return [center] + [center ^ (1 << i) for i in directions]


def sample_non_adjacent(
    dims: HypercubeDims,
    count: int,
    forbidden: Iterable[int],
    rng: np.random.Generator,
    max_draws: int = MAX_DRAWS,
) -> list[int]:
    """Draw ``count`` vertices uniformly, each at distance >= 2 from every other marked vertex."""
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    taken = list(forbidden)
    chosen: list[int] = []
    draws = 0
    while len(chosen) < count:
        if draws >= max_draws:
            raise SamplingError(
                f"placed {len(chosen)}/{count} non-adjacent vertices after {draws} draws"
            )
        draws += 1
        v = int(rng.integers(dims.N))
        if all(hamming_distance(v, u) >= 2 for u in taken):
            chosen.append(v)
            taken.append(v)
    return chosen


def sample_seed(base_seed: int, a: int, index: int) -> int:
    return base_seed + GROUP_SEED_STRIDE * a + index


def generate_groups(spec: ScenarioSpec, dims: HypercubeDims) -> list[MarkedSample]:
    """All samples of a scenario, group by group, in a fixed order."""
    out: list[MarkedSample] = []
    for a in spec.groups:
        cluster = tuple(adjacent_cluster(dims, a))
        if spec.kind is ScenarioKind.ADJACENT_ONLY:
            out.append(MarkedSample(cluster, (), sample_seed(spec.base_seed, a, 0), 0))
            continue
        for i in range(spec.samples):
            seed = sample_seed(spec.base_seed, a, i)
            rng = np.random.default_rng(seed)
            extra = sample_non_adjacent(dims, a - 1, cluster, rng)
            out.append(MarkedSample(cluster, tuple(extra), seed, i))
    for sample in out:
        sample.audit(dims)
    return out


def dump_samples(samples: Sequence[MarkedSample]) -> str:
    return json.dumps([s.to_json() for s in samples], indent=2)
