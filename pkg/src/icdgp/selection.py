"""Lexicase parent selection, down-sampling, and hyperselection detection."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Sequence


def lexicase_select_naive(errors: Sequence[Sequence[float]], rng: random.Random) -> int:
    """Textbook lexicase over individuals; returns the selected index."""
    n_cases = len(errors[0])
    order = list(range(n_cases))
    rng.shuffle(order)
    pool = list(range(len(errors)))
    for c in order:
        if len(pool) == 1:
            break
        best = min(errors[i][c] for i in pool)
        pool = [i for i in pool if errors[i][c] == best]
    return pool[0] if len(pool) == 1 else rng.choice(pool)


class Lexicase:
    """Lexicase selection over a fixed evaluated population.

    Individuals with identical error vectors are grouped once. Filtering
    runs over the groups, and the surviving individuals are still drawn
    uniformly, so the selection distribution is that of the naive version.
    """

    def __init__(self, errors: Sequence[Sequence[float]]):
        if not errors:
            raise ValueError("empty population")
        groups: dict[tuple, list[int]] = {}
        for i, e in enumerate(errors):
            groups.setdefault(tuple(e), []).append(i)
        self.vectors = list(groups)
        self.members = list(groups.values())
        self.n_cases = len(self.vectors[0])
        if self.n_cases < 1:
            raise ValueError("lexicase needs at least one case")

    def select(self, rng: random.Random) -> int:
        vectors = self.vectors
        order = list(range(self.n_cases))
        rng.shuffle(order)
        pool = range(len(vectors))
        for c in order:
            if len(pool) == 1:
                break
            best = min(vectors[g][c] for g in pool)
            pool = [g for g in pool if vectors[g][c] == best]
        if len(pool) == 1:
            members = self.members[pool[0]]
            return members[0] if len(members) == 1 else rng.choice(members)
        # uniform over surviving individuals, not over groups
        total = sum(len(self.members[g]) for g in pool)
        k = rng.randrange(total)
        for g in pool:
            m = self.members[g]
            if k < len(m):
                return m[k]
            k -= len(m)
        raise AssertionError("unreachable")


def lexicase_select(errors: Sequence[Sequence[float]], rng: random.Random) -> int:
    return Lexicase(errors).select(rng)


def downsample(full_set_size: int, sample_size: int, rng: random.Random) -> list[int]:
    """Uniform random subset of case indices, without replacement, sorted."""
    if not 0 < sample_size <= full_set_size:
        raise ValueError("need 0 < sample_size <= full_set_size")
    return sorted(rng.sample(range(full_set_size), sample_size))


def downsample_size_for_rate(full_set_size: int, rate: float) -> int:
    """Cases evaluated per generation at a down-sample rate (rounded up)."""
    return max(1, math.ceil(full_set_size * rate - 1e-9))


@dataclass(frozen=True)
class HyperselectionReport:
    flagged: bool
    individual: int | None
    share: float
    selections: int


def detect_hyperselection(selection_counts: Sequence[int], population_size: int | None = None) -> HyperselectionReport:
    """Flag an individual that received every selection this generation."""
    total = sum(selection_counts)
    if population_size is not None and len(selection_counts) != population_size:
        raise ValueError("one count per individual expected")
    if total == 0:
        return HyperselectionReport(False, None, 0.0, 0)
    top = max(range(len(selection_counts)), key=selection_counts.__getitem__)
    share = selection_counts[top] / total
    return HyperselectionReport(share == 1.0, top if share == 1.0 else None, share, total)
