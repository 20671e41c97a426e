"""Active training set management for counterexample-driven GP.

The population is evaluated on a small active subset of the training
cases. Cases the population's programs fail are added to it over the
run: when a program passes the whole active set (or a threshold share of
it), or every ``d`` generations for the best program. Individuals are
seen here only through their error vectors and an ``evaluate`` callback
that runs one of them on given training-case indices, so the caller owns
execution and budget accounting.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .selection import downsample
from .vm import ConfigurationError

Evaluate = Callable[[int, Sequence[int]], Sequence[float]]


class Mode(str, enum.Enum):
    STANDARD = "standard"
    THRESHOLD = "threshold"
    GENERATION = "generation"
    CAPPED = "capped"
    STATIC = "static"
    DOWNSAMPLED = "downsampled"


class Outcome(str, enum.Enum):
    SOLUTION = "solution"
    ADDED = "added"
    NO_NEW_CASE = "no_new_case"


@dataclass(frozen=True)
class VariantConfig:
    mode: Mode = Mode.STANDARD
    q: float = 1.0
    d: int = 50
    cap: int | None = None
    initial_size: int = 10
    random_addition: bool = False
    downsample_size: int = 10

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not 0.0 <= self.q <= 1.0:
            raise ConfigurationError(f"q must be in [0, 1], got {self.q}")
        if self.d < 1:
            raise ConfigurationError(f"d must be >= 1, got {self.d}")
        if self.initial_size < 1:
            raise ConfigurationError("initial_active_size must be >= 1")
        if self.mode is Mode.CAPPED:
            if self.cap is None:
                raise ConfigurationError("capped variant needs cap")
            if self.cap < self.initial_size:
                raise ConfigurationError(f"cap ({self.cap}) must be >= initial_active_size ({self.initial_size})")
        if self.mode is Mode.DOWNSAMPLED and self.downsample_size < 1:
            raise ConfigurationError("downsample_size must be >= 1")

    @property
    def uses_clock(self) -> bool:
        return self.mode in (Mode.GENERATION, Mode.CAPPED)

    @property
    def grows(self) -> bool:
        return self.mode in (Mode.STANDARD, Mode.THRESHOLD, Mode.GENERATION, Mode.CAPPED)


@dataclass
class CaseSet:
    """Full training set size, the active index list, and the addition clock."""

    n_full: int
    active: list[int]
    cap: int | None = None
    last_addition: int = 0
    _members: set = field(init=False, repr=False)

    def __post_init__(self):
        self._members = set(self.active)
        if len(self._members) != len(self.active):
            raise ValueError("duplicate active cases")
        if any(not 0 <= c < self.n_full for c in self.active):
            raise ValueError("active case out of range")

    def __contains__(self, case: int) -> bool:
        return case in self._members

    def __len__(self) -> int:
        return len(self.active)

    def inactive(self) -> list[int]:
        return [c for c in range(self.n_full) if c not in self._members]

    def replace(self, active: Sequence[int]) -> None:
        self.active = list(active)
        self._members = set(self.active)

    def add(self, case: int, rng: random.Random, case_pass_counts: dict[int, int] | None = None) -> int | None:
        """Add ``case``; under a cap, evict first. Returns the evicted case, if any."""
        if case in self._members:
            raise ValueError(f"case {case} already active")
        evicted = None
        if self.cap is not None and len(self.active) >= self.cap:
            evicted = cap_evict(self, case_pass_counts or {}, rng)
        self.active.append(case)
        self._members.add(case)
        return evicted

    def remove(self, case: int) -> None:
        self.active.remove(case)
        self._members.discard(case)


@dataclass(frozen=True)
class CaseEvent:
    kind: str  # passer | threshold | generation | random | static
    trigger: int | None
    outcome: Outcome
    case: int | None = None
    evicted: int | None = None
    verified: int = 0

    def to_record(self) -> dict:
        return {
            "kind": self.kind,
            "trigger": self.trigger,
            "outcome": self.outcome.value,
            "case": self.case,
            "evicted": self.evicted,
        }


def init_active(n_full: int, initial_size: int, rng: random.Random) -> list[int]:
    if initial_size > n_full:
        raise ConfigurationError(f"initial active size {initial_size} exceeds training set size {n_full}")
    if initial_size < 1:
        raise ConfigurationError("initial active size must be >= 1")
    return downsample(n_full, initial_size, rng)


def new_case_set(n_full: int, variant: VariantConfig, rng: random.Random) -> CaseSet:
    cap = variant.cap if variant.mode is Mode.CAPPED else None
    size = variant.downsample_size if variant.mode is Mode.DOWNSAMPLED else variant.initial_size
    return CaseSet(n_full, init_active(n_full, size, rng), cap=cap)


def _verify(evaluate: Evaluate, trigger: int, cases: Sequence[int]) -> list[int]:
    errors = evaluate(trigger, cases)
    return [c for c, e in zip(cases, errors) if e != 0]


def process_passer(evaluate: Evaluate, trigger: int, case_set: CaseSet, rng: random.Random,
                   evaluated_on: Sequence[int] | None = None,
                   case_pass_counts: dict[int, int] | None = None) -> CaseEvent:
    """Handle an individual that passes every case of the active set.

    It is run on the training cases outside ``evaluated_on`` (the active
    set it was evaluated against, by default the current one). Passing
    them all makes it a training-set solution. Otherwise one of its failed
    cases that is not already active is added, chosen uniformly.
    """
    return _counterexample("passer", evaluate, trigger, case_set, rng, evaluated_on, case_pass_counts)


def process_threshold(evaluate: Evaluate, trigger: int, active_errors: Sequence[float], case_set: CaseSet,
                      rng: random.Random, evaluated_on: Sequence[int] | None = None,
                      case_pass_counts: dict[int, int] | None = None) -> CaseEvent:
    """Handle an individual that reached the pass threshold on the active set.

    It is a solution only if it also passes every active case. If it fails
    nothing outside the active set, the active set is unchanged.
    """
    passes_active = all(e == 0 for e in active_errors)
    event = _counterexample("threshold", evaluate, trigger, case_set, rng, evaluated_on, case_pass_counts)
    if event.outcome is Outcome.SOLUTION and not passes_active:
        return CaseEvent("threshold", trigger, Outcome.NO_NEW_CASE, verified=event.verified)
    return event


def verify_static(evaluate: Evaluate, trigger: int, case_set: CaseSet,
                  evaluated_on: Sequence[int] | None = None) -> CaseEvent:
    """Static (and down-sampled) baselines: verify a passer, never add cases."""
    base = case_set.active if evaluated_on is None else evaluated_on
    members = set(base)
    rest = [c for c in range(case_set.n_full) if c not in members]
    failed = _verify(evaluate, trigger, rest)
    outcome = Outcome.NO_NEW_CASE if failed else Outcome.SOLUTION
    return CaseEvent("static", trigger, outcome, verified=len(rest))


def _counterexample(kind, evaluate, trigger, case_set, rng, evaluated_on, case_pass_counts) -> CaseEvent:
    base = case_set.active if evaluated_on is None else evaluated_on
    members = set(base)
    rest = [c for c in range(case_set.n_full) if c not in members]
    failed = _verify(evaluate, trigger, rest)
    if not failed:
        return CaseEvent(kind, trigger, Outcome.SOLUTION, verified=len(rest))
    fresh = [c for c in failed if c not in case_set]
    if not fresh:
        return CaseEvent(kind, trigger, Outcome.NO_NEW_CASE, verified=len(rest))
    case = rng.choice(fresh)
    evicted = case_set.add(case, rng, case_pass_counts)
    return CaseEvent(kind, trigger, Outcome.ADDED, case, evicted, verified=len(rest))


def tick_due(case_set: CaseSet, d: int, current_gen: int) -> bool:
    return current_gen - case_set.last_addition >= d


def generation_tick(evaluate: Evaluate, best: int, case_set: CaseSet, d: int, current_gen: int,
                    rng: random.Random, random_addition: bool = False,
                    case_pass_counts: dict[int, int] | None = None) -> CaseEvent | None:
    """Periodic addition of a case the best individual fails.

    Returns None when fewer than ``d`` generations have passed since the
    last addition. The clock resets even when nothing could be added.
    With ``random_addition`` any inactive case is added, without running
    the best individual.
    """
    if not tick_due(case_set, d, current_gen):
        return None
    case_set.last_addition = current_gen
    rest = case_set.inactive()
    if random_addition:
        if not rest:
            return CaseEvent("random", None, Outcome.NO_NEW_CASE)
        case = rng.choice(rest)
        evicted = case_set.add(case, rng, case_pass_counts)
        return CaseEvent("random", None, Outcome.ADDED, case, evicted)
    failed = _verify(evaluate, best, rest)
    if not failed:
        return CaseEvent("generation", best, Outcome.NO_NEW_CASE, verified=len(rest))
    case = rng.choice(failed)
    evicted = case_set.add(case, rng, case_pass_counts)
    return CaseEvent("generation", best, Outcome.ADDED, case, evicted, verified=len(rest))


def cap_evict(case_set: CaseSet, case_pass_counts: dict[int, int], rng: random.Random) -> int:
    """Remove the active case passed by the most individuals (ties uniform)."""
    scored = [c for c in case_set.active if c in case_pass_counts]
    if not scored:
        scored = list(case_set.active)
        counts = {c: 0 for c in scored}
    else:
        counts = case_pass_counts
    top = max(counts[c] for c in scored)
    candidates = [c for c in scored if counts[c] == top]
    victim = candidates[0] if len(candidates) == 1 else rng.choice(candidates)
    case_set.remove(victim)
    return victim


def best_individual(pass_counts: Sequence[int], rng: random.Random) -> int:
    top = max(pass_counts)
    tied = [i for i, p in enumerate(pass_counts) if p == top]
    return tied[0] if len(tied) == 1 else rng.choice(tied)


def threshold_count(q: float, n_active: int) -> int:
    return math.ceil(q * n_active - 1e-9)


@dataclass
class GenerationUpdate:
    events: list[CaseEvent]
    solution: int | None = None

    @property
    def added(self) -> list[int]:
        return [e.case for e in self.events if e.outcome is Outcome.ADDED]

    @property
    def evicted(self) -> list[int]:
        return [e.evicted for e in self.events if e.evicted is not None]


def begin_generation(variant: VariantConfig, case_set: CaseSet, generation: int, rng: random.Random) -> None:
    """Redraw the down-sample; other modes keep the active set as is."""
    if variant.mode is Mode.DOWNSAMPLED and generation > 0:
        case_set.replace(downsample(case_set.n_full, variant.downsample_size, rng))


def update_active_set(variant: VariantConfig, case_set: CaseSet, errors: Sequence[Sequence[float]],
                      evaluate: Evaluate, generation: int, rng: random.Random) -> GenerationUpdate:
    """All between-generation case-set work for one evaluated population.

    ``errors[i]`` is individual i's error vector over ``case_set.active``
    as it stood at evaluation. Triggering individuals are processed in
    index order and processing stops at the first solution.
    """
    evaluated_on = tuple(case_set.active)
    n_active = len(evaluated_on)
    pass_counts = [sum(1 for e in row if e == 0) for row in errors]
    case_pass_counts = None
    if variant.mode is Mode.CAPPED:
        case_pass_counts = {c: sum(1 for row in errors if row[k] == 0) for k, c in enumerate(evaluated_on)}

    if variant.mode is Mode.THRESHOLD:
        need = threshold_count(variant.q, n_active)
        triggers = [i for i, p in enumerate(pass_counts) if p >= need]
    else:
        triggers = [i for i, p in enumerate(pass_counts) if p == n_active]

    update = GenerationUpdate([])
    for i in triggers:
        if variant.mode in (Mode.STATIC, Mode.DOWNSAMPLED):
            event = verify_static(evaluate, i, case_set, evaluated_on)
        elif variant.mode is Mode.THRESHOLD:
            event = process_threshold(evaluate, i, errors[i], case_set, rng, evaluated_on, case_pass_counts)
        else:
            event = process_passer(evaluate, i, case_set, rng, evaluated_on, case_pass_counts)
        update.events.append(event)
        if event.outcome is Outcome.SOLUTION:
            update.solution = i
            return update
        if event.outcome is Outcome.ADDED:
            case_set.last_addition = generation

    if variant.uses_clock and tick_due(case_set, variant.d, generation):
        best = best_individual(pass_counts, rng)
        event = generation_tick(evaluate, best, case_set, variant.d, generation, rng,
                                variant.random_addition, case_pass_counts)
        update.events.append(event)
    return update
