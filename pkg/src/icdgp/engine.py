"""Generational PushGP loop with an active training set and an execution budget."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .cases import (
    CaseEvent,
    Mode,
    Outcome,
    VariantConfig,
    begin_generation,
    new_case_set,
    update_active_set,
)
from .genome import default_pool, genome_to_text, random_genome, translate, umad
from .problems import Dataset, ProblemSpec
from .selection import Lexicase, detect_hyperselection
from .vm import ConfigurationError, execute, instruction_catalog, output_of

DESK_POPULATION = 200
DESK_BUDGET = 2_000_000


class RunOutcome(str, enum.Enum):
    SUCCESS = "train_solution_generalized"
    FAILED_TEST = "train_solution_failed_test"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass(frozen=True)
class EngineConfig:
    population_size: int = DESK_POPULATION
    budget: int | None = DESK_BUDGET  # None: the problem's full-scale budget
    umad_rate: float = 0.09
    variant: VariantConfig = field(default_factory=VariantConfig)
    min_initial_genome: int = 1
    max_initial_genome: int = 100
    simplification_steps: int = 1000
    step_limit: int | None = None  # None: the problem's limit
    max_generations: int | None = None

    def validate(self) -> None:
        if self.population_size < 1:
            raise ConfigurationError("population_size must be >= 1")
        if self.budget is not None and self.budget < 1:
            raise ConfigurationError("budget must be >= 1")
        if not 0 <= self.umad_rate < 1:
            raise ConfigurationError("umad_rate must be in [0, 1)")
        if not 0 <= self.min_initial_genome <= self.max_initial_genome:
            raise ConfigurationError("bad initial genome size range")
        if not 0 <= self.simplification_steps <= 1000:
            raise ConfigurationError("simplification_steps must be in [0, 1000]")
        if self.step_limit is not None and self.step_limit < 1:
            raise ConfigurationError("step_limit must be >= 1")
        if self.max_generations is not None and self.max_generations < 1:
            raise ConfigurationError("max_generations must be >= 1")


@dataclass
class Individual:
    genome: tuple
    program: tuple
    errors: tuple = ()
    behavior: tuple = ()

    @classmethod
    def from_genome(cls, genome: Sequence) -> "Individual":
        g = tuple(genome)
        return cls(g, translate(g))

    @property
    def passes(self) -> int:
        return sum(1 for e in self.errors if e == 0)


@dataclass
class BudgetLedger:
    limit: int
    evaluation: int = 0
    verification: int = 0
    simplification: int = 0

    @property
    def used(self) -> int:
        return self.evaluation + self.verification + self.simplification

    def can_afford(self, cost: int) -> bool:
        return self.used < self.limit and self.used + cost <= self.limit

    def to_dict(self) -> dict:
        return {
            "used": self.used,
            "limit": self.limit,
            "evaluation": self.evaluation,
            "verification": self.verification,
            "simplification": self.simplification,
        }


@dataclass
class RunResult:
    problem: str
    seed: int
    outcome: RunOutcome
    generations: int
    final_active_size: int
    ledger: BudgetLedger
    logs: list[dict]
    executions_at_solution: int | None = None
    solution_genome: tuple | None = None
    simplified_genome: tuple | None = None
    unsimplified_generalizes: bool | None = None

    @property
    def success(self) -> bool:
        return self.outcome is RunOutcome.SUCCESS

    def summary(self) -> dict:
        return {
            "problem": self.problem,
            "seed": self.seed,
            "outcome": self.outcome.value,
            "generations": self.generations,
            "executions": self.ledger.used,
            "final_active_size": self.final_active_size,
            "evaluation_executions": self.ledger.evaluation,
            "verification_executions": self.ledger.verification,
            "simplification_executions": self.ledger.simplification,
            "executions_at_solution": self.executions_at_solution,
            "solution": None if self.solution_genome is None else genome_to_text(self.solution_genome),
            "simplified": None if self.simplified_genome is None else genome_to_text(self.simplified_genome),
        }


def behavior_key(outputs: Sequence) -> tuple:
    """Hashable, bit-exact form of a behavior vector (floats by their hex)."""
    out = []
    for o in outputs:
        t = type(o)
        if t is float:
            out.append(("f", o.hex()))
        elif t is tuple and o and type(o[0]) is float:
            out.append(("vf", tuple(x.hex() for x in o)))
        else:
            out.append(o)
    return tuple(out)


class Evaluator:
    """Runs programs on training cases and charges the ledger."""

    def __init__(self, problem: ProblemSpec, cases: Sequence, ledger: BudgetLedger | None = None,
                 step_limit: int | None = None):
        self.problem = problem
        self.cases = list(cases)
        self.ledger = ledger
        self.step_limit = step_limit or problem.step_limit
        self._inputs = [c.inputs for c in self.cases]
        self._expected = [c.output.value for c in self.cases]

    def outputs(self, program: tuple, indices: Sequence[int], category: str | None = None) -> list:
        inputs = self._inputs
        out_type = self.problem.output_type
        limit = self.step_limit
        res = [output_of(execute(program, inputs[i], limit), out_type) for i in indices]
        if category is not None and self.ledger is not None:
            setattr(self.ledger, category, getattr(self.ledger, category) + len(indices))
        return res

    def errors_of(self, outputs: Sequence, indices: Sequence[int]) -> list:
        err = self.problem.error
        exp = self._expected
        return [err(o, exp[i]) for o, i in zip(outputs, indices)]

    def errors(self, program: tuple, indices: Sequence[int], category: str | None = None) -> list:
        return self.errors_of(self.outputs(program, indices, category), indices)

    def evaluate(self, ind: Individual, indices: Sequence[int], category: str | None = "evaluation") -> None:
        outs = self.outputs(ind.program, indices, category)
        ind.behavior = tuple(outs)
        ind.errors = tuple(self.errors_of(outs, indices))


def verify_on_full(ind: Individual, evaluator: Evaluator, active: Sequence[int]) -> tuple[bool, set, int]:
    """Run ``ind`` on every training case outside ``active``.

    Results on the active cases are taken from the individual's current
    error vector. Returns (passed all, failed case indices, executions).
    """
    members = set(active)
    rest = [c for c in range(len(evaluator.cases)) if c not in members]
    errs = evaluator.errors(ind.program, rest, "verification")
    failed = {c for c, e in zip(rest, errs) if e != 0}
    failed |= {c for c, e in zip(active, ind.errors) if e != 0}
    return not failed, failed, len(rest)


def simplify(genome: Sequence, evaluator: Evaluator, steps: int, rng: random.Random) -> list:
    """Hill-climb toward a shorter genome with identical behavior on all training cases.

    Each step deletes 1 to 4 random genes and keeps the deletion only if
    the outputs on every training case are bit-identical to the original's.
    """
    all_cases = range(len(evaluator.cases))
    target = behavior_key(evaluator.outputs(translate(genome), all_cases, "simplification"))
    current = list(genome)
    for _ in range(steps):
        if not current:
            break
        k = rng.randint(1, min(4, len(current)))
        drop = set(rng.sample(range(len(current)), k))
        candidate = [g for j, g in enumerate(current) if j not in drop]
        outs = evaluator.outputs(translate(candidate), all_cases, "simplification")
        if behavior_key(outs) == target:
            current = candidate
    return current


def generalization_test(genome: Sequence, problem: ProblemSpec, test_cases: Sequence,
                        step_limit: int | None = None) -> bool:
    """True iff the program has zero error on every unseen test case (not budgeted)."""
    ev = Evaluator(problem, test_cases, None, step_limit)
    return all(e == 0 for e in ev.errors(translate(genome), range(len(test_cases))))


def behavioral_diversity(population: Sequence[Individual]) -> float:
    return len({behavior_key(ind.behavior) for ind in population}) / len(population)


def make_pool(problem: ProblemSpec):
    catalog = instruction_catalog(problem.types, problem.n_inputs)
    return default_pool(catalog, problem.types, problem.constants)


def _rng(seed: int, *parts) -> random.Random:
    return random.Random(":".join(str(p) for p in (seed,) + parts))


GenerationHook = Callable[[int, list, list, tuple], None]


def run_evolution(config: EngineConfig, problem: ProblemSpec, dataset: Dataset, seed: int,
                  on_generation: GenerationHook | None = None) -> RunResult:
    """One evolutionary run.

    ``on_generation(gen, population, events, evaluated_on)`` is called after
    each generation's case-set update and sees the evaluated population.
    """
    config.validate()
    if dataset.problem != problem.name:
        raise ConfigurationError(f"dataset is for {dataset.problem!r}, not {problem.name!r}")
    variant = config.variant
    n_train = len(dataset.train)
    if variant.mode is not Mode.DOWNSAMPLED and variant.initial_size > n_train:
        raise ConfigurationError(f"initial active size {variant.initial_size} exceeds training set size {n_train}")
    if variant.mode is Mode.DOWNSAMPLED and variant.downsample_size > n_train:
        raise ConfigurationError("downsample_size exceeds training set size")

    limit = config.budget if config.budget is not None else problem.budget
    ledger = BudgetLedger(limit)
    step_limit = config.step_limit or problem.step_limit
    evaluator = Evaluator(problem, dataset.train, ledger, step_limit)
    pool = make_pool(problem)
    pop_size = config.population_size
    case_rng = _rng(seed, "cases")
    case_set = new_case_set(n_train, variant, case_rng)

    population = []
    for i in range(pop_size):
        r = _rng(seed, "init", i)
        size = r.randint(config.min_initial_genome, config.max_initial_genome)
        population.append(Individual.from_genome(random_genome(pool, size, r)))

    logs: list[dict] = []
    gen = 0
    outcome = RunOutcome.BUDGET_EXHAUSTED
    solution = None
    at_solution = None

    while config.max_generations is None or gen < config.max_generations:
        begin_generation(variant, case_set, gen, case_rng)
        active = tuple(case_set.active)
        if not ledger.can_afford(pop_size * len(active)):
            break
        for ind in population:
            evaluator.evaluate(ind, active)

        def run_on(i, cases, _pop=population):
            return evaluator.errors(_pop[i].program, cases, "verification")

        errors = [ind.errors for ind in population]
        update = update_active_set(variant, case_set, errors, run_on, gen, case_rng)

        record = {
            "generation": gen,
            "executions_used": ledger.used,
            "active_size": len(active),
            "best_active_passes": max(ind.passes for ind in population),
            "behavioral_diversity": behavioral_diversity(population),
            "hyperselection": False,
            "hyperselected": None,
            "cases_added": update.added,
            "cases_evicted": update.evicted,
            "events": [e.to_record() for e in update.events],
        }
        if on_generation is not None:
            on_generation(gen, population, update.events, active)

        if update.solution is not None:
            logs.append(record)
            solution = population[update.solution]
            at_solution = ledger.used
            gen += 1
            break

        lex = Lexicase(errors)
        counts = [0] * pop_size
        children = []
        for i in range(pop_size):
            r = _rng(seed, gen, i)
            parent = lex.select(r)
            counts[parent] += 1
            children.append(Individual.from_genome(umad(population[parent].genome, config.umad_rate, pool, r)))
        report = detect_hyperselection(counts, pop_size)
        record["hyperselection"] = report.flagged
        record["hyperselected"] = report.individual
        logs.append(record)
        population = children
        gen += 1

    result = RunResult(
        problem=problem.name,
        seed=seed,
        outcome=outcome,
        generations=gen,
        final_active_size=len(case_set),
        ledger=ledger,
        logs=logs,
    )
    if solution is not None:
        simplified = simplify(solution.genome, evaluator, config.simplification_steps, _rng(seed, "simplify"))
        ok = generalization_test(simplified, problem, dataset.test, step_limit)
        result.outcome = RunOutcome.SUCCESS if ok else RunOutcome.FAILED_TEST
        result.executions_at_solution = at_solution
        result.solution_genome = solution.genome
        result.simplified_genome = tuple(simplified)
        result.unsimplified_generalizes = generalization_test(solution.genome, problem, dataset.test, step_limit)
    return result


__all__ = [
    "BudgetLedger",
    "CaseEvent",
    "EngineConfig",
    "Evaluator",
    "Individual",
    "Outcome",
    "RunOutcome",
    "RunResult",
    "behavior_key",
    "behavioral_diversity",
    "generalization_test",
    "make_pool",
    "run_evolution",
    "simplify",
    "verify_on_full",
]
