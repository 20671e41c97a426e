"""Acceptance criteria 1-10, one test each; verdicts are listed in the terminal summary."""

import random
import statistics
import time
from pathlib import Path

import pytest
from scipy.stats import chi2_contingency

from icdgp.cases import Mode, Outcome, VariantConfig
from icdgp.engine import EngineConfig, Evaluator, behavior_key, generalization_test, make_pool, run_evolution, simplify
from icdgp.genome import translate, umad
from icdgp.harness.cli import main
from icdgp.harness.config import load_config
from icdgp.harness.matrix import run_matrix, run_paths
from icdgp.harness.stats import SuccessTable, chi_square_2x2, read_aggregate
from icdgp.problems import case_error, generate_dataset, get_problem
from icdgp.selection import Lexicase, detect_hyperselection
from icdgp.vm import execute, output_of
from oracles import lexicase_probabilities, selection_frequencies


# 1 -------------------------------------------------------------------------

def test_c01_lexicase_oracle_equivalence(criterion):
    rng = random.Random(2024)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        n, m = rng.randint(1, 6), rng.randint(1, 4)
        errors = [[rng.randint(0, 2) for _ in range(m)] for _ in range(n)]
        exact = lexicase_probabilities(errors)
        freq = selection_frequencies(Lexicase(errors).select, n, 10_000, rng)
        worst = max(worst, max(abs(f - p) for f, p in zip(freq, exact)))
    elapsed = time.perf_counter() - start
    criterion(1, worst < 0.02 and elapsed < 10,
              f"max deviation {worst:.4f} (< 0.02) over 20 matrices in {elapsed:.1f}s (< 10s)")


# 2 -------------------------------------------------------------------------

def test_c02_unique_all_pass_hyperselection(criterion):
    rng = random.Random(7)
    errors = [[0] * 10]
    while len(errors) < 1000:
        row = [rng.choice((0, 0, 1, 3)) for _ in range(10)]
        if any(row):
            errors.append(row)
    lex = Lexicase(errors)
    counts = [0] * 1000
    for _ in range(1000):
        counts[lex.select(rng)] += 1
    report = detect_hyperselection(counts, 1000)
    constructed = counts[0] == 1000 and report.flagged and report.individual == 0

    # the same event seen through the engine's per-generation telemetry
    problem = get_problem("smallest")
    dataset = generate_dataset(problem, 0)
    unique = []

    def hook(gen, population, events, active):
        passers = [i for i, ind in enumerate(population) if ind.passes == len(active)]
        if len(passers) == 1 and not any(e.outcome is Outcome.SOLUTION for e in events):
            unique.append((gen, passers[0]))

    cfg = EngineConfig(population_size=200, variant=VariantConfig(mode="static"), max_generations=30)
    logs = run_evolution(cfg, problem, dataset, 4, on_generation=hook).logs
    flagged = [(r["generation"], r["hyperselected"]) for r in logs if r["hyperselection"]]
    engine_ok = bool(unique) and all(u in flagged for u in unique)
    criterion(2, constructed and engine_ok,
              f"unique passer got {counts[0]}/1000 selections, flagged={report.flagged}; "
              f"engine logs flag unique-passer generations {unique}")


# 3 -------------------------------------------------------------------------

def test_c03_umad_size_neutrality(criterion):
    pool = make_pool(get_problem("smallest"))
    rng = random.Random(3)
    start = time.perf_counter()
    details, ok = [], True
    for length in (10, 100, 400):
        parent = [pool.sample(rng) for _ in range(length)]
        sizes = [len(umad(parent, 0.09, pool, rng)) for _ in range(10_000)]
        mean = statistics.fmean(sizes)
        se = statistics.stdev(sizes) / 10_000 ** 0.5
        ok &= abs(mean - length) <= 3 * se
        details.append(f"{length}: mean {mean:.3f} (3 SE = {3 * se:.3f})")
    elapsed = time.perf_counter() - start
    criterion(3, ok and elapsed < 5, "; ".join(details) + f"; {elapsed:.1f}s (< 5s)")


# 4 -------------------------------------------------------------------------

def _random_variant(rng):
    mode = rng.choice(["standard", "threshold", "generation", "capped", "static"])
    if mode == "threshold":
        return VariantConfig(mode=mode, q=rng.choice([0.7, 0.8, 0.9]))
    if mode == "generation":
        return VariantConfig(mode=mode, d=rng.choice([3, 5, 10]))
    if mode == "capped":
        return VariantConfig(mode=mode, d=rng.choice([3, 5]), cap=rng.choice([10, 12, 15]))
    return VariantConfig(mode=mode)


def test_c04_counterexample_invariants(criterion):
    rng = random.Random(44)
    problems = [get_problem(n) for n in ("smallest", "last-index-of-zero", "mirror-image", "compare-string-lengths")]
    datasets = {p.name: generate_dataset(p, 0) for p in problems}
    violations = []
    additions = 0
    modes = set()
    for run in range(50):
        problem = problems[run % len(problems)]
        dataset = datasets[problem.name]
        variant = _random_variant(rng)
        modes.add(variant.mode)
        cfg = EngineConfig(population_size=60, budget=25_000, variant=variant, simplification_steps=0)
        history = []

        def hook(gen, population, events, active):
            nonlocal additions
            current = set(active)
            for e in events:
                if e.outcome is not Outcome.ADDED:
                    continue
                additions += 1
                if e.evicted is not None:
                    current.discard(e.evicted)
                if e.case in current:
                    violations.append((run, gen, "stale case", e.case))
                state = execute(population[e.trigger].program, dataset.train[e.case].inputs, problem.step_limit)
                actual = output_of(state, problem.output_type)
                if case_error(actual, dataset.train[e.case].output, problem.output_type) == 0:
                    violations.append((run, gen, "trigger passes added case", e.case))
                current.add(e.case)
            history.append((tuple(active), current))

        result = run_evolution(cfg, problem, dataset, run, on_generation=hook)
        sizes = [len(a) for a, _ in history]
        for (a, after), (nxt, _) in zip(history, history[1:]):
            if set(nxt) != after:
                violations.append((run, "active set drifted between generations"))
        if variant.mode in (Mode.STANDARD, Mode.THRESHOLD, Mode.GENERATION):
            if sizes != sorted(sizes) or result.final_active_size < sizes[-1]:
                violations.append((run, variant.mode.value, "shrank", sizes))
        elif variant.mode is Mode.CAPPED:
            if max(sizes + [result.final_active_size]) > variant.cap:
                violations.append((run, "cap exceeded", sizes))
        elif variant.mode is Mode.STATIC:
            if any(a != history[0][0] for a, _ in history) or history[-1][1] != set(history[0][0]):
                violations.append((run, "static set changed"))
    criterion(4, not violations and additions > 0 and len(modes) == 5,
              f"50 runs over {len(modes)} modes, {additions} additions checked, violations: {violations[:3]}")


# 5 -------------------------------------------------------------------------

def test_c05_budget_exactness(criterion):
    problem = get_problem("negative-to-zero")
    dataset = generate_dataset(problem, 0)
    variant = VariantConfig(mode="generation", d=4)
    cfg = EngineConfig(population_size=50, variant=variant, max_generations=10)
    result = run_evolution(cfg, problem, dataset, 0)
    sizes = [r["active_size"] for r in result.logs]
    # ticks after generations 4 and 8 grow T_A 10 -> 11 -> 12; the best
    # individual is run on the 190, then 189, cases outside T_A
    expected_sizes = [10] * 5 + [11] * 4 + [12]
    expected_eval = 50 * sum(expected_sizes)
    expected_verify = (200 - 10) + (200 - 11)
    exact = (sizes == expected_sizes and result.ledger.evaluation == expected_eval == 5300
             and result.ledger.verification == expected_verify == 379
             and result.ledger.used == 5679)

    # with a limit of 2700, generation 5 (cost 550) no longer fits after 2690 used
    capped = run_evolution(EngineConfig(population_size=50, variant=variant, budget=2700), problem, dataset, 0)
    stops = capped.generations == 5 and capped.ledger.used == 2690
    criterion(5, exact and stops,
              f"ledger {result.ledger.to_dict()} vs hand sum 5300 + 379 = 5679; T_A sizes {sizes}; "
              f"limit 2700 stops after {capped.generations} generations at {capped.ledger.used}")


# 6 -------------------------------------------------------------------------

def _bloated_solution(problem, dataset, rng, extra):
    """The reference genome with random genes inserted that keep it a training solution."""
    pool = make_pool(problem)
    ev = Evaluator(problem, dataset.train)
    cases = range(len(dataset.train))
    genome = list(problem.reference_genome)
    attempts = 0
    while extra and attempts < 400:
        attempts += 1
        cand = list(genome)
        cand.insert(rng.randint(0, len(cand)), pool.sample(rng))
        if all(e == 0 for e in ev.errors(translate(cand), cases)):
            genome = cand
            extra -= 1
    return genome


def test_c06_simplification_safety(criterion):
    rng = random.Random(6)
    plan = {"smallest": 4, "mirror-image": 4, "compare-string-lengths": 4,
            "last-index-of-zero": 4, "negative-to-zero": 2, "vector-average": 2}
    problems = []
    for name, k in plan.items():
        problems += [get_problem(name)] * k
    failures = []
    gen_before = gen_after = 0
    for n, problem in enumerate(problems):
        dataset = generate_dataset(problem, n)
        genome = _bloated_solution(problem, dataset, rng, extra=12)
        ev = Evaluator(problem, dataset.train)
        cases = range(len(dataset.train))
        before = behavior_key(ev.outputs(translate(genome), cases))
        steps = 1000 if problem.name not in ("negative-to-zero", "vector-average") else 300
        out = simplify(genome, ev, steps, random.Random(n))
        after = behavior_key(ev.outputs(translate(out), cases))
        passes = all(e == 0 for e in ev.errors(translate(out), cases))
        if after != before or not passes or len(out) > len(genome):
            failures.append((problem.name, n))
        gen_before += generalization_test(genome, problem, dataset.test)
        gen_after += generalization_test(out, problem, dataset.test)
    criterion(6, not failures and gen_after >= gen_before,
              f"20 fixtures, behavior/length violations {failures}; "
              f"generalize {gen_after}/20 simplified vs {gen_before}/20 unsimplified")


# 7, 8 ----------------------------------------------------------------------

ARMS = {
    "smallest-generation-d50": "smallest-generation-d50.ini",
    "smallest-static": "smallest-static.ini",
    "ntz-generation-d50": "ntz-generation-d50.ini",
    "ntz-static": "ntz-static.ini",
}


@pytest.fixture(scope="session")
def desk_matrix(tmp_path_factory):
    """Desk-scale runs of the four arms over seeds 0..9, timed per arm."""
    root = Path(__file__).resolve().parents[1] / "configs"
    out = tmp_path_factory.mktemp("desk")
    timings = {}
    for arm, name in ARMS.items():
        config = load_config(root / name).with_seeds(range(10))
        start = time.perf_counter()
        report = run_matrix([config], out)
        timings[arm] = time.perf_counter() - start
        assert report.ok, report.failed
    return SuccessTable.from_rows(read_aggregate(out / "aggregate.csv")), timings


@pytest.mark.slow
def test_c07_desk_solve_rate(criterion, desk_matrix):
    table, timings = desk_matrix
    arm = table["smallest-generation-d50"]
    seconds = timings["smallest-generation-d50"]
    criterion(7, arm.successes >= 8 and arm.total == 10 and seconds < 600,
              f"Smallest GENERATION d=50: {arm.successes}/{arm.total} generalized (>= 8) in {seconds:.0f}s (< 600s)")


@pytest.mark.slow
def test_c08_counterexamples_beat_static(criterion, desk_matrix):
    table, _ = desk_matrix
    parts, ok = [], True
    for problem in ("smallest", "ntz"):
        gen, static = table[f"{problem}-generation-d50"], table[f"{problem}-static"]
        chi = table.compare(f"{problem}-generation-d50", f"{problem}-static")
        ok &= gen.successes >= static.successes and gen.total == static.total == 10
        parts.append(f"{problem}: generation {gen.successes}/10 vs static {static.successes}/10 (p={chi.p_value:.3g})")
    criterion(8, ok, "; ".join(parts))


# 9 -------------------------------------------------------------------------

# (a_success, a_total, b_success, b_total, statistic, p) computed with
# scipy.stats.chi2_contingency(correction=False)
REFERENCE = [
    (96, 100, 57, 100, 42.302878598247815, 7.817740765052307e-11),
    (13, 100, 15, 100, 0.1661129568106312, 0.6835897065103371),
    (50, 100, 50, 100, 0.0, 1.0),
    (95, 100, 80, 100, 10.285714285714286, 0.0013406411172294807),
    (1, 10, 9, 10, 12.8, 0.000346619351134667),
    (10, 10, 7, 10, 3.5294117647058822, 0.06028917399060221),
    (0, 10, 3, 10, 3.5294117647058822, 0.06028917399060221),
    (30, 100, 60, 150, 2.6041666666666665, 0.10658316957488789),
    (8, 10, 6, 10, 0.9523809523809523, 0.32911398597860525),
    (70, 100, 60, 100, 2.197802197802198, 0.1382076669740215),
]


def _same6(x, y):
    return x == y or abs(x - y) <= 5e-7 * max(abs(x), abs(y))


def test_c09_statistics_oracle(criterion):
    bad = []
    for a_s, a_t, b_s, b_t, stat, p in REFERENCE:
        ours = chi_square_2x2(a_s, a_t, b_s, b_t)
        live_stat, live_p, _, _ = chi2_contingency([[a_s, a_t - a_s], [b_s, b_t - b_s]], correction=False)
        for got, want in ((ours.statistic, stat), (ours.p_value, p), (ours.statistic, live_stat), (ours.p_value, live_p)):
            if not _same6(got, float(want)):
                bad.append((a_s, a_t, b_s, b_t, got, float(want)))
    marks = chi_square_2x2(96, 100, 57, 100).significant and not chi_square_2x2(13, 100, 15, 100).significant
    criterion(9, not bad and marks,
              f"10 tables agree to 6 significant figures (mismatches {bad}); "
              f"96/100 vs 57/100 significant, 13/100 vs 15/100 not: {marks}")


# 10 ------------------------------------------------------------------------

def test_c10_determinism(criterion, repo_root, tmp_path):
    configs = [str(repo_root / "configs" / "smallest-generation-d50.ini"),
               str(repo_root / "configs" / "smallest-static.ini")]
    for out in ("a", "b"):
        assert main(["run", *configs, "--seeds", "0..1", "--out", str(tmp_path / out), "--quiet"]) == 0
    same_csv = (tmp_path / "a" / "aggregate.csv").read_bytes() == (tmp_path / "b" / "aggregate.csv").read_bytes()
    same_logs = True
    for arm in ("smallest-generation-d50", "smallest-static"):
        for seed in (0, 1):
            for pa, pb in zip(run_paths(tmp_path / "a", arm, seed), run_paths(tmp_path / "b", arm, seed)):
                same_logs &= pa.read_bytes() == pb.read_bytes()
    criterion(10, same_csv and same_logs,
              f"2 arms x 2 seeds run twice: aggregate CSV identical {same_csv}, JSONL logs and summaries identical {same_logs}")
