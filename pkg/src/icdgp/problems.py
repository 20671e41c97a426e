"""Desk-scale benchmark problems: generators, reference oracles, error functions.

Datasets are reconstructions of six PSB1 problems. Each generator puts a
fixed list of edge cases into the training split and fills the rest of
both splits with random cases; the expected output always comes from the
reference oracle.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

from rapidfuzz.distance import Levenshtein

from .genome import CLOSE
from .vm import NO_OUTPUT, ConfigurationError, Value

NO_OUTPUT_PENALTY = 1_000_000
MAX_DEFINED_ERROR = NO_OUTPUT_PENALTY - 1
FLOAT_TOLERANCE = 1e-3
EXECUTIONS_PER_TRAINING_CASE = 300_000
DATASET_FORMAT = 1


class TrainingCase(NamedTuple):
    inputs: tuple  # of Value
    output: Value
    split: str


@dataclass(frozen=True)
class Dataset:
    problem: str
    seed: int
    train: tuple
    test: tuple


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    input_types: tuple[str, ...]
    output_type: str
    types: frozenset
    train_size: int
    test_size: int
    oracle: Callable
    random_input: Callable[[random.Random], tuple]
    edge_inputs: tuple = ()
    constants: tuple = ()
    step_limit: int = 2000
    reference_genome: tuple = field(default=(), compare=False)
    budget: int | None = None

    def __post_init__(self):
        if self.budget is None:
            object.__setattr__(self, "budget", self.train_size * EXECUTIONS_PER_TRAINING_CASE)

    @property
    def n_inputs(self) -> int:
        return len(self.input_types)

    def make_case(self, raw_inputs: Sequence, split: str) -> TrainingCase:
        inputs = tuple(Value(t, v) for t, v in zip(self.input_types, raw_inputs))
        return TrainingCase(inputs, Value(self.output_type, self.oracle(*raw_inputs)), split)

    def error(self, actual, expected):
        return case_error(actual, expected, self.output_type)


# ---------------------------------------------------------------------------
# error functions


def levenshtein(a: Sequence, b: Sequence) -> int:
    return Levenshtein.distance(a, b)


def _is_type(value, output_type: str) -> bool:
    if output_type == "integer":
        return type(value) is int
    if output_type == "float":
        return type(value) is float
    if output_type == "boolean":
        return type(value) is bool
    if output_type in ("char", "string"):
        return type(value) is str
    return type(value) is tuple


def case_error(actual, expected, output_type: str) -> float:
    """Non-negative error; zero exactly when the case is passed."""
    if isinstance(expected, Value):
        expected = expected.value
    if actual is NO_OUTPUT or not _is_type(actual, output_type):
        return NO_OUTPUT_PENALTY
    if output_type == "integer":
        return min(abs(actual - expected), MAX_DEFINED_ERROR)
    if output_type == "float":
        d = abs(actual - expected)
        return 0 if d < FLOAT_TOLERANCE else min(d, MAX_DEFINED_ERROR)
    if output_type in ("boolean", "char"):
        return 0 if actual == expected else 1
    if output_type == "vector_float":
        if len(actual) == len(expected) and all(abs(x - y) < FLOAT_TOLERANCE for x, y in zip(actual, expected)):
            return 0
        return min(levenshtein(actual, expected), MAX_DEFINED_ERROR)
    return min(levenshtein(actual, expected), MAX_DEFINED_ERROR)


# ---------------------------------------------------------------------------
# problem definitions

_STRING_CHARS = "".join(chr(c) for c in range(32, 127)) + "\n\t"


def _smallest_random(rng):
    return tuple(rng.randint(-100, 100) for _ in range(4))


_SMALLEST_EDGES = (
    (0, 0, 0, 0),
    (-100, -100, -100, -100),
    (100, 100, 100, 100),
    (-5, -5, -5, -5),
    (1, 2, 3, 4),
    (4, 3, 2, 1),
    (-1, -2, -3, -4),
    (-100, 100, -100, 100),
    (100, -100, 100, -100),
    (0, -100, 100, 50),
    (7, 7, -3, 7),
    (2, 2, 2, -2),
)


def _rand_ivec(rng, lo, hi, min_len=0, max_len=50):
    return tuple(rng.randint(lo, hi) for _ in range(rng.randint(min_len, max_len)))


def _mirror_random(rng):
    v = _rand_ivec(rng, -1000, 1000)
    r = rng.random()
    if r < 0.4:
        return (v, v[::-1])
    if r < 0.6 and v:
        w = list(v[::-1])
        k = rng.randrange(len(w))
        w[k] = rng.randint(-1000, 1000)
        return (v, tuple(w))
    if r < 0.8:
        return (v, v)
    return (v, tuple(rng.randint(-1000, 1000) for _ in v))


_MIRROR_EDGES = (
    ((), ()),
    ((1,), (1,)),
    ((0,), (1,)),
    ((0, 1), (1, 0)),
    ((0, 1), (0, 1)),
    ((1, 2, 1), (1, 2, 1)),
    ((1, 2, 3), (3, 2, 1)),
    ((1, 2, 3), (1, 2, 3)),
    ((5, 8), (8, 5, 5)),
    ((-1000,), (1000,)),
)


def _rand_string(rng, n):
    return "".join(rng.choice(_STRING_CHARS) for _ in range(n))


def _csl_random(rng):
    if rng.random() < 0.4:
        lens = sorted(rng.sample(range(50), 3))
    else:
        lens = [rng.randint(0, 49) for _ in range(3)]
    return tuple(_rand_string(rng, n) for n in lens)


_CSL_EDGES = (
    ("", "", ""),
    ("", "a", "bc"),
    ("a", "", "bc"),
    ("a", "bc", ""),
    ("", "", "a"),
    ("a", "a", "a"),
    ("ab", "a", "abc"),
    ("x", "yy", "zzz"),
    ("x", "yyy", "zz"),
    ("   ", "\n\n\n\n", "\t\t\t\t\t"),
)


def _ntz_random(rng):
    return (_rand_ivec(rng, -1000, 1000),)


_NTZ_EDGES = (
    ((),),
    ((-10,),),
    ((-1,),),
    ((0,),),
    ((1,),),
    ((10,),),
    ((0, 0, 0),),
    ((-5, -22, -1000),),
    ((7, 22, 1000),),
    ((-1, 1, -1, 1),),
)


def _va_random(rng):
    n = rng.randint(1, 50)
    return (tuple(rng.uniform(-1000.0, 1000.0) for _ in range(n)),)


_VA_EDGES = (
    ((0.0,),),
    ((100.0,),),
    ((-100.0,),),
    ((1000.0,),),
    ((-1000.0,),),
    ((2.0, 4.0),),
    ((-3.5, 3.5),),
    ((1.0, 2.0, 3.0, 4.0),),
    ((0.5, 0.25, 0.125),),
    ((-1000.0, 1000.0, -1000.0),),
)


def _lioz_random(rng):
    n = rng.randint(1, 50)
    v = [rng.randint(-50, 50) for _ in range(n)]
    for _ in range(rng.randint(1, max(1, n // 3))):
        v[rng.randrange(n)] = 0
    return (tuple(v),)


_LIOZ_EDGES = (
    ((0,),),
    ((0, 0),),
    ((0, 1),),
    ((1, 0),),
    ((-50, 0, 50),),
    ((0, 5, 0, 5),),
    ((0,) * 50,),
    ((3, -3, 0, 3, -3),),
    ((0, -1, -2, -3, -4),),
    ((-7, -7, -7, 0),),
)


def _mean(v):
    return sum(v) / len(v)


def _last_index_of_zero(v):
    return len(v) - 1 - v[::-1].index(0)


def _compare_lengths(a, b, c):
    return len(a) < len(b) < len(c)


def _ntz(v):
    return tuple(max(x, 0) for x in v)


def _smallest(a, b, c, d):
    return min(a, b, c, d)


def _mirror(a, b):
    return tuple(a) == tuple(b)[::-1]


ZERO = Value("integer", 0)

PROBLEMS: dict[str, ProblemSpec] = {
    p.name: p
    for p in (
        ProblemSpec(
            name="smallest",
            input_types=("integer",) * 4,
            output_type="integer",
            types=frozenset({"integer", "boolean"}),
            train_size=100,
            test_size=1000,
            oracle=_smallest,
            random_input=_smallest_random,
            edge_inputs=_SMALLEST_EDGES,
            step_limit=200,
            reference_genome=("in1", "in2", "integer_min", "in3", "integer_min", "in4", "integer_min"),
        ),
        ProblemSpec(
            name="mirror-image",
            input_types=("vector_integer", "vector_integer"),
            output_type="boolean",
            types=frozenset({"vector_integer", "integer", "boolean"}),
            train_size=100,
            test_size=2000,
            oracle=_mirror,
            random_input=_mirror_random,
            edge_inputs=_MIRROR_EDGES,
            step_limit=600,
            reference_genome=("in1", "vector_integer_reverse", "in2", "vector_integer_eq"),
        ),
        ProblemSpec(
            name="compare-string-lengths",
            input_types=("string",) * 3,
            output_type="boolean",
            types=frozenset({"string", "integer", "boolean"}),
            train_size=100,
            test_size=1000,
            oracle=_compare_lengths,
            random_input=_csl_random,
            edge_inputs=_CSL_EDGES,
            step_limit=600,
            reference_genome=(
                "in1", "string_length", "in2", "string_length", "integer_lt",
                "in2", "string_length", "in3", "string_length", "integer_lt", "boolean_and",
            ),
        ),
        ProblemSpec(
            name="negative-to-zero",
            input_types=("vector_integer",),
            output_type="vector_integer",
            types=frozenset({"vector_integer", "integer", "boolean"}),
            train_size=200,
            test_size=2000,
            oracle=_ntz,
            random_input=_ntz_random,
            edge_inputs=_NTZ_EDGES,
            constants=(ZERO, Value("vector_integer", ())),
            step_limit=600,
            reference_genome=(
                "vector_integer_emptyvector", "in1", "exec_do*vector_integer",
                ZERO, "integer_max", "vector_integer_conj", CLOSE,
            ),
        ),
        ProblemSpec(
            name="vector-average",
            input_types=("vector_float",),
            output_type="float",
            types=frozenset({"vector_float", "float", "integer", "boolean"}),
            train_size=250,
            test_size=1000,
            oracle=_mean,
            random_input=_va_random,
            edge_inputs=_VA_EDGES,
            step_limit=600,
            reference_genome=(
                "in1", "exec_do*vector_float", "float_add", CLOSE,
                "in1", "vector_float_length", "float_from_integer", "float_div",
            ),
        ),
        ProblemSpec(
            name="last-index-of-zero",
            input_types=("vector_integer",),
            output_type="integer",
            types=frozenset({"vector_integer", "integer", "boolean"}),
            train_size=150,
            test_size=1000,
            oracle=_last_index_of_zero,
            random_input=_lioz_random,
            edge_inputs=_LIOZ_EDGES,
            constants=(ZERO,),
            step_limit=600,
            reference_genome=(
                "in1", "vector_integer_length", "integer_dec",
                "in1", "vector_integer_reverse", ZERO, "vector_integer_indexof", "integer_sub",
            ),
        ),
    )
}

ALIASES = {
    "mi": "mirror-image",
    "csl": "compare-string-lengths",
    "ntz": "negative-to-zero",
    "va": "vector-average",
    "lioz": "last-index-of-zero",
}


def get_problem(name: str) -> ProblemSpec:
    key = name.strip().lower().replace("_", "-").replace(" ", "-")
    key = ALIASES.get(key, key)
    try:
        return PROBLEMS[key]
    except KeyError:
        raise ConfigurationError(f"unknown problem {name!r}; known: {sorted(PROBLEMS)}") from None


def generate_dataset(problem: ProblemSpec, seed: int, train_size: int | None = None,
                     test_size: int | None = None) -> Dataset:
    """Deterministic train/test split for ``problem`` from ``seed``."""
    rng = random.Random(f"dataset:{problem.name}:{seed}")
    n_train = problem.train_size if train_size is None else train_size
    n_test = problem.test_size if test_size is None else test_size
    edges = list(problem.edge_inputs[:n_train])
    raw_train = edges + [problem.random_input(rng) for _ in range(n_train - len(edges))]
    raw_test = [problem.random_input(rng) for _ in range(n_test)]
    train = tuple(problem.make_case(x, "train") for x in raw_train)
    test = tuple(problem.make_case(x, "test") for x in raw_test)
    return Dataset(problem.name, seed, train, test)


# ---------------------------------------------------------------------------
# dataset files


def _encode(v: Value) -> dict:
    val = list(v.value) if v.type.startswith("vector") else v.value
    return {"type": v.type, "value": val}


def _decode(d: dict) -> Value:
    t, v = d["type"], d["value"]
    if t == "vector_integer":
        v = tuple(int(x) for x in v)
    elif t == "vector_float":
        v = tuple(float(x) for x in v)
    elif t == "float":
        v = float(v)
    return Value(t, v)


def write_dataset(dataset: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        header = {"problem": dataset.problem, "seed": dataset.seed, "format": DATASET_FORMAT}
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        for case in dataset.train + dataset.test:
            rec = {"inputs": [_encode(v) for v in case.inputs], "output": _encode(case.output), "split": case.split}
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_dataset(path) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith("# "):
            raise ValueError(f"{path}: missing dataset header line")
        header = json.loads(first[2:])
        train, test = [], []
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            case = TrainingCase(tuple(_decode(v) for v in rec["inputs"]), _decode(rec["output"]), rec["split"])
            (train if case.split == "train" else test).append(case)
    return Dataset(header["problem"], header["seed"], tuple(train), tuple(test))
