import random

import pytest

from icdgp.genome import translate
from icdgp.problems import (
    MAX_DEFINED_ERROR,
    NO_OUTPUT_PENALTY,
    PROBLEMS,
    case_error,
    generate_dataset,
    get_problem,
    levenshtein,
    read_dataset,
    write_dataset,
)
from icdgp.vm import NO_OUTPUT, ConfigurationError, Value, execute, instruction_catalog, output_of
from oracles import levenshtein_dp


def test_oracle_examples():
    assert get_problem("smallest").oracle(4, 1, 9, 3) == 1
    assert get_problem("mirror-image").oracle((1, 2, 3), (3, 2, 1)) is True
    assert get_problem("vector-average").oracle((2.0, 4.0)) == 3.0
    assert get_problem("ntz").oracle((-3, 0, 4)) == (0, 0, 4)
    assert get_problem("lioz").oracle((0, 1, 0, 2)) == 2
    assert get_problem("csl").oracle("a", "bb", "ccc") is True
    assert get_problem("csl").oracle("a", "bb", "cc") is False


def test_get_problem_aliases_and_errors():
    assert get_problem("Negative_To_Zero").name == "negative-to-zero"
    with pytest.raises(ConfigurationError):
        get_problem("double-letters")


def test_budget_scaling():
    assert get_problem("smallest").budget == 30_000_000
    assert get_problem("vector-average").budget == 75_000_000
    assert get_problem("last-index-of-zero").budget == 45_000_000


def test_case_error_examples():
    assert case_error(7, 7, "integer") == 0
    assert case_error(NO_OUTPUT, Value("integer", 3), "integer") == NO_OUTPUT_PENALTY
    assert case_error((0, 5, 0), (0, 5, 1), "vector_integer") == 1
    assert case_error(True, 3, "integer") == NO_OUTPUT_PENALTY
    assert case_error(2**63 - 1, -(2**63), "integer") == MAX_DEFINED_ERROR
    assert case_error(3.0004, 3.0, "float") == 0
    assert case_error(3.01, 3.0, "float") == pytest.approx(0.01)
    assert case_error(True, False, "boolean") == 1
    assert case_error((1.0, 2.0), (1.0, 2.0005), "vector_float") == 0
    assert case_error((), (1, 2, 3), "vector_integer") == 3


def test_penalty_exceeds_defined_errors():
    rng = random.Random(0)
    for _ in range(1000):
        a = rng.randint(-(2**63), 2**63 - 1)
        b = rng.randint(-(2**63), 2**63 - 1)
        assert 0 <= case_error(a, b, "integer") < NO_OUTPUT_PENALTY


def test_levenshtein_matches_dp():
    rng = random.Random(1)
    for _ in range(3000):
        a = tuple(rng.randint(-3, 3) for _ in range(rng.randint(0, 30)))
        b = tuple(rng.randint(-3, 3) for _ in range(rng.randint(0, 30)))
        assert levenshtein(a, b) == levenshtein_dp(a, b)


@pytest.mark.parametrize("name", sorted(PROBLEMS))
def test_dataset_shape_and_determinism(name):
    spec = PROBLEMS[name]
    ds = generate_dataset(spec, 3)
    assert len(ds.train) == spec.train_size and len(ds.test) == spec.test_size
    assert all(c.split == "train" for c in ds.train) and all(c.split == "test" for c in ds.test)
    assert [tuple(v.value for v in c.inputs) for c in ds.train[: len(spec.edge_inputs)]] == list(spec.edge_inputs)
    for case in ds.train + ds.test:
        assert tuple(v.type for v in case.inputs) == spec.input_types
        assert case.output == Value(spec.output_type, spec.oracle(*(v.value for v in case.inputs)))
    assert generate_dataset(spec, 3) == ds
    assert generate_dataset(spec, 4) != ds


@pytest.mark.parametrize("name", sorted(PROBLEMS))
def test_reference_program_is_sound(name):
    # oracle, vm and error function agree on every generated case
    spec = PROBLEMS[name]
    catalog = set(instruction_catalog(spec.types, spec.n_inputs))
    genes = [g for g in spec.reference_genome if type(g) is str and g != "CLOSE"]
    assert set(genes) <= catalog
    program = translate(spec.reference_genome)
    ds = generate_dataset(spec, 0)
    for case in ds.train + ds.test:
        state = execute(program, case.inputs, spec.step_limit)
        assert case_error(output_of(state, spec.output_type), case.output, spec.output_type) == 0, case


def test_lioz_always_has_zero():
    ds = generate_dataset(get_problem("lioz"), 1)
    assert all(0 in c.inputs[0].value for c in ds.train + ds.test)


def test_dataset_sizes_override():
    ds = generate_dataset(get_problem("smallest"), 0, train_size=5, test_size=7)
    assert len(ds.train) == 5 and len(ds.test) == 7


def test_dataset_file_round_trip(tmp_path):
    for name in PROBLEMS:
        ds = generate_dataset(PROBLEMS[name], 2, train_size=30, test_size=20)
        path = tmp_path / f"{name}.jsonl"
        write_dataset(ds, path)
        assert read_dataset(path) == ds
        first = path.read_text().splitlines()[0]
        assert first.startswith("# ") and '"seed": 2' in first


def test_read_dataset_requires_header(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"inputs": [], "output": {"type": "integer", "value": 1}, "split": "train"}\n')
    with pytest.raises(ValueError):
        read_dataset(path)
