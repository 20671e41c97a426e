import random
import statistics

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icdgp.genome import (
    CLOSE,
    GenePool,
    bernoulli_positions,
    default_pool,
    erc_float,
    erc_integer,
    erc_string,
    genome_from_text,
    genome_to_text,
    random_genome,
    translate,
    umad,
)
from icdgp.vm import OPENS, REGISTRY, Value, instruction_catalog

ALL_INSTRUCTIONS = tuple(sorted(n for n in REGISTRY if not (n.startswith("in") and n[2:].isdigit())))
POOL = GenePool(ALL_INSTRUCTIONS + ("in1",), (erc_integer, erc_float, erc_string))
SMALL_POOL = default_pool(instruction_catalog({"integer", "boolean"}, 4), {"integer", "boolean"})


def test_translate_empty():
    assert translate([]) == ()


def test_translate_if_two_blocks():
    genome = ["exec_if", "integer_add", CLOSE, "integer_sub"]
    assert translate(genome) == ("exec_if", ("integer_add",), ("integer_sub",))


def test_translate_surplus_closes():
    assert translate([CLOSE, CLOSE, "in1"]) == ("in1",)


def test_translate_nested():
    genome = ["exec_do*times", "exec_if", "integer_inc", CLOSE, CLOSE, CLOSE, "integer_dec"]
    assert translate(genome) == ("exec_do*times", ("exec_if", ("integer_inc",), ()), "integer_dec")


def _flatten(program):
    """Program back to a Plushy genome, one CLOSE after every block."""
    out = []
    for atom in program:
        if type(atom) is tuple:
            out.extend(_flatten(atom))
            out.append(CLOSE)
        else:
            out.append(atom)
    return out


def _well_formed(program):
    for atom in program:
        if type(atom) is tuple:
            if not _well_formed(atom):
                return False
        elif not (isinstance(atom, Value) or atom in REGISTRY):
            return False
    return True


def _openers_followed_by_blocks(program):
    for k, atom in enumerate(program):
        if type(atom) is tuple:
            if not _openers_followed_by_blocks(atom):
                return False
        elif type(atom) is str and OPENS.get(atom, 0):
            n = OPENS[atom]
            following = program[k + 1:k + 1 + n]
            if len(following) != n or not all(type(b) is tuple for b in following):
                return False
    return True


def test_translation_totality_random():
    rng = random.Random(3)
    for _ in range(10_000):
        genome = random_genome(POOL, rng.randint(0, 60), rng)
        prog = translate(genome)
        assert _well_formed(prog)
        assert _openers_followed_by_blocks(prog)
        assert translate(_flatten(prog)) == prog


def test_random_genome_sizes():
    rng = random.Random(0)
    assert random_genome(SMALL_POOL, 0, rng) == []
    g = random_genome(SMALL_POOL, 50, rng)
    assert len(g) == 50
    names = set(SMALL_POOL.instructions)
    for gene in g:
        assert gene == CLOSE or gene in names or isinstance(gene, Value)


def test_random_genome_single_instruction_pool():
    pool = GenePool(("integer_add",))
    assert pool.close_weight == 0
    assert random_genome(pool, 3, random.Random(1)) == ["integer_add"] * 3


def test_close_weight_balances_opens():
    expected_opens = sum(OPENS[i] for i in SMALL_POOL.instructions)
    assert SMALL_POOL.close_weight == expected_opens
    rng = random.Random(5)
    genes = random_genome(SMALL_POOL, 200_000, rng)
    opens = sum(OPENS.get(g, 0) for g in genes if type(g) is str)
    closes = sum(1 for g in genes if g == CLOSE)
    assert abs(opens - closes) / closes < 0.05


def test_erc_ranges():
    rng = random.Random(2)
    for _ in range(2000):
        assert -100 <= erc_integer(rng).value <= 100
        assert -100.0 <= erc_float(rng).value <= 100.0
        s = erc_string(rng).value
        assert len(s) <= 10 and all(32 <= ord(c) < 127 for c in s)


def test_umad_zero_rate_is_identity():
    rng = random.Random(0)
    parent = random_genome(SMALL_POOL, 40, rng)
    assert umad(parent, 0.0, SMALL_POOL, rng) == parent


def test_umad_empty_parent():
    assert umad([], 0.09, SMALL_POOL, random.Random(0)) == []


def test_umad_rejects_bad_rate():
    with pytest.raises(ValueError):
        umad(["in1"], 1.0, SMALL_POOL, random.Random(0))


def test_umad_mean_length_at_100():
    rng = random.Random(7)
    parent = random_genome(SMALL_POOL, 100, rng)
    lengths = [len(umad(parent, 0.09, SMALL_POOL, rng)) for _ in range(10_000)]
    assert abs(statistics.mean(lengths) - 100) < 1.0


def test_umad_keeps_parent_order():
    rng = random.Random(9)
    parent = [Value("integer", i) for i in range(200)]
    child = umad(parent, 0.09, SMALL_POOL, rng)
    kept = [g.value for g in child if isinstance(g, Value) and g in parent]
    assert kept == sorted(kept)


def test_bernoulli_positions_rate():
    rng = random.Random(4)
    n, p, trials = 50, 0.09, 20_000
    counts = [0] * n
    for _ in range(trials):
        for i in bernoulli_positions(n, p, rng):
            counts[i] += 1
    # per-position frequency within 5 standard errors of p
    se = (p * (1 - p) / trials) ** 0.5
    assert all(abs(c / trials - p) < 5 * se for c in counts)


_literals = st.one_of(
    st.builds(lambda v: Value("integer", v), st.integers(-(2**63), 2**63 - 1)),
    st.builds(lambda v: Value("float", v), st.floats(allow_nan=False, allow_infinity=False)),
    st.builds(lambda v: Value("boolean", v), st.booleans()),
    st.builds(lambda v: Value("char", v), st.characters()),
    st.builds(lambda v: Value("string", v), st.text(max_size=20)),
    st.builds(lambda v: Value("vector_integer", tuple(v)), st.lists(st.integers(-1000, 1000), max_size=8)),
    st.builds(lambda v: Value("vector_float", tuple(v)),
              st.lists(st.floats(allow_nan=False, allow_infinity=False), max_size=8)),
)
_genes = st.one_of(_literals, st.sampled_from(ALL_INSTRUCTIONS + ("in1", CLOSE)))


@settings(max_examples=300, deadline=None)
@given(st.lists(_genes, max_size=40))
def test_serialization_round_trip(genome):
    text = genome_to_text(genome)
    assert "\n" not in text
    back = genome_from_text(text)
    assert back == genome
    for a, b in zip(back, genome):
        assert type(a) is type(b)
        if isinstance(a, Value):
            assert type(a.value) is type(b.value)
            if a.type == "float":
                assert a.value.hex() == b.value.hex()


def test_serialization_example():
    genome = [Value("integer", 42), Value("string", "ab c"), CLOSE, "integer_add", Value("boolean", True)]
    text = genome_to_text(genome)
    assert text == 'i:42 s:"ab c" CLOSE integer_add b:true'
    assert genome_from_text(text) == genome


def test_serialization_rejects_unknown():
    with pytest.raises(ValueError):
        genome_from_text("integer_frobnicate")
    with pytest.raises(ValueError):
        genome_from_text("q:12")
