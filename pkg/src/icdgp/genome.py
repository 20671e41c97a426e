"""Plushy genomes: flat gene sequences, translation to Push, and UMAD."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .vm import OPENS, REGISTRY, Value

CLOSE = "CLOSE"

ERC_INT_RANGE = (-100, 100)
ERC_FLOAT_RANGE = (-100.0, 100.0)
ERC_CHARS = "".join(chr(c) for c in range(32, 127))
ERC_MAX_STRING = 10


def translate(genome: Sequence) -> tuple:
    """Turn a Plushy genome into a nested Push program.

    An instruction that opens N blocks pushes N pending blocks; a CLOSE
    finishes the innermost open block. Surplus CLOSEs are ignored and any
    blocks still open at the end are closed.
    """
    # each frame: (atoms so far, blocks still to open after this one)
    stack: list[tuple[list, int]] = [([], 0)]
    for gene in genome:
        if gene == CLOSE:
            if len(stack) == 1:
                continue
            _close(stack)
            continue
        stack[-1][0].append(gene)
        n = OPENS.get(gene, 0) if type(gene) is str else 0
        if n:
            stack.append(([], n - 1))
    while len(stack) > 1:
        _close(stack)
    return tuple(stack[0][0])


def _close(stack: list) -> None:
    atoms, pending = stack.pop()
    stack[-1][0].append(tuple(atoms))
    if pending:
        stack.append(([], pending - 1))


@dataclass(frozen=True)
class GenePool:
    """Instructions, ERC generators and a CLOSE weight to sample genes from."""

    instructions: tuple[str, ...]
    ercs: tuple[Callable[[random.Random], Value], ...] = ()
    close_weight: float | None = None
    _cum: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.instructions and not self.ercs:
            raise ValueError("gene pool is empty")
        unknown = [i for i in self.instructions if i not in REGISTRY]
        if unknown:
            raise ValueError(f"unknown instructions: {unknown}")
        w = self.close_weight
        if w is None:
            # expected closes per draw == expected opens per draw
            w = float(sum(OPENS[i] for i in self.instructions))
        object.__setattr__(self, "close_weight", w)
        n = len(self.instructions) + len(self.ercs)
        object.__setattr__(self, "_cum", (n, n + w))

    def sample(self, rng: random.Random):
        n, total = self._cum
        r = rng.random() * total
        if r >= n:
            return CLOSE
        k = int(r)
        ni = len(self.instructions)
        if k < ni:
            return self.instructions[k]
        return self.ercs[k - ni](rng)


def erc_integer(rng: random.Random) -> Value:
    return Value("integer", rng.randint(*ERC_INT_RANGE))


def erc_float(rng: random.Random) -> Value:
    return Value("float", rng.uniform(*ERC_FLOAT_RANGE))


def erc_boolean(rng: random.Random) -> Value:
    return Value("boolean", rng.random() < 0.5)


def erc_char(rng: random.Random) -> Value:
    return Value("char", rng.choice(ERC_CHARS))


def erc_string(rng: random.Random) -> Value:
    n = rng.randint(0, ERC_MAX_STRING)
    return Value("string", "".join(rng.choice(ERC_CHARS) for _ in range(n)))


ERC_BY_TYPE = {
    "integer": erc_integer,
    "float": erc_float,
    "boolean": erc_boolean,
    "char": erc_char,
    "string": erc_string,
}


def default_pool(instructions: Sequence[str], types, constants: Sequence[Value] = ()) -> GenePool:
    """Pool with one ERC generator per scalar type plus fixed constants."""
    ercs = [ERC_BY_TYPE[t] for t in ("integer", "float", "boolean", "char", "string") if t in types]
    ercs += [_constant(c) for c in constants]
    return GenePool(tuple(instructions), tuple(ercs))


def _constant(v: Value):
    def gen(rng):
        return v

    return gen


def random_genome(pool: GenePool, size: int, rng: random.Random) -> list:
    return [pool.sample(rng) for _ in range(size)]


def bernoulli_positions(n: int, p: float, rng: random.Random) -> list[int]:
    """Indices in ``range(n)`` each chosen independently with probability ``p``.

    Gaps between chosen indices are drawn from the geometric distribution,
    so the cost is proportional to the number of hits, not to ``n``.
    """
    if p <= 0 or n <= 0:
        return []
    if p >= 1:
        return list(range(n))
    log_q = math.log1p(-p)
    out = []
    i = -1
    while True:
        i += 1 + int(math.log(1.0 - rng.random()) / log_q)
        if i >= n:
            return out
        out.append(i)


def umad(parent: Sequence, add_rate: float, pool: GenePool, rng: random.Random) -> list:
    """Size-neutral uniform mutation by addition and deletion.

    Each parent gene gets a new random gene inserted before or after it
    with probability ``add_rate``; then every gene of the result is deleted
    with probability ``add_rate / (1 + add_rate)``.
    """
    if not 0 <= add_rate < 1:
        raise ValueError("add_rate must be in [0, 1)")
    if add_rate == 0 or not parent:
        return list(parent)
    grown = []
    last = 0
    for i in bernoulli_positions(len(parent), add_rate, rng):
        grown.extend(parent[last:i])
        new = pool.sample(rng)
        if rng.random() < 0.5:
            grown.append(new)
            grown.append(parent[i])
        else:
            grown.append(parent[i])
            grown.append(new)
        last = i + 1
    grown.extend(parent[last:])
    child = []
    last = 0
    for i in bernoulli_positions(len(grown), add_rate / (1 + add_rate), rng):
        child.extend(grown[last:i])
        last = i + 1
    child.extend(grown[last:])
    return child


# ---------------------------------------------------------------------------
# serialization

_PREFIX = {
    "integer": "i",
    "float": "f",
    "boolean": "b",
    "char": "c",
    "string": "s",
    "vector_integer": "vi",
    "vector_float": "vf",
}
_TYPE_OF_PREFIX = {v: k for k, v in _PREFIX.items()}
_decoder = json.JSONDecoder()


def _dump(value) -> str:
    return json.dumps(value, separators=(",", ":"), ensure_ascii=True)


def gene_to_text(gene) -> str:
    if type(gene) is str:
        return gene
    t, v = gene
    if t == "boolean":
        body = "true" if v else "false"
    elif t == "float":
        body = repr(float(v))
    elif t in ("vector_integer", "vector_float"):
        body = _dump([float(x) for x in v] if t == "vector_float" else list(v))
    elif t in ("char", "string"):
        body = _dump(v)
    else:
        body = str(int(v))
    return f"{_PREFIX[t]}:{body}"


def genome_to_text(genome: Sequence) -> str:
    """One genome per line: space-separated genes, type-prefixed literals."""
    return " ".join(gene_to_text(g) for g in genome)


def genome_from_text(line: str) -> list:
    genes = []
    i, n = 0, len(line)
    while i < n:
        if line[i] == " ":
            i += 1
            continue
        colon = line.find(":", i)
        space = line.find(" ", i)
        if space == -1:
            space = n
        if colon == -1 or colon > space:
            name = line[i:space]
            if name != CLOSE and name not in REGISTRY:
                raise ValueError(f"unknown gene {name!r}")
            genes.append(name)
            i = space
            continue
        prefix = line[i:colon]
        t = _TYPE_OF_PREFIX.get(prefix)
        if t is None:
            raise ValueError(f"unknown literal prefix {prefix!r}")
        start = colon + 1
        if t in ("char", "string", "vector_integer", "vector_float"):
            v, end = _decoder.raw_decode(line, start)
            if t == "vector_integer":
                v = tuple(int(x) for x in v)
            elif t == "vector_float":
                v = tuple(float(x) for x in v)
        else:
            end = line.find(" ", start)
            if end == -1:
                end = n
            body = line[start:end]
            if t == "integer":
                v = int(body)
            elif t == "float":
                v = float(body)
            elif body in ("true", "false"):
                v = body == "true"
            else:
                raise ValueError(f"bad boolean literal {body!r}")
        genes.append(Value(t, v))
        i = end
    return genes
