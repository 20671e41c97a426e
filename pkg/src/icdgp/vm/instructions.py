"""The Push instruction set.

Every instruction is a plain function of the machine state. Instructions
check their stack preconditions before touching anything, so an
instruction that cannot run leaves the state exactly as it found it
(apart from the exec stack and step counter, which the interpreter owns).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, NamedTuple

CATALOG_VERSION = "1"

TYPES = (
    "integer",
    "float",
    "boolean",
    "char",
    "string",
    "vector_integer",
    "vector_float",
)

INT_MAX = 2**63 - 1
INT_MIN = -(2**63)
MAX_SIZE = 10_000
MAX_INPUTS = 9


class Value(NamedTuple):
    """A typed Push value; also used as a literal atom in programs."""

    type: str
    value: Any


@dataclass(frozen=True)
class Instruction:
    name: str
    fn: Callable[[Any], None]
    types: frozenset
    opens: int
    consumes: str
    produces: str
    doc: str


REGISTRY: dict[str, Instruction] = {}


def _register(name, types, consumes, produces, doc, opens=0):
    def deco(fn):
        REGISTRY[name] = Instruction(name, fn, frozenset(types), opens, consumes, produces, doc)
        return fn

    return deco


def _int_ok(x: int) -> bool:
    return INT_MIN <= x <= INT_MAX


# ---------------------------------------------------------------------------
# generic stack manipulation


def _make_stack_ops(t: str) -> None:
    needs = () if t == "exec" else (t,)

    def dup(state):
        s = state.stacks[t]
        if s:
            s.append(s[-1])

    def swap(state):
        s = state.stacks[t]
        if len(s) >= 2:
            s[-1], s[-2] = s[-2], s[-1]

    def pop(state):
        s = state.stacks[t]
        if s:
            s.pop()

    _register(f"{t}_dup", needs, t, t, "Duplicate the top item.")(dup)
    _register(f"{t}_swap", needs, f"{t} x2", t, "Swap the top two items.")(swap)
    _register(f"{t}_pop", needs, t, "", "Discard the top item.")(pop)

    if t in ("integer", "exec"):

        def rot(state):
            s = state.stacks[t]
            if len(s) >= 3:
                s.append(s.pop(-3))

        _register(f"{t}_rot", needs, f"{t} x3", t, "Move the third item to the top.")(rot)

    if t != "exec":

        def eq(state):
            s = state.stacks[t]
            if len(s) >= 2:
                b = s.pop()
                a = s.pop()
                state.stacks["boolean"].append(a == b)

        _register(f"{t}_eq", needs + ("boolean",), f"{t} x2", "boolean", "Push whether the top two items are equal.")(eq)


for _t in TYPES + ("exec",):
    _make_stack_ops(_t)


# ---------------------------------------------------------------------------
# integer


def _int_binop(name, op, doc):
    def fn(state):
        s = state.stacks["integer"]
        if len(s) < 2:
            return
        r = op(s[-2], s[-1])
        if r is None or not _int_ok(r):
            return
        del s[-1]
        s[-1] = r

    _register(name, ("integer",), "integer x2", "integer", doc)(fn)


def _quot(a, b):
    if b == 0:
        return None
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


_int_binop("integer_add", lambda a, b: a + b, "a + b (b is the top item).")
_int_binop("integer_sub", lambda a, b: a - b, "a - b.")
_int_binop("integer_mult", lambda a, b: a * b, "a * b.")
_int_binop("integer_div", _quot, "a / b truncated toward zero; no-op when b = 0.")
_int_binop("integer_mod", lambda a, b: None if b == 0 else a % b, "a mod b with the sign of b; no-op when b = 0.")
_int_binop("integer_min", min, "Smaller of a and b.")
_int_binop("integer_max", max, "Larger of a and b.")


@_register("integer_inc", ("integer",), "integer", "integer", "Add 1.")
def integer_inc(state):
    s = state.stacks["integer"]
    if s and s[-1] < INT_MAX:
        s[-1] += 1


@_register("integer_dec", ("integer",), "integer", "integer", "Subtract 1.")
def integer_dec(state):
    s = state.stacks["integer"]
    if s and s[-1] > INT_MIN:
        s[-1] -= 1


def _int_cmp(name, op, doc):
    def fn(state):
        s = state.stacks["integer"]
        if len(s) < 2:
            return
        b = s.pop()
        a = s.pop()
        state.stacks["boolean"].append(op(a, b))

    _register(name, ("integer", "boolean"), "integer x2", "boolean", doc)(fn)


_int_cmp("integer_lt", lambda a, b: a < b, "Push a < b.")
_int_cmp("integer_gt", lambda a, b: a > b, "Push a > b.")


@_register("integer_from_boolean", ("integer", "boolean"), "boolean", "integer", "1 for true, 0 for false.")
def integer_from_boolean(state):
    b = state.stacks["boolean"]
    if b:
        state.stacks["integer"].append(1 if b.pop() else 0)


@_register("integer_from_float", ("integer", "float"), "float", "integer", "Truncate toward zero.")
def integer_from_float(state):
    f = state.stacks["float"]
    if not f:
        return
    r = int(f[-1])
    if _int_ok(r):
        f.pop()
        state.stacks["integer"].append(r)


# ---------------------------------------------------------------------------
# float


def _float_binop(name, op, doc):
    def fn(state):
        s = state.stacks["float"]
        if len(s) < 2:
            return
        try:
            r = op(s[-2], s[-1])
        except (ZeroDivisionError, OverflowError):
            return
        if not math.isfinite(r):
            return
        del s[-1]
        s[-1] = r

    _register(name, ("float",), "float x2", "float", doc)(fn)


_float_binop("float_add", lambda a, b: a + b, "a + b.")
_float_binop("float_sub", lambda a, b: a - b, "a - b.")
_float_binop("float_mult", lambda a, b: a * b, "a * b.")
_float_binop("float_div", lambda a, b: a / b, "a / b; no-op when b = 0.")
_float_binop("float_min", min, "Smaller of a and b.")
_float_binop("float_max", max, "Larger of a and b.")


@_register("float_inc", ("float",), "float", "float", "Add 1.0.")
def float_inc(state):
    s = state.stacks["float"]
    if s and math.isfinite(s[-1] + 1.0):
        s[-1] += 1.0


@_register("float_dec", ("float",), "float", "float", "Subtract 1.0.")
def float_dec(state):
    s = state.stacks["float"]
    if s and math.isfinite(s[-1] - 1.0):
        s[-1] -= 1.0


def _float_cmp(name, op, doc):
    def fn(state):
        s = state.stacks["float"]
        if len(s) < 2:
            return
        b = s.pop()
        a = s.pop()
        state.stacks["boolean"].append(op(a, b))

    _register(name, ("float", "boolean"), "float x2", "boolean", doc)(fn)


_float_cmp("float_lt", lambda a, b: a < b, "Push a < b.")
_float_cmp("float_gt", lambda a, b: a > b, "Push a > b.")


@_register("float_from_integer", ("float", "integer"), "integer", "float", "Convert to float.")
def float_from_integer(state):
    s = state.stacks["integer"]
    if s:
        state.stacks["float"].append(float(s.pop()))


# ---------------------------------------------------------------------------
# boolean


def _bool_binop(name, op, doc):
    def fn(state):
        s = state.stacks["boolean"]
        if len(s) < 2:
            return
        b = s.pop()
        s[-1] = op(s[-1], b)

    _register(name, ("boolean",), "boolean x2", "boolean", doc)(fn)


_bool_binop("boolean_and", lambda a, b: a and b, "a and b.")
_bool_binop("boolean_or", lambda a, b: a or b, "a or b.")
_bool_binop("boolean_xor", lambda a, b: a != b, "a xor b.")


@_register("boolean_not", ("boolean",), "boolean", "boolean", "Logical negation.")
def boolean_not(state):
    s = state.stacks["boolean"]
    if s:
        s[-1] = not s[-1]


@_register("boolean_from_integer", ("boolean", "integer"), "integer", "boolean", "True iff nonzero.")
def boolean_from_integer(state):
    s = state.stacks["integer"]
    if s:
        state.stacks["boolean"].append(s.pop() != 0)


# ---------------------------------------------------------------------------
# char


def _char_pred(name, pred, doc):
    def fn(state):
        s = state.stacks["char"]
        if s:
            state.stacks["boolean"].append(pred(s.pop()))

    _register(name, ("char", "boolean"), "char", "boolean", doc)(fn)


_char_pred("char_is_letter", str.isalpha, "Push whether the char is a letter.")
_char_pred("char_is_digit", str.isdigit, "Push whether the char is a digit.")
_char_pred("char_is_whitespace", str.isspace, "Push whether the char is whitespace.")


@_register("char_from_integer", ("char", "integer"), "integer", "char", "ASCII char of n mod 128.")
def char_from_integer(state):
    s = state.stacks["integer"]
    if s:
        state.stacks["char"].append(chr(s.pop() % 128))


# ---------------------------------------------------------------------------
# string


@_register("string_length", ("string", "integer"), "string", "integer", "Push the length.")
def string_length(state):
    s = state.stacks["string"]
    if s:
        state.stacks["integer"].append(len(s.pop()))


@_register("string_concat", ("string",), "string x2", "string", "a + b; no-op if the result exceeds the size cap.")
def string_concat(state):
    s = state.stacks["string"]
    if len(s) < 2 or len(s[-2]) + len(s[-1]) > MAX_SIZE:
        return
    b = s.pop()
    s[-1] = s[-1] + b


@_register("string_reverse", ("string",), "string", "string", "Reverse the string.")
def string_reverse(state):
    s = state.stacks["string"]
    if s:
        s[-1] = s[-1][::-1]


@_register("string_empty", ("string", "boolean"), "string", "boolean", "Push whether the string is empty.")
def string_empty(state):
    s = state.stacks["string"]
    if s:
        state.stacks["boolean"].append(not s.pop())


def _string_end(name, idx, doc):
    def fn(state):
        s = state.stacks["string"]
        if s and s[-1]:
            state.stacks["char"].append(s.pop()[idx])

    _register(name, ("string", "char"), "string", "char", doc)(fn)


_string_end("string_first", 0, "Push the first char; no-op on an empty string.")
_string_end("string_last", -1, "Push the last char; no-op on an empty string.")


@_register("string_nth", ("string", "char", "integer"), "string, integer", "char", "Char at index n mod length.")
def string_nth(state):
    s = state.stacks["string"]
    i = state.stacks["integer"]
    if s and i and s[-1]:
        n = i.pop()
        st = s.pop()
        state.stacks["char"].append(st[n % len(st)])


@_register("string_contains_char", ("string", "char", "boolean"), "string, char", "boolean", "Push whether the char occurs.")
def string_contains_char(state):
    s = state.stacks["string"]
    c = state.stacks["char"]
    if s and c:
        state.stacks["boolean"].append(c.pop() in s.pop())


@_register("string_conj_char", ("string", "char"), "string, char", "string", "Append the char.")
def string_conj_char(state):
    s = state.stacks["string"]
    c = state.stacks["char"]
    if s and c and len(s[-1]) < MAX_SIZE:
        s[-1] = s[-1] + c.pop()


@_register("exec_do*string", ("string", "char"), "string, exec", "char, exec",
           "Run the next exec item once per char, with the char pushed first.", opens=1)
def exec_do_string(state):
    s = state.stacks["string"]
    ex = state.stacks["exec"]
    if not s or not ex:
        return
    st = s.pop()
    code = ex.pop()
    if not st:
        return
    if len(st) > 1:
        ex.append(code)
        ex.append("exec_do*string")
        ex.append(Value("string", st[1:]))
    ex.append(code)
    state.stacks["char"].append(st[0])


# ---------------------------------------------------------------------------
# vectors


def _make_vector_ops(vt: str, et: str) -> None:
    def length(state):
        s = state.stacks[vt]
        if s:
            state.stacks["integer"].append(len(s.pop()))

    _register(f"{vt}_length", (vt, "integer"), vt, "integer", "Push the length.")(length)

    def nth(state):
        s = state.stacks[vt]
        i = state.stacks["integer"]
        if s and i and s[-1]:
            n = i.pop()
            v = s.pop()
            state.stacks[et].append(v[n % len(v)])

    _register(f"{vt}_nth", (vt, "integer", et), f"{vt}, integer", et, "Element at index n mod length.")(nth)

    def conj(state):
        s = state.stacks[vt]
        e = state.stacks[et]
        if s and e and len(s[-1]) < MAX_SIZE:
            s[-1] = s[-1] + (e.pop(),)

    _register(f"{vt}_conj", (vt, et), f"{vt}, {et}", vt, "Append an element.")(conj)

    def first(state):
        s = state.stacks[vt]
        if s and s[-1]:
            state.stacks[et].append(s.pop()[0])

    def last(state):
        s = state.stacks[vt]
        if s and s[-1]:
            state.stacks[et].append(s.pop()[-1])

    _register(f"{vt}_first", (vt, et), vt, et, "Push the first element; no-op when empty.")(first)
    _register(f"{vt}_last", (vt, et), vt, et, "Push the last element; no-op when empty.")(last)

    def rest(state):
        s = state.stacks[vt]
        if s:
            s[-1] = s[-1][1:]

    def butlast(state):
        s = state.stacks[vt]
        if s:
            s[-1] = s[-1][:-1]

    def reverse(state):
        s = state.stacks[vt]
        if s:
            s[-1] = s[-1][::-1]

    _register(f"{vt}_rest", (vt,), vt, vt, "Drop the first element.")(rest)
    _register(f"{vt}_butlast", (vt,), vt, vt, "Drop the last element.")(butlast)
    _register(f"{vt}_reverse", (vt,), vt, vt, "Reverse the vector.")(reverse)

    def emptyvector(state):
        state.stacks[vt].append(())

    _register(f"{vt}_emptyvector", (vt,), "", vt, "Push an empty vector.")(emptyvector)

    def empty(state):
        s = state.stacks[vt]
        if s:
            state.stacks["boolean"].append(not s.pop())

    _register(f"{vt}_empty", (vt, "boolean"), vt, "boolean", "Push whether the vector is empty.")(empty)

    def concat(state):
        s = state.stacks[vt]
        if len(s) < 2 or len(s[-2]) + len(s[-1]) > MAX_SIZE:
            return
        b = s.pop()
        s[-1] = s[-1] + b

    _register(f"{vt}_concat", (vt,), f"{vt} x2", vt, "a + b; no-op if the result exceeds the size cap.")(concat)

    iterate_name = f"exec_do*{vt}"

    def iterate(state):
        s = state.stacks[vt]
        ex = state.stacks["exec"]
        if not s or not ex:
            return
        v = s.pop()
        code = ex.pop()
        if not v:
            return
        if len(v) > 1:
            ex.append(code)
            ex.append(iterate_name)
            ex.append(Value(vt, v[1:]))
        ex.append(code)
        state.stacks[et].append(v[0])

    _register(iterate_name, (vt, et), f"{vt}, exec", f"{et}, exec",
              "Run the next exec item once per element, with the element pushed first.", opens=1)(iterate)

    if et != "integer":
        return

    # integer-vector extras

    def indexof(state):
        s = state.stacks[vt]
        i = state.stacks["integer"]
        if s and i:
            x = i.pop()
            v = s.pop()
            i.append(v.index(x) if x in v else -1)

    def occurrencesof(state):
        s = state.stacks[vt]
        i = state.stacks["integer"]
        if s and i:
            x = i.pop()
            i.append(s.pop().count(x))

    def contains(state):
        s = state.stacks[vt]
        i = state.stacks["integer"]
        if s and i:
            x = i.pop()
            state.stacks["boolean"].append(x in s.pop())

    def replace(state):
        s = state.stacks[vt]
        i = state.stacks["integer"]
        if s and len(i) >= 2:
            new = i.pop()
            old = i.pop()
            s[-1] = tuple(new if x == old else x for x in s[-1])

    def set_(state):
        s = state.stacks[vt]
        i = state.stacks["integer"]
        if s and len(i) >= 2 and s[-1]:
            idx = i.pop()
            item = i.pop()
            v = s[-1]
            k = idx % len(v)
            s[-1] = v[:k] + (item,) + v[k + 1:]

    def take(state):
        s = state.stacks[vt]
        i = state.stacks["integer"]
        if s and i:
            n = i.pop()
            s[-1] = s[-1][: max(0, n)]

    _register(f"{vt}_indexof", (vt, "integer"), f"{vt}, integer", "integer", "First index of the item, or -1.")(indexof)
    _register(f"{vt}_occurrencesof", (vt, "integer"), f"{vt}, integer", "integer", "Count of the item.")(occurrencesof)
    _register(f"{vt}_contains", (vt, "integer", "boolean"), f"{vt}, integer", "boolean", "Push whether the item occurs.")(contains)
    _register(f"{vt}_replace", (vt, "integer"), f"{vt}, integer x2", vt,
              "Replace every occurrence of the second integer with the top integer.")(replace)
    _register(f"{vt}_set", (vt, "integer"), f"{vt}, integer x2", vt,
              "Set index (top integer, mod length) to the second integer; no-op when empty.")(set_)
    _register(f"{vt}_take", (vt, "integer"), f"{vt}, integer", vt, "Keep the first n elements (n clamped at 0).")(take)


_make_vector_ops("vector_integer", "integer")
_make_vector_ops("vector_float", "float")


# ---------------------------------------------------------------------------
# exec


@_register("exec_noop", (), "", "", "Do nothing.")
def exec_noop(state):
    pass


@_register("exec_if", ("boolean",), "boolean, exec x2", "exec",
           "Keep the first exec item if true, the second if false.", opens=2)
def exec_if(state):
    b = state.stacks["boolean"]
    ex = state.stacks["exec"]
    if not b or len(ex) < 2:
        return
    if b.pop():
        del ex[-2]
    else:
        ex.pop()


@_register("exec_when", ("boolean",), "boolean, exec", "exec", "Skip the next exec item if false.", opens=1)
def exec_when(state):
    b = state.stacks["boolean"]
    ex = state.stacks["exec"]
    if not b or not ex:
        return
    if not b.pop():
        ex.pop()


@_register("exec_while", ("boolean",), "boolean, exec", "exec",
           "Pop a boolean; if true run the next exec item and repeat, else skip it.", opens=1)
def exec_while(state):
    b = state.stacks["boolean"]
    ex = state.stacks["exec"]
    if not b or not ex:
        return
    if b.pop():
        code = ex[-1]
        ex.append("exec_while")
        ex.append(code)
    else:
        ex.pop()


@_register("exec_do*range", ("integer",), "integer x2, exec", "integer, exec",
           "Run the next exec item for each index from the second integer to the top one, pushing the index.", opens=1)
def exec_do_range(state):
    i = state.stacks["integer"]
    ex = state.stacks["exec"]
    if len(i) < 2 or not ex:
        return
    dest = i.pop()
    cur = i.pop()
    code = ex.pop()
    i.append(cur)
    if cur != dest:
        nxt = cur + 1 if dest > cur else cur - 1
        ex.append(code)
        ex.append("exec_do*range")
        ex.append(Value("integer", dest))
        ex.append(Value("integer", nxt))
    ex.append(code)


def _counted_loop(state, wrap):
    i = state.stacks["integer"]
    ex = state.stacks["exec"]
    if not i or not ex:
        return
    n = i.pop()
    code = ex.pop()
    if n < 1:
        return
    if wrap:
        code = ("integer_pop",) + code if type(code) is tuple else ("integer_pop", code)
    ex.append(code)
    ex.append("exec_do*range")
    ex.append(Value("integer", n - 1))
    ex.append(Value("integer", 0))


@_register("exec_do*count", ("integer",), "integer, exec", "integer, exec",
           "Run the next exec item n times, pushing the counter 0..n-1 each time.", opens=1)
def exec_do_count(state):
    _counted_loop(state, wrap=False)


@_register("exec_do*times", ("integer",), "integer, exec", "exec",
           "Run the next exec item n times without exposing the counter.", opens=1)
def exec_do_times(state):
    _counted_loop(state, wrap=True)


# exec stack ops consume code blocks, so they open blocks like Clojush does
for _name, _opens in (("exec_dup", 1), ("exec_swap", 2), ("exec_rot", 3), ("exec_pop", 1)):
    _i = REGISTRY[_name]
    REGISTRY[_name] = Instruction(_i.name, _i.fn, _i.types, _opens, _i.consumes, _i.produces, _i.doc)


# ---------------------------------------------------------------------------
# inputs


def _make_input(k: int) -> None:
    def fn(state):
        if k < len(state.inputs):
            t, v = state.inputs[k]
            state.stacks[t].append(v)

    _register(f"in{k + 1}", (), "", "input type", f"Push input {k + 1}.")(fn)


for _k in range(MAX_INPUTS):
    _make_input(_k)

FUNCTIONS: dict[str, Callable] = {name: ins.fn for name, ins in REGISTRY.items()}
OPENS: dict[str, int] = {name: ins.opens for name, ins in REGISTRY.items()}


class ConfigurationError(ValueError):
    """Raised for invalid problem or experiment configuration."""


def instruction_catalog(problem_types, n_inputs: int = 0) -> list[str]:
    """Closed instruction set for a problem using ``problem_types``.

    An instruction is included when every stack type it touches is one of
    the problem's types. ``in1..in{n_inputs}`` are appended last.
    """
    types = set(problem_types)
    if not types:
        raise ConfigurationError("instruction catalog needs at least one type")
    unknown = types - set(TYPES)
    if unknown:
        raise ConfigurationError(f"unknown type tag(s): {sorted(unknown)}")
    if not 0 <= n_inputs <= MAX_INPUTS:
        raise ConfigurationError(f"n_inputs must be in [0, {MAX_INPUTS}]")
    names = sorted(
        name
        for name, ins in REGISTRY.items()
        if not name.startswith("in") or not name[2:].isdigit()
        if ins.types <= types
    )
    return names + [f"in{k}" for k in range(1, n_inputs + 1)]


def catalog_markdown() -> str:
    lines = [
        f"# Instruction catalog (version {CATALOG_VERSION})",
        "",
        "Generated from `icdgp.vm.instructions.REGISTRY`. Instructions with unmet",
        "stack preconditions are no-ops. `opens` is the number of code blocks the",
        "instruction opens when a Plushy genome is translated.",
        "",
        "| name | needs types | consumes | produces | opens | semantics |",
        "|---|---|---|---|---|---|",
    ]
    for name in sorted(REGISTRY):
        ins = REGISTRY[name]
        lines.append(
            f"| `{name}` | {', '.join(sorted(ins.types)) or '-'} | {ins.consumes or '-'} "
            f"| {ins.produces or '-'} | {ins.opens} | {ins.doc} |"
        )
    return "\n".join(lines) + "\n"

