"""Push interpreter: typed stacks, an exec stack and a hard step limit."""

from __future__ import annotations

from typing import Sequence

from .instructions import FUNCTIONS, TYPES, Value

DEFAULT_STEP_LIMIT = 2000


class _NoOutput:
    __slots__ = ()

    def __repr__(self):
        return "NO_OUTPUT"

    def __reduce__(self):
        return "NO_OUTPUT"


NO_OUTPUT = _NoOutput()


class MachineState:
    __slots__ = ("stacks", "inputs", "steps", "step_limit")

    def __init__(self, inputs: Sequence[Value] = (), step_limit: int = DEFAULT_STEP_LIMIT):
        self.stacks: dict[str, list] = {t: [] for t in TYPES}
        self.stacks["exec"] = []
        self.inputs = tuple(inputs)
        self.steps = 0
        self.step_limit = step_limit

    def snapshot(self) -> dict:
        """Comparable copy of everything observable about the state."""
        return {
            "stacks": {t: list(s) for t, s in self.stacks.items()},
            "steps": self.steps,
        }

    def __eq__(self, other):
        if not isinstance(other, MachineState):
            return NotImplemented
        return self.snapshot() == other.snapshot() and self.inputs == other.inputs

    def __repr__(self):
        filled = {t: s for t, s in self.stacks.items() if s}
        return f"MachineState(steps={self.steps}, stacks={filled})"


def execute(program: tuple, inputs: Sequence[Value] = (), step_limit: int = DEFAULT_STEP_LIMIT) -> MachineState:
    """Run ``program`` to completion or until ``step_limit`` items have been executed.

    A program is a tuple of atoms: instruction names (str), literal
    ``Value``s, and nested tuples for code blocks. Popping a block pushes
    its contents back onto the exec stack and counts as one step.
    """
    state = MachineState(inputs, step_limit)
    stacks = state.stacks
    ex = stacks["exec"]
    ex.extend(reversed(program))
    fns = FUNCTIONS
    steps = 0
    while ex and steps < step_limit:
        item = ex.pop()
        steps += 1
        cls = item.__class__
        if cls is str:
            fns[item](state)
        elif cls is tuple:
            ex.extend(reversed(item))
        else:
            stacks[item[0]].append(item[1])
    state.steps = steps
    return state


def output_of(state: MachineState, output_type: str):
    """Top of the ``output_type`` stack, or ``NO_OUTPUT`` if it is empty."""
    s = state.stacks[output_type]
    return s[-1] if s else NO_OUTPUT


def run(program: tuple, inputs: Sequence[Value], output_type: str, step_limit: int = DEFAULT_STEP_LIMIT):
    """Execute and read the answer in one call; the hot path of evaluation."""
    return output_of(execute(program, inputs, step_limit), output_type)
