from .instructions import (
    CATALOG_VERSION,
    INT_MAX,
    INT_MIN,
    MAX_SIZE,
    OPENS,
    REGISTRY,
    TYPES,
    ConfigurationError,
    Value,
    instruction_catalog,
)
from .interpreter import DEFAULT_STEP_LIMIT, NO_OUTPUT, MachineState, execute, output_of, run

__all__ = [
    "CATALOG_VERSION",
    "ConfigurationError",
    "DEFAULT_STEP_LIMIT",
    "INT_MAX",
    "INT_MIN",
    "MAX_SIZE",
    "MachineState",
    "NO_OUTPUT",
    "OPENS",
    "REGISTRY",
    "TYPES",
    "Value",
    "execute",
    "instruction_catalog",
    "output_of",
    "run",
]
