"""Experiment configuration: one INI file per experiment arm."""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, replace
from pathlib import Path

from ..cases import Mode, VariantConfig
from ..engine import DESK_BUDGET, DESK_POPULATION, EngineConfig
from ..problems import ProblemSpec, get_problem
from ..vm import ConfigurationError

PRESETS = {
    "desk": {"population_size": DESK_POPULATION, "budget": DESK_BUDGET},
    # full scale: population 1000 and the problem's own budget
    "full": {"population_size": 1000, "budget": None},
}

_EXPERIMENT_KEYS = {
    "arm", "problem", "preset", "seeds", "population_size", "budget", "umad_rate", "step_limit",
    "simplification_steps", "max_generations", "data_seed", "train_size", "test_size", "dataset",
}
_VARIANT_KEYS = {"variant", "q", "d", "cap", "initial_active_size", "random_addition", "downsample_size"}


@dataclass(frozen=True)
class ExperimentConfig:
    arm: str
    problem: ProblemSpec
    engine: EngineConfig
    preset: str = "desk"
    seeds: tuple[int, ...] = ()
    data_seed: int = 0
    train_size: int | None = None
    test_size: int | None = None
    dataset: Path | None = None

    @property
    def variant_name(self) -> str:
        v = self.engine.variant
        if v.mode is Mode.THRESHOLD:
            return f"threshold(q={v.q:g})"
        if v.mode is Mode.GENERATION:
            return f"generation(d={v.d})"
        if v.mode is Mode.CAPPED:
            return f"capped(cap={v.cap},d={v.d})"
        if v.mode is Mode.DOWNSAMPLED:
            return f"downsampled({v.downsample_size})"
        if v.mode is Mode.STATIC:
            return f"static({v.initial_size})"
        return v.mode.value

    def with_seeds(self, seeds) -> "ExperimentConfig":
        return replace(self, seeds=validate_seeds(seeds))


def parse_seeds(text: str) -> tuple[int, ...]:
    """``"0..9"`` (inclusive), ``"1,4,7"``, or a mix such as ``"0..2,10"``."""
    seeds: list[int] = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        m = re.fullmatch(r"(-?\d+)\s*\.\.\s*(-?\d+)", part)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            if hi < lo:
                raise ConfigurationError(f"empty seed range {part!r}")
            seeds.extend(range(lo, hi + 1))
        else:
            try:
                seeds.append(int(part))
            except ValueError:
                raise ConfigurationError(f"bad seed {part!r}") from None
    return validate_seeds(seeds)


def validate_seeds(seeds) -> tuple[int, ...]:
    seeds = tuple(int(s) for s in seeds)
    if len(set(seeds)) != len(seeds):
        raise ConfigurationError("seeds must be distinct")
    if any(s < 0 for s in seeds):
        raise ConfigurationError("seeds must be non-negative")
    return seeds


def _get(section, key, conv, default):
    if key not in section:
        return default
    raw = section[key].strip()
    try:
        return conv(raw)
    except ValueError:
        raise ConfigurationError(f"bad value for {key}: {raw!r}") from None


def _bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(raw)


def _budget(raw: str):
    return None if raw.lower() in ("problem", "none") else int(raw.replace("_", ""))


def _opt_int(raw: str):
    return None if raw.lower() == "none" else int(raw.replace("_", ""))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
    return config_from_parser(parser, default_arm=path.stem, base=path.parent)


def config_from_parser(parser: configparser.ConfigParser, default_arm: str = "arm",
                       base: Path | None = None) -> ExperimentConfig:
    unknown_sections = set(parser.sections()) - {"experiment", "variant"}
    if unknown_sections:
        raise ConfigurationError(f"unknown config sections: {sorted(unknown_sections)}")
    if not parser.has_section("experiment"):
        raise ConfigurationError("config needs an [experiment] section")
    exp = parser["experiment"]
    var = parser["variant"] if parser.has_section("variant") else {}
    for keys, sec, name in ((_EXPERIMENT_KEYS, exp, "experiment"), (_VARIANT_KEYS, var, "variant")):
        extra = set(sec) - keys
        if extra:
            raise ConfigurationError(f"unknown keys in [{name}]: {sorted(extra)}")

    if "problem" not in exp:
        raise ConfigurationError("[experiment] needs a problem")
    problem = get_problem(exp["problem"])
    preset = exp.get("preset", "desk").strip().lower()
    if preset not in PRESETS:
        raise ConfigurationError(f"unknown preset {preset!r}; known: {sorted(PRESETS)}")
    defaults = PRESETS[preset]

    try:
        mode = Mode(str(var.get("variant", "standard")).strip().lower())
    except ValueError:
        raise ConfigurationError(f"unknown variant {var.get('variant')!r}") from None
    train_size = _get(exp, "train_size", _opt_int, None)
    if str(var.get("initial_active_size", "")).strip().lower() == "all":
        # the full-training-set baseline
        initial = train_size or problem.train_size
    else:
        initial = _get(var, "initial_active_size", int, 10)
    variant = VariantConfig(
        mode=mode,
        q=_get(var, "q", float, 1.0),
        d=_get(var, "d", int, 50),
        cap=_get(var, "cap", _opt_int, None),
        initial_size=initial,
        random_addition=_get(var, "random_addition", _bool, False),
        downsample_size=_get(var, "downsample_size", int, 10),
    )
    engine = EngineConfig(
        population_size=_get(exp, "population_size", int, defaults["population_size"]),
        budget=_get(exp, "budget", _budget, defaults["budget"]),
        umad_rate=_get(exp, "umad_rate", float, 0.09),
        variant=variant,
        simplification_steps=_get(exp, "simplification_steps", int, 1000),
        step_limit=_get(exp, "step_limit", _opt_int, None),
        max_generations=_get(exp, "max_generations", _opt_int, None),
    )
    engine.validate()

    dataset = None
    if "dataset" in exp:
        dataset = Path(exp["dataset"].strip())
        if base is not None and not dataset.is_absolute():
            dataset = base / dataset
    seeds = parse_seeds(exp["seeds"]) if "seeds" in exp else ()
    arm = exp.get("arm", default_arm).strip()
    if not arm or "/" in arm or arm.startswith("."):
        raise ConfigurationError(f"bad arm name {arm!r}")
    return ExperimentConfig(
        arm=arm,
        problem=problem,
        engine=engine,
        preset=preset,
        seeds=seeds,
        data_seed=_get(exp, "data_seed", int, 0),
        train_size=train_size,
        test_size=_get(exp, "test_size", _opt_int, None),
        dataset=dataset,
    )
