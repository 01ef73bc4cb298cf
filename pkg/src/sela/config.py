"""Flat `key = value` experiment configuration.

Lines hold one assignment each; `#` starts a comment. Unknown keys are
rejected with their line number so typos fail fast. Omitted keys fall back
to the published defaults; the adaptation budget default depends on the
world (10 for the point robot, 15 for the walker).
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Optional

from .mission import Method

WORLDS = ("point_robot", "segment_walker")
DAMAGE_KINDS = ("none", "angle_offset", "frozen_joint")
KERNEL_FAMILIES = ("squared_exponential", "exponential")

# World-dependent default for max_adapt_iterations.
ADAPT_ITERATIONS_BY_WORLD = {"point_robot": 10, "segment_walker": 15}


class ConfigError(ValueError):
    """Malformed, unknown, or out-of-range configuration input."""


@dataclass(frozen=True)
class ExperimentConfig:
    world: str
    methods: tuple[Method, ...] = (Method.SELA,)
    replicates: int = 1
    base_seed: int = 0
    damage: str = "none"
    damage_offset: float = 0.5
    damage_joint: int = 0
    noise_variance: float = 0.01
    goal_x: float = 2.0
    goal_y: float = 2.0
    epsilon_goal: float = 0.1
    alpha: float = 0.05
    kernel_family: str = "squared_exponential"
    kernel_sigma: float = 0.1
    gp_noise: float = 0.001
    max_adapt_iterations: Optional[int] = None   # None: world default
    epsilon_model: float = 0.01
    babble_max: int = 15
    uncertainty_iterations: int = 15
    episodic_success_projection: float = 0.09
    drop_window: int = 3
    drop_threshold: float = 0.15
    lookahead_cells: int = 2
    cell_size: float = 0.1
    planner_margin: float = 1.0
    step_cap: int = 500
    candidate_grid: int = 360
    archive_path: Optional[str] = None
    archive_budget: int = 50000
    archive_grid: int = 20
    archive_mutation_sigma: float = 0.2
    archive_init_batch: Optional[int] = None

    def adapt_iterations(self) -> int:
        if self.max_adapt_iterations is not None:
            return self.max_adapt_iterations
        return ADAPT_ITERATIONS_BY_WORLD[self.world]

    def effective_dict(self) -> dict:
        """Every knob with defaults resolved, for dumping and comparison."""
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["max_adapt_iterations"] = self.adapt_iterations()
        out["methods"] = tuple(m.value for m in self.methods)
        return out


def _parse_int(value: str, key: str, line_no: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"line {line_no}: key '{key}' expects an integer, got {value!r}") from None


def _parse_float(value: str, key: str, line_no: int) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"line {line_no}: key '{key}' expects a number, got {value!r}") from None


def _parse_choice(value: str, key: str, line_no: int, choices) -> str:
    if value not in choices:
        raise ConfigError(
            f"line {line_no}: key '{key}' expects one of {', '.join(choices)}, got {value!r}"
        )
    return value


def _parse_methods(value: str, line_no: int) -> tuple[Method, ...]:
    names = [part.strip() for part in value.split(",") if part.strip()]
    if not names:
        raise ConfigError(f"line {line_no}: key 'methods' expects at least one method")
    methods = []
    for name in names:
        try:
            methods.append(Method(name))
        except ValueError:
            known = ", ".join(m.value for m in Method)
            raise ConfigError(
                f"line {line_no}: unknown method {name!r}, expected one of {known}"
            ) from None
    return tuple(methods)


_INT_KEYS = {
    "replicates",
    "base_seed",
    "damage_joint",
    "max_adapt_iterations",
    "babble_max",
    "uncertainty_iterations",
    "drop_window",
    "lookahead_cells",
    "step_cap",
    "candidate_grid",
    "archive_budget",
    "archive_grid",
    "archive_init_batch",
}

_FLOAT_KEYS = {
    "damage_offset",
    "noise_variance",
    "goal_x",
    "goal_y",
    "epsilon_goal",
    "alpha",
    "kernel_sigma",
    "gp_noise",
    "epsilon_model",
    "episodic_success_projection",
    "drop_threshold",
    "cell_size",
    "planner_margin",
    "archive_mutation_sigma",
}

_KNOWN_KEYS = (
    {"world", "methods", "damage", "kernel_family", "archive_path"}
    | _INT_KEYS
    | _FLOAT_KEYS
)

# (key, bound, inclusive) checked after parsing.
_LOWER_BOUNDS = [
    ("replicates", 1, True),
    ("noise_variance", 0.0, True),
    ("epsilon_goal", 0.0, False),
    ("alpha", 0.0, True),
    ("kernel_sigma", 0.0, False),
    ("gp_noise", 0.0, True),
    ("max_adapt_iterations", 1, True),
    ("epsilon_model", 0.0, False),
    ("babble_max", 1, True),
    ("uncertainty_iterations", 1, True),
    ("drop_window", 1, True),
    ("drop_threshold", 0.0, False),
    ("lookahead_cells", 1, True),
    ("cell_size", 0.0, False),
    ("planner_margin", 0.0, True),
    ("step_cap", 1, True),
    ("candidate_grid", 1, True),
    ("archive_budget", 1, True),
    ("archive_grid", 1, True),
    ("archive_mutation_sigma", 0.0, False),
    ("archive_init_batch", 1, True),
    ("damage_joint", 0, True),
]


def _validate(config: ExperimentConfig) -> ExperimentConfig:
    for key, bound, inclusive in _LOWER_BOUNDS:
        value = getattr(config, key)
        if value is None:
            continue
        ok = value >= bound if inclusive else value > bound
        if not ok:
            relation = "at least" if inclusive else "greater than"
            raise ConfigError(f"key '{key}' must be {relation} {bound}, got {value}")
    return config


def parse_config(text: str) -> ExperimentConfig:
    """Parse configuration text into an ExperimentConfig with defaults filled in."""
    assigned: dict = {}
    seen_lines: dict[str, int] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or not key:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {raw.strip()!r}")
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {line_no}: unknown key '{key}'")
        if key in seen_lines:
            raise ConfigError(
                f"line {line_no}: key '{key}' already set on line {seen_lines[key]}"
            )
        seen_lines[key] = line_no
        if key == "world":
            assigned[key] = _parse_choice(value, key, line_no, WORLDS)
        elif key == "methods":
            assigned[key] = _parse_methods(value, line_no)
        elif key == "damage":
            assigned[key] = _parse_choice(value, key, line_no, DAMAGE_KINDS)
        elif key == "kernel_family":
            assigned[key] = _parse_choice(value, key, line_no, KERNEL_FAMILIES)
        elif key == "archive_path":
            assigned[key] = value
        elif key in _INT_KEYS:
            assigned[key] = _parse_int(value, key, line_no)
        else:
            assigned[key] = _parse_float(value, key, line_no)
    if "world" not in assigned:
        raise ConfigError("missing required key 'world'")
    return _validate(ExperimentConfig(**assigned))


def parse_config_file(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config(handle.read())


def with_overrides(config: ExperimentConfig, **changes) -> ExperimentConfig:
    return _validate(replace(config, **changes))
