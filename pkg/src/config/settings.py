"""Configuration settings for OptionZero runs."""

from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from ..errors import ConfigurationError

SECTIONS = ("env", "model", "search", "training", "replay")


class EnvConfig(BaseModel):
    """GridWorld environment settings."""

    model_config = ConfigDict(extra="forbid")

    map_path: Path = Field(default=Path("maps/maze_11x11.txt"), description="Map file (#, ., S, G)")
    start_mode: str = Field(default="random", description="Training start placement (fixed or random)")
    decision_cap: int = Field(default=200, gt=0, description="Decisions before an unsolved episode ends")
    goal_reward: float = Field(default=200.0, description="Bonus on the primitive step reaching the goal")
    decision_penalty: float = Field(default=1.0, ge=0.0, description="Cost of one decision")

    @field_validator("start_mode")
    @classmethod
    def validate_start_mode(cls, v):
        """Validate start mode."""
        if v.lower() not in ("fixed", "random"):
            raise ValueError(f"Invalid start mode: {v}")
        return v.lower()


class ModelConfig(BaseModel):
    """Representation, dynamics and prediction network shape."""

    model_config = ConfigDict(extra="forbid")

    observation_shape: Tuple[int, int, int] = Field(default=(3, 11, 11))
    action_space_size: int = Field(default=4, gt=0)
    max_option_length: int = Field(default=9, ge=1)
    hidden_size: int = Field(default=32, gt=0, description="Hidden state dimension D")
    trunk_size: int = Field(default=64, gt=0, description="Width of every MLP hidden layer")
    stop_bias: float = Field(default=4.0, description="Initial bias on every option head's stop logit")
    dynamics_gradient_scale: float = Field(default=0.5, ge=0.0, le=1.0)
    l2_coefficient: float = Field(default=1e-4, ge=0.0, description="c in c*||theta||^2")
    value_scale: float = Field(
        default=1.0, gt=0.0, description="Value and reward heads regress targets divided by this; defaults to env.goal_reward"
    )

    @property
    def observation_size(self) -> int:
        c, h, w = self.observation_shape
        return c * h * w


class SearchConfig(BaseModel):
    """Option-aware MCTS settings."""

    model_config = ConfigDict(extra="forbid")

    simulations: int = Field(default=50, ge=1)
    c_puct: float = Field(default=1.25, gt=0.0)
    discount: float = Field(default=0.997, gt=0.0, le=1.0)
    dirichlet_alpha: float = Field(default=0.3, gt=0.0)
    dirichlet_epsilon: float = Field(default=0.3, ge=0.0, le=1.0)
    temperature: float = Field(default=1.0, ge=0.0, description="Visit softmax temperature; 0 selects argmax")
    max_option_length: int = Field(default=9, ge=1)
    execute_options: bool = Field(default=True, description="False keeps options for planning only")
    normalize_q: bool = Field(default=True, description="Min-max normalize Q inside PUCT")


class TrainConfig(BaseModel):
    """Optimizer loop settings."""

    model_config = ConfigDict(extra="forbid")

    unroll_steps: int = Field(default=5, gt=0, description="K")
    td_steps: int = Field(default=5, gt=0, description="n in the n-step return")
    iterations: int = Field(default=60, gt=0)
    steps_per_iteration: int = Field(default=200, gt=0)
    games_per_iteration: int = Field(default=20, gt=0)
    batch_size: int = Field(default=128, gt=0)
    learning_rate: float = Field(default=0.1, gt=0.0)
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)
    discount: float = Field(default=0.997, gt=0.0, le=1.0)
    max_option_length: int = Field(default=9, ge=1)
    warmup_games: int = Field(default=20, ge=1, description="Games in the buffer before the first update")
    max_grad_norm: float = Field(default=1.0, ge=0.0, description="Clip the global gradient norm; 0 disables")
    write_search_dumps: bool = Field(default=False)

    @property
    def total_steps(self) -> int:
        return self.iterations * self.steps_per_iteration


class ReplayConfig(BaseModel):
    """Prioritized replay settings."""

    model_config = ConfigDict(extra="forbid")

    capacity_games: int = Field(default=8000, gt=0)
    alpha: float = Field(default=1.0, ge=0.0)
    beta: float = Field(default=0.4, ge=0.0)
    priority_epsilon: float = Field(default=1e-6, gt=0.0)


class RunConfig(BaseSettings):
    """Complete run configuration; top-level fields may come from the environment."""

    model_config = SettingsConfigDict(
        env_prefix="OPTIONZERO_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    seed: int = Field(default=0, description="Global seed for env, noise, sampling and init")
    workers: int = Field(default=1, ge=1, description="Self-play worker threads")
    output_root: Path = Field(default=Path("runs"), description="Root of run output directories")
    run_name: str = Field(default="optionzero")
    log_level: str = Field(default="INFO")
    debug: bool = Field(default=False)
    option_length: Optional[int] = Field(default=None, ge=1, description="Sets L in every section")

    env: EnvConfig = Field(default_factory=EnvConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    search: SearchConfig = Field(default_factory=SearchConfig)
    training: TrainConfig = Field(default_factory=TrainConfig)
    replay: ReplayConfig = Field(default_factory=ReplayConfig)

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v):
        """Validate log level."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"Invalid log level: {v}")
        return v.upper()

    @model_validator(mode="after")
    def validate_sections(self):
        """Propagate L and check the sections agree with each other and with the map."""
        if self.option_length is not None:
            self.model.max_option_length = self.option_length
            self.search.max_option_length = self.option_length
            self.training.max_option_length = self.option_length
        lengths = {
            "model": self.model.max_option_length,
            "search": self.search.max_option_length,
            "training": self.training.max_option_length,
        }
        if len(set(lengths.values())) != 1:
            raise ValueError(f"max_option_length differs across sections: {lengths}")
        if self.search.discount != self.training.discount:
            raise ValueError(
                f"discount differs: search={self.search.discount} training={self.training.discount}"
            )
        if not self.env.map_path.is_file():
            raise ValueError(f"env.map_path does not exist: {self.env.map_path}")
        rows = [line for line in self.env.map_path.read_text().splitlines() if line.strip()]
        self.model.observation_shape = (3, len(rows), len(rows[0]) if rows else 0)
        if "value_scale" not in self.model.model_fields_set and self.env.goal_reward > 0:
            self.model.value_scale = self.env.goal_reward
        return self

    @property
    def option_length_value(self) -> int:
        return self.model.max_option_length

    @property
    def run_dir(self) -> Path:
        return self.output_root / self.run_name


def _coerce(raw: str) -> Any:
    """Turn a config file value into a JSON-ish Python value; pydantic does the rest."""
    value = raw.strip()
    if value.startswith("(") or value.startswith("["):
        return [v.strip() for v in value.strip("()[]").split(",") if v.strip()]
    return value


def parse_assignments(lines: Iterable[str], source: str) -> Dict[str, Any]:
    """Parse `section.key = value` lines into a nested dict, collecting every problem."""
    data: Dict[str, Any] = {}
    problems: List[str] = []
    top_level = set(RunConfig.model_fields) - set(SECTIONS)
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            problems.append(f"{source}:{lineno}: expected key = value, got {text!r}")
            continue
        key, value = (part.strip() for part in text.split("=", 1))
        if "." in key:
            section, field = key.split(".", 1)
            if section not in SECTIONS:
                problems.append(f"{source}:{lineno}: unknown section {section!r} in key {key!r}")
                continue
            data.setdefault(section, {})[field] = _coerce(value)
        elif key in top_level:
            data[key] = _coerce(value)
        else:
            problems.append(f"{source}:{lineno}: unknown key {key!r}")
    if problems:
        raise ConfigurationError("Invalid configuration", problems=problems)
    return data


def _merge(base: Dict[str, Any], extra: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = {**merged[key], **value}
        else:
            merged[key] = value
    return merged


def load_config(path: Optional[Path] = None, overrides: Optional[List[str]] = None) -> RunConfig:
    """Load a key = value config file, apply --set overrides and validate everything at once."""
    data: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError("Config file not found", problems=[str(path)])
        data = parse_assignments(path.read_text().splitlines(), str(path))
    if overrides:
        data = _merge(data, parse_assignments(overrides, "--set"))
    try:
        return RunConfig(**data)
    except ValidationError as exc:
        problems = [
            f"{'.'.join(str(p) for p in err['loc']) or '<config>'}: {err['msg']}" for err in exc.errors()
        ]
        raise ConfigurationError("Invalid configuration", problems=problems) from exc


def dump_config(config: RunConfig) -> str:
    """Render the effective configuration in the same key = value format."""
    lines = []
    for key in ("seed", "workers", "output_root", "run_name", "log_level", "debug"):
        lines.append(f"{key} = {getattr(config, key)}")
    for section in SECTIONS:
        for key, value in getattr(config, section).model_dump().items():
            if isinstance(value, (tuple, list)):
                value = "(" + ", ".join(str(v) for v in value) + ")"
            lines.append(f"{section}.{key} = {value}")
    return "\n".join(lines) + "\n"
