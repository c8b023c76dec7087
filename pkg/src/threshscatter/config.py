"""
Configuration management for ThreshScatter.
"""
import os
import logging
from typing import List, Literal, Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

logger = logging.getLogger(__name__)

load_dotenv()

# --- GRID DEFAULTS ---

DEFAULT_GRID_N = 2048
DEFAULT_R_MIN = 1e-3
DEFAULT_R_MAX = 1e3
MIN_GRID_N = 16
MAX_GRID_N = 16384

GRID_N_ENV = "THRESHSCATTER_GRID_N"

TASKS = ("constants", "kernel-check", "threshold", "probe", "representation")
OPERATORS = ("identity", "zs", "zs+correction", "rank-one", "zs1", "zs1+p")


def default_grid_n() -> int:
    """
    Grid size used when neither the config nor the command line sets one.
    The THRESHSCATTER_GRID_N environment variable (or .env entry) wins over the built-in default.
    """
    raw = os.environ.get(GRID_N_ENV, "").strip()
    if not raw:
        return DEFAULT_GRID_N
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring {GRID_N_ENV}={raw!r}: not an integer")
        return DEFAULT_GRID_N
    if not MIN_GRID_N <= value <= MAX_GRID_N:
        logger.warning(f"Ignoring {GRID_N_ENV}={value}: outside [{MIN_GRID_N}, {MAX_GRID_N}]")
        return DEFAULT_GRID_N
    return value


class GridConfig(BaseModel):
    """Log-uniform radial grid."""
    n: int = Field(default_factory=default_grid_n)
    r_min: float = DEFAULT_R_MIN
    r_max: float = DEFAULT_R_MAX

    @model_validator(mode="after")
    def _check_limits(self):
        if not MIN_GRID_N <= self.n <= MAX_GRID_N:
            raise ValueError(f"grid size must lie in [{MIN_GRID_N}, {MAX_GRID_N}], got {self.n}")
        if not 0 < self.r_min < self.r_max:
            raise ValueError("need 0 < r_min < r_max")
        return self


class ToleranceConfig(BaseModel):
    """Every tolerance a run may use. All of them are echoed into the report."""
    kernel_rtol: float = 1e-9
    laguerre_nodes: int = 200
    superposition_nodes: int = 96
    oscillation_cap: float = 1e3
    null_factor: float = 5.0
    null_cap: float = 1e-2
    moment_tol: float = 1e-6
    identity_tol: float = 1e-10
    representation_rtol: float = 1e-5
    probe_slope: float = 0.15
    probe_spread: float = 3.0
    probe_settle: float = 0.075
    cutoff_lambda0: float = 0.5


class OutputConfig(BaseModel):
    """Configuration for report file settings."""
    out_dir: str = "."
    table_csv: str = "report.csv"
    summary_json: str = "summary.json"


class RunConfig(BaseModel):
    """
    Main run configuration model.
    Validates and provides defaults for a threshscatter run file.
    """
    task: Literal["constants", "kernel-check", "threshold", "probe", "representation"]
    m: int = 3
    seed: int = 0
    grid: GridConfig = Field(default_factory=GridConfig)
    tolerances: ToleranceConfig = Field(default_factory=ToleranceConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    # task specific
    potential: Optional[str] = None
    samples: int = 50
    p: float = 4.0
    operator: str = "zs"
    scales: List[float] = Field(default_factory=lambda: [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0])
    lambda_: float = Field(default=0.5, alias="lambda")
    family: Literal["dilation", "window"] = "dilation"
    expect: Optional[Literal["bounded", "growing"]] = None

    model_config = {"populate_by_name": True}

    @field_validator("m")
    @classmethod
    def _check_dimension(cls, value: int) -> int:
        if value < 3:
            raise ValueError("dimension m must be at least 3")
        return value

    @field_validator("operator")
    @classmethod
    def _check_operator(cls, value: str) -> str:
        if value not in OPERATORS:
            raise ValueError(f"unknown operator {value!r}; expected one of {', '.join(OPERATORS)}")
        return value

    @field_validator("scales")
    @classmethod
    def _check_scales(cls, value: List[float]) -> List[float]:
        if not value or any(s <= 0 for s in value):
            raise ValueError("scales must be a non-empty list of positive numbers")
        return sorted(value)


def load_config(config_path: str) -> RunConfig:
    """
    Loads and validates a run file.
    JSON is a subset of YAML, so yaml.safe_load() reads both formats.
    """
    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f)
    except FileNotFoundError:
        raise FileNotFoundError(f"Config file not found at {config_path}")
    except yaml.YAMLError as exc:
        raise ValueError(f"Error parsing config file: {exc}")

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ValueError("Config validation failed:\n  - (root): expected a mapping")
    return validate_config(data)


def validate_config(data: dict) -> RunConfig:
    """Validates a config mapping and flattens pydantic errors into one message."""
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        errors = []
        for err in e.errors():
            loc = '.'.join(str(x) for x in err['loc'])
            msg = err['msg']
            errors.append(f"  - {loc}: {msg}")
        error_details = '\n'.join(errors)
        raise ValueError(f"Config validation failed:\n{error_details}")
