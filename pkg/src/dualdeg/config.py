"""Run configuration shared by the CLI and the acceptance battery."""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from fractions import Fraction

from .boolfn import DEFAULT_ARITY_CAP
from .errors import InvalidParams
from .lp import SolverMode
from .pattern import MATRIX_CAP
from .rational import as_fraction, fmt

ENV_VAR = "DUALDEG_CONFIG"


@dataclass(frozen=True)
class RunConfig:
    solver_mode: SolverMode | None = None  # None lets the solver pick by problem size
    cap_arity: int = DEFAULT_ARITY_CAP
    matrix_cap: int = MATRIX_CAP
    entropy_width: Fraction = Fraction(1, 2 ** 20)
    threads: int = 1
    seed: int = 2024
    emit: str | None = None
    quick: bool = False

    def __post_init__(self):
        if self.solver_mode is not None:
            object.__setattr__(self, "solver_mode", SolverMode(self.solver_mode))
        object.__setattr__(self, "entropy_width", as_fraction(self.entropy_width))
        for name in ("cap_arity", "matrix_cap", "threads"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
                raise InvalidParams(f"{name} must be a positive integer, got {v!r}")
        if self.entropy_width <= 0:
            raise InvalidParams("entropy_width must be positive")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise InvalidParams(f"seed must be an integer, got {self.seed!r}")

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def to_json(self) -> dict:
        out = asdict(self)
        out["solver_mode"] = None if self.solver_mode is None else self.solver_mode.value
        out["entropy_width"] = fmt(self.entropy_width)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise InvalidParams(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)


def load_config(path: str | None = None) -> RunConfig:
    """Config from `path`, else from the file named by DUALDEG_CONFIG, else defaults."""
    path = path or os.environ.get(ENV_VAR)
    if not path:
        return RunConfig()
    with open(path) as fh:
        return RunConfig.from_json(json.load(fh))
