import json
from fractions import Fraction

import pytest

from dualdeg.config import ENV_VAR, RunConfig, load_config
from dualdeg.errors import InvalidParams
from dualdeg.lp import SolverMode


def test_defaults():
    cfg = RunConfig()
    assert cfg.seed == 2024 and cfg.threads == 1 and cfg.solver_mode is None
    assert cfg.entropy_width == Fraction(1, 2 ** 20)


@pytest.mark.parametrize("kw", [{"cap_arity": 0}, {"threads": -1}, {"matrix_cap": True},
                                {"entropy_width": 0}, {"seed": "7"}, {"seed": 1.5}])
def test_validation(kw):
    with pytest.raises(InvalidParams):
        RunConfig(**kw)


def test_overrides_ignore_none():
    cfg = RunConfig().with_overrides(seed=5, threads=None)
    assert cfg.seed == 5 and cfg.threads == 1


def test_json_round_trip():
    cfg = RunConfig(solver_mode=SolverMode.EXACT, entropy_width=Fraction(1, 1024), quick=True)
    obj = json.loads(json.dumps(cfg.to_json()))
    assert RunConfig.from_json(obj) == cfg
    with pytest.raises(InvalidParams):
        RunConfig.from_json({"colour": "red"})


def test_load_config(tmp_path, monkeypatch):
    monkeypatch.delenv(ENV_VAR, raising=False)
    assert load_config() == RunConfig()
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"seed": 3, "entropy_width": "1/64"}))
    assert load_config(str(path)).entropy_width == Fraction(1, 64)
    monkeypatch.setenv(ENV_VAR, str(path))
    assert load_config().seed == 3
