"""Config parsing and validation."""
import json
import math
from pathlib import Path

import pytest

from bbmbore.config import load_config, parse_config
from bbmbore.errors import ConfigurationError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def base():
    return {
        "pipeline": "direct",
        "grid": {"length": 40.0, "points": 128},
        "params": {"b": 0.2, "d": 0.2, "eps": 0.1},
        "solver": {"dt": 0.01, "t_end": 1.0},
    }


class TestParse:
    def test_defaults(self):
        cfg = parse_config(base())
        assert cfg.pipeline == "direct"
        assert cfg.grid.points == (128,)
        assert cfg.params.beta == 1.0
        assert cfg.init.kind == "zero" and cfg.init.noise == 0.0
        assert cfg.solver.ledger_stride == 0.05 and cfg.solver.dealias

    def test_two_dimensional(self):
        raw = base()
        raw["grid"] = {"length": [80.0, 20.0], "points": [64, 16]}
        cfg = parse_config(raw)
        assert cfg.grid.dim == 2 and cfg.grid.lengths == (80.0, 20.0)

    def test_r_infinity_and_noise(self):
        raw = base()
        raw["ledger"] = {"r": "inf", "stride": 0.1}
        raw["init"] = {"kind": "tanh", "noise": {"amplitude": 1e-6}}
        cfg = parse_config(raw)
        assert cfg.solver.r == math.inf and cfg.init.noise == 1e-6

    @pytest.mark.parametrize("path,value,field", [
        (("params", "eps"), None, "params.eps"),
        (("params", "b"), "x", "params.b"),
        (("solver", "dt"), None, "solver.dt"),
        (("solver", "dt"), -1.0, "solver.dt"),
        (("grid", "points"), None, "grid.points"),
        (("pipeline",), "bore3d", "pipeline"),
        (("solver", "dealias"), 1, "solver.dealias"),
        (("ledger", "r"), 0.5, "ledger.r"),
    ])
    def test_errors_name_field(self, path, value, field):
        raw = base()
        raw.setdefault("ledger", {})
        sec = raw
        for key in path[:-1]:
            sec = sec[key]
        if value is None:
            sec.pop(path[-1])
        else:
            sec[path[-1]] = value
        with pytest.raises(ConfigurationError) as exc:
            parse_config(raw)
        assert exc.value.field == field

    def test_missing_section(self):
        raw = base()
        del raw["params"]
        with pytest.raises(ConfigurationError) as exc:
            parse_config(raw)
        assert exc.value.field == "params"

    def test_pipeline_dimension(self):
        raw = base()
        raw["pipeline"] = "bore2d"
        with pytest.raises(ConfigurationError):
            parse_config(raw)

    def test_bad_init_kind(self):
        raw = base()
        raw["init"] = {"kind": "sawtooth"}
        with pytest.raises(ConfigurationError) as exc:
            parse_config(raw)
        assert exc.value.field == "init.kind"


class TestLoad:
    @pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.toml")))
    def test_shipped_configs_parse(self, name):
        cfg = load_config(CONFIGS / name)
        assert cfg.solver.dt > 0

    def test_json_equals_toml(self, tmp_path):
        (tmp_path / "a.json").write_text(json.dumps(base()))
        (tmp_path / "a.toml").write_text(
            'pipeline = "direct"\n[grid]\nlength = 40.0\npoints = 128\n'
            "[params]\nb = 0.2\nd = 0.2\neps = 0.1\n[solver]\ndt = 0.01\nt_end = 1.0\n")
        a, b = load_config(tmp_path / "a.json"), load_config(tmp_path / "a.toml")
        assert a == b

    def test_syntax_error_names_line(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{\n"grid": ,\n}')
        with pytest.raises(ConfigurationError, match="line 2"):
            load_config(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_config(tmp_path / "nope.toml")
