import math

import numpy as np
import pytest

from hartree5.config import COMMANDS, ScenarioConfig, load_config, parse_config
from hartree5.errors import ConfigError
from hartree5.spectral_radial import gaussian, save_field


def test_defaults():
    cfg = parse_config("")
    assert cfg == ScenarioConfig()
    assert cfg.grid.n == 4096 and cfg.grid.r_max == 40.0
    assert cfg.initial.kind == "gaussian"
    assert cfg.dispersive.width == 0.5
    assert cfg.bernstein.exps[2] == (1.0, math.inf, 0.0)


def test_full_parse():
    text = """
[run]
command = evolve   # inline comment
seed = 7
[grid]
n = 1023
r_max = 20
[solver]
dt = 2e-3
t_end = 0.5
record_fields_every = 10
monitor_virial = no
[initial]
kind = gaussian
amplitude = 0.6
chirp = 0.25
[scan]
scales = 0.3, 0, 0.2
[bernstein]
exps = 2 4 0; 1 inf 0
kind = low
"""
    cfg = parse_config(text)
    assert cfg.command == "evolve" and cfg.seed == 7
    assert (cfg.grid.n, cfg.grid.r_max) == (1023, 20.0)
    assert cfg.solver.dt == 2e-3 and cfg.solver.record_fields_every == 10
    assert cfg.solver.monitor_virial is False
    assert cfg.initial.amplitude == 0.6 and cfg.initial.chirp == 0.25
    assert cfg.scan.scales == (0.0, 0.2, 0.3)
    assert cfg.bernstein.exps == ((2.0, 4.0, 0.0), (1.0, math.inf, 0.0))


@pytest.mark.parametrize(
    "text,key,line",
    [
        ("[solver]\ndt = -1\n", "dt", 2),
        ("[solver]\nt_end = 1\n\ndtt = 1\n", "dtt", 4),
        ("[grid]\nn = 4096\n[colour]\nx = 1\n", "colour", 3),
        ("[grid]\nn = twelve\n", "n", 2),
        ("[grid]\nn = 2\n", "n", 2),
        ("[grid]\nr_max = -3\n", "r_max", 2),
        ("[run]\ncommand = fly\n", "command", 2),
        ("[run]\nthreads = 0\n", "threads", 2),
        ("[initial]\nkind = vortex\n", "kind", 2),
        ("[initial]\nwidth = 0\n", "width", 2),
        ("[scan]\nscales = 0.1, -0.2\n", "scales", 2),
        ("[virial]\nmethod = guess\n", "method", 2),
        ("[dispersive]\nt_lo = 0.5\n", "t_lo", 2),
        ("[dispersive]\nsamples = 4\n", "samples", 2),
        ("[bernstein]\nexps = 4 2 0\n", "exps", 2),
        ("[ground_state]\ntol = 0\n", "tol", 2),
        ("[solver]\ndt = 1e-3\ndt = 2e-3\n", "dt", 3),
    ],
)
def test_errors_name_key_and_line(text, key, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == key
    assert info.value.line == line
    assert f"key '{key}'" in str(info.value)
    assert info.value.exit_code == 2


def test_key_outside_section():
    with pytest.raises(ConfigError) as info:
        parse_config("dt = 1\n")
    assert info.value.line == 1


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")


def test_relative_field_path(tmp_path, small_grid):
    save_field(gaussian(small_grid), tmp_path / "u0.field")
    ini = tmp_path / "run.ini"
    ini.write_text("[initial]\nkind = file\npath = u0.field\n")
    cfg = load_config(ini)
    assert cfg.initial.path == str(tmp_path / "u0.field")
    assert cfg.source == str(ini)


def test_missing_field_file(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[initial]\nkind = file\npath = nowhere.field\n")
    with pytest.raises(ConfigError) as info:
        load_config(ini)
    assert info.value.key == "path"


def test_commands_listed():
    assert set(COMMANDS) >= {
        "ground-state",
        "soliton",
        "evolve",
        "threshold-scan",
        "virial-check",
        "dispersive-check",
        "bernstein-check",
    }


def test_config_is_frozen():
    cfg = parse_config("[solver]\ndt = 0.01\n")
    with pytest.raises(AttributeError):
        cfg.seed = 3
    assert np.isclose(cfg.solver.dt, 0.01)
