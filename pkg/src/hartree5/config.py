"""Scenario configuration: INI-style ``key = value`` text with sections.

Every section and key is optional; unknown sections or keys are errors so a
misspelling never silently falls back to a default. Errors carry the key and
the line number they were found on.

Schema (defaults in parentheses)::

    [run]          command, seed (0), threads (1), out
    [grid]         n (4096), r_max (40)                       evolution grid
    [ground_state] n (32767), r_max (1600), tol (1e-10), residual_gate (1e-9),
                   max_iter (5000), seed_width (1), stall_window (50),
                   doubling_check (true), corpus_size (50)
    [soliton]      n (4096), r_max (40)
    [solver]       dt, t_end, adapt, dt_min, dt_max, monitor_stride, virial_R,
                   mass_R, record_fields_every, c_cfl, mass_tolerance,
                   blowup_factor, nyquist_fraction, monitor_virial
                   (see SolverConfig)
    [initial]      kind (gaussian | ground_state | soliton | file),
                   width (1), amplitude (1), chirp (0), scale (1), path
    [scan]         scales (comma list), window (number of late snapshots)
    [virial]       method (newton | quadrature), angular_order (64)
    [dispersive]   n (8191), r_max (600), width (0.5), amplitude (1),
                   t_lo (1), t_hi (30), samples (16)
    [bernstein]    n (131071), r_max (201.0619...), field (broadband | gaussian),
                   exps ("2 4 0; 2 2 0.5; 1 inf 0"), kind (band | low)
"""

import configparser
import math
import os
import re
from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError
from .evolution import SolverConfig
from .ground_state import SolverOptions
from .spectral_radial import RadialGrid

COMMANDS = (
    "ground-state",
    "soliton",
    "evolve",
    "threshold-scan",
    "virial-check",
    "dispersive-check",
    "bernstein-check",
)
INITIAL_KINDS = ("gaussian", "ground_state", "soliton", "file")
BERNSTEIN_N = 131071
BERNSTEIN_RHO_MAX = 2048.0


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_int(text):
    t = text.strip().lower()
    return None if t in ("", "none") else int(t)


def _float_list(text):
    return tuple(float(x) for x in text.replace(",", " ").split())


def _exps(text):
    out = []
    for part in text.split(";"):
        items = part.split()
        if not items:
            continue
        if len(items) != 3:
            raise ValueError(f"exponent triple needs 'p q s', got {part.strip()!r}")
        out.append(tuple(float(x) for x in items))
    return tuple(out)


_SOLVER_TYPES = {
    "dt": float,
    "t_end": float,
    "adapt": _bool,
    "dt_min": float,
    "dt_max": float,
    "monitor_stride": int,
    "virial_R": float,
    "mass_R": float,
    "record_fields_every": _optional_int,
    "c_cfl": float,
    "mass_tolerance": float,
    "blowup_factor": float,
    "nyquist_fraction": float,
    "monitor_virial": _bool,
}

SCHEMA = {
    "run": {"command": str, "seed": int, "threads": int, "out": str},
    "grid": {"n": int, "r_max": float},
    "ground_state": {
        "n": int,
        "r_max": float,
        "tol": float,
        "residual_gate": float,
        "max_iter": int,
        "seed_width": float,
        "stall_window": int,
        "doubling_check": _bool,
        "corpus_size": int,
    },
    "soliton": {"n": int, "r_max": float},
    "solver": _SOLVER_TYPES,
    "initial": {
        "kind": str,
        "width": float,
        "amplitude": float,
        "chirp": float,
        "scale": float,
        "path": str,
    },
    "scan": {"scales": _float_list, "window": int},
    "virial": {"method": str, "angular_order": int},
    "dispersive": {
        "n": int,
        "r_max": float,
        "width": float,
        "amplitude": float,
        "t_lo": float,
        "t_hi": float,
        "samples": int,
    },
    "bernstein": {"n": int, "r_max": float, "field": str, "exps": _exps, "kind": str},
}


@dataclass(frozen=True)
class InitialData:
    kind: str = "gaussian"
    width: float = 1.0
    amplitude: float = 1.0
    chirp: float = 0.0
    scale: float = 1.0
    path: str = ""


@dataclass(frozen=True)
class ScanOptions:
    scales: tuple = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
    window: int = 6


@dataclass(frozen=True)
class VirialOptions:
    method: str = "newton"
    angular_order: int = 64


@dataclass(frozen=True)
class DispersiveOptions:
    n: int = 8191
    r_max: float = 600.0
    width: float = 0.5
    amplitude: float = 1.0
    t_lo: float = 1.0
    t_hi: float = 30.0
    samples: int = 16


@dataclass(frozen=True)
class BernsteinOptions:
    n: int = BERNSTEIN_N
    r_max: float = BERNSTEIN_N * math.pi / BERNSTEIN_RHO_MAX
    field: str = "broadband"
    exps: tuple = ((2.0, 4.0, 0.0), (2.0, 2.0, 0.5), (1.0, math.inf, 0.0))
    kind: str = "band"


@dataclass(frozen=True)
class ScenarioConfig:
    command: str = None
    seed: int = 0
    threads: int = 1
    out: str = "out"
    grid: RadialGrid = RadialGrid(4096, 40.0)
    gs_grid: RadialGrid = RadialGrid(32767, 1600.0)
    gs_options: SolverOptions = SolverOptions()
    doubling_check: bool = True
    corpus_size: int = 50
    soliton_grid: RadialGrid = RadialGrid(4096, 40.0)
    solver: SolverConfig = SolverConfig()
    initial: InitialData = InitialData()
    scan: ScanOptions = ScanOptions()
    virial: VirialOptions = VirialOptions()
    dispersive: DispersiveOptions = DispersiveOptions()
    bernstein: BernsteinOptions = BernsteinOptions()
    source: str = field(default=None, compare=False)


def _line_index(text):
    """Map (section, key) and section headers to 1-based line numbers."""
    where = {}
    section = None
    for i, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            where.setdefault((section, None), i)
            continue
        m = re.match(r"([^=:]+?)\s*[=:]", s)
        if m and section is not None:
            where.setdefault((section, m.group(1).strip()), i)
    return where


def parse_config(text, source="<string>", base_dir=None) -> ScenarioConfig:
    """Parse configuration text into a validated :class:`ScenarioConfig`.

    A relative ``[initial] path`` is resolved against ``base_dir`` when given.
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key in [{exc.section}]", key=exc.option, line=exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError("duplicate section", key=exc.section, line=exc.lineno) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside any section", line=exc.lineno) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("unparseable line", line=line) from None

    lines = _line_index(text)
    values = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError("unknown section", key=section, line=lines.get((section, None)))
        for key, raw in parser.items(section):
            line = lines.get((section, key))
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key in [{section}]", key=key, line=line)
            try:
                values[(section, key)] = (SCHEMA[section][key](raw), line)
            except ValueError as exc:
                raise ConfigError(f"bad value {raw!r}: {exc}", key=key, line=line) from None
    if base_dir is not None and ("initial", "path") in values:
        raw, line = values[("initial", "path")]
        if raw and not os.path.isabs(raw):
            values[("initial", "path")] = (os.path.join(base_dir, raw), line)
    return _build(values, source)


def load_config(path) -> ScenarioConfig:
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path) as fh:
        text = fh.read()
    return parse_config(text, source=str(path), base_dir=os.path.dirname(os.path.abspath(path)))


def _get(values, section, key, default):
    return values.get((section, key), (default, None))[0]


def _line(values, section, key):
    return values.get((section, key), (None, None))[1]


def _grid(values, section, default):
    n = _get(values, section, "n", default.n)
    r_max = _get(values, section, "r_max", default.r_max)
    try:
        return RadialGrid(n, r_max)
    except ValueError as exc:
        bad = "n" if not (isinstance(n, int) and n >= 4) else "r_max"
        raise ConfigError(str(exc), key=bad, line=_line(values, section, bad)) from None


def _dataclass_from(values, section, cls, default):
    kw = {}
    for f in fields(cls):
        if (section, f.name) in values:
            kw[f.name] = values[(section, f.name)][0]
    return replace(default, **kw) if kw else default


def _check_initial(initial, values):
    if initial.kind not in INITIAL_KINDS:
        raise ConfigError(
            f"initial kind must be one of {', '.join(INITIAL_KINDS)}",
            key="kind",
            line=_line(values, "initial", "kind"),
        )
    if initial.kind == "file" and not os.path.isfile(initial.path):
        raise ConfigError(f"initial data file not found: {initial.path!r}", key="path", line=_line(values, "initial", "path"))
    if initial.kind == "gaussian" and not initial.width > 0:
        raise ConfigError("width must be positive", key="width", line=_line(values, "initial", "width"))


def _build(values, source):
    cfg = ScenarioConfig(source=source)
    command = _get(values, "run", "command", None)
    if command is not None and command not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}", key="command", line=_line(values, "run", "command"))
    threads = _get(values, "run", "threads", 1)
    if threads < 1:
        raise ConfigError("threads must be >= 1", key="threads", line=_line(values, "run", "threads"))

    solver_kw = {k: v for (s, k), (v, _) in values.items() if s == "solver"}
    try:
        solver = SolverConfig(**{**SolverConfig().__dict__, **solver_kw})
    except ConfigError as exc:
        raise ConfigError(str(exc).split(" (key")[0], key=exc.key, line=_line(values, "solver", exc.key)) from None

    gs_kw = {
        k: v
        for (s, k), (v, _) in values.items()
        if s == "ground_state" and k in {f.name for f in fields(SolverOptions)}
    }
    gs_options = replace(SolverOptions(), **gs_kw)
    for key in ("tol", "residual_gate", "seed_width"):
        if not getattr(gs_options, key) > 0:
            raise ConfigError("must be positive", key=key, line=_line(values, "ground_state", key))
    for key in ("max_iter", "stall_window"):
        if getattr(gs_options, key) < 1:
            raise ConfigError("must be >= 1", key=key, line=_line(values, "ground_state", key))

    initial = _dataclass_from(values, "initial", InitialData, InitialData())
    _check_initial(initial, values)
    scan = _dataclass_from(values, "scan", ScanOptions, ScanOptions())
    if any(c < 0 for c in scan.scales):
        raise ConfigError("scales must be nonnegative", key="scales", line=_line(values, "scan", "scales"))
    scan = replace(scan, scales=tuple(sorted(scan.scales)))
    virial = _dataclass_from(values, "virial", VirialOptions, VirialOptions())
    if virial.method not in ("newton", "quadrature"):
        raise ConfigError("method must be newton or quadrature", key="method", line=_line(values, "virial", "method"))
    disp = _dataclass_from(values, "dispersive", DispersiveOptions, DispersiveOptions())
    if disp.t_lo < 1 or disp.t_hi <= disp.t_lo:
        raise ConfigError("need 1 <= t_lo < t_hi", key="t_lo", line=_line(values, "dispersive", "t_lo"))
    if disp.samples < 8:
        raise ConfigError("need at least 8 samples", key="samples", line=_line(values, "dispersive", "samples"))
    bern = _dataclass_from(values, "bernstein", BernsteinOptions, BernsteinOptions())
    if bern.field not in ("broadband", "gaussian"):
        raise ConfigError("field must be broadband or gaussian", key="field", line=_line(values, "bernstein", "field"))
    if bern.kind not in ("band", "low"):
        raise ConfigError("kind must be band or low", key="kind", line=_line(values, "bernstein", "kind"))
    for p, q, _ in bern.exps:
        if not 1 <= p <= q:
            raise ConfigError("need 1 <= p <= q", key="exps", line=_line(values, "bernstein", "exps"))

    return replace(
        cfg,
        command=command,
        seed=_get(values, "run", "seed", 0),
        threads=threads,
        out=_get(values, "run", "out", cfg.out),
        grid=_grid(values, "grid", cfg.grid),
        gs_grid=_grid(values, "ground_state", cfg.gs_grid),
        gs_options=gs_options,
        doubling_check=_get(values, "ground_state", "doubling_check", True),
        corpus_size=_get(values, "ground_state", "corpus_size", 50),
        soliton_grid=_grid(values, "soliton", cfg.soliton_grid),
        solver=solver,
        initial=initial,
        scan=scan,
        virial=virial,
        dispersive=disp,
        bernstein=bern,
    )
