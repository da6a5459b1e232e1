"""Run specification and its plain-text configuration format.

The file format is flat key-value text with sections, parsed by
:mod:`configparser`; see README for the full grammar.  Required sections:
[run] (model, scenario, t_end), [grid] (dim, n) and [physics] (nu, eta).
"""

import configparser
from dataclasses import dataclass, field

from hallmhd.diagnostics import DiagnosticsOptions
from hallmhd.integrate import StepperConfig
from hallmhd.models import PhysParams
from hallmhd.spectral import PeriodicGrid, TWO_PI


class ConfigError(ValueError):
    """Missing or malformed configuration entries (message names the field)."""


@dataclass
class RunSpec:
    model: str
    grid: PeriodicGrid
    params: PhysParams
    stepper: StepperConfig
    scenario: str
    scenario_params: dict = field(default_factory=dict)
    seed: int = 0
    diagnostics: DiagnosticsOptions = field(default_factory=DiagnosticsOptions)
    epsilon: float = 1e-3
    csv_path: str = "diagnostics.csv"
    jsonl_path: str | None = None
    summary_path: str = "summary.txt"


def _coerce(raw: str):
    raw = raw.strip()
    if "," in raw:
        return tuple(_coerce(part) for part in raw.split(","))
    lowered = raw.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def _require(cp, section: str, key: str) -> str:
    try:
        return cp.get(section, key)
    except (configparser.NoSectionError, configparser.NoOptionError):
        raise ConfigError(f"missing required field [{section}] {key}") from None


def load_run_spec(path: str, overrides=()) -> RunSpec:
    """Parse a RunSpec from a configuration file.

    ``overrides`` are "section.key=value" strings applied on top of the
    file, so every field remains reachable from the command line.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read configuration file {path!r}")
    for item in overrides:
        key_part, sep, value = item.partition("=")
        section, dot, key = key_part.partition(".")
        if not (sep and dot and section and key):
            raise ConfigError(
                f"override {item!r} must look like section.key=value")
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, key, value)
    if not cp.sections():
        raise ConfigError("empty configuration: missing required field [run] model")

    model = _require(cp, "run", "model")
    scenario = _require(cp, "run", "scenario")
    t_end = float(_require(cp, "run", "t_end"))

    dim = int(_require(cp, "grid", "dim"))
    n = int(_require(cp, "grid", "n"))
    length = cp.getfloat("grid", "length", fallback=TWO_PI)
    frac = cp.getfloat("grid", "dealias_fraction", fallback=2.0 / 3.0)
    grid = PeriodicGrid(dim, n, length, frac)

    params = PhysParams(
        nu=float(_require(cp, "physics", "nu")),
        eta=float(_require(cp, "physics", "eta")),
        hall=cp.getfloat("physics", "hall", fallback=1.0),
    )

    dt_raw = cp.get("run", "dt", fallback="auto").strip().lower()
    dt = None if dt_raw in ("auto", "") else float(dt_raw)
    stepper = StepperConfig(
        scheme=cp.get("run", "scheme", fallback="if_rk4"),
        dt=dt,
        dt_max=cp.getfloat("run", "dt_max", fallback=0.1),
        cfl_advective=cp.getfloat("run", "cfl_advective", fallback=0.5),
        cfl_hall=cp.getfloat("run", "cfl_hall", fallback=0.2),
        t_end=t_end,
        diag_interval=cp.getfloat("run", "diag_interval", fallback=None),
        checkpoint_interval=cp.getfloat("checkpoint", "interval", fallback=None)
        if cp.has_section("checkpoint") else None,
        checkpoint_dir=cp.get("checkpoint", "directory", fallback=None)
        if cp.has_section("checkpoint") else None,
        transport_form=cp.get("run", "transport_form", fallback="rotational"),
        linearized=cp.getboolean("run", "linearized", fallback=False),
    )

    scenario_params = {}
    if cp.has_section("scenario"):
        for key, raw in cp.items("scenario"):
            scenario_params[key] = _coerce(raw)

    xr_raw = cp.get("diagnostics", "xr_orders", fallback="2,4,6")
    xr_orders = tuple(int(s) for s in str(xr_raw).split(",") if s.strip())
    diagnostics = DiagnosticsOptions(
        constant_c=cp.getfloat("diagnostics", "constant_c", fallback=1.0),
        lambda_c=cp.getfloat("diagnostics", "lambda_c", fallback=1.0),
        xr_orders=xr_orders,
        compute_residuals=cp.getboolean("diagnostics", "residuals",
                                        fallback=True),
    )

    return RunSpec(
        model=model,
        grid=grid,
        params=params,
        stepper=stepper,
        scenario=scenario,
        scenario_params=scenario_params,
        seed=cp.getint("run", "seed", fallback=0),
        diagnostics=diagnostics,
        epsilon=cp.getfloat("diagnostics", "epsilon", fallback=1e-3),
        csv_path=cp.get("output", "csv", fallback="diagnostics.csv"),
        jsonl_path=cp.get("output", "jsonl", fallback=None),
        summary_path=cp.get("output", "summary", fallback="summary.txt"),
    )
