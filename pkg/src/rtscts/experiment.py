"""Sweep experiments: closed-form plus simulated estimates over a parameter
grid, emitted as CSV or JSON lines.

A TOML file declares the fixed network geometry, the sweep axes (thinning
rule and candidate density), the quadrature controls, and an optional
simulation plan.  Output records are deterministic for a given config: worker
count never changes a byte, and wall-clock columns stay zero unless timings
are explicitly enabled.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import json
import math
import time
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - py3.10
    import tomli as tomllib

from .analysis import (
    InterferenceResult,
    QuadratureConfig,
    QuadratureConvergenceError,
    ThinningType,
    mean_interference,
    retained_intensity,
)
from .geometry import NetworkParams, exclusion_zone_area, zone_reach
from .simulator import SimulationConfig, empirical_intensity, palm_interference

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field."""


@dataclass(frozen=True)
class NetworkSpec:
    """Fixed geometry shared by every sweep point (density excluded)."""

    d: float = 2.0
    r_cs: float = 2.0
    r_tx: float = 1.0
    alpha: float = 4.0
    amplitude: float = 1.0
    p_t: float = 1.0
    near_field_cutoff: float | None = None

    def params(self, lambda_p: float) -> NetworkParams:
        return NetworkParams.make(
            lambda_p, d=self.d, r_cs=self.r_cs, r_tx=self.r_tx, p_t=self.p_t,
            alpha=self.alpha, amplitude=self.amplitude,
            near_field_cutoff=self.near_field_cutoff)


@dataclass(frozen=True)
class ExperimentConfig:
    network: NetworkSpec
    thinnings: tuple[ThinningType, ...]
    lambda_values: tuple[float, ...]
    quadrature: QuadratureConfig
    simulation: SimulationConfig | None
    interference_radius: float
    include_timings: bool = False


@dataclass(frozen=True)
class ExperimentRecord:
    """One sweep point; field order is the CSV column order."""

    thinning: str
    lambda_p: float
    d: float
    r_cs: float
    r_tx: float
    alpha: float
    amplitude: float
    p_t: float
    v_o: float
    analytic_intensity: float
    emp_intensity_mean: float | None
    emp_intensity_ci95: float | None
    analytic_interference: float
    interference_tail_bound: float
    emp_interference_mean: float | None
    emp_interference_ci95: float | None
    palm_acceptance_rate: float | None
    n_replications: int
    seed: int
    r_max: float
    wall_time_analytic_s: float
    wall_time_sim_s: float


_FIELDS = [f.name for f in dataclasses.fields(ExperimentRecord)]
_INT_FIELDS = {"n_replications", "seed"}
_STR_FIELDS = {"thinning"}


def _section(data: dict, name: str) -> dict:
    got = data.get(name, {})
    if not isinstance(got, dict):
        raise ConfigError(f"[{name}] must be a table")
    return dict(got)


def _pop_number(sec: dict, section: str, key: str, default, *,
                required: bool = False, integer: bool = False):
    if key not in sec:
        if required:
            raise ConfigError(f"{section}.{key} is required")
        return default
    val = sec.pop(key)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {val!r}")
    if integer:
        if not isinstance(val, int):
            raise ConfigError(f"{section}.{key} must be an integer, got {val!r}")
        return val
    return float(val)


def _reject_unknown(sec: dict, section: str) -> None:
    if sec:
        name = next(iter(sec))
        raise ConfigError(f"unknown key {section}.{name}")


def load_config(path) -> ExperimentConfig:
    """Parse and validate a TOML experiment file.

    Raises ConfigError naming the offending section and key; all numeric
    range checks beyond basic typing are deferred to the underlying
    dataclasses and re-raised as ConfigError.
    """
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc

    known = {"network", "sweep", "quadrature", "simulation", "output"}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown section [{key}]")

    net_sec = _section(data, "network")
    net = NetworkSpec(
        d=_pop_number(net_sec, "network", "d", 2.0),
        r_cs=_pop_number(net_sec, "network", "r_cs", 2.0),
        r_tx=_pop_number(net_sec, "network", "r_tx", 1.0),
        alpha=_pop_number(net_sec, "network", "alpha", 4.0),
        amplitude=_pop_number(net_sec, "network", "amplitude", 1.0),
        p_t=_pop_number(net_sec, "network", "p_t", 1.0),
        near_field_cutoff=_pop_number(net_sec, "network", "near_field_cutoff", None))
    _reject_unknown(net_sec, "network")

    sweep_sec = _section(data, "sweep")
    raw_thin = sweep_sec.pop("thinning", ["type1", "type2"])
    if isinstance(raw_thin, str):
        raw_thin = [raw_thin]
    if not isinstance(raw_thin, list) or not raw_thin:
        raise ConfigError("sweep.thinning must be a nonempty list of rule names")
    try:
        thinnings = tuple(ThinningType.parse(t) for t in raw_thin)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"sweep.thinning: {exc}") from exc
    raw_lams = sweep_sec.pop("lambda_p", None)
    if (not isinstance(raw_lams, list) or not raw_lams
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                       for v in raw_lams)):
        raise ConfigError("sweep.lambda_p must be a nonempty list of numbers")
    lambda_values = tuple(float(v) for v in raw_lams)
    _reject_unknown(sweep_sec, "sweep")

    quad_sec = _section(data, "quadrature")
    base_grid = quad_sec.pop("base_grid", [16, 32, 32])
    if (not isinstance(base_grid, list) or len(base_grid) != 3
            or not all(isinstance(n, int) and not isinstance(n, bool) for n in base_grid)):
        raise ConfigError("quadrature.base_grid must be a list of three integers")
    try:
        quadrature = QuadratureConfig(
            r_max=_pop_number(quad_sec, "quadrature", "r_max", 70.0),
            rel_tol=_pop_number(quad_sec, "quadrature", "rel_tol", 5e-3),
            base_grid=tuple(base_grid),
            max_levels=_pop_number(quad_sec, "quadrature", "max_levels", 6, integer=True))
    except ValueError as exc:
        raise ConfigError(f"quadrature: {exc}") from exc
    interference_radius = _pop_number(quad_sec, "quadrature", "interference_radius",
                                      quadrature.r_max)
    _reject_unknown(quad_sec, "quadrature")

    simulation = None
    if "simulation" in data:
        sim_sec = _section(data, "simulation")
        try:
            simulation = SimulationConfig(
                window_size=_pop_number(sim_sec, "simulation", "window_size", None,
                                        required=True),
                n_replications=_pop_number(sim_sec, "simulation", "n_replications",
                                           None, required=True, integer=True),
                seed=_pop_number(sim_sec, "simulation", "seed", 0, integer=True))
        except ValueError as exc:
            raise ConfigError(f"simulation: {exc}") from exc
        _reject_unknown(sim_sec, "simulation")

    out_sec = _section(data, "output")
    include_timings = out_sec.pop("include_timings", False)
    if not isinstance(include_timings, bool):
        raise ConfigError("output.include_timings must be a boolean")
    _reject_unknown(out_sec, "output")

    try:
        net.params(lambda_values[0])
    except ValueError as exc:
        raise ConfigError(f"network: {exc}") from exc
    return ExperimentConfig(network=net, thinnings=thinnings,
                            lambda_values=lambda_values, quadrature=quadrature,
                            simulation=simulation,
                            interference_radius=interference_radius,
                            include_timings=include_timings)


def _palm_window(config: ExperimentConfig, params: NetworkParams) -> float:
    return 2.0 * (config.interference_radius + params.d + zone_reach(params))


def _run_point(args) -> tuple:
    """Worker for one sweep point; returns a marker tuple so exceptions
    never cross the process boundary in pickled form."""
    config, thinning, lambda_p, analytic_only = args
    params = config.network.params(lambda_p)
    v_o = exclusion_zone_area(params).v_o

    t0 = time.perf_counter()
    lam = retained_intensity(params, thinning)
    try:
        interf: InterferenceResult = mean_interference(params, thinning,
                                                       config.quadrature)
    except QuadratureConvergenceError as exc:
        return ("diverged", thinning.value, lambda_p, exc.history, exc.rel_tol)
    wall_analytic = time.perf_counter() - t0

    emp_int = emp_int_ci = emp_i = emp_i_ci = acc = None
    n_reps = 0
    seed = 0
    wall_sim = 0.0
    if config.simulation is not None and not analytic_only:
        sim = config.simulation
        n_reps = sim.n_replications
        seed = sim.seed
        t1 = time.perf_counter()
        intensity = empirical_intensity(params, thinning, sim)
        palm_cfg = SimulationConfig(window_size=_palm_window(config, params),
                                    n_replications=sim.n_replications,
                                    seed=sim.seed)
        palm = palm_interference(params, thinning, palm_cfg,
                                 interference_radius=config.interference_radius)
        wall_sim = time.perf_counter() - t1
        emp_int, emp_int_ci = intensity.mean, intensity.ci95
        emp_i, emp_i_ci = palm.mean, palm.ci95
        acc = palm.acceptance_rate

    record = ExperimentRecord(
        thinning=thinning.value, lambda_p=lambda_p, d=params.d, r_cs=params.r_cs,
        r_tx=params.r_tx, alpha=params.path_loss.exponent,
        amplitude=params.path_loss.amplitude, p_t=params.p_t, v_o=v_o,
        analytic_intensity=lam,
        emp_intensity_mean=emp_int, emp_intensity_ci95=emp_int_ci,
        analytic_interference=interf.value,
        interference_tail_bound=interf.tail_bound,
        emp_interference_mean=emp_i, emp_interference_ci95=emp_i_ci,
        palm_acceptance_rate=acc, n_replications=n_reps, seed=seed,
        r_max=config.quadrature.r_max,
        wall_time_analytic_s=wall_analytic if config.include_timings else 0.0,
        wall_time_sim_s=wall_sim if config.include_timings else 0.0)
    return ("ok", record)


class SweepConvergenceError(QuadratureConvergenceError):
    """Quadrature failure at a specific sweep point."""

    def __init__(self, thinning: str, lambda_p: float, history, rel_tol):
        super().__init__(history, rel_tol)
        self.thinning = thinning
        self.lambda_p = lambda_p
        self.args = (f"sweep point thinning={thinning} lambda_p={lambda_p}: "
                     + self.args[0],)


def run_sweep(config: ExperimentConfig, *, analytic_only: bool = False,
              workers: int = 1) -> list[ExperimentRecord]:
    """Evaluate every sweep point, in declaration order.

    With workers > 1 the points run in separate processes; results are
    assembled in sweep order either way, so output bytes never depend on the
    worker count.
    """
    points = [(config, thinning, lam, analytic_only)
              for thinning in config.thinnings
              for lam in config.lambda_values]
    if workers > 1 and len(points) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(_run_point, points))
    else:
        raw = [_run_point(pt) for pt in points]

    records = []
    for res in raw:
        if res[0] == "diverged":
            _, thin_label, lam, history, rel_tol = res
            raise SweepConvergenceError(thin_label, lam, history, rel_tol)
        records.append(res[1])
    return records


def _format_cell(name: str, value) -> str:
    if value is None:
        return ""
    if name in _STR_FIELDS:
        return str(value)
    if name in _INT_FIELDS:
        return str(int(value))
    return format(float(value), ".17g")


def render_csv(records) -> str:
    lines = [f"# schema={SCHEMA_VERSION}", ",".join(_FIELDS)]
    for rec in records:
        row = dataclasses.asdict(rec)
        lines.append(",".join(_format_cell(name, row[name]) for name in _FIELDS))
    return "\n".join(lines) + "\n"


def render_jsonl(records) -> str:
    lines = []
    for rec in records:
        row = dataclasses.asdict(rec)
        row["schema"] = SCHEMA_VERSION
        lines.append(json.dumps(row, separators=(",", ":")))
    return "\n".join(lines) + "\n"


def write_records(records, path) -> None:
    """Write records as CSV, or JSON lines when the path ends in .jsonl."""
    text = render_jsonl(records) if str(path).endswith(".jsonl") else render_csv(records)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _parse_cell(name: str, raw: str):
    if raw == "":
        return None
    if name in _STR_FIELDS:
        return raw
    if name in _INT_FIELDS:
        return int(raw)
    return float(raw)


def load_records(path) -> list[ExperimentRecord]:
    """Read records back from a CSV or JSON-lines file written by
    write_records; numbers round-trip exactly."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if str(path).endswith(".jsonl"):
        out = []
        for ln in lines:
            row = json.loads(ln)
            row.pop("schema", None)
            out.append(ExperimentRecord(**row))
        return out
    if not lines or not lines[0].startswith("# schema="):
        raise ValueError(f"{path}: missing schema header")
    if int(lines[0].split("=", 1)[1]) != SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported schema {lines[0]!r}")
    header = lines[1].split(",")
    if header != _FIELDS:
        raise ValueError(f"{path}: unexpected columns {header!r}")
    out = []
    for ln in lines[2:]:
        cells = ln.split(",")
        if len(cells) != len(_FIELDS):
            raise ValueError(f"{path}: row has {len(cells)} cells, expected {len(_FIELDS)}")
        out.append(ExperimentRecord(**{
            name: _parse_cell(name, cell) for name, cell in zip(_FIELDS, cells)}))
    return out
