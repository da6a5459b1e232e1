"""Time integration with exact spectral diffusion.

Integrating-factor Runge-Kutta: the diffusive part is diagonal in mode
space and applied exactly through exp(-kappa |k|^2 dt) per field, while
the nonlinear tendency from :mod:`hallmhd.models` is advanced explicitly.
Step sizes follow an advective CFL plus a quadratic (dx^2) restriction for
the Hall term.  Checkpoints round-trip bit exactly.

A run owns its state exclusively (single writer); diagnostics sinks
receive immutable record snapshots and may hand them to other threads.
The semigroup cache is lock-guarded.
"""

import io
import struct
import threading
from dataclasses import dataclass, field

import numpy as np

from hallmhd import kernels, spectral
from hallmhd.models import (
    MODEL_FIELDS,
    STEPPABLE_MODELS,
    MhdState,
    PhysParams,
    evaluate_rhs,
    validate_state,
)
from hallmhd.spectral import (
    PeriodicGrid,
    SpectralScalar,
    SpectralVector,
    linf_norm,
)

EPS_FLOOR = 1e-8


class BlowUpError(RuntimeError):
    """Raised when a step produces non-finite coefficients.

    Carries the failure time, the last emitted diagnostics record (when the
    failing step ran inside :func:`run`) and all records up to the failure.
    """

    def __init__(self, time, record=None, records=None):
        super().__init__(f"non-finite coefficients detected at t={time:.6g}")
        self.time = time
        self.record = record
        self.records = records or []


class CheckpointError(ValueError):
    """Malformed, truncated or incompatible checkpoint data."""


@dataclass
class StepperConfig:
    scheme: str = "if_rk4"          # or "if_rk2"
    dt: float | None = None          # None -> CFL-controlled
    dt_max: float = 0.1
    cfl_advective: float = 0.5
    cfl_hall: float = 0.2
    t_end: float = 1.0
    diag_interval: float | None = None
    checkpoint_interval: float | None = None
    checkpoint_dir: str | None = None
    transport_form: str = "rotational"
    project_each_stage: bool = False
    linearized: bool = False

    def __post_init__(self):
        if self.scheme not in ("if_rk4", "if_rk2"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be >= 0")


# ---------------------------------------------------------------------------
# step size control
# ---------------------------------------------------------------------------

def _state_speeds(state: MhdState) -> tuple[float, float]:
    """Max pointwise |u| and |B| for the CFL bounds (0.0 when absent)."""
    fields = state.fields
    u_max = linf_norm(fields["u"]) if "u" in fields else 0.0
    if "b" in fields:
        b_max = linf_norm(fields["b"])
    elif "psi" in fields:
        b = spectral.stream_to_field(fields["psi"], fields["b3"])
        b_max = linf_norm(b)
    else:
        b_max = 0.0
    return u_max, b_max


def cfl_dt(state: MhdState, p: PhysParams, cfg: StepperConfig) -> float:
    """Advective and Hall-limited step size, capped at cfg.dt_max.

    dt = min(c_adv dx / max(|u|, |B|, eps), c_hall dx^2 / (h max(|B|, eps))).
    The Hall term behaves like a quasilinear second-order operator, hence
    the dx^2 scaling.
    """
    grid = state.grid
    dx = grid.spacing
    u_max, b_max = _state_speeds(state)
    speed = max(u_max, b_max, EPS_FLOOR)
    dt = cfg.cfl_advective * dx / speed
    if p.hall > 0:
        dt = min(dt, cfg.cfl_hall * dx * dx / (p.hall * max(b_max, EPS_FLOOR)))
    return float(min(dt, cfg.dt_max))


# ---------------------------------------------------------------------------
# integrating-factor stepping
# ---------------------------------------------------------------------------

_semigroup_cache: dict = {}
_semigroup_lock = threading.Lock()


def _semigroup(grid: PeriodicGrid, kappa: float, dt: float) -> np.ndarray:
    """exp(-kappa |k|^2 dt) flattened, cached per (grid, kappa, dt)."""
    key = (grid.key(), float(kappa), float(dt))
    with _semigroup_lock:
        e = _semigroup_cache.get(key)
        if e is None:
            e = np.exp(-float(kappa) * grid.k2flat * float(dt))
            if len(_semigroup_cache) > 256:
                _semigroup_cache.clear()
            _semigroup_cache[key] = e
    return e


def _flatten_state(state: MhdState, p: PhysParams):
    """Names, flattened complex views and diffusion coefficients.

    The views are read-only by convention: every stage kernel allocates
    fresh output arrays.
    """
    layout = MODEL_FIELDS[state.model]
    names, arrays, kappas = [], [], []
    for name, (kind, kappa_attr) in layout.items():
        names.append(name)
        arrays.append(state.fields[name].coeffs.reshape(-1))
        kappas.append(getattr(p, kappa_attr) if kappa_attr else 0.0)
    return names, arrays, kappas


def _rebuild_state(template: MhdState, names, arrays, time: float) -> MhdState:
    grid = template.grid
    fields = {}
    for name, arr in zip(names, arrays):
        kind = MODEL_FIELDS[template.model][name][0]
        if kind == "vector":
            fields[name] = SpectralVector(grid, arr.reshape((3,) + grid.shape))
        else:
            fields[name] = SpectralScalar(grid, arr.reshape(grid.shape))
    return MhdState(template.model, fields, time)


def _nonlinear(state_t, p, cfg, names):
    """Nonlinear tendency as flattened arrays aligned with ``names``."""
    if cfg.linearized:
        return [np.zeros(f.coeffs.size, dtype=np.complex128)
                for f in (state_t.fields[n] for n in names)]
    tend = evaluate_rhs(state_t, p, include_diffusion=False,
                        transport_form=cfg.transport_form, validate=False)
    out = []
    for name in names:
        if name in tend:
            out.append(tend[name].coeffs.reshape(-1))
        else:
            out.append(np.zeros(state_t.fields[name].coeffs.size,
                                dtype=np.complex128))
    return out


def _project_state_arrays(model, grid, names, arrays):
    """Re-project vector fields divergence-free, zero stream-function mean."""
    for i, name in enumerate(names):
        kind = MODEL_FIELDS[model][name][0]
        if kind == "vector":
            v = np.ascontiguousarray(arrays[i].reshape(3, -1))
            arrays[i] = kernels.project_mode(grid.kflat, grid.inv_k2flat,
                                             v).reshape(-1)
        elif name == "psi":
            arrays[i][0] = 0.0
    return arrays


def step(state: MhdState, p: PhysParams, cfg: StepperConfig,
         dt: float | None = None) -> MhdState:
    """Advance one step of size ``dt`` (default: cfg.dt or the CFL bound).

    Diffusion is integrated exactly per mode; the nonlinear part uses the
    classical integrating-factor RK4 (or RK2).  Hermitian symmetry and the
    divergence-free invariants are preserved; an end-of-step projection
    controls rounding drift (per-stage projection behind cfg.project_each_stage).
    """
    if state.model not in STEPPABLE_MODELS:
        raise ValueError(f"model {state.model!r} cannot be time stepped")
    if dt is None:
        dt = cfg.dt if cfg.dt is not None else cfl_dt(state, p, cfg)
    if not dt > 0:
        raise ValueError("dt must be positive")

    grid = state.grid
    names, y0, kappas = _flatten_state(state, p)

    def factors(tau):
        out = []
        for k, y in zip(kappas, y0):
            e = _semigroup(grid, k, tau)
            out.append(e if y.size == e.size else np.tile(e, y.size // e.size))
        return out

    e_half = factors(0.5 * dt)
    e_full = factors(dt)

    def nl(arrays, t):
        st = _rebuild_state(state, names, list(arrays), t)
        if cfg.project_each_stage:
            arrs = _project_state_arrays(state.model, grid, names,
                                         [a.copy() for a in arrays])
            st = _rebuild_state(state, names, arrs, t)
        return _nonlinear(st, p, cfg, names)

    t = state.time
    # Overflow in a diverging run is detected below via the finiteness
    # check; the intermediate warnings are noise.
    with np.errstate(over="ignore", invalid="ignore"):
        if cfg.scheme == "if_rk4":
            k1 = nl(y0, t)
            y2 = [kernels.if_stage_pre(eh, y, 0.5 * dt, k)
                  for eh, y, k in zip(e_half, y0, k1)]
            k2 = nl(y2, t + 0.5 * dt)
            y3 = [kernels.if_stage_mix(eh, y, 0.5 * dt, k)
                  for eh, y, k in zip(e_half, y0, k2)]
            k3 = nl(y3, t + 0.5 * dt)
            y4 = [kernels.if_stage_end(ef, y, dt, eh, k)
                  for ef, eh, y, k in zip(e_full, e_half, y0, k3)]
            k4 = nl(y4, t + dt)
            y1 = [kernels.if_final(ef, eh, y, a, b, c, d, dt)
                  for ef, eh, y, a, b, c, d
                  in zip(e_full, e_half, y0, k1, k2, k3, k4)]
        else:  # if_rk2 (Heun with integrating factor)
            k1 = nl(y0, t)
            y_star = [kernels.if_stage_pre(ef, y, dt, k)
                      for ef, y, k in zip(e_full, y0, k1)]
            k2 = nl(y_star, t + dt)
            # ef (y + dt/2 k1) + dt/2 k2
            y1 = [kernels.if_stage_pre(ef, y, 0.5 * dt, a)
                  for ef, y, a in zip(e_full, y0, k1)]
            for arr, b in zip(y1, k2):
                arr += 0.5 * dt * b

    y1 = _project_state_arrays(state.model, grid, names, y1)
    new_state = _rebuild_state(state, names, y1, t + dt)

    # A non-finite value anywhere poisons the plain sum.
    for arr in y1:
        if not np.isfinite(arr.view(np.float64).sum()):
            raise BlowUpError(t + dt)
    return new_state


# ---------------------------------------------------------------------------
# run loop
# ---------------------------------------------------------------------------

@dataclass
class RunResult:
    state: MhdState
    records: list = field(default_factory=list)
    checkpoints: list = field(default_factory=list)


def run(initial: MhdState, p: PhysParams, cfg: StepperConfig, engine=None,
        sinks=()) -> RunResult:
    """Step from initial.time to cfg.t_end, emitting diagnostics records.

    Records are emitted at t0, at every cfg.diag_interval (steps are clipped
    so marks are hit exactly) and at t_end; each record is also pushed to
    every callable in ``sinks``.  Checkpoints are written at
    cfg.checkpoint_interval into cfg.checkpoint_dir.  A blow-up aborts the
    run with a BlowUpError carrying the records so far.
    """
    from hallmhd.diagnostics import DiagnosticsEngine

    validate_state(initial)
    # Inviscid evolution is ill-posed; zero diffusivity is allowed only in
    # direct tendency evaluation, never in a simulated trajectory.
    _, _, kappas = _flatten_state(initial, p)
    if any(k <= 0.0 for k in kappas):
        raise ValueError(
            "simulated trajectories require positive diffusivity on every "
            "evolved field")
    if engine is None:
        engine = DiagnosticsEngine(p)
    state = initial.copy()
    t_end = cfg.t_end
    result = RunResult(state=state)

    def emit(st):
        rec = engine.observe(st)
        result.records.append(rec)
        for sink in sinks:
            sink(rec)
        return rec

    def checkpoint(st):
        if cfg.checkpoint_dir is None:
            return
        import os

        os.makedirs(cfg.checkpoint_dir, exist_ok=True)
        path = os.path.join(cfg.checkpoint_dir, f"ckpt_t{st.time:015.8f}.bin")
        save_checkpoint(st, p, path)
        result.checkpoints.append(path)

    last = emit(state)
    if t_end <= state.time:
        result.state = state
        return result

    interval = cfg.diag_interval if cfg.diag_interval else (t_end - state.time)
    next_mark = state.time + interval
    ck_interval = cfg.checkpoint_interval
    next_ck = state.time + ck_interval if ck_interval else None

    tol = 1e-12 * max(1.0, abs(t_end))
    # The CFL bound drifts slowly, so it is refreshed every few steps.
    cfl_cache = None
    steps = 0
    while state.time < t_end - tol:
        if cfg.dt is not None:
            dt = cfg.dt
        else:
            if cfl_cache is None or steps % 8 == 0:
                cfl_cache = cfl_dt(state, p, cfg)
            dt = cfl_cache
        horizon = min(t_end, next_mark)
        if next_ck is not None:
            horizon = min(horizon, next_ck)
        dt = min(dt, horizon - state.time)
        prev = state
        try:
            state = step(state, p, cfg, dt=dt)
        except BlowUpError as err:
            raise BlowUpError(err.time, record=last,
                              records=list(result.records)) from None
        steps += 1
        engine.accumulate_step(prev, state, dt)
        if state.time >= next_mark - tol:
            last = emit(state)
            next_mark += interval
        if next_ck is not None and state.time >= next_ck - tol:
            checkpoint(state)
            next_ck += ck_interval

    if not result.records or result.records[-1].time < state.time - tol:
        last = emit(state)
    result.state = state
    return result


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

CHECKPOINT_MAGIC = b"HMHDSNAP"
CHECKPOINT_VERSION = 1

# Layout (all little-endian):
#   magic[8] | version u32 | model tag (u16 length + utf-8)
#   grid: dim u8, n u32, length f64, dealias_fraction f64
#   params: nu f64, eta f64, hall f64
#   time f64 | n_fields u16
#   per field: name (u16 length + utf-8), kind u8 (0 scalar, 1 vector),
#              raw complex128 coefficients, C order, axis-major wavenumbers.


def _write_str(buf, s: str):
    raw = s.encode("utf-8")
    buf.write(struct.pack("<H", len(raw)))
    buf.write(raw)


def _read_exact(buf, n: int) -> bytes:
    data = buf.read(n)
    if len(data) != n:
        raise CheckpointError("truncated checkpoint payload")
    return data


def _read_str(buf) -> str:
    (n,) = struct.unpack("<H", _read_exact(buf, 2))
    return _read_exact(buf, n).decode("utf-8")


def save_checkpoint(state: MhdState, p: PhysParams, path: str) -> None:
    """Serialize a state bit-exactly (see layout notes above)."""
    grid = state.grid
    buf = io.BytesIO()
    buf.write(CHECKPOINT_MAGIC)
    buf.write(struct.pack("<I", CHECKPOINT_VERSION))
    _write_str(buf, state.model)
    buf.write(struct.pack("<BIdd", grid.dim, grid.n, grid.length,
                          grid.dealias_fraction))
    buf.write(struct.pack("<ddd", p.nu, p.eta, p.hall))
    buf.write(struct.pack("<d", state.time))
    buf.write(struct.pack("<H", len(state.fields)))
    for name, f in state.fields.items():
        _write_str(buf, name)
        kind = 1 if isinstance(f, SpectralVector) else 0
        buf.write(struct.pack("<B", kind))
        buf.write(np.ascontiguousarray(f.coeffs, dtype="<c16").tobytes())
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def load_checkpoint(path: str, expected_grid: PeriodicGrid | None = None
                    ) -> tuple[MhdState, PhysParams]:
    """Load a checkpoint; validates magic, version and (optionally) the grid."""
    with open(path, "rb") as fh:
        buf = io.BytesIO(fh.read())
    magic = buf.read(len(CHECKPOINT_MAGIC))
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError("bad checkpoint magic")
    (version,) = struct.unpack("<I", _read_exact(buf, 4))
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    model = _read_str(buf)
    dim, n, length, frac = struct.unpack("<BIdd", _read_exact(buf, 21))
    nu, eta, hall = struct.unpack("<ddd", _read_exact(buf, 24))
    (time,) = struct.unpack("<d", _read_exact(buf, 8))
    (n_fields,) = struct.unpack("<H", _read_exact(buf, 2))

    grid = PeriodicGrid(dim, n, length, frac)
    if expected_grid is not None and grid != expected_grid:
        raise CheckpointError(
            f"checkpoint grid {grid!r} does not match expected {expected_grid!r}")
    fields = {}
    for _ in range(n_fields):
        name = _read_str(buf)
        (kind,) = struct.unpack("<B", _read_exact(buf, 1))
        count = (3 if kind == 1 else 1) * grid.npoints
        raw = _read_exact(buf, count * 16)
        coeffs = np.frombuffer(raw, dtype="<c16").astype(np.complex128)
        if kind == 1:
            fields[name] = SpectralVector(grid, coeffs.reshape((3,) + grid.shape))
        else:
            fields[name] = SpectralScalar(grid, coeffs.reshape(grid.shape))
    if buf.read(1):
        raise CheckpointError("trailing bytes after checkpoint payload")
    state = MhdState(model, fields, time)
    return state, PhysParams(nu, eta, hall)
