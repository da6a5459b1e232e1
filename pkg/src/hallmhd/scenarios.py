"""Initial-condition generators.

Every scenario returns a structurally valid MhdState: divergence-free
vector fields, mean-zero where required, band-limited inside the dealias
mask, deterministic for a fixed seed.
"""

import numpy as np

from hallmhd.models import MhdState
from hallmhd.spectral import (
    PeriodicGrid,
    SpectralScalar,
    SpectralVector,
    curl,
    hdot_norm_sq,
    l2_norm,
    leray_project,
)


def _band_envelope(grid: PeriodicGrid, kmin: float, kmax: float) -> np.ndarray:
    kmag = np.sqrt(grid.k2) * (grid.length / (2.0 * np.pi))  # integer units
    env = ((kmag >= kmin - 1e-9) & (kmag <= kmax + 1e-9)).astype(float)
    env *= grid.dealias_mask
    origin = (0,) * grid.dim
    env[origin] = 0.0
    return env


def _spectrum_envelope(grid: PeriodicGrid, kmin: float, kmax: float,
                       slope: float) -> np.ndarray:
    """Band envelope shaped so the shell spectrum E(k) ~ k^slope."""
    env = _band_envelope(grid, kmin, kmax)
    kmag = np.sqrt(grid.k2) * (grid.length / (2.0 * np.pi))
    shaped = np.zeros_like(env)
    nz = env > 0
    # Per-mode |fhat|^2 ~ k^(slope - (d-1)) gives shell sum ~ k^slope.
    shaped[nz] = kmag[nz] ** (0.5 * (slope - (grid.dim - 1)))
    return shaped * env


def random_scalar_field(grid: PeriodicGrid, rng, kmin: float = 1,
                        kmax: float | None = None, slope: float = 0.0
                        ) -> SpectralScalar:
    """Random band-limited mean-zero scalar with unit L2 norm."""
    if kmax is None:
        kmax = max(2, grid.dealias_limit // 2)
    noise = rng.standard_normal(grid.shape)
    f = SpectralScalar.from_physical(grid, noise)
    f.coeffs *= _spectrum_envelope(grid, kmin, kmax, slope)
    nrm = l2_norm(f)
    if nrm == 0:
        raise ValueError("empty wavenumber band")
    return SpectralScalar(grid, f.coeffs / nrm)


def random_divfree_field(grid: PeriodicGrid, rng, amplitude: float = 1.0,
                         kmin: float = 1, kmax: float | None = None,
                         slope: float = 0.0) -> SpectralVector:
    """Random band-limited divergence-free vector with L2 norm ``amplitude``."""
    if kmax is None:
        kmax = max(2, grid.dealias_limit // 2)
    env = _spectrum_envelope(grid, kmin, kmax, slope)
    axes = tuple(range(1, grid.dim + 1))
    noise = rng.standard_normal((3,) + grid.shape)
    v = SpectralVector.from_physical(grid, noise)
    v.coeffs *= env[np.newaxis]
    v = leray_project(v)
    nrm = l2_norm(v)
    if nrm == 0:
        raise ValueError("empty wavenumber band")
    return SpectralVector(grid, v.coeffs * (amplitude / nrm))


def _require_model(name, model, allowed):
    if model not in allowed:
        raise ValueError(
            f"scenario {name!r} supports models {sorted(allowed)}, got {model!r}")


def generate_scenario(name: str, grid: PeriodicGrid, model: str,
                      seed: int = 0, **params) -> MhdState:
    """Build the named initial condition for ``model`` on ``grid``.

    Scenarios
    ---------
    random_divfree:
        Band-limited random divergence-free (u, B); params: amplitude_u,
        amplitude_b, kmin, kmax, slope.
    orszag_tang_like:
        Deterministic vortex-style data on a 2-d grid,
        u = (-sin x2, sin x1, 0), B = b0 (-sin x2, sin 2 x1, 0).
    zero_mv:
        Random divergence-free u with B = -h curl(u), so the combined
        field B + h curl(u) vanishes identically; params: amplitude_u,
        hall, kmin, kmax.
    small_curl3:
        Stream-form data with ||lap psi0||_{L2} scaled to ``amplitude``
        and an order-one b3; params: amplitude, b3_amplitude, kmin, kmax.
    heat_reduction:
        psi0 = 0 with a single-mode b3 (params: mode, amplitude); the
        stream-form evolution degenerates to the heat equation.
    """
    rng = np.random.default_rng(seed)

    if name == "random_divfree":
        _require_model(name, model, {"hall3d", "hall25d", "emhd_vector",
                                     "decoupled_b"})
        kw = {k: params[k] for k in ("kmin", "kmax", "slope") if k in params}
        if model in ("hall3d", "hall25d"):
            u = random_divfree_field(grid, rng,
                                     params.get("amplitude_u", 1.0), **kw)
            b = random_divfree_field(grid, rng,
                                     params.get("amplitude_b", 1.0), **kw)
            return MhdState(model, {"u": u, "b": b})
        b = random_divfree_field(grid, rng, params.get("amplitude_b", 1.0), **kw)
        return MhdState(model, {"b": b})

    if name == "orszag_tang_like":
        _require_model(name, model, {"hall25d"})
        if grid.dim != 2:
            raise ValueError("orszag_tang_like requires a 2-d grid")
        b0 = params.get("b0", 1.0)
        x1, x2 = grid.coordinates()
        scale = 2.0 * np.pi / grid.length
        u = np.stack([-np.sin(scale * x2), np.sin(scale * x1),
                      np.zeros_like(x1)])
        b = b0 * np.stack([-np.sin(scale * x2), np.sin(2.0 * scale * x1),
                           np.zeros_like(x1)])
        return MhdState(model, {"u": SpectralVector.from_physical(grid, u),
                                "b": SpectralVector.from_physical(grid, b)})

    if name == "zero_mv":
        _require_model(name, model, {"hall3d", "hall25d"})
        h = params.get("hall", 1.0)
        kw = {k: params[k] for k in ("kmin", "kmax") if k in params}
        u = random_divfree_field(grid, rng, params.get("amplitude_u", 1.0), **kw)
        b = SpectralVector(grid, -h * curl(u).coeffs)
        return MhdState(model, {"u": u, "b": b})

    if name == "small_curl3":
        _require_model(name, model, {"emhd_stream"})
        if grid.dim != 2:
            raise ValueError("small_curl3 requires a 2-d grid")
        amp = params.get("amplitude", 1e-3)
        kw = {k: params[k] for k in ("kmin", "kmax") if k in params}
        psi = random_scalar_field(grid, rng, **kw)
        lap_norm = np.sqrt(hdot_norm_sq(psi, 2))
        psi = SpectralScalar(grid, psi.coeffs * (amp / lap_norm))
        b3 = random_scalar_field(grid, rng, **kw)
        b3 = SpectralScalar(grid, b3.coeffs * params.get("b3_amplitude", 1.0))
        return MhdState(model, {"psi": psi, "b3": b3})

    if name == "heat_reduction":
        _require_model(name, model, {"emhd_stream"})
        if grid.dim != 2:
            raise ValueError("heat_reduction requires a 2-d grid")
        mode = params.get("mode", (1, 0))
        amp = params.get("amplitude", 1.0)
        x1, x2 = grid.coordinates()
        scale = 2.0 * np.pi / grid.length
        vals = amp * np.cos(scale * (mode[0] * x1 + mode[1] * x2))
        return MhdState(model, {"psi": SpectralScalar.zeros(grid),
                                "b3": SpectralScalar.from_physical(grid, vals)})

    raise ValueError(f"unknown scenario {name!r}")
