"""Functionals, constants, identity residuals and inequality monitors.

Everything the simulator reports lives here: quadratic energies and
dissipation rates, the combined field B + h*curl(u) and its Sobolev norms,
time-integrated criterion accumulators (BMO proxy, Serrin-type component
norms), smallness constants for global existence, discrete shadows of the
cancellation and integration-by-parts identities, a logarithmic Sobolev
ratio, a Gronwall-type inequality checker, exponential trajectory weights,
and decay-exponent fits.

BMO norms are represented throughout by the Hdot^{d/2} upper-bound proxy and
labeled as such.  Generic inequality constants are configuration knobs
(default 1); the smallest constant that would make a bound hold along a run
("calibrated C") is reported instead of hard-asserting anything.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from hallmhd.models import (
    MhdState,
    PhysParams,
    evaluate_rhs,
    jacobian,
    rhs_magneto_vorticity,
)
from hallmhd.spectral import (
    SpectralScalar,
    SpectralVector,
    curl,
    field_to_stream,
    hdot_norm_sq,
    hk_norm_sq,
    inner,
    l2_norm,
    l2_norm_sq,
    laplacian,
    linf_norm,
    stream_to_field,
)

XR_COMPONENTS = ("grad_b3", "grad_bt", "grad_w3", "grad_wt")

_TINY = 1e-300


def _exp(x: float) -> float:
    """exp saturating to inf: the smallness constants legitimately explode
    for data that is far from the small-data regime."""
    if x > 709.0:
        return math.inf
    return math.exp(x)


# ---------------------------------------------------------------------------
# state decomposition helpers
# ---------------------------------------------------------------------------

def velocity_and_field(state: MhdState):
    """(u, b) as SpectralVectors; u is None for velocity-free models."""
    f = state.fields
    if state.model in ("hall3d", "hall25d"):
        return f["u"], f["b"]
    if state.model == "emhd_vector":
        return None, f["b"]
    if state.model == "emhd_stream":
        return None, stream_to_field(f["psi"], f["b3"])
    if state.model == "hmhd_stream":
        return (stream_to_field(f["phi"], f["u3"]),
                stream_to_field(f["psi"], f["b3"]))
    if state.model == "decoupled_b":
        return None, f["b"]
    raise ValueError(f"no (u, B) decomposition for model {state.model!r}")


def curl3(b: SpectralVector) -> SpectralScalar:
    """Third curl component d1 b2 - d2 b1 (any grid dimension)."""
    grid = b.grid
    out = 1j * (grid.kvec[0] * b.coeffs[1] - grid.kvec[1] * b.coeffs[0])
    return SpectralScalar(grid, out)


def magneto_vorticity(state_or_u, b=None, h: float = 1.0):
    """Combined field W = B + h curl(u) and its squared L2/H1/H2 norms.

    Accepts either an MhdState (velocity-free models give W = B) or an
    explicit (u, b) pair.  Returns (W, {"l2": .., "h1": .., "h2": ..}).
    """
    if isinstance(state_or_u, MhdState):
        u, bb = velocity_and_field(state_or_u)
    else:
        u, bb = state_or_u, b
    if u is None:
        w = bb.copy()
    else:
        w = SpectralVector(bb.grid, bb.coeffs + h * curl(u).coeffs)
    norms = {"l2": l2_norm_sq(w), "h1": hk_norm_sq(w, 1), "h2": hk_norm_sq(w, 2)}
    return w, norms


def energy_functionals(state: MhdState) -> dict:
    """Quadratic energies and dissipation integrands via Parseval."""
    u, b = velocity_and_field(state)
    return {
        "energy_u": l2_norm_sq(u) if u is not None else 0.0,
        "energy_b": l2_norm_sq(b),
        "diss_u": hdot_norm_sq(u, 1) if u is not None else 0.0,
        "diss_b": hdot_norm_sq(b, 1),
    }


def bmo_proxy_sq(u) -> float:
    """Squared Hdot^{d/2} proxy norm (upper bound for the BMO norm)."""
    if u is None:
        return 0.0
    return hdot_norm_sq(u, u.grid.dim / 2.0)


# ---------------------------------------------------------------------------
# time accumulation
# ---------------------------------------------------------------------------

def trapezoid_step(prev_acc: float, prev_value: float, new_value: float,
                   dt: float) -> float:
    """One trapezoid increment of a running time integral."""
    return prev_acc + 0.5 * (prev_value + new_value) * dt


def xr_conjugate(r: float) -> float:
    """Conjugate integrability order r' with 1/r + 1/r' = 1/2 (r > 2)."""
    if r <= 2:
        raise ValueError(f"conjugate order defined for r > 2, got {r}")
    return 2.0 * r / (r - 2.0)


def _collection_lp(comps, p: float) -> float:
    """L^p norm of the pointwise Frobenius magnitude of scalar components.

    Overflow saturates to inf (records stay meaningful right up to a
    detected blow-up).
    """
    grid = comps[0].grid
    with np.errstate(over="ignore"):
        mag_sq = None
        for c in comps:
            vals = c.to_physical()
            mag_sq = vals ** 2 if mag_sq is None else mag_sq + vals ** 2
        quad = grid.quad_weight * np.sum(np.power(mag_sq, p / 2.0))
        return float(np.power(quad, 1.0 / p))


def xr_integrand(comps, r: float) -> float:
    """Instantaneous integrand of the Serrin-type accumulator.

    r = 2: squared Hdot^1 norm of the component collection;
    r > 2: L^{r'} norm of the pointwise magnitude, raised to the r-th power.
    """
    if r < 2:
        raise ValueError(f"the accumulator requires r >= 2, got {r}")
    if r == 2:
        return sum(hdot_norm_sq(c, 1) for c in comps)
    rp = xr_conjugate(r)
    with np.errstate(over="ignore"):
        return float(np.power(np.float64(_collection_lp(comps, rp)), r))


def xr_component_fields(state: MhdState) -> dict:
    """Gradient collections of b3, (b1, b2), w3 and (w1~, w2~) on 2-d grids.

    w3 = d1 u2 - d2 u1 and the tilde pair is (d2 u3, -d1 u3); for
    velocity-free models the w collections are zero.
    """
    grid = state.grid
    if grid.dim != 2:
        raise ValueError("component criteria are defined for 2-d states")
    u, b = velocity_and_field(state)

    def grad_comps(coeffs):
        return [SpectralScalar(grid, 1j * grid.kvec[axis] * coeffs)
                for axis in (0, 1)]

    out = {"grad_b3": grad_comps(b.coeffs[2]),
           "grad_bt": grad_comps(b.coeffs[0]) + grad_comps(b.coeffs[1])}
    if u is None:
        zero = SpectralScalar.zeros(grid)
        out["grad_w3"] = [zero.copy(), zero.copy()]
        out["grad_wt"] = [zero.copy() for _ in range(4)]
    else:
        w3 = curl3(u)
        out["grad_w3"] = grad_comps(w3.coeffs)
        wt1 = SpectralScalar(grid, 1j * grid.kvec[1] * u.coeffs[2])
        wt2 = SpectralScalar(grid, -1j * grid.kvec[0] * u.coeffs[2])
        out["grad_wt"] = grad_comps(wt1.coeffs) + grad_comps(wt2.coeffs)
    return out


# ---------------------------------------------------------------------------
# smallness constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MvSmallness:
    """Initial-data constant controlling the combined field globally."""

    value: float
    satisfied: bool          # value < 1
    ratio: float             # |nu - eta| / (nu + eta)
    ratio_ok: bool           # ratio <= 1/8
    e0: float                # ||u0||^2 + ||B0||^2
    mv0_l2_sq: float


def mv_smallness_constant(u0: SpectralVector, b0: SpectralVector,
                          p: PhysParams, c: float = 1.0) -> MvSmallness:
    """Evaluate the global smallness constant for the 3-d system.

    value = (||B0 + h w0||^2 + c E0 (nu-eta)^2/(nu+eta)^2)
            * exp(c (E0 + E0^2)/(nu+eta)^4)

    with the hypothesis check |nu - eta|/(nu + eta) <= 1/8.
    """
    if c <= 0:
        raise ValueError("the generic constant must be positive")
    denom = p.nu + p.eta
    if denom <= 0:
        raise ValueError("nu + eta must be positive")
    e0 = l2_norm_sq(u0) + l2_norm_sq(b0)
    _, mv_norms = magneto_vorticity(u0, b0, h=p.hall)
    mv0 = mv_norms["l2"]
    value = (mv0 + c * e0 * (p.nu - p.eta) ** 2 / denom ** 2) \
        * _exp(c * (e0 + e0 ** 2) / denom ** 4)
    ratio = abs(p.nu - p.eta) / denom
    return MvSmallness(value=value, satisfied=value < 1.0, ratio=ratio,
                       ratio_ok=ratio <= 0.125 + 1e-15, e0=e0,
                       mv0_l2_sq=mv0)


@dataclass(frozen=True)
class EmhdConstants:
    """Electron MHD initial-data constants and smallness left-hand side."""

    eta: float
    h0: float                 # uniform H^2 bound
    smallness_lhs: float
    grad_b0_l2_sq: float
    curl3_b0_l2_sq: float

    def smallness_ok(self, eps: float) -> bool:
        return self.smallness_lhs <= eps * self.eta ** 2


def emhd_constants(b0: SpectralVector, eta: float, c: float = 1.0
                   ) -> EmhdConstants:
    """Evaluate H0 = ||B0||_{H2}^2 exp(c eta^-4 ||grad B0||^4) and the
    smallness left-hand side

        ||(curl B0)_3||^{2 exp(-c eta^-2 ||grad B0||^2)}
            * exp[c eta^-2 (1 + ln H0) ||grad B0||^2].

    A vanishing third curl component gives exactly 0 (pure heat case).
    """
    if c <= 0:
        raise ValueError("the generic constant must be positive")
    if eta <= 0:
        raise ValueError("eta must be positive")
    grad_sq = hdot_norm_sq(b0, 1)
    h0 = hk_norm_sq(b0, 2) * _exp(c * grad_sq ** 2 / eta ** 4)
    a = l2_norm_sq(curl3(b0))
    if a == 0.0:
        lhs = 0.0
    else:
        pexp = math.exp(-c * grad_sq / eta ** 2)
        lhs = a ** pexp * _exp(c * (1.0 + math.log(h0)) * grad_sq / eta ** 2)
    return EmhdConstants(eta=eta, h0=h0, smallness_lhs=lhs,
                         grad_b0_l2_sq=grad_sq, curl3_b0_l2_sq=a)


@dataclass(frozen=True)
class HmhdConstants:
    """2-d-variable Hall MHD constants (perturbation of the electron case)."""

    eta: float
    e0: float
    e1: float
    e2: float
    h1: float
    s1: float
    h2: float
    smallness_lhs: float

    def smallness_ok(self, eps: float) -> bool:
        return self.smallness_lhs <= eps * self.eta ** 2


def hmhd_constants(u0: SpectralVector, b0: SpectralVector, p: PhysParams,
                   c: float = 1.0) -> HmhdConstants:
    """Evaluate the chained constants for the 2-d-variable Hall system.

    E1 bounds the combined field, E2 = E1 + E0 bounds the vorticity, H1 the
    H1 magnetic norm, S1 = H1/eta^2 + E0/(nu eta) the integrated dissipation
    scale, and H2 the uniform H^2 bound entering the smallness left-hand side

        ||(curl B0)_3||^{2 exp(-c S1)} exp(c S1 (1 + ln H2)).
    """
    if c <= 0:
        raise ValueError("the generic constant must be positive")
    if p.nu <= 0 or p.eta <= 0:
        raise ValueError("nu and eta must be positive")
    nu, eta = p.nu, p.eta
    e0 = l2_norm_sq(u0) + l2_norm_sq(b0)
    _, mv_norms = magneto_vorticity(u0, b0, h=p.hall)
    e1 = (mv_norms["l2"] + c * e0 * (nu - eta) ** 2 / (nu * eta)) \
        * _exp(c * e0 / nu ** 2)
    e2 = e1 + e0
    grad_sq = hdot_norm_sq(b0, 1)
    mn = min(nu, eta)
    h1 = (grad_sq + c * e0 * e2 / (eta * mn)) * _exp(c * e0 / (nu * eta))
    s1 = h1 / eta ** 2 + e0 / (nu * eta)
    h2 = ((hk_norm_sq(b0, 2) + c * e0 * e2 / (eta * mn)
           + c * e0 * e2 ** 2 / eta ** 4)
          * _exp(c * e2 / (eta * mn) + c * h1 ** 2 / eta ** 4)
          + l2_norm_sq(u0))
    a = l2_norm_sq(curl3(b0))
    if a == 0.0:
        lhs = 0.0
    else:
        lhs = a ** math.exp(-min(c * s1, 709.0)) * _exp(c * s1 * (1.0 + math.log(h2)))
    return HmhdConstants(eta=eta, e0=e0, e1=e1, e2=e2, h1=h1, s1=s1, h2=h2,
                         smallness_lhs=lhs)


# ---------------------------------------------------------------------------
# bound evaluators and calibration
# ---------------------------------------------------------------------------

def mv_bound_l2(mv0_l2_sq: float, e0: float, p: PhysParams, u_acc: float,
                c: float = 1.0) -> float:
    """Right-hand side bounding sup ||W||^2 + nu int ||grad W||^2 in 3-d:

    (||W0||^2 + c E0 (nu-eta)^2/(nu eta)) exp(c U_T / nu).
    """
    if p.nu <= 0 or p.eta <= 0:
        raise ValueError("nu and eta must be positive")
    return (mv0_l2_sq + c * e0 * (p.nu - p.eta) ** 2 / (p.nu * p.eta)) \
        * _exp(c * u_acc / p.nu)


def mv_bound_h2(mv0_h2_sq: float, e2: float, nu: float, c: float = 1.0) -> float:
    """Equal-coefficient H^2 bound: ||W0||_{H2}^2 exp(c E2 / nu^2)."""
    if nu <= 0:
        raise ValueError("nu must be positive")
    return mv0_h2_sq * _exp(c * e2 / nu ** 2)


def psi_bound_no_log(psi0: SpectralScalar, b0: SpectralVector, eta: float,
                     c: float = 1.0) -> float:
    """Alternative stream-function bound that skips the logarithmic gain.

    (||lap psi0||^2 + c eta^-3 ||B0||^2 ||grad B0||^2 ||lap B0||^2
       e^{c eta^-4 ||grad B0||^4}) e^{c eta^-2 ||grad B0||^2}

    Exposed as an optional evaluator; not monitored by default.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    lap_psi_sq = hdot_norm_sq(psi0, 2)
    b0_sq = l2_norm_sq(b0)
    grad_sq = hdot_norm_sq(b0, 1)
    lap_sq = hdot_norm_sq(b0, 2)
    inner_term = lap_psi_sq + (c / eta ** 3) * b0_sq * grad_sq * lap_sq \
        * _exp(c * grad_sq ** 2 / eta ** 4)
    return inner_term * _exp(c * grad_sq / eta ** 2)


def calibrate_constant(lhs: float, rhs_fn, c_max: float = 1e9) -> float:
    """Smallest c >= 0 with rhs_fn(c) >= lhs (rhs nondecreasing in c).

    Returns inf when even c_max does not close the inequality.
    """
    if rhs_fn(0.0) >= lhs:
        return 0.0
    lo, hi = 0.0, 1.0
    while rhs_fn(hi) < lhs:
        hi *= 2.0
        if hi > c_max:
            return math.inf
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if rhs_fn(mid) >= lhs:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# identity residuals
# ---------------------------------------------------------------------------

def hall_cancellation_residual(state: MhdState, p: PhysParams,
                               h: float | None = None) -> float:
    """Relative residual of h curl(du/dt) + dB/dt against the transport law
    of W = B + h curl(u).

    ``h`` defaults to the model's Hall constant, in which case the quadratic
    Hall contributions cancel exactly and the residual is rounding noise.
    Passing a different h (e.g. 0 while the model evolves with hall = 1)
    leaves the model's Hall term uncancelled by construction; the residual
    then measures exactly that term.
    """
    if state.model not in ("hall3d", "hall25d"):
        raise ValueError("cancellation check requires a two-field Hall state")
    if h is None:
        h = p.hall
    u, b = state.fields["u"], state.fields["b"]
    tend = evaluate_rhs(state, p, include_diffusion=True)
    curl_du = curl(tend["u"])
    combo = SpectralVector(state.grid,
                           h * curl_du.coeffs + tend["b"].coeffs)
    w = SpectralVector(state.grid, b.coeffs + h * curl(u).coeffs)
    ref = rhs_magneto_vorticity(w, u, b, p)
    diff = l2_norm(SpectralVector(state.grid, combo.coeffs - ref.coeffs))
    scale = max(h * l2_norm(curl_du), l2_norm(tend["b"]), l2_norm(ref), _TINY)
    return diff / scale


def delta_psi_identity_residual(psi: SpectralScalar, b3: SpectralScalar
                                ) -> float:
    """Relative residual of the double integration-by-parts identity

    int lap(J(b3, psi)) lap(psi) + int J(lap psi, psi) lap(b3)
        - 2 sum_k int J(d_k b3, d_k psi) lap(psi) = 0.

    Normalized by the Cauchy-Schwarz bounds of the three pairings, so
    inputs whose pairings all vanish structurally (e.g. single-mode pairs)
    report ~0 instead of amplified rounding noise.
    """
    grid = psi.grid
    lap_psi = laplacian(psi)
    lap_b3 = laplacian(b3)
    t1 = laplacian(jacobian(b3, psi))
    t2 = jacobian(lap_psi, psi)
    i1 = inner(t1, lap_psi)
    i2 = inner(t2, lap_b3)
    i3 = 0.0
    cs3 = 0.0
    for axis in (0, 1):
        dk_b3 = SpectralScalar(grid, 1j * grid.kvec[axis] * b3.coeffs)
        dk_psi = SpectralScalar(grid, 1j * grid.kvec[axis] * psi.coeffs)
        t = jacobian(dk_b3, dk_psi)
        i3 += inner(t, lap_psi)
        cs3 += l2_norm(t) * l2_norm(lap_psi)
    i3 *= 2.0
    cs3 *= 2.0
    scale = max(l2_norm(t1) * l2_norm(lap_psi),
                l2_norm(t2) * l2_norm(lap_b3), cs3, _TINY)
    return abs(i1 + i2 - i3) / scale


# ---------------------------------------------------------------------------
# scalar utilities
# ---------------------------------------------------------------------------

def log_sobolev_ratio(f) -> float:
    """||f||_inf / (||grad f|| [1 + (ln(||f||_{H2}^2 / ||grad f||^2))^{1/2}]).

    2-d fields only; the log argument is clamped at 1 from below to guard
    rounding.  The ratio is invariant under f -> lambda f.
    """
    if f.grid.dim != 2:
        raise ValueError("log-Sobolev ratio is defined for 2-d fields")
    grad_sq = hdot_norm_sq(f, 1)
    if grad_sq == 0.0:
        raise ValueError("gradient-free field: ratio undefined")
    arg = max(1.0, hk_norm_sq(f, 2) / grad_sq)
    return linf_norm(f) / (math.sqrt(grad_sq) * (1.0 + math.sqrt(math.log(arg))))


@dataclass(frozen=True)
class GronwallReport:
    hypothesis_ok: bool
    gate_ok: bool              # (X(0) + int E) exp(int W) < 1
    conclusion_ok: bool
    margin: float              # min over samples of bound - (X + int D)
    max_hypothesis_violation: float


def gronwall_verify(t, x, d, e, w, alpha: float = 0.0, beta: float = 0.0,
                    tol: float | None = None) -> GronwallReport:
    """Check a damped Gronwall-type inequality on sampled trajectories.

    Hypothesis (finite differences): X' + (1 + beta (1 - X^alpha)) D <= E + W X.
    When the smallness gate (X(0) + int E) exp(int W) < 1 holds, the
    conclusion X(t) + int_0^t D <= (X(0) + int_0^t E) exp(int_0^t W) is
    checked at every sample; ``margin`` is the minimum slack.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    e = np.asarray(e, dtype=float)
    w = np.asarray(w, dtype=float)
    if alpha < 0 or beta < 0:
        raise ValueError("alpha and beta must be >= 0")
    if t.ndim != 1 or len(t) < 3:
        raise ValueError("need at least three samples")
    dts = np.diff(t)
    if np.max(np.abs(dts - dts[0])) > 1e-9 * max(abs(dts[0]), 1e-30):
        raise ValueError("samples must lie on a uniform time grid")
    dt = dts[0]

    dxdt = np.gradient(x, dt, edge_order=2)
    lhs = dxdt + (1.0 + beta * (1.0 - x ** alpha)) * d
    rhs = e + w * x
    if tol is None:
        tol = 1e-6 * max(1.0, float(np.max(np.abs(x))), float(np.max(d)),
                         float(np.max(np.abs(rhs))))
    # endpoints use one-sided stencils; the hypothesis check stays interior
    violation = float(np.max((lhs - rhs)[1:-1]))
    hypothesis_ok = violation <= tol

    int_e = np.concatenate([[0.0], np.cumsum(0.5 * (e[1:] + e[:-1]) * dt)])
    int_w = np.concatenate([[0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * dt)])
    int_d = np.concatenate([[0.0], np.cumsum(0.5 * (d[1:] + d[:-1]) * dt)])
    gate_ok = bool((x[0] + int_e[-1]) * math.exp(int_w[-1]) < 1.0)
    bound = (x[0] + int_e) * np.exp(int_w)
    slack = bound - (x + int_d)
    margin = float(np.min(slack))
    conclusion_ok = bool(gate_ok and margin >= -tol)
    return GronwallReport(hypothesis_ok=hypothesis_ok, gate_ok=gate_ok,
                          conclusion_ok=conclusion_ok, margin=margin,
                          max_hypothesis_violation=violation)


def gamma_weight(u_acc: float, lam: float) -> float:
    """Exponential trajectory weight exp(-lam * int ||u||^2_{proxy}) in (0, 1]."""
    if u_acc < 0 or lam < 0:
        raise ValueError("accumulator and rate must be >= 0")
    return math.exp(-lam * u_acc)


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    residual: float
    intercept: float


def fit_decay_exponent(times, values, window=None) -> DecayFit:
    """Least-squares fit value ~ c (1 + t)^p on log(value) vs log(1 + t).

    ``window`` restricts to t in [window[0], window[1]].  All selected
    values must be positive.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is not None:
        mask = (times >= window[0]) & (times <= window[1])
        times, values = times[mask], values[mask]
    if len(times) < 2:
        raise ValueError("need at least two samples in the fit window")
    if np.any(values <= 0):
        raise ValueError("decay fit requires positive values")
    xs = np.log1p(times)
    ys = np.log(values)
    coef = np.polyfit(xs, ys, 1)
    fit = np.polyval(coef, xs)
    residual = float(np.sqrt(np.mean((ys - fit) ** 2)))
    return DecayFit(exponent=float(coef[0]), residual=residual,
                    intercept=float(coef[1]))


def monotonicity_violations(times, values, tol: float = 0.0) -> list:
    """Indices i where values[i+1] > values[i] + tol (tol is absolute)."""
    values = np.asarray(values, dtype=float)
    bad = np.nonzero(np.diff(values) > tol)[0]
    return list(bad)


def dissipation_inequality_violations(times, grad_sq, lap_sq, eta: float,
                                      tol: float) -> list:
    """Indices where d/dt ||grad B||^2 + eta ||lap B||^2 > tol (FD in time)."""
    times = np.asarray(times, dtype=float)
    grad_sq = np.asarray(grad_sq, dtype=float)
    lap_sq = np.asarray(lap_sq, dtype=float)
    ddt = np.gradient(grad_sq, times)
    bad = np.nonzero(ddt + eta * lap_sq > tol)[0]
    return list(bad)


# ---------------------------------------------------------------------------
# per-trajectory record stream
# ---------------------------------------------------------------------------

@dataclass
class DiagnosticsRecord:
    """Time-stamped bundle of every monitored functional.

    Norm entries are squared norms; accumulators are running trapezoid
    integrals.  Entries that do not apply to a model are None (serialized
    as nan).  ``xr`` maps "xr{r}_{component}" to the running accumulation
    of the Serrin-type criterion integrals.
    """

    time: float
    energy_u: float
    energy_b: float
    diss_u: float
    diss_b: float
    diss_u_acc: float
    diss_b_acc: float
    mv_l2: float
    mv_h1: float
    mv_h2: float
    mv_grad_acc: float
    u_bmo_proxy_sq: float
    ut_acc: float
    gamma_weight: float
    grad_b_l2_sq: float
    delta_b_l2_sq: float
    delta_psi_l2_sq: float | None
    hall_cancellation: float | None
    delta_psi_identity: float | None
    xr: dict = field(default_factory=dict)

    BASE_COLUMNS = (
        "time", "energy_u", "energy_b", "diss_u", "diss_b", "diss_u_acc",
        "diss_b_acc", "mv_l2", "mv_h1", "mv_h2", "mv_grad_acc",
        "u_bmo_proxy_sq", "ut_acc", "gamma_weight", "grad_b_l2_sq",
        "delta_b_l2_sq", "delta_psi_l2_sq", "hall_cancellation",
        "delta_psi_identity",
    )

    def as_dict(self) -> dict:
        out = {name: getattr(self, name) for name in self.BASE_COLUMNS}
        out.update(self.xr)
        return out


@dataclass
class DiagnosticsOptions:
    """Knobs for the record stream.

    ``constant_c`` and ``lambda_c`` are the generic-constant knobs (the
    trajectory weight uses lam = lambda_c / nu); ``xr_orders`` selects the
    accumulated Serrin orders; residual evaluation can be switched off for
    speed.
    """

    constant_c: float = 1.0
    lambda_c: float = 1.0
    xr_orders: tuple = (2, 4, 6)
    compute_residuals: bool = True


class DiagnosticsEngine:
    """Streaming record computation with trapezoid accumulators.

    ``observe(state)`` produces a DiagnosticsRecord; criterion integrals
    (proxy norm, Serrin accumulators, combined-field gradient) advance at
    record cadence, while the energy dissipation integrals advance at step
    cadence through ``accumulate_step`` for a sharper discrete energy
    balance.  Accumulation is sequential per trajectory (single writer).
    """

    def __init__(self, params: PhysParams, options: DiagnosticsOptions | None = None):
        self.params = params
        self.options = options or DiagnosticsOptions()
        for r in self.options.xr_orders:
            if r < 2:
                raise ValueError(f"Serrin orders must satisfy r >= 2, got {r}")
        self.diss_u_acc = 0.0
        self.diss_b_acc = 0.0
        self.ut_acc = 0.0
        self.mv_grad_acc = 0.0
        self.xr_acc: dict = {}
        self._prev_record_integrands = None
        self._prev_record_time = None
        self._step_cache = None
        self._last_record = None

    # -- step-cadence accumulation -------------------------------------

    def _diss_integrands(self, state: MhdState):
        u, b = velocity_and_field(state)
        return (hdot_norm_sq(u, 1) if u is not None else 0.0,
                hdot_norm_sq(b, 1))

    def accumulate_step(self, prev: MhdState, new: MhdState, dt: float):
        if self._step_cache is None or self._step_cache[0] != prev.time:
            gu, gb = self._diss_integrands(prev)
        else:
            gu, gb = self._step_cache[1], self._step_cache[2]
        hu, hb = self._diss_integrands(new)
        self.diss_u_acc = trapezoid_step(self.diss_u_acc, gu, hu, dt)
        self.diss_b_acc = trapezoid_step(self.diss_b_acc, gb, hb, dt)
        self._step_cache = (new.time, hu, hb)

    # -- record-cadence accumulation and assembly -----------------------

    def observe(self, state: MhdState) -> DiagnosticsRecord:
        p = self.params
        opts = self.options
        u, b = velocity_and_field(state)
        grid = state.grid

        energy_u = l2_norm_sq(u) if u is not None else 0.0
        energy_b = l2_norm_sq(b)
        diss_u = hdot_norm_sq(u, 1) if u is not None else 0.0
        diss_b = hdot_norm_sq(b, 1)

        w, mv_norms = magneto_vorticity(state, h=p.hall)
        mv_grad = hdot_norm_sq(w, 1)

        proxy = bmo_proxy_sq(u)

        integrands = {"ut": proxy, "mv_grad": mv_grad}
        xr_fields = None
        if grid.dim == 2:
            xr_fields = xr_component_fields(state)
            for r in opts.xr_orders:
                for name, comps in xr_fields.items():
                    integrands[f"xr{r}_{name}"] = xr_integrand(comps, r)

        self._advance_accumulators(state.time, integrands)

        grad_b = diss_b
        delta_b = hdot_norm_sq(b, 2)

        delta_psi = None
        psi_b3 = self._stream_pair(state)
        if psi_b3 is not None:
            delta_psi = hdot_norm_sq(psi_b3[0], 2)

        hall_res = None
        psi_res = None
        if opts.compute_residuals:
            if state.model in ("hall3d", "hall25d"):
                hall_res = hall_cancellation_residual(state, p)
            if psi_b3 is not None:
                psi_res = delta_psi_identity_residual(*psi_b3)

        lam_base = p.nu if p.nu > 0 else (p.eta if p.eta > 0 else 1.0)
        gamma = gamma_weight(self.ut_acc, opts.lambda_c / lam_base)

        record = DiagnosticsRecord(
            time=state.time,
            energy_u=energy_u, energy_b=energy_b,
            diss_u=diss_u, diss_b=diss_b,
            diss_u_acc=self.diss_u_acc, diss_b_acc=self.diss_b_acc,
            mv_l2=mv_norms["l2"], mv_h1=mv_norms["h1"], mv_h2=mv_norms["h2"],
            mv_grad_acc=self.mv_grad_acc,
            u_bmo_proxy_sq=proxy, ut_acc=self.ut_acc, gamma_weight=gamma,
            grad_b_l2_sq=grad_b, delta_b_l2_sq=delta_b,
            delta_psi_l2_sq=delta_psi,
            hall_cancellation=hall_res, delta_psi_identity=psi_res,
            xr=dict(self.xr_acc),
        )
        self._check_monotone(record)
        self._last_record = record
        return record

    def _stream_pair(self, state: MhdState):
        f = state.fields
        if state.model in ("emhd_stream", "hmhd_stream"):
            return f["psi"], f["b3"]
        if state.model in ("hall25d", "emhd_vector"):
            try:
                return field_to_stream(f["b"])
            except ValueError:
                return None
        return None

    def _advance_accumulators(self, time: float, integrands: dict):
        prev = self._prev_record_integrands
        if prev is not None:
            dt = time - self._prev_record_time
            if dt < 0:
                raise ValueError("records must be observed in time order")
            self.ut_acc = trapezoid_step(self.ut_acc, prev["ut"],
                                         integrands["ut"], dt)
            self.mv_grad_acc = trapezoid_step(self.mv_grad_acc,
                                              prev["mv_grad"],
                                              integrands["mv_grad"], dt)
            for key, val in integrands.items():
                if key.startswith("xr"):
                    self.xr_acc[key] = trapezoid_step(
                        self.xr_acc.get(key, 0.0), prev.get(key, 0.0), val, dt)
        else:
            for key in integrands:
                if key.startswith("xr"):
                    self.xr_acc[key] = 0.0
        self._prev_record_integrands = integrands
        self._prev_record_time = time

    def _check_monotone(self, record: DiagnosticsRecord):
        last = self._last_record
        if last is None:
            return
        eps = 1e-12
        checks = [("ut_acc", 1), ("diss_u_acc", 1), ("diss_b_acc", 1),
                  ("mv_grad_acc", 1), ("gamma_weight", -1)]
        for name, sign in checks:
            new, old = getattr(record, name), getattr(last, name)
            if sign * (new - old) < -eps * max(1.0, abs(old)):
                raise RuntimeError(f"accumulator {name} moved the wrong way")
        for key, val in record.xr.items():
            if val - last.xr.get(key, 0.0) < -eps:
                raise RuntimeError(f"accumulator {key} decreased")


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def record_columns(xr_orders=(2, 4, 6)) -> list:
    """CSV column order: base columns then xr{r}_{component} blocks."""
    cols = list(DiagnosticsRecord.BASE_COLUMNS)
    for r in xr_orders:
        for name in XR_COMPONENTS:
            cols.append(f"xr{r}_{name}")
    return cols


def _format_value(v) -> str:
    if v is None:
        return "nan"
    return repr(float(v))


class RecordWriter:
    """CSV sink: one row per record, documented column order, full precision."""

    def __init__(self, path, xr_orders=(2, 4, 6)):
        self.columns = record_columns(xr_orders)
        self._fh = open(path, "w")
        self._fh.write(",".join(self.columns) + "\n")

    def __call__(self, record: DiagnosticsRecord):
        data = record.as_dict()
        row = ",".join(_format_value(data.get(c)) for c in self.columns)
        self._fh.write(row + "\n")
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_records_csv(records, path, xr_orders=(2, 4, 6)):
    with RecordWriter(path, xr_orders) as writer:
        for rec in records:
            writer(rec)


def write_records_jsonl(records, path):
    """Line-delimited records for machine reading (one JSON object per line)."""
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec.as_dict()) + "\n")
