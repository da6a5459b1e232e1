"""Verification suite: one callable per acceptance criterion.

Each check returns a CheckResult with a pass flag and a human-readable
detail line; the CLI ``verify`` subcommand and the pytest acceptance module
both run this registry, so there is exactly one implementation of every
criterion and tolerance.
"""

import math
import time as _time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from hallmhd import splitting
from hallmhd.diagnostics import (
    DiagnosticsEngine,
    DiagnosticsOptions,
    delta_psi_identity_residual,
    dissipation_inequality_violations,
    gronwall_verify,
    hall_cancellation_residual,
    log_sobolev_ratio,
    monotonicity_violations,
)
from hallmhd.integrate import StepperConfig, run
from hallmhd.models import MhdState, PhysParams
from hallmhd.scenarios import generate_scenario, random_scalar_field
from hallmhd.spectral import PeriodicGrid, SpectralVector, l2_norm_sq


@dataclass
class CheckResult:
    criterion: str
    passed: bool
    detail: str
    elapsed: float = 0.0


def _result(criterion, passed, detail, t0):
    return CheckResult(criterion, bool(passed), detail, _time.monotonic() - t0)


# ---------------------------------------------------------------------------
# shared runs
# ---------------------------------------------------------------------------

@lru_cache(maxsize=1)
def _vortex_run():
    """128^2 two-field run reused by the energy-balance and monitor checks."""
    grid = PeriodicGrid(2, 128)
    p = PhysParams(nu=0.1, eta=0.1, hall=1.0)
    state = generate_scenario("orszag_tang_like", grid, "hall25d")
    cfg = StepperConfig(t_end=2.0, diag_interval=0.02)
    engine = DiagnosticsEngine(p, DiagnosticsOptions(xr_orders=(2, 4),
                                                     compute_residuals=False))
    t0 = _time.monotonic()
    result = run(state, p, cfg, engine=engine)
    return result.records, _time.monotonic() - t0


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def check_a1_energy_inequality() -> CheckResult:
    """Discrete energy balance on the vortex run.

    E(t) + 2 nu int ||grad u||^2 + 2 eta int ||grad B||^2 must stay within
    1e-4 E(0) of E(0) at every record, and E(t) must be nonincreasing within
    1e-8 E(0) per record.
    """
    t0 = _time.monotonic()
    records, wall = _vortex_run()
    nu = eta = 0.1
    e0 = records[0].energy_u + records[0].energy_b
    worst = 0.0
    energies = []
    for rec in records:
        e = rec.energy_u + rec.energy_b
        energies.append(e)
        balance = e + 2.0 * nu * rec.diss_u_acc + 2.0 * eta * rec.diss_b_acc
        worst = max(worst, abs(balance - e0))
    mono_bad = monotonicity_violations([r.time for r in records], energies,
                                       tol=1e-8 * e0)
    passed = worst <= 1e-4 * e0 and not mono_bad
    detail = (f"max |balance - E0| = {worst:.3e} (tol {1e-4 * e0:.3e}), "
              f"{len(mono_bad)} monotonicity violations, run wall {wall:.1f}s")
    return _result("A1", passed, detail, t0)


def check_a2_hall_cancellation() -> CheckResult:
    """Cancellation residual <= 1e-10 on 20 random band-limited states."""
    t0 = _time.monotonic()
    worst = 0.0
    count = 0
    cases = [
        (PeriodicGrid(3, 32), "hall3d"),
        (PeriodicGrid(2, 128), "hall25d"),
    ]
    branches = [PhysParams(0.1, 0.1, 1.0), PhysParams(0.15, 0.05, 1.0)]
    for grid, model in cases:
        for p in branches:
            for seed in range(5):
                state = generate_scenario("random_divfree", grid, model,
                                          seed=seed, amplitude_u=0.8,
                                          amplitude_b=1.0)
                res = hall_cancellation_residual(state, p)
                worst = max(worst, res)
                count += 1
    passed = worst <= 1e-10
    return _result("A2", passed,
                   f"max residual {worst:.3e} over {count} states (tol 1e-10)",
                   t0)


def check_a3_delta_psi_identity() -> CheckResult:
    """Integration-by-parts residual <= 1e-10 on 50 random 128^2 pairs."""
    t0 = _time.monotonic()
    grid = PeriodicGrid(2, 128)
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(50):
        psi = random_scalar_field(grid, rng)
        b3 = random_scalar_field(grid, rng)
        worst = max(worst, delta_psi_identity_residual(psi, b3))
    passed = worst <= 1e-10
    return _result("A3", passed,
                   f"max residual {worst:.3e} over 50 pairs (tol 1e-10)", t0)


def check_a4_zero_mv_persistence() -> CheckResult:
    """Vanishing combined field stays zero: sup ||B + w|| <= 1e-8 ||B0||."""
    t0 = _time.monotonic()
    grid = PeriodicGrid(2, 128)
    p = PhysParams(nu=0.1, eta=0.1, hall=1.0)
    state = generate_scenario("zero_mv", grid, "hall25d", seed=3,
                              amplitude_u=0.25, kmax=6)
    b0_norm = math.sqrt(l2_norm_sq(state.fields["b"]))
    engine = DiagnosticsEngine(p, DiagnosticsOptions(compute_residuals=False))
    cfg = StepperConfig(t_end=1.0, diag_interval=0.05)
    result = run(state, p, cfg, engine=engine)
    sup_mv = max(math.sqrt(rec.mv_l2) for rec in result.records)
    passed = sup_mv <= 1e-8 * b0_norm
    return _result("A4", passed,
                   f"sup ||B + w|| = {sup_mv:.3e} "
                   f"(tol {1e-8 * b0_norm:.3e})", t0)


def check_a5_decoupled_equivalence() -> CheckResult:
    """Full two-field run on the zero combined-field manifold matches the
    closed magnetic evolution: relative L2 difference <= 1e-6 at T = 0.5."""
    t0 = _time.monotonic()
    grid = PeriodicGrid(3, 32)
    p = PhysParams(nu=0.1, eta=0.1, hall=1.0)
    full0 = generate_scenario("zero_mv", grid, "hall3d", seed=5,
                              amplitude_u=0.3, kmax=3)
    dec0 = MhdState("decoupled_b", {"b": full0.fields["b"].copy()})
    cfg = StepperConfig(t_end=0.5, dt=0.005, diag_interval=0.5)
    full = run(full0, p, cfg,
               engine=DiagnosticsEngine(p, DiagnosticsOptions(
                   compute_residuals=False)))
    dec = run(dec0, p, cfg,
              engine=DiagnosticsEngine(p, DiagnosticsOptions(
                  compute_residuals=False)))
    bf = full.state.fields["b"]
    bd = dec.state.fields["b"]
    diff = math.sqrt(l2_norm_sq(SpectralVector(grid, bf.coeffs - bd.coeffs)))
    ref = math.sqrt(l2_norm_sq(bd))
    rel = diff / ref
    passed = rel <= 1e-6
    return _result("A5", passed, f"relative L2 difference {rel:.3e} (tol 1e-6)",
                   t0)


def check_a6_gradient_monotonicity() -> CheckResult:
    """Small third-curl regime: ||grad B|| nonincreasing and the dissipation
    inequality d/dt ||grad B||^2 + eta ||lap B||^2 <= 1e-6 ||grad B0||^2."""
    t0 = _time.monotonic()
    grid = PeriodicGrid(2, 128)
    eta = 0.1
    p = PhysParams(nu=eta, eta=eta, hall=1.0)
    # ||lap psi0||^2 <= 1e-3 eta^2 = 1e-5
    state = generate_scenario("small_curl3", grid, "emhd_stream", seed=9,
                              amplitude=3.0e-3, kmax=6)
    engine = DiagnosticsEngine(p, DiagnosticsOptions(compute_residuals=False))
    cfg = StepperConfig(t_end=5.0, diag_interval=0.05)
    result = run(state, p, cfg, engine=engine)
    times = [rec.time for rec in result.records]
    grad = [math.sqrt(rec.grad_b_l2_sq) for rec in result.records]
    grad_sq = [rec.grad_b_l2_sq for rec in result.records]
    lap_sq = [rec.delta_b_l2_sq for rec in result.records]
    mono_bad = monotonicity_violations(times, grad, tol=1e-8 * grad[0])
    diss_bad = dissipation_inequality_violations(
        times, grad_sq, lap_sq, eta, tol=1e-6 * grad_sq[0])
    passed = not mono_bad and not diss_bad
    return _result("A6", passed,
                   f"{len(mono_bad)} monotonicity and {len(diss_bad)} "
                   f"dissipation-inequality violations over "
                   f"{len(times)} records", t0)


def check_a7_splitting_exponents() -> CheckResult:
    """Radial heat surrogate recovers -(3/2 - sigma) within 0.05."""
    t0 = _time.monotonic()
    details = []
    passed = True
    for sigma in (-1.0, -0.5, 0.0, 0.5, 1.0):
        fit = splitting.verify_splitting_decay(sigma)
        expected = -(1.5 - sigma)
        err = abs(fit.exponent - expected)
        passed = passed and err <= 0.05
        details.append(f"sigma={sigma:+.1f}: p={fit.exponent:.4f} "
                       f"(want {expected:.2f}, err {err:.3f})")
    return _result("A7", passed, "; ".join(details), t0)


def check_a8_beta_bound() -> CheckResult:
    """Endpoint-singular quadrature matches pi and pi sqrt(2) to 1e-8."""
    t0 = _time.monotonic()
    v1 = splitting.beta_convolution_bound(0.5, 0.5)
    v2 = splitting.beta_convolution_bound(0.75, 0.25)
    e1 = abs(v1 - math.pi)
    e2 = abs(v2 - math.pi * math.sqrt(2.0))
    passed = e1 <= 1e-8 and e2 <= 1e-8
    return _result("A8", passed,
                   f"|B(1/2,1/2) - pi| = {e1:.2e}, "
                   f"|B(3/4,1/4) - pi sqrt(2)| = {e2:.2e}", t0)


# Hand value for the single-mode ratio: 1 / (pi sqrt(2) (1 + sqrt(ln 3))).
LOG_SOBOLEV_PIN = 0.10989294924102548


def check_a9_log_sobolev() -> CheckResult:
    """Pinned single-mode ratio plus finiteness/homogeneity on an ensemble."""
    t0 = _time.monotonic()
    grid = PeriodicGrid(2, 128)
    x1, _ = grid.coordinates()
    from hallmhd.spectral import SpectralScalar

    f = SpectralScalar.from_physical(grid, np.cos(x1))
    pinned = log_sobolev_ratio(f)
    pin_err = abs(pinned - LOG_SOBOLEV_PIN)

    big = PeriodicGrid(2, 256)
    rng = np.random.default_rng(17)
    worst_homog = 0.0
    ensemble_max = 0.0
    all_finite = True
    for _ in range(200):
        g = random_scalar_field(big, rng, kmax=40)
        r = log_sobolev_ratio(g)
        all_finite = all_finite and math.isfinite(r)
        ensemble_max = max(ensemble_max, r)
        r_scaled = log_sobolev_ratio(37.0 * g)
        worst_homog = max(worst_homog, abs(r_scaled - r) / r)
    passed = pin_err <= 1e-3 and all_finite and worst_homog <= 1e-12
    return _result("A9", passed,
                   f"pinned ratio {pinned:.6f} (err {pin_err:.2e}), ensemble "
                   f"max {ensemble_max:.4f}, homogeneity defect "
                   f"{worst_homog:.2e}", t0)


def check_a10_gronwall() -> CheckResult:
    """Equality case of the damped inequality: margin within 1e-6."""
    t0 = _time.monotonic()
    t = np.arange(0.0, 1.0 + 1e-12, 1e-3)
    x = 0.9 * np.exp(-t)
    d = 0.9 * np.exp(-t)
    zeros = np.zeros_like(t)
    report = gronwall_verify(t, x, d, zeros, zeros, alpha=0.0, beta=0.0)
    passed = (report.hypothesis_ok and report.gate_ok and report.conclusion_ok
              and abs(report.margin) <= 1e-6)
    return _result("A10", passed,
                   f"margin {report.margin:.2e}, hypothesis violation "
                   f"{report.max_hypothesis_violation:.2e}", t0)


def check_a11_blowup_monitors() -> CheckResult:
    """Component-criterion accumulators on the vortex run are finite,
    monotone and reported for r in {2, 4}; no blow-up occurred."""
    t0 = _time.monotonic()
    records, _ = _vortex_run()
    keys = [f"xr{r}_{name}" for r in (2, 4)
            for name in ("grad_b3", "grad_bt", "grad_w3", "grad_wt")]
    ok = True
    issues = []
    for key in keys:
        series = [rec.xr.get(key) for rec in records]
        if any(v is None for v in series):
            ok = False
            issues.append(f"{key} missing")
            continue
        if not all(math.isfinite(v) for v in series):
            ok = False
            issues.append(f"{key} not finite")
        if monotonicity_violations([r.time for r in records],
                                   [-v for v in series], tol=1e-12):
            ok = False
            issues.append(f"{key} not monotone")
    finals = ", ".join(f"{k}={records[-1].xr[k]:.3e}" for k in keys[:4])
    detail = "; ".join(issues) if issues else f"all monotone and finite; {finals}"
    return _result("A11", ok, detail, t0)


ALL_CHECKS = (
    ("A1", check_a1_energy_inequality),
    ("A2", check_a2_hall_cancellation),
    ("A3", check_a3_delta_psi_identity),
    ("A4", check_a4_zero_mv_persistence),
    ("A5", check_a5_decoupled_equivalence),
    ("A6", check_a6_gradient_monotonicity),
    ("A7", check_a7_splitting_exponents),
    ("A8", check_a8_beta_bound),
    ("A9", check_a9_log_sobolev),
    ("A10", check_a10_gronwall),
    ("A11", check_a11_blowup_monitors),
)

FAST_CHECKS = ("A2", "A3", "A7", "A8", "A9", "A10")


def run_checks(names=None, verbose: bool = True) -> list:
    """Run the selected criteria and print one pass/fail line per criterion."""
    selected = dict(ALL_CHECKS)
    if names:
        missing = [n for n in names if n not in selected]
        if missing:
            raise ValueError(f"unknown criteria: {missing}")
        items = [(n, selected[n]) for n in names]
    else:
        items = list(ALL_CHECKS)
    results = []
    for name, fn in items:
        res = fn()
        results.append(res)
        if verbose:
            status = "PASS" if res.passed else "FAIL"
            print(f"{name:<4} {status}  [{res.elapsed:7.2f}s]  {res.detail}")
    return results
