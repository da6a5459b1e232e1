"""Command-line interface: run, verify, constants, resume.

``run`` executes a configured simulation and writes CSV diagnostics, an
optional JSONL stream, checkpoints and a summary report; a detected
blow-up exits nonzero after printing the path of the failure record.
``verify`` executes the property/acceptance suites and prints a pass/fail
table (exit 0 iff every check passes).  ``constants`` evaluates the
initial-data constants without time stepping.  ``resume`` continues a run
from a checkpoint.

The FFT worker-thread count is controlled by HALLMHD_FFT_WORKERS; setting
HALLMHD_PURE_PYTHON forces the NumPy kernel lane.
"""

import argparse
import os
import sys

from hallmhd import acceptance, diagnostics
from hallmhd.config import ConfigError, RunSpec, load_run_spec
from hallmhd.diagnostics import (
    DiagnosticsEngine,
    RecordWriter,
    calibrate_constant,
    emhd_constants,
    fit_decay_exponent,
    hmhd_constants,
    mv_bound_l2,
    mv_smallness_constant,
    velocity_and_field,
    write_records_jsonl,
)
from hallmhd.integrate import BlowUpError, load_checkpoint, run
from hallmhd.models import MhdState, validate_state
from hallmhd.scenarios import generate_scenario


def _build_initial(spec: RunSpec) -> MhdState:
    state = generate_scenario(spec.scenario, spec.grid, spec.model,
                              seed=spec.seed, **spec.scenario_params)
    validate_state(state)
    return state


def _constants_report(state: MhdState, spec: RunSpec) -> list[str]:
    lines = []
    p = spec.params
    c = spec.diagnostics.constant_c
    eps = spec.epsilon
    u0, b0 = velocity_and_field(state)
    if u0 is not None:
        mv = mv_smallness_constant(u0, b0, p, c=c)
        lines.append(f"mv_smallness_value = {mv.value!r}")
        lines.append(f"mv_smallness_satisfied = {mv.satisfied}")
        lines.append(f"viscosity_ratio = {mv.ratio!r} (ok = {mv.ratio_ok})")
        lines.append(f"initial_energy = {mv.e0!r}")
        lines.append(f"mv0_l2_sq = {mv.mv0_l2_sq!r}")
    if state.grid.dim == 2:
        em = emhd_constants(b0, p.eta, c=c)
        lines.append(f"emhd_h0 = {em.h0!r}")
        lines.append(f"emhd_smallness_lhs = {em.smallness_lhs!r}")
        lines.append(f"emhd_smallness_ok(eps={eps!r}) = {em.smallness_ok(eps)}")
        if u0 is not None and p.nu > 0 and p.eta > 0:
            hm = hmhd_constants(u0, b0, p, c=c)
            lines.append(f"hmhd_e1 = {hm.e1!r}")
            lines.append(f"hmhd_e2 = {hm.e2!r}")
            lines.append(f"hmhd_h1 = {hm.h1!r}")
            lines.append(f"hmhd_s1 = {hm.s1!r}")
            lines.append(f"hmhd_h2 = {hm.h2!r}")
            lines.append(f"hmhd_smallness_lhs = {hm.smallness_lhs!r}")
            lines.append(
                f"hmhd_smallness_ok(eps={eps!r}) = {hm.smallness_ok(eps)}")
    return lines


def _summary_report(spec: RunSpec, state0: MhdState, records) -> list[str]:
    lines = ["# run summary", f"model = {spec.model}",
             f"scenario = {spec.scenario} (seed {spec.seed})",
             f"grid = dim {spec.grid.dim}, n {spec.grid.n}",
             f"records = {len(records)}",
             f"t_final = {records[-1].time!r}"]
    lines += _constants_report(state0, spec)
    p = spec.params
    first, last = records[0], records[-1]
    lines.append(f"final_energy = {last.energy_u + last.energy_b!r}")
    lines.append(f"final_ut_acc (BMO proxy) = {last.ut_acc!r}")
    lines.append(f"final_gamma_weight = {last.gamma_weight!r}")
    for key, val in sorted(last.xr.items()):
        lines.append(f"final_{key} = {val!r}")
    # Calibrated constant for the combined-field L2 bound along this run
    # (needs a C-dependent right-hand side: cross-diffusion or velocity).
    if p.nu > 0 and p.eta > 0 and (last.ut_acc > 0 or p.nu != p.eta):
        lhs = max(rec.mv_l2 for rec in records) + p.nu * last.mv_grad_acc
        e0 = first.energy_u + first.energy_b
        mv0 = first.mv_l2
        u_acc = last.ut_acc

        def rhs(cval):
            return mv_bound_l2(mv0, e0, p, u_acc, c=cval)

        cal = calibrate_constant(lhs, rhs)
        lines.append(f"calibrated_c_mv_l2_bound = {cal!r}")
    if len(records) >= 4 and all(rec.mv_l2 > 0 for rec in records):
        times = [rec.time for rec in records]
        half = times[len(times) // 2]
        try:
            fit = fit_decay_exponent(times, [rec.mv_l2 for rec in records],
                                     window=(half, times[-1]))
            lines.append(f"mv_l2_decay_exponent = {fit.exponent!r}")
        except ValueError:
            pass
    return lines


def cmd_run(args) -> int:
    try:
        spec = load_run_spec(args.config, args.set or ())
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    outdir = args.output_dir or "."
    os.makedirs(outdir, exist_ok=True)
    csv_path = os.path.join(outdir, spec.csv_path)
    if spec.stepper.checkpoint_dir:
        spec.stepper.checkpoint_dir = os.path.join(outdir,
                                                   spec.stepper.checkpoint_dir)
    state0 = _build_initial(spec)
    engine = DiagnosticsEngine(spec.params, spec.diagnostics)
    writer = RecordWriter(csv_path, spec.diagnostics.xr_orders)
    try:
        result = run(state0, spec.params, spec.stepper, engine=engine,
                     sinks=(writer,))
    except BlowUpError as err:
        writer.close()
        print(f"blow-up detected at t = {err.time:.6g}; "
              f"records up to failure: {csv_path}", file=sys.stderr)
        return 2
    writer.close()
    if spec.jsonl_path:
        write_records_jsonl(result.records, os.path.join(outdir, spec.jsonl_path))
    summary = _summary_report(spec, state0, result.records)
    summary_path = os.path.join(outdir, spec.summary_path)
    with open(summary_path, "w") as fh:
        fh.write("\n".join(summary) + "\n")
    print("\n".join(summary))
    print(f"csv: {csv_path}")
    print(f"summary: {summary_path}")
    return 0


def cmd_resume(args) -> int:
    try:
        spec = load_run_spec(args.config, args.set or ())
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    state, params = load_checkpoint(args.checkpoint, expected_grid=spec.grid)
    outdir = args.output_dir or "."
    os.makedirs(outdir, exist_ok=True)
    csv_path = os.path.join(outdir, spec.csv_path)
    if spec.stepper.checkpoint_dir:
        spec.stepper.checkpoint_dir = os.path.join(outdir,
                                                   spec.stepper.checkpoint_dir)
    engine = DiagnosticsEngine(params, spec.diagnostics)
    writer = RecordWriter(csv_path, spec.diagnostics.xr_orders)
    try:
        result = run(state, params, spec.stepper, engine=engine,
                     sinks=(writer,))
    except BlowUpError as err:
        writer.close()
        print(f"blow-up detected at t = {err.time:.6g}; "
              f"records up to failure: {csv_path}", file=sys.stderr)
        return 2
    writer.close()
    print(f"resumed from t = {state.time:.6g} to t = {result.state.time:.6g}")
    print(f"csv: {csv_path}")
    return 0


def cmd_constants(args) -> int:
    try:
        spec = load_run_spec(args.config, args.set or ())
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    state = _build_initial(spec)
    for line in _constants_report(state, spec):
        print(line)
    return 0


def cmd_verify(args) -> int:
    if args.suite == "acceptance":
        names = None
    elif args.suite == "fast":
        names = list(acceptance.FAST_CHECKS)
    else:
        names = [args.suite]
    try:
        results = acceptance.run_checks(names)
    except ValueError as err:
        print(str(err), file=sys.stderr)
        return 1
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 0 if not failed else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hallmhd",
        description="Pseudo-spectral Hall MHD / electron MHD simulator "
                    "and diagnostics engine.")
    sub = parser.add_subparsers(dest="command", required=True)

    override_help = ("override a configuration entry, e.g. "
                     "--set run.t_end=1.0 (repeatable; reaches every field)")

    p_run = sub.add_parser("run", help="execute a configured simulation")
    p_run.add_argument("config", help="path to the run configuration file")
    p_run.add_argument("--output-dir", default=None)
    p_run.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                       help=override_help)
    p_run.set_defaults(fn=cmd_run)

    p_resume = sub.add_parser("resume", help="continue from a checkpoint")
    p_resume.add_argument("checkpoint")
    p_resume.add_argument("config")
    p_resume.add_argument("--output-dir", default=None)
    p_resume.add_argument("--set", action="append",
                          metavar="SECTION.KEY=VALUE", help=override_help)
    p_resume.set_defaults(fn=cmd_resume)

    p_const = sub.add_parser("constants",
                             help="evaluate initial-data constants only")
    p_const.add_argument("config")
    p_const.add_argument("--set", action="append",
                         metavar="SECTION.KEY=VALUE", help=override_help)
    p_const.set_defaults(fn=cmd_constants)

    p_verify = sub.add_parser("verify", help="run the verification suites")
    p_verify.add_argument("suite", nargs="?", default="acceptance",
                          help="'acceptance' (default), 'fast', or a single "
                               "criterion id like A7")
    p_verify.set_defaults(fn=cmd_verify)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
