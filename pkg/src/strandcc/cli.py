"""Command-line front end: ``strandcc {solve,sweep,check}``.

Exit codes: 0 success, 2 configuration or validation error, 3 solver
failure, 4 sweep written but the inverse-square verdict failed.  Every
error is reported on one stderr line starting with ``error:``.
"""

from __future__ import annotations

import argparse
import os
import sys

from .assembly import REGIMES
from .errors import ConfigError, SingularSystemError, StrandCCError
from .flux import flux_spectrum
from .scenario import load_scenario
from .sweep import prepare, evaluate, run_sweep, verify_property
from .tables import fmt, write_rows
from .winding import validate_winding

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VERDICT = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_CONFIG, f"error: {message}\n")


def _fail(code, message):
    print(f"error: {' '.join(str(message).split())}", file=sys.stderr)
    return code


def parse_alphas(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--alphas must be comma-separated numbers, got {text!r}",
                          key="--alphas") from None
    if not values:
        raise ConfigError("--alphas is empty", key="--alphas")
    bad = [v for v in values if not v >= 1.0]
    if bad:
        raise ConfigError(f"--alphas values must be >= 1 (l_EW >= 0), got {bad[0]:g}",
                          key="--alphas")
    return values


def _load_checked(path, regime=None):
    scenario = load_scenario(path)
    if regime is not None:
        scenario = scenario.with_regime(regime)
    report = validate_winding(scenario.winding)
    if report:
        raise ConfigError("invalid winding: " + "; ".join(str(v) for v in report), key="winding")
    return scenario


def write_currents(path, solution):
    rows = []
    for h, k in enumerate(solution.harmonics):
        for j in range(solution.Nsh):
            z = solution.currents[h, j]
            rows.append((int(k), j + 1, fmt(z.real), fmt(z.imag)))
        d = solution.delta_phi[h]
        rows.append((int(k), "dphi", fmt(d.real), fmt(d.imag)))
    write_rows(path, ("harmonic_k", "strand_j", "re_I", "im_I"), rows)


def write_losses(path, op):
    r = op.report
    named = [
        ("alpha_w", float(op.alpha)),
        ("R_strd", r.R_strd),
        ("P_CC", r.P_CC),
        ("P_CC0", r.P_CC0),
        ("P_delta_CC", r.P_delta_CC),
        ("P_delta_CC_active", r.P_delta_CC_active),
        ("Y_residual", r.Y_residual),
        ("P_CC_over_P_CC0", r.normalized),
        ("max_strand_current_peak", op.max_current),
        ("max_strand_current_rms", op.max_rms),
    ]
    lines = ["quantity,value"]
    lines += [f"{name},{fmt(v)}" for name, v in named]
    lines += ["", "strand_j,P_CC_j,I_RMS_j,I_peak_j"]
    peak = op.waveforms.peak
    lines += [
        f"{j + 1},{fmt(r.per_strand[j])},{fmt(r.rms[j])},{fmt(peak[j])}"
        for j in range(len(r.rms))
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_waveforms(path, waves):
    n = waves.strands.shape[1]
    header = ["t"] + [f"strand_{j + 1}" for j in range(n)]
    rows = ([fmt(t)] + [fmt(v) for v in row] for t, row in zip(waves.t, waves.strands))
    write_rows(path, header, rows)


def write_sweep(path, sweep):
    rows = []
    for p in sweep.points:
        a = float(p.alpha)
        r = p.report
        rows.append((fmt(a), fmt(1.0 / a**2), fmt(r.P_CC), fmt(r.P_CC0), fmt(r.P_delta_CC),
                     fmt(p.max_current)))
    comments = [f"regime={sweep.regime}", f"loss_resistance={fmt(sweep.loss_resistance)}"]
    if sweep.fit is not None:
        comments += [f"fit_slope={fmt(sweep.fit.slope)}",
                     f"fit_intercept={fmt(sweep.fit.intercept)}",
                     f"fit_r_squared={fmt(sweep.fit.r_squared)}"]
    write_rows(path, ("alpha_w", "inv_alpha_sq", "P_CC", "P_CC0", "P_delta_CC",
                      "max_strand_current"), rows, comments)


def cmd_solve(args):
    scenario = _load_checked(args.scenario, args.regime)
    os.makedirs(args.out, exist_ok=True)
    try:
        op = evaluate(prepare(scenario), samples=args.samples)
    except SingularSystemError as exc:
        return _fail(EXIT_SOLVER, exc)
    write_currents(os.path.join(args.out, "currents.csv"), op.solution)
    write_losses(os.path.join(args.out, "losses.csv"), op)
    write_waveforms(os.path.join(args.out, "waveforms.csv"), op.waveforms)
    print(f"P_CC={fmt(op.report.P_CC)} W  P_CC0={fmt(op.report.P_CC0)} W  "
          f"alpha_w={fmt(op.alpha)}  -> {args.out}")
    return EXIT_OK


def cmd_sweep(args):
    alphas = parse_alphas(args.alphas)
    scenario = _load_checked(args.scenario, args.regime)
    os.makedirs(args.out, exist_ok=True)
    try:
        sweep = run_sweep(scenario, alphas, samples=args.samples)
    except SingularSystemError as exc:
        return _fail(EXIT_SOLVER, exc)
    write_sweep(os.path.join(args.out, "sweep.csv"), sweep)
    verdict = verify_property(sweep)
    with open(os.path.join(args.out, "verdict.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(verdict.lines()) + "\n")
    print("\n".join(verdict.lines()))
    return EXIT_OK if verdict.passed else EXIT_VERDICT


def cmd_check(args):
    scenario = load_scenario(args.scenario)
    report = validate_winding(scenario.winding)
    # dimension audit: the field must cover every mapped conductor
    try:
        flux_spectrum(scenario.field, scenario.winding, scenario.orders)
    except StrandCCError as exc:
        report = [*report, f"flux: {exc}"]
    if report:
        for v in report:
            print(str(v))
        return _fail(EXIT_CONFIG, f"{len(report)} validation problem(s): {report[0]}")
    w = scenario.winding
    print(f"ok: {len(w.maps)} slots, N_c={w.geometry.N_c}, Nsh={w.Nsh}, "
          f"N_h={scenario.n_harmonics}, regime={scenario.regime}")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="strandcc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, out=True):
        p.add_argument("--scenario", required=True, help="scenario YAML file")
        if out:
            p.add_argument("--out", required=True, help="output directory")
            p.add_argument("--regime", choices=REGIMES, default=None,
                           help="override the scenario's impedance regime")
            p.add_argument("--samples", type=int, default=None,
                           help="waveform samples per period")

    p = sub.add_parser("solve", help="solve one operating point")
    common(p)
    p.set_defaults(func=cmd_solve)
    p = sub.add_parser("sweep", help="sweep alpha_w and check the inverse-square law")
    common(p)
    p.add_argument("--alphas", required=True, help="comma-separated alpha_w values, each >= 1")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("check", help="validate a scenario without solving")
    common(p, out=False)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc)
    except SingularSystemError as exc:
        return _fail(EXIT_SOLVER, exc)
    except StrandCCError as exc:
        return _fail(EXIT_CONFIG, exc)


if __name__ == "__main__":
    sys.exit(main())
