"""Command-line front end.

``analyze``  scan a FunctionSpec JSON file for almost periods, with the small-set
             mass defect and ergodic means of ``|f|``;
``solve``    run a named scenario and evaluate its checks;
``report``   print the summary of an output directory and verify checksums.

Exit codes: 0 success, 2 schema/usage error, 3 numerical failure
(non-finite values, no Picard convergence), 4 failed check.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from . import io
from .corpus import SCENARIOS, run_scenario, scenario
from .ergodic import WeightMeasure, ergodic_profile
from .errors import NoConvergence, NonFinite, SchemaError, StepanovError, UnknownScenario
from .functions import FunctionSpec, from_json, sample
from .grid import GridWindow
from .metrics import MetricKind, mp_prime_defect, scan_almost_periods

EXIT_OK, EXIT_SCHEMA, EXIT_NUMERIC, EXIT_CHECK = 0, 2, 3, 4

log = logging.getLogger("stepanov")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stepanov", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="almost-period scans of a FunctionSpec")
    a.add_argument("--spec", required=True, help="FunctionSpec JSON file")
    a.add_argument("--metric", action="append", default=None,
                   help="uniform | sp:<p> | smeasure (repeatable; default uniform)")
    a.add_argument("--eps", type=float, default=0.1)
    a.add_argument("--tau-min", type=float, default=0.0)
    a.add_argument("--tau-max", type=float, default=10.0)
    a.add_argument("--tau-step", type=float, default=0.01)
    a.add_argument("--t0", type=float, default=0.0)
    a.add_argument("--t1", type=float, default=100.0)
    a.add_argument("--dt", type=float, default=1e-2)
    a.add_argument("--p", type=float, default=1.0, help="exponent of the small-set defect")
    a.add_argument("--delta-mass", type=float, default=1e-3)
    a.add_argument("--out", required=True)

    s = sub.add_parser("solve", help="run a scenario")
    s.add_argument("--scenario", required=True, choices=SCENARIOS)
    s.add_argument("--n", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--dt", type=float)
    s.add_argument("--t0", type=float)
    s.add_argument("--t1", type=float)
    s.add_argument("--tau", type=float, action="append", help="shift for the distribution test (repeatable)")
    s.add_argument("--export-members", type=int, default=100,
                   help="members written to ensemble.csv (default 100)")
    s.add_argument("--out", required=True)

    r = sub.add_parser("report", help="summarise an output directory")
    r.add_argument("--out", required=True)
    return ap


# ---------------------------------------------------------------- analyze


def _load_spec(path: str) -> FunctionSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read spec file: {exc}") from exc
    spec = from_json(text)
    if not isinstance(spec, FunctionSpec):
        raise SchemaError("analyze needs a time-function spec, not a parametric one")
    return spec


def cmd_analyze(args) -> int:
    spec = _load_spec(args.spec)
    try:
        metrics = [MetricKind.parse(m) for m in (args.metric or ["uniform"])]
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    window = GridWindow(args.t0, args.t1, args.dt)
    path = sample(spec, window)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written, summary = [], []
    for m in metrics:
        scan = scan_almost_periods(
            spec, args.eps, m, (args.tau_min, args.tau_max), args.tau_step, window=window
        )
        tag = m.label.replace(":", "")
        written.append(io.scan_csv(out / f"scan_{tag}.csv", scan))
        written.append(io.periods_csv(out / f"periods_{tag}.csv", scan))
        summary.append({
            "check": f"scan[{m.label}]",
            "expected": f"tau with distance <= {args.eps}",
            "observed": {"count": len(scan), "max_gap": scan.max_gap},
            "tolerance": args.eps,
            "pass": True,
        })
    defect = mp_prime_defect(path, args.p, min(args.delta_mass, 1.0))
    written.append(io.write_json(out / "defect.json", {"p": args.p, "delta_mass": args.delta_mass, "defect": defect}))

    # ergodic means need a window symmetric about 0
    half = 0.5 * (args.t1 - args.t0)
    sym_window = GridWindow(-half, half, args.dt)
    sym = sample(spec, sym_window)
    R = min(half, float(sym_window.times[-1]))  # the last node may fall short of ``half``
    radii = [R * f for f in (0.125, 0.25, 0.5, 1.0)]
    prof = ergodic_profile(sym, WeightMeasure.lebesgue(), radii)
    written.append(io.write_csv(out / "ergodic.csv", ["r", "mean"], prof))
    written.append(io.write_json(out / "summary.json", summary))

    man = io.RunManifest("analyze", args.spec, _overrides(args, ("metric", "eps", "tau_min", "tau_max", "tau_step", "t0", "t1", "dt")), None, str(out))
    man.record(written)
    man.write()
    for rec in summary:
        print(f"{rec['check']}: {rec['observed']['count']} periods, max gap {rec['observed']['max_gap']:.6g}")
    return EXIT_OK


def _overrides(args, names) -> dict:
    return {k: getattr(args, k) for k in names if getattr(args, k, None) is not None}


# ------------------------------------------------------------------ solve


def cmd_solve(args) -> int:
    scn = scenario(args.scenario).with_overrides(
        n=args.n, seed=args.seed, dt=args.dt, t0=args.t0, t1=args.t1, taus=args.tau
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore" if not args.verbose else "default", RuntimeWarning)
        run = run_scenario(scn)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = [io.write_json(out / "scenario.json", scn.to_dict())]
    if run.path is not None:
        name = "path.csv" if scn.name == "affine_levitan" else "z_rms.csv"
        written.append(io.write_csv(out / name, ["t", "x"], zip(run.path.times, run.path.scalar)))
    for label, ens in sorted(run.ensembles.items()):
        suffix = "" if len(run.ensembles) == 1 else f"_{label}"
        written.append(io.ensemble_csv(out / f"ensemble{suffix}.csv", ens, args.export_members))
        if ens.diagnostics:
            written.append(io.diagnostics_csv(out / f"diagnostics{suffix}.csv", ens))
    if run.apd_rows:
        written.append(io.write_json(out / "laws.json", [r.to_dict() for r in run.apd_rows]))
        written.append(io.write_csv(
            out / "laws.csv", ["tau", "supDistance", "supDBL", "accepted"],
            ((r.tau, r.sup_distance, r.sup_dbl, r.accepted) for r in run.apd_rows),
        ))
    summary = [r.to_dict() for r in run.records]
    written.append(io.write_json(out / "summary.json", summary))
    if run.extra:
        written.append(io.write_json(out / "extra.json", run.extra))

    man = io.RunManifest("solve", scn.name, _overrides(args, ("n", "dt", "t0", "t1", "tau")), scn.config.seed, str(out))
    man.record(written)
    man.write()
    _print_records(summary)
    return EXIT_OK if run.passed else EXIT_CHECK


def _print_records(records) -> None:
    for r in records:
        status = "PASS" if r["pass"] else ("note" if r.get("advisory") else "FAIL")
        obs = r["observed"]
        obs = f"{obs:.6g}" if isinstance(obs, float) else obs
        print(f"[{status}] {r['check']}: observed {obs}, expected {r['expected']}")


# ----------------------------------------------------------------- report


def cmd_report(args) -> int:
    out = Path(args.out)
    try:
        man = io.RunManifest.load(out)
        summary = json.loads((out / "summary.json").read_text())
    except (OSError, json.JSONDecodeError, TypeError) as exc:
        raise SchemaError(f"{out} is not an output directory: {exc}") from exc
    print(f"{man.command} {man.target} seed={man.seed} overrides={man.overrides}")
    _print_records(summary)
    ok = man.verify(out)
    bad = [k for k, v in ok.items() if not v]
    print(f"checksums: {len(ok) - len(bad)}/{len(ok)} match" + (f" (mismatch: {', '.join(bad)})" if bad else ""))
    failed = any(not r["pass"] and not r.get("advisory") for r in summary)
    return EXIT_CHECK if failed or bad else EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "solve": cmd_solve, "report": cmd_report}


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SCHEMA if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (SchemaError, UnknownScenario) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (NonFinite, NoConvergence, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except StepanovError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
