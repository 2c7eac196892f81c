"""Command-line entry point ``nslab``.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure
(blow-up), 3 verification-suite failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from .config import ConfigError, load_config, load_plan
from .trajectory import SchemaError, TrajectoryRecord

EXIT_OK, EXIT_USAGE, EXIT_BLOWUP, EXIT_SUITE = 0, 1, 2, 3

log = logging.getLogger("nslab")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _out_dir(arg: str | None, fallback: str | None = None) -> Path:
    return Path(arg or fallback or os.environ.get("NSLAB_OUT") or "nslab_out")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _window(text: str) -> tuple[float, float]:
    vals = _floats(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"window must be 's,t', got {text!r}")
    return vals[0], vals[1]


def _with_seed(cfg, seed):
    if seed is None:
        return cfg
    return cfg.model_copy(update={"ic": cfg.ic.model_copy(update={"seed": seed})})


def cmd_run(args) -> int:
    from .experiment import execute_run

    cfg = _with_seed(load_config(args.config), args.seed)
    out = _out_dir(args.out)
    stem = args.name or Path(args.config).stem
    rec = execute_run(cfg, out, stem, args.snapshot or ())
    path = out / f"{stem}.csv"
    if rec.truncated:
        print(f"blow-up: trajectory truncated at t={rec.times[-1]:.6g}; partial record in {path}", file=sys.stderr)
        return EXIT_BLOWUP
    print(f"wrote {path} ({len(rec)} samples)")
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .experiment import run_sweep

    plan = load_plan(args.plan)
    if args.seed is not None:
        plan = plan.model_copy(update={"base": _with_seed(plan.base, args.seed)})
    out = _out_dir(args.out, plan.out)
    res = run_sweep(plan, out, args.jobs)
    est = res.estimate
    print(f"wrote {out / 'defect.json'}: {len(est.cells)} cells, max |defect| = {est.max_abs_defect():.3e}")
    if res.failures:
        for m, msg in res.failures.items():
            print(f"m={m}: {msg}", file=sys.stderr)
        return EXIT_BLOWUP
    return EXIT_OK


def cmd_analyze(args) -> int:
    from .experiment import analyze

    traj = TrajectoryRecord.from_csv(args.trajectory)
    out = _out_dir(args.out)
    rep = analyze(traj, args.alpha, args.window, out)
    print(f"relation residual {rep['relation_residual']:.3e}")
    for c in rep["cells"]:
        print(
            f"alpha={c['alpha']}: {len(c['intervals'])} interval(s), direct={c['direct']:.3e}, "
            f"jump_sum={c['jump_sum']:.3e}, dissipation={c['dissipation']:.3e}"
        )
    print(f"wrote {out / 'excursions.csv'} and {out / 'budget.json'}")
    return EXIT_OK


def cmd_lemmas(args) -> int:
    from .suites import run_lemmas

    rep = run_lemmas(args.selector, seed=args.seed or 0, samples=args.samples)
    out = _out_dir(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "harness.json"
    path.write_text(json.dumps(rep, indent=2, default=float) + "\n")
    for name, suite in rep["suites"].items():
        print(f"{name}: {'PASS' if suite['pass'] else 'FAIL'}")
    print(f"wrote {path}")
    return EXIT_OK if rep["pass"] else EXIT_SUITE


_TREND_COLUMNS = ("m", "alpha", "direct", "jump_sum", "dissipation", "relation_residual", "measure")


def cmd_report(args) -> int:
    src = Path(args.source) if args.source else _out_dir(args.out)
    path = src / "defect.json" if src.is_dir() else src
    try:
        doc = json.loads(path.read_text())
        cells = doc["cells"]
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read defect report {path}: {exc}") from None
    out = _out_dir(args.out, str(path.parent))
    out.mkdir(parents=True, exist_ok=True)
    trend = out / "trend.csv"
    with trend.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_TREND_COLUMNS)
        for c in cells:
            w.writerow([c[k] for k in _TREND_COLUMNS])
    win = doc["window"]
    print(f"window ({win['s']}, {win['t']})")
    print("     m   alpha       direct     jump_sum  dissipation     relation")
    for c in cells:
        print(
            f"{c['m']!s:>6} {c['alpha']:7.4f} {c['direct']:12.4e} {c['jump_sum']:12.4e} "
            f"{c['dissipation']:12.4e} {c['relation_residual']:12.4e}"
        )
    print(f"wrote {trend}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    from .suites import SELECTORS

    p = _Parser(prog="nslab", description="Leray-mollified Navier-Stokes energy-budget laboratory.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="integrate one configuration")
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    r.add_argument("--seed", type=int)
    r.add_argument("--name", help="output file stem (default: config stem)")
    r.add_argument("--snapshot", type=_floats, help="comma-separated sample times to save as .npz")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run an m-sweep and build the defect report")
    s.add_argument("--plan", required=True)
    s.add_argument("--out")
    s.add_argument("--jobs", type=int)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_sweep)

    a = sub.add_parser("analyze", help="excursions and budget of an existing trajectory CSV")
    a.add_argument("trajectory")
    a.add_argument("--alpha", type=_floats, default=[0.5, 0.9, 0.99])
    a.add_argument("--window", type=_window)
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    lm = sub.add_parser("lemmas", help="run verification suites")
    lm.add_argument("selector", choices=SELECTORS)
    lm.add_argument("--out")
    lm.add_argument("--seed", type=int)
    lm.add_argument("--samples", type=int, default=1000, help="interpolation campaign size")
    lm.set_defaults(func=cmd_lemmas)

    rp = sub.add_parser("report", help="tabulate a defect report and write plot-ready trend.csv")
    rp.add_argument("source", nargs="?", help="defect.json or a sweep output directory")
    rp.add_argument("--out")
    rp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


if __name__ == "__main__":
    sys.exit(main())
