"""Command-line interface: ``ssvd fit | rank | simulate | signal | replay``.

Exit codes: 0 success, 1 I/O or configuration problem, 2 algorithmic
failure (the error class name is printed on stderr).
"""
import argparse
from dataclasses import replace
import hashlib
import json
from pathlib import Path
import sys
import time

import numpy as np

from . import __version__
from .core import SsvdConfig, fit
from .errors import NoSignal, SsvdError
from .rank import DEFAULT_RMAX, DEFAULT_SPLITS, estimate_rank
from .screening import DEFAULT_ALPHA, DEFAULT_BETA
from .simlab.model import run_scenario
from .simlab.scenario import ScenarioError, load_scenario
from .simlab.signals import FUNCTIONS, make_test_signal
from .simlab.wavelets import dwt_symmlet8
from .thresholds import DEFAULT_BOOT, SCAD_A, ThresholdKind

CSV_FORMAT = "%.17g"


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors: exit 1, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _rank_arg(text):
    if text == "auto":
        return text
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer or 'auto', got {text!r}")
    if k < 1:
        raise argparse.ArgumentTypeError("rank must be at least 1")
    return k


def _positive_int(text):
    k = int(text)
    if k < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return k


def read_matrix(path, header=False):
    """Parse a numeric CSV (one row per line) into a float64 array."""
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as err:
        raise OSError(f"cannot read {path}: {err.strerror or err}") from err
    if header:
        lines = lines[1:]
    rows = []
    for i, line in enumerate(lines, 2 if header else 1):
        if not line.strip():
            continue
        try:
            rows.append([float(tok) for tok in line.split(",")])
        except ValueError:
            raise ValueError(f"{path}:{i}: not a comma-separated list of numbers") from None
        if len(rows[-1]) != len(rows[0]):
            raise ValueError(f"{path}:{i}: expected {len(rows[0])} fields, got {len(rows[-1])}")
    if not rows:
        raise ValueError(f"{path}: no data rows")
    x = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{path}: matrix contains non-finite values")
    return x


def write_matrix(path, m):
    np.savetxt(path, np.atleast_2d(np.asarray(m, dtype=np.float64)), fmt=CSV_FORMAT, delimiter=",")


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, default=_json_default) + "\n")


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _manifest(args, argv, config, timings, inputs, extra=None):
    doc = {
        "command": args.command,
        "version": __version__,
        "argv": argv,
        "config": config,
        "seed": getattr(args, "seed", None),
        "inputs": {k: {"path": str(Path(p).resolve()), "sha256": _sha256(p)} for k, p in inputs.items()},
        "timings": timings,
    }
    doc.update(extra or {})
    write_json(Path(args.out) / "manifest.json", doc)


def _resolved_argv(args, keys):
    # every option spelled out, so a replay does not depend on defaults
    argv = [args.command]
    for key in keys:
        value = getattr(args, key)
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            if value:
                argv.append(flag)
        elif key == "input":
            argv.insert(1, str(Path(value).resolve()))
        elif value is not None:
            argv += [flag, str(value)]
    return argv


def _outdir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_fit(args):
    timings = {}
    t0 = time.perf_counter()
    x = read_matrix(args.input, args.header)
    timings["read"] = time.perf_counter() - t0
    out = _outdir(args)
    extra = {}
    rank = args.rank
    if rank == "auto":
        t0 = time.perf_counter()
        est = estimate_rank(x, args.rmax, args.beta, args.alpha, seed=args.seed, n_splits=args.splits)
        timings["rank"] = time.perf_counter() - t0
        extra["rank_estimate"] = est.to_dict()
        write_json(out / "rank.json", est.to_dict())
        if est.r_hat == 0:
            _manifest(args, args.argv, {"rank": "auto"}, timings, {"matrix": args.input}, extra)
            raise NoSignal("estimated rank is 0: no row/column structure stands out from the noise")
        rank = est.r_hat
    kind = ThresholdKind(args.threshold, args.scad_a)
    config = SsvdConfig(rank=rank, kind=kind, epsilon=args.epsilon, max_iters=args.max_iters,
                        beta=args.beta, alpha=args.alpha, m_boot=args.boot, seed=args.seed,
                        threads=args.threads)
    t0 = time.perf_counter()
    result = fit(x, config)
    timings["fit"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    write_matrix(out / "u_hat.csv", result.u_hat)
    write_matrix(out / "v_hat.csv", result.v_hat)
    write_matrix(out / "d_hat.csv", result.d_hat[None, :])
    write_json(out / "support.json", {
        "u_support": [s.tolist() for s in result.u_support],
        "v_support": [s.tolist() for s in result.v_support],
    })
    write_json(out / "diagnostics.json", {
        "iterations": result.iterations,
        "converged": result.converged,
        "sigma_hat": result.sigma_hat,
        "screened_rows": result.init.selection.rows.tolist(),
        "screened_cols": result.init.selection.cols.tolist(),
        "distance_trace": [list(d) for d in result.distance_trace],
        "threshold_trace": [
            {"u": {"gamma": gu.gamma.tolist(), "method": gu.method_used},
             "v": {"gamma": gv.gamma.tolist(), "method": gv.method_used}}
            for gu, gv in result.threshold_trace
        ],
    })
    timings["write"] = time.perf_counter() - t0
    resolved = config.to_dict()
    resolved.update(rank_mode=args.rank, rmax=args.rmax, splits=args.splits, header=args.header)
    _manifest(args, args.argv, resolved, timings, {"matrix": args.input}, extra)
    if not result.converged:
        print(f"warning: no convergence within {args.max_iters} sweeps; last iterate written",
              file=sys.stderr)
    print(f"rank {result.rank}: d_hat = {np.array2string(result.d_hat, precision=6)}; "
          f"{result.iterations} sweeps; output in {out}")
    return 0


def cmd_rank(args):
    timings = {}
    t0 = time.perf_counter()
    x = read_matrix(args.input, args.header)
    timings["read"] = time.perf_counter() - t0
    out = _outdir(args)
    t0 = time.perf_counter()
    est = estimate_rank(x, args.rmax, args.beta, args.alpha, seed=args.seed, n_splits=args.splits)
    timings["rank"] = time.perf_counter() - t0
    write_json(out / "rank.json", est.to_dict())
    config = {"rmax": args.rmax, "beta": args.beta, "alpha": args.alpha, "seed": args.seed,
              "splits": args.splits, "folds": [2, 2], "header": args.header}
    _manifest(args, args.argv, config, timings, {"matrix": args.input})
    print(f"r_hat = {est.r_hat}")
    return 0


def cmd_simulate(args):
    scenario = load_scenario(args.scenario)
    overrides = {k: getattr(args, k) for k in ("reps", "seed") if getattr(args, k) is not None}
    if overrides:
        scenario = replace(scenario, **overrides)
    out = _outdir(args)
    total = scenario.reps

    def progress(rep, record):
        status = record["ssvd"].get("error", "ok")
        print(f"rep {rep + 1}/{total}: {status}", file=sys.stderr)

    t0 = time.perf_counter()
    report = run_scenario(scenario, threads=args.threads, progress=None if args.quiet else progress)
    elapsed = time.perf_counter() - t0
    write_json(out / "report.json", report.to_dict())
    write_json(out / "timing.json", report.timing_summary())
    table = report.table()
    (out / "summary.txt").write_text(table)
    inputs = {"scenario": args.scenario} if Path(args.scenario).is_file() else {}
    _manifest(args, args.argv, scenario.to_dict(), {"simulate": elapsed}, inputs,
              {"scenario_ref": args.scenario})
    sys.stdout.write(table)
    return 0


def cmd_signal(args):
    values = make_test_signal(args.name, args.length).values
    if args.dwt:
        values = dwt_symmlet8(values)
    if args.out:
        write_matrix(args.out, values[:, None])
    else:
        np.savetxt(sys.stdout, values[:, None], fmt=CSV_FORMAT)
    return 0


def cmd_replay(args):
    try:
        manifest = json.loads(Path(args.manifest).read_text())
        argv = list(manifest["argv"])
    except (OSError, ValueError, KeyError) as err:
        raise ValueError(f"{args.manifest}: not a run manifest ({err})") from err
    for name, info in manifest.get("inputs", {}).items():
        if _sha256(info["path"]) != info["sha256"]:
            raise ValueError(f"input {name} ({info['path']}) changed since the recorded run")
    if "--out" in argv:
        i = argv.index("--out")
        del argv[i:i + 2]
    return main(argv + ["--out", args.out])


def build_parser():
    parser = _Parser(prog="ssvd", description="Sparse SVD by fast iterative thresholding.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    screen = _Parser(add_help=False)
    screen.add_argument("--beta", type=float, default=DEFAULT_BETA,
                        help="quantile of |x| used as the Huber cutoff (default %(default)s)")
    screen.add_argument("--alpha", type=float, default=DEFAULT_ALPHA,
                        help="family-wise error rate of the screening tests (default %(default)s)")
    screen.add_argument("--seed", type=int, default=0)
    screen.add_argument("--header", action="store_true", help="skip the first line of the CSV")
    screen.add_argument("--rmax", type=int, default=DEFAULT_RMAX,
                        help="largest candidate rank for --rank auto / rank (default %(default)s)")
    screen.add_argument("--splits", type=_positive_int, default=DEFAULT_SPLITS,
                        help="random fold partitions averaged in rank selection")
    screen.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("fit", parents=[screen], help="sparse SVD of a CSV matrix")
    p.add_argument("input", help="CSV file, one matrix row per line")
    p.add_argument("--rank", type=_rank_arg, default=1, help="target rank or 'auto'")
    p.add_argument("--threshold", choices=("hard", "soft", "scad"), default="hard")
    p.add_argument("--scad-a", type=float, default=SCAD_A)
    p.add_argument("--epsilon", type=float, default=1e-8)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--boot", type=int, default=DEFAULT_BOOT, help="bootstrap replications")
    p.add_argument("--threads", type=_positive_int, default=1)
    p.set_defaults(handler=cmd_fit, keys=(
        "input", "rank", "threshold", "scad_a", "epsilon", "max_iters", "beta", "alpha", "boot",
        "seed", "threads", "header", "rmax", "splits", "out"))

    p = sub.add_parser("rank", parents=[screen], help="estimate the rank by bi-cross-validation")
    p.add_argument("input", help="CSV file, one matrix row per line")
    p.set_defaults(handler=cmd_rank, keys=(
        "input", "rmax", "beta", "alpha", "seed", "header", "splits", "out"))

    p = sub.add_parser("simulate", help="run a simulation scenario")
    p.add_argument("scenario", help="scenario file or bundled scenario name")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=_positive_int, default=1, help="reps run in parallel")
    p.add_argument("--reps", type=int, default=None, help="override the scenario's reps")
    p.add_argument("--seed", type=int, default=None, help="override the scenario's seed")
    p.add_argument("--quiet", action="store_true", help="no per-rep progress on stderr")
    p.set_defaults(handler=cmd_simulate, keys=("scenario", "threads", "reps", "seed", "quiet", "out"))

    p = sub.add_parser("signal", help="write a test signal (or its wavelet coefficients) as CSV")
    p.add_argument("name", choices=sorted(FUNCTIONS))
    p.add_argument("--length", type=int, default=1024)
    p.add_argument("--dwt", action="store_true", help="Symmlet-8 coefficients instead of samples")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(handler=cmd_signal, keys=())

    p = sub.add_parser("replay", help="re-run a recorded command from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_replay, keys=())
    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as stop:
        return int(stop.code or 0)
    if args.command == "simulate":
        args.argv = _resolved_argv(args, ("threads", "reps", "seed", "quiet", "out"))
        args.argv.insert(1, args.scenario if not Path(args.scenario).is_file()
                         else str(Path(args.scenario).resolve()))
    else:
        args.argv = _resolved_argv(args, args.keys)
    try:
        return args.handler(args)
    except SsvdError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2
    except (OSError, ValueError, ScenarioError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
