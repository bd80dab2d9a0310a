"""Command-line front end: sweeps, optimal strategies, Monte-Carlo validation, NLA.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 I/O error.
Flags override keys in the ``--config`` file, which override defaults.
"""

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor

from qrecover import __version__
from qrecover.mc import McConfig, check_cells, run_trajectories
from qrecover.nla import ScissorsConfig, induced_kraus, scissors_truncate
from qrecover.channels import reversal_ops
from qrecover.optimize import OutcomePolicy, optimal_r_oneway_phi, optimal_r_twoway_phi, strategy_report
from qrecover.swap import RepeaterModel

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 0, 1, 2, 3
MIN_VALIDATE_TRIALS = 10_000
SIGMA_LIMIT = 5.0
R_GRID_STEP = 0.05

DEFAULTS = {
    "model": "two-way",
    "policy": "phi",
    "damping_range": "0:1:0.01",
    "reversing": "optimal",
    "trials": 1_000_000,
    "seed": 42,
    "eta_range": "0.5:0.95:0.05",
    "amplitude": 1 / math.sqrt(2),
}

SWEEP_COLUMNS = ["D", "R", "concurrence_unrecovered", "concurrence_recovered", "P", "B", "Q"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x):
    """12 significant digits; ``inf``/``nan`` spelled out."""
    if isinstance(x, str):
        return x
    return f"{float(x):.12g}"


def parse_range(text):
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"range must look like start:stop:step, got {text!r}") from None
    if step <= 0 or start > stop:
        raise UsageError(f"invalid range {text!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(n)]


def read_config(path):
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from exc
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _setting(args, config, key, convert=str):
    value = getattr(args, key, None)
    if value is None and key in config:
        try:
            value = convert(config[key])
        except ValueError:
            raise UsageError(f"bad value for {key} in config: {config[key]!r}") from None
    if value is None:
        value = DEFAULTS.get(key)
    return value


def _model(name):
    try:
        return RepeaterModel(name)
    except ValueError:
        raise UsageError(f"unknown model {name!r}") from None


def _policy(name):
    try:
        return OutcomePolicy(name)
    except ValueError:
        raise UsageError(f"unknown policy {name!r}") from None


def _reversing(text):
    """``None`` for 'optimal', ``'grid'``, or a float in [0, 1]."""
    if text == "optimal":
        return None
    if text == "grid":
        return "grid"
    try:
        r = float(text)
    except ValueError:
        raise UsageError(f"--reversing must be a number, 'optimal' or 'grid', got {text!r}") from None
    if not 0 <= r <= 1:
        raise UsageError(f"reversing strength {r} outside [0, 1]")
    return r


def _damping_values(args, config):
    single = _setting(args, config, "damping", float)
    if single is not None:
        if not 0 <= single <= 1:
            raise UsageError(f"damping strength {single} outside [0, 1]")
        return [single]
    values = parse_range(_setting(args, config, "damping_range"))
    if values[0] < 0 or values[-1] > 1:
        raise UsageError("damping range must stay within [0, 1]")
    return values


def _emit(rows, header, out):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {out}: {exc.strerror}") from exc


def _report_row(rep):
    return [rep.D, rep.R_used, rep.concurrence_unrecovered, rep.concurrence,
            rep.reversal_success_prob, rep.branch_prob, rep.bell_pair_cost]


def sweep_rows(model, policy, damping, reversing, workers=4):
    """Rows are computed concurrently and returned in ascending-D order."""
    strengths = parse_range(f"0:1:{R_GRID_STEP}") if reversing == "grid" else [reversing]

    def rows_at(D):
        return [_report_row(strategy_report(model, policy, D, R)) for R in strengths]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return [row for chunk in pool.map(rows_at, damping) for row in chunk]


def cmd_sweep(args, config):
    model = _model(_setting(args, config, "model"))
    policy = _policy(_setting(args, config, "policy"))
    reversing = _reversing(_setting(args, config, "reversing"))
    rows = sweep_rows(model, policy, _damping_values(args, config), reversing)
    _emit(rows, SWEEP_COLUMNS, _setting(args, config, "out"))
    return EXIT_OK


def cmd_optimize(args, config):
    model = _model(_setting(args, config, "model"))
    policy = _policy(_setting(args, config, "policy"))
    D = _setting(args, config, "damping", float)
    if D is None:
        raise UsageError("optimize needs --damping")
    if not 0 <= D <= 1:
        raise UsageError(f"damping strength {D} outside [0, 1]")
    reversing = _reversing(_setting(args, config, "reversing"))
    if reversing == "grid":
        raise UsageError("optimize takes a single reversing strength or 'optimal'")
    rep = strategy_report(model, policy, D, reversing)
    print(f"model        {model.value}")
    print(f"policy       {policy.value}")
    print(f"D            {fmt(rep.D)}")
    print(f"R            {fmt(rep.R_used)}")
    print(f"C_unrecov    {fmt(rep.concurrence_unrecovered)}")
    print(f"C            {fmt(rep.concurrence)}")
    print(f"P            {fmt(rep.reversal_success_prob)}")
    print(f"B            {fmt(rep.branch_prob)}")
    print(f"Q            {fmt(rep.bell_pair_cost)}")
    out = _setting(args, config, "out")
    if out is not None:
        _emit([_report_row(rep)], SWEEP_COLUMNS, out)
    return EXIT_OK


def validation_grid():
    """Fixed (model, D, R) points checked by ``validate``."""
    return [
        (RepeaterModel.TWO_WAY, 0.0, 0.0),
        (RepeaterModel.TWO_WAY, 0.3, optimal_r_twoway_phi(0.3).R_opt),
        (RepeaterModel.TWO_WAY, 0.52, 0.774),
        (RepeaterModel.ONE_WAY, 0.4, 0.0),
        (RepeaterModel.ONE_WAY, 0.5, optimal_r_oneway_phi(0.5).R_opt),
        (RepeaterModel.ONE_WAY, 0.62, 0.9),
    ]


def run_validation(seed, trials, corrupt=0.0):
    """Returns ``(rows, worst_z)`` for the Monte-Carlo vs closed-form suite."""
    rows = []
    worst = 0.0
    for stream, (model, D, R) in enumerate(validation_grid()):
        cfg = McConfig(model, D, R, trials, seed=seed, stream=stream)
        stats = run_trajectories(cfg)
        for cell in check_cells(cfg, stats, corrupt=corrupt):
            worst = max(worst, cell.z)
            status = "ok" if cell.z <= SIGMA_LIMIT else "FAIL"
            rows.append([model.value, D, R, cell.label, cell.expected, cell.observed, cell.z, status])
    return rows, worst


def cmd_validate(args, config):
    trials = _setting(args, config, "trials", int)
    seed = _setting(args, config, "seed", int)
    if trials < MIN_VALIDATE_TRIALS:
        raise UsageError(f"validate needs at least {MIN_VALIDATE_TRIALS} trials, got {trials}")
    if not 0 <= seed < 2**64:
        raise UsageError("seed must be a 64-bit unsigned integer")
    rows, worst = run_validation(seed, trials, corrupt=args.corrupt)
    header = ["model", "D", "R", "cell", "expected", "observed", "z", "status"]
    _emit(rows, header, _setting(args, config, "out"))
    failed = sum(r[-1] == "FAIL" for r in rows)
    print(f"# {len(rows)} cells, {failed} beyond {SIGMA_LIMIT:g} sigma, worst z = {worst:.3f}",
          file=sys.stderr)
    return EXIT_VALIDATION if failed else EXIT_OK


def nla_rows(etas, c1):
    c0 = math.sqrt(1 - c1 * c1)
    rows = []
    for eta in etas:
        cfg = ScissorsConfig(eta)
        out0, out1, p = scissors_truncate(c0, c1, eta)
        r1 = reversal_ops(cfg.reversing_strength)[0]
        dev = float(abs(induced_kraus(eta) - r1).max())
        ratio = (out1 / out0 * c0 / c1).real
        rows.append([eta, cfg.gain, cfg.reversing_strength, ratio, p, dev])
    return rows


def cmd_nla(args, config):
    if args.eta is not None:
        etas = [args.eta]
    else:
        etas = parse_range(_setting(args, config, "eta_range"))
    for eta in etas:
        if not 0.5 <= eta < 1:
            raise UsageError(f"transmissivity {eta} outside [0.5, 1)")
    c1 = _setting(args, config, "amplitude", float)
    if not 0 < c1 < 1:
        raise UsageError("--amplitude must lie in (0, 1)")
    header = ["eta", "gain", "R", "output_ratio", "herald_prob", "kraus_deviation"]
    _emit(nla_rows(etas, c1), header, _setting(args, config, "out"))
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file; flags take precedence")
    common.add_argument("--out", help="output CSV path (stdout if omitted)")
    common.add_argument("--model", choices=[m.value for m in RepeaterModel])
    common.add_argument("--policy", choices=[p.value for p in OutcomePolicy])

    parser = _Parser(prog="qrecover", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("sweep", parents=[common], help="closed-form sweep over D")
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--damping", type=float)
    group.add_argument("--damping-range", dest="damping_range", metavar="A:B:STEP")
    sp.add_argument("--reversing", help="float, 'optimal' or 'grid'")
    sp.set_defaults(func=cmd_sweep)

    op = sub.add_parser("optimize", parents=[common], help="optimal strategy at one D")
    op.add_argument("--damping", type=float)
    op.add_argument("--reversing", help="float or 'optimal'")
    op.set_defaults(func=cmd_optimize)

    vp = sub.add_parser("validate", parents=[common], help="Monte-Carlo vs closed forms")
    vp.add_argument("--trials", type=int)
    vp.add_argument("--seed", type=int)
    vp.add_argument("--corrupt", type=float, default=0.0, help=argparse.SUPPRESS)
    vp.set_defaults(func=cmd_validate)

    np_ = sub.add_parser("nla", parents=[common], help="quantum-scissors NLA table")
    np_.add_argument("--eta", type=float)
    np_.add_argument("--eta-range", dest="eta_range", metavar="A:B:STEP")
    np_.add_argument("--amplitude", type=float, help="single-photon amplitude c1 of the input")
    np_.set_defaults(func=cmd_nla)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = read_config(args.config) if args.config else {}
        return args.func(args, config)
    except UsageError as exc:
        print(f"qrecover: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"qrecover: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"qrecover: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
