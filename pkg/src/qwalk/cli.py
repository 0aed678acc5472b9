"""``qwalk`` command-line driver: trajectories, sweeps, spectra, fits and model grids.

Every command writes CSV (or key=value text for ``fit``) to ``--out`` or
stdout. Exit status is 0 on success, 1 for an invalid request and 2 when a
numerical step (eigensolver, fit) fails.
"""

import argparse
from concurrent.futures import ProcessPoolExecutor
import os
import sys

import numpy as np

from qwalk import collapsed, error_model, spectral
from qwalk.config import ConfigError, WalkConfig
from qwalk.csvio import MalformedCSVError, read_table, render
from qwalk.trajectory import default_budget

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2
MAX_GRID_STEPS = 5_000_000
SWEEP_HEADER = ("m", "delta", "p_max", "t_opt", "p0_observed", "n_db")
COMPARE_HEADER = ("m", "delta", "dp1", "dp2", "dp1_minus_dp2", "dp2_n_eq_m", "dp1_minus_dp2_n_eq_m")


class InvalidRequest(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for numeric failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _m_range(text: str):
    a, sep, b = text.partition(":")
    try:
        lo, hi = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A:B, got {text!r}") from None
    if not sep or lo > hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return list(range(lo, hi + 1))


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qwalk", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, grid=False):
        if grid:
            sp.add_argument("--m-range", type=_m_range, help="hypercube dimensions A:B inclusive")
            sp.add_argument("--m", type=int, help="single hypercube dimension")
            sp.add_argument("--workers", type=_positive_int, default=None, help="worker processes (default QWALK_WORKERS or 1)")
        else:
            sp.add_argument("--m", type=int, required=True, help="hypercube dimension")
        sp.add_argument("--delta", type=float, action="append", help="phase error (repeatable)")
        sp.add_argument("--out", help="output path (default stdout)")

    sp = sub.add_parser("simulate", help="success probability and gap per iteration")
    common(sp)
    sp.add_argument("--steps", type=_nonneg_int, help="iterations (default ceil(2.5 (pi/4) sqrt(2^m)))")

    for name, text in (("sweep", "peak success rate over an (m, delta) grid"),
                       ("compare", "walk vs Grover probability gaps over a grid")):
        sp = sub.add_parser(name, help=text)
        common(sp, grid=True)
        sp.add_argument("--steps", type=_positive_int, help="iterations per trajectory")

    sp = sub.add_parser("spectrum", help="eigenvalues of one iteration, flagging the search pair")
    common(sp)

    sp = sub.add_parser("model", help="closed-form success rate on a (delta, t) grid")
    common(sp)
    sp.add_argument("--steps", type=_nonneg_int, help="t grid is 0..steps (default budget for m)")
    sp.add_argument("--exponent", choices=("hypercube", "database"), default="database",
                    help="use 2^m (hypercube) or 2^(m-1) (database size) in the formulas")

    sp = sub.add_parser("fit", help="refit model constants from a sweep CSV")
    sp.add_argument("--input", required=True, help="CSV written by the sweep command")
    sp.add_argument("--kind", action="append", choices=error_model.FIT_KINDS, help="constants to fit (default pmax and topt)")
    sp.add_argument("--out", help="output path (default stdout)")
    return p


def _single_delta(args) -> float:
    deltas = args.delta or [0.0]
    if len(deltas) != 1:
        raise InvalidRequest(f"{args.command} takes a single --delta")
    return deltas[0]


def _config(m, delta) -> WalkConfig:
    try:
        return WalkConfig(m, delta)
    except ConfigError as exc:
        raise InvalidRequest(str(exc)) from None


def _grid(args):
    if (args.m is None) == (args.m_range is None):
        raise InvalidRequest("give exactly one of --m and --m-range")
    ms = [args.m] if args.m is not None else args.m_range
    deltas = sorted(set(args.delta or [0.0]))
    for m in ms:
        for d in deltas:
            _config(m, d)
    return ms, deltas


def _workers(args) -> int:
    if args.workers is not None:
        return args.workers
    env = os.environ.get("QWALK_WORKERS", "1")
    try:
        n = int(env)
    except ValueError:
        raise InvalidRequest(f"QWALK_WORKERS must be an integer, got {env!r}") from None
    if n < 1:
        raise InvalidRequest("QWALK_WORKERS must be >= 1")
    return n


def _check_budget(ms, n_deltas, steps):
    total = sum((steps or default_budget(m)) * (n_deltas + 1) for m in ms)
    if total > MAX_GRID_STEPS:
        raise InvalidRequest(f"grid needs {total} walk iterations, above the limit of {MAX_GRID_STEPS}; shrink the m range")


def _observe(task):
    m, delta, steps = task
    return error_model.observe(m, delta, steps)


def run_grid(ms, deltas, steps=None, workers=1) -> dict:
    """Observations keyed by ``(m, delta)``; delta 0 is always included."""
    keys = [(m, d) for m in ms for d in sorted(set(deltas) | {0.0})]
    tasks = [(m, d, steps) for m, d in keys]
    if workers == 1:
        results = [_observe(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_observe, tasks))
    return dict(zip(keys, results))


def sweep_rows(ms, deltas, steps=None, workers=1) -> list:
    obs = run_grid(ms, deltas, steps, workers)
    return [
        (m, float(d), obs[m, d].p_max, obs[m, d].t_opt, obs[m, 0.0].p_max, error_model.database_exponent(m))
        for m in ms for d in deltas
    ]


def compare_rows(ms, deltas, steps=None, workers=1) -> list:
    obs = run_grid(ms, deltas, steps, workers)
    rows = []
    for m in ms:
        for d in deltas:
            dp1 = obs[m, d].gap
            dp2 = float(error_model.grover_gap_model(error_model.database_exponent(m), d))
            dp2_m = float(error_model.grover_gap_model(m, d))
            rows.append((m, float(d), dp1, dp2, dp1 - dp2, dp2_m, dp1 - dp2_m))
    return rows


def cmd_simulate(args) -> str:
    cfg = _config(args.m, _single_delta(args))
    steps = default_budget(cfg.m) if args.steps is None else args.steps
    traj = collapsed.evolve(cfg, steps)
    rows = zip(traj.t.tolist(), traj.p_success.tolist(), traj.p_gap.tolist())
    return render(("t", "p_success", "p_gap"), rows)


def cmd_sweep(args) -> str:
    ms, deltas = _grid(args)
    _check_budget(ms, len(deltas), args.steps)
    return render(SWEEP_HEADER, sweep_rows(ms, deltas, args.steps, _workers(args)))


def cmd_compare(args) -> str:
    ms, deltas = _grid(args)
    _check_budget(ms, len(deltas), args.steps)
    return render(COMPARE_HEADER, compare_rows(ms, deltas, args.steps, _workers(args)))


def spectrum_rows(cfg: WalkConfig) -> list:
    report = spectral.uuprime_spectrum(cfg)
    report.require_pair()
    ev = report.eigenvalues
    flags = set(report.near_unit)
    order = np.lexsort((ev.real, np.round(np.angle(ev), 12)))
    return [(float(ev[k].real), float(ev[k].imag), int(k in flags)) for k in order]


def cmd_spectrum(args) -> str:
    cfg = _config(args.m, _single_delta(args))
    if cfg.m < 4:
        raise InvalidRequest("spectrum needs m >= 4")
    return render(("re", "im", "flagged"), spectrum_rows(cfg))


def model_rows(m, deltas, t_max, exponent="database") -> list:
    n = m if exponent == "hypercube" else error_model.database_exponent(m)
    base = error_model.walk_p0(m)
    ts = np.arange(t_max + 1)
    rows = []
    for d in deltas:
        p = error_model.p_model(n, d, ts, p0_value=base)
        rows.extend(zip(ts.tolist(), [float(d)] * len(ts), p.tolist()))
    return rows


def cmd_model(args) -> str:
    deltas = sorted(set(args.delta or [0.0]))
    for d in deltas:
        _config(args.m, d)
    t_max = default_budget(args.m) if args.steps is None else args.steps
    return render(("t", "delta", "p_model"), model_rows(args.m, deltas, t_max, args.exponent))


def fit_samples(rows, kind):
    """Fit samples from parsed sweep rows (database exponent, observed p0)."""
    if kind == "critical":
        return error_model.critical_points([(r["m"], r["delta"], r["p_max"], r["p0_observed"]) for r in rows])
    col = "p_max" if kind == "pmax" else "t_opt"
    return [
        error_model.FitSample(error_model.database_exponent(r["m"]), r["delta"], r[col], r["p0_observed"])
        for r in rows
    ]


def cmd_fit(args) -> str:
    try:
        with open(args.input) as fh:
            text = fh.read()
    except OSError as exc:
        raise InvalidRequest(f"cannot read {args.input}: {exc.strerror}") from None
    try:
        rows = read_table(text, ("m", "delta", "p_max", "t_opt", "p0_observed"))
    except MalformedCSVError as exc:
        raise InvalidRequest(f"{args.input}: {exc}") from None
    out = []
    for kind in args.kind or ("pmax", "topt"):
        res = error_model.fit_constants(fit_samples(rows, kind), kind)
        out.append(res.to_text())
    return "".join(out)


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "spectrum": cmd_spectrum,
    "model": cmd_model,
    "fit": cmd_fit,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = COMMANDS[args.command](args)
    except InvalidRequest as exc:
        print(f"qwalk: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (spectral.EigensolverError, spectral.SpectralPropertyError, error_model.DegenerateFitError) as exc:
        print(f"qwalk: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out is None:
        sys.stdout.write(text)
        return EXIT_OK
    try:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"qwalk: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
