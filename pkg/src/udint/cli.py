"""Command-line experiment driver.

Every command writes a table (CSV with a header row, or JSON) plus, when an
output path is given, a ``<output>.config.json`` sidecar holding the fully
resolved config.  Passing the sidecar back through ``--config`` reproduces
the run.

Commands and their output columns::

    generate      n, x
    discrepancy   n, d_star, c, d             (one row per checkpoint prefix)
    integrate     N, mean, tail_term
    truncated     N, mean, tail_term
    conditions    N, mean, tail_term          (verdicts go to the summary)
    slln          N, mean, tail_term
    lemma-bound   seed, deviation_sq          (one row per replica)

Floats are written with 17 significant digits.  If ``--out`` is omitted the
table goes to ``$UDINT_OUTPUT_DIR/<command>.<format>`` when that variable is
set, otherwise to stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from udint import equidistribution, estimators, integrands, sequences, slln
from udint.errors import InvalidArgument, UdintError

COMMANDS = ("generate", "discrepancy", "integrate", "truncated", "conditions", "slln", "lemma-bound")
COMMON = {"command", "output", "format"}
ALLOWED = {
    "generate": {"sequence", "n"},
    "discrepancy": {"sequence", "n", "checkpoints", "schedule"},
    "integrate": {"sequence", "integrand", "n", "checkpoints", "schedule"},
    "truncated": {"sequence", "integrand", "n", "checkpoints", "schedule", "eps"},
    "conditions": {"sequence", "integrand", "n", "checkpoints", "schedule", "tolerances"},
    "slln": {"sequence", "distribution", "n", "checkpoints", "schedule"},
    "lemma-bound": {"integrand", "n", "eps", "replicas", "seed", "jobs"},
}
REQUIRED = {
    "generate": {"sequence", "n"},
    "discrepancy": {"sequence", "n"},
    "integrate": {"sequence", "integrand", "n"},
    "truncated": {"sequence", "integrand", "n", "eps"},
    "conditions": {"sequence", "integrand", "n"},
    "slln": {"sequence", "distribution", "n"},
    "lemma-bound": {"integrand", "n", "eps", "replicas", "seed"},
}
OUTPUT_DIR_ENV = "UDINT_OUTPUT_DIR"


def fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v)
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".17g")


# Config ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="udint",
        description="Integrals on (0,1) by averaging along uniformly distributed sequences.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON config (or sidecar); its keys override flags")
    parser.add_argument("--seq", help="kronecker:sqrt2|pi|phi|<float>, hybrid_pi, vdc:<base>, prng:<seed>")
    parser.add_argument("--f", dest="f", help=f"integrand: {', '.join(sorted(integrands.CATALOG))}, counterexample")
    parser.add_argument("--p", help="singular point for inv_sqrt_shift, as an exact rational like 1/2")
    parser.add_argument("--c", type=float, help="value for the constant integrand")
    parser.add_argument("--dist", help="bernoulli:<p>, exponential:<rate>, uniform, point_mass:<c>, "
                                       "mixed_atom_uniform:<atom>:<weight>")
    parser.add_argument("--n", type=int, help="number of terms")
    parser.add_argument("--eps", type=float, help="truncation step")
    parser.add_argument("--checkpoints", help="comma-separated N values")
    parser.add_argument("--schedule", choices=("geometric", "all"), help="checkpoint schedule")
    parser.add_argument("--replicas", type=int, help="number of prng replicas (lemma-bound)")
    parser.add_argument("--seed", type=int, help="first replica seed (lemma-bound)")
    parser.add_argument("--jobs", type=int, help="worker threads for lemma-bound")
    parser.add_argument("--tol", type=float, help="tolerance for all three conditions")
    parser.add_argument("--out", help="output path")
    parser.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    return parser


def config_from_args(args: argparse.Namespace) -> dict:
    cfg: dict = {"command": args.command}
    if args.seq is not None:
        cfg["sequence"] = sequences.parse_sequence(args.seq).to_json()
    if args.f is not None:
        ref = {"integrand": args.f}
        if args.p is not None:
            ref["p"] = args.p
        if args.c is not None:
            ref["c"] = args.c
        cfg["integrand"] = ref
    elif args.p is not None or args.c is not None:
        raise InvalidArgument("--p/--c need --f")
    if args.dist is not None:
        cfg["distribution"] = slln.parse_distribution(args.dist).to_json()
    if args.checkpoints is not None:
        cfg["checkpoints"] = [int(s) for s in args.checkpoints.split(",") if s]
    if args.tol is not None:
        cfg["tolerances"] = {"tail": args.tol, "oscillation": args.tol, "gap": args.tol}
    for key, flag in [("n", "n"), ("eps", "eps"), ("schedule", "schedule"), ("replicas", "replicas"),
                      ("seed", "seed"), ("jobs", "jobs"), ("output", "out"), ("format", "format")]:
        value = getattr(args, flag)
        if value is not None:
            cfg[key] = value
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        if "config" in loaded and isinstance(loaded["config"], dict):
            loaded = loaded["config"]
        cfg.update(loaded)
    return cfg


def validate(cfg: dict) -> dict:
    command = cfg.get("command")
    if command not in COMMANDS:
        raise InvalidArgument(f"unknown command {command!r}")
    extra = set(cfg) - COMMON - ALLOWED[command]
    if extra:
        raise InvalidArgument(f"{command} does not accept {', '.join(sorted(extra))}")
    missing = REQUIRED[command] - set(cfg)
    if missing:
        raise InvalidArgument(f"{command} needs {', '.join(sorted(missing))}")
    if "checkpoints" in cfg and "schedule" in cfg:
        raise InvalidArgument("give either checkpoints or schedule, not both")
    if int(cfg["n"]) < 1:
        raise InvalidArgument("n must be >= 1")
    if cfg.get("format", "csv") not in ("csv", "json"):
        raise InvalidArgument(f"unknown format {cfg['format']!r}")
    return cfg


def _checkpoints(cfg: dict) -> list[int]:
    n = int(cfg["n"])
    if "checkpoints" in cfg:
        return [int(c) for c in cfg["checkpoints"]]
    if cfg.get("schedule") == "all":
        return list(range(1, n + 1))
    return estimators.geometric_checkpoints(n)


def _integrand(cfg: dict, spec=None):
    ref = cfg["integrand"]
    name = ref if isinstance(ref, str) else ref.get("integrand")
    if name == "counterexample":
        if spec is None:
            raise InvalidArgument("counterexample needs a sequence to take its points from")
        return integrands.counterexample_integrand(spec.take(int(cfg["n"])))
    return integrands.integrand_from_json(ref)


# Commands ------------------------------------------------------------------------


def _trajectory_table(traj):
    return ["N", "mean", "tail_term"], [list(r) for r in traj.rows()]


def _convergence_summary(f, traj) -> dict:
    # empirical log-log slope of the error; no rate is claimed
    slope = None if f.exact_integral is None else traj.error_slope(f.exact_integral)
    return {"exact_integral": f.exact_integral, "error_slope": slope}


def run_generate(cfg):
    spec = sequences.sequence_from_json(cfg["sequence"])
    xs = spec.take(int(cfg["n"]))
    return ["n", "x"], [[i, x] for i, x in enumerate(xs.tolist(), start=1)], {}


def run_discrepancy(cfg):
    spec = sequences.sequence_from_json(cfg["sequence"])
    xs = spec.take(int(cfg["n"]))
    rows = [list(equidistribution.star_discrepancy(xs[:n]).csv_row()) for n in _checkpoints(cfg)]
    return ["n", "d_star", "c", "d"], rows, {}


def run_integrate(cfg):
    spec = sequences.sequence_from_json(cfg["sequence"])
    f = _integrand(cfg, spec)
    traj = estimators.cesaro_mean(f, spec, int(cfg["n"]), _checkpoints(cfg))
    return (*_trajectory_table(traj), _convergence_summary(f, traj))


def run_truncated(cfg):
    spec = sequences.sequence_from_json(cfg["sequence"])
    f = _integrand(cfg, spec)
    traj = estimators.truncated_mean(f, spec, int(cfg["n"]), float(cfg["eps"]), _checkpoints(cfg))
    return (*_trajectory_table(traj), _convergence_summary(f, traj))


def run_conditions(cfg):
    spec = sequences.sequence_from_json(cfg["sequence"])
    f = _integrand(cfg, spec)
    tol = estimators.Tolerances(**cfg.get("tolerances", {}))
    report = estimators.check_conditions(f, spec, int(cfg["n"]), tol, _checkpoints(cfg))
    return (*_trajectory_table(report.trajectory), report.to_json())


def run_slln(cfg):
    spec = sequences.sequence_from_json(cfg["sequence"])
    dist = slln.distribution_from_json(cfg["distribution"])
    traj = slln.slln_trajectory(dist, spec, int(cfg["n"]), _checkpoints(cfg))
    return (*_trajectory_table(traj), {"mean": dist.mean, "error_slope": traj.error_slope(dist.mean),
                                       "notes": traj.notes})


def lemma_bound_replicas(f, n: int, eps: float, seeds, jobs: int = 1) -> list[float]:
    """Truncated-deviation statistic for each seed, in seed order."""
    def one(seed):
        return estimators.truncated_deviation_sq(f, sequences.Prng(seed).take(n), eps)
    if jobs <= 1:
        return [one(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, seeds))


def run_lemma_bound(cfg):
    f = _integrand(cfg)
    if f.exact_integral is None:
        raise InvalidArgument(f"lemma-bound needs an integrand with an exact integral; {f.name!r} has none")
    n, eps = int(cfg["n"]), float(cfg["eps"])
    replicas, base = int(cfg["replicas"]), int(cfg["seed"])
    if replicas < 2:
        raise InvalidArgument("lemma-bound needs at least 2 replicas")
    seeds = list(range(base, base + replicas))
    values = lemma_bound_replicas(f, n, eps, seeds, int(cfg.get("jobs", 1)))
    mean = math.fsum(values) / replicas
    var = math.fsum((v - mean) ** 2 for v in values) / (replicas - 1)
    stderr = math.sqrt(var / replicas)
    bound = 2 * eps * f.exact_integral
    summary = {"replica_mean": mean, "replica_stderr": stderr, "bound": bound,
               "holds": mean <= bound + 3 * stderr}
    return ["seed", "deviation_sq"], [[s, v] for s, v in zip(seeds, values)], summary


RUNNERS = {
    "generate": run_generate,
    "discrepancy": run_discrepancy,
    "integrate": run_integrate,
    "truncated": run_truncated,
    "conditions": run_conditions,
    "slln": run_slln,
    "lemma-bound": run_lemma_bound,
}


# Output --------------------------------------------------------------------------


def render(columns, rows, summary, form: str) -> str:
    if form == "json":
        doc = {"columns": columns, "rows": rows, "summary": summary}
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _output_path(cfg: dict) -> Path | None:
    if cfg.get("output"):
        return Path(cfg["output"])
    env = os.environ.get(OUTPUT_DIR_ENV)
    if env:
        return Path(env) / f"{cfg['command']}.{cfg.get('format', 'csv')}"
    return None


def run(cfg: dict, stdout=None) -> int:
    """Execute one validated config; returns the process exit status."""
    stdout = stdout or sys.stdout
    cfg = validate(dict(cfg))
    columns, rows, summary = RUNNERS[cfg["command"]](cfg)
    text = render(columns, rows, summary, cfg.get("format", "csv"))
    path = _output_path(cfg)
    if path is None:
        stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        sidecar = path.with_name(path.name + ".config.json")
        sidecar.write_text(json.dumps({"config": cfg, "summary": summary}, indent=2) + "\n")
    if summary:
        print(json.dumps(summary, default=str), file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(config_from_args(args))
    except (UdintError, OSError, ValueError, KeyError) as exc:
        print(f"udint: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
