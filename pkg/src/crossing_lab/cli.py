"""``crossing-lab`` command line.

Exit codes: 0 success, 1 invalid input, 2 numeric degeneracy, 3 failed
statistical gate.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

from .distribution import conditional_distribution, default_K, moments
from .errors import NumericalError, SimulationError
from .law import BranchingLaw, CrossingSet, ValidationError, dump_model, load_model, parse_indices, validate
from .montecarlo import Caps, compare, estimate_distribution, survival_divergence_check
from .presets import PRESETS, preset
from .roots import min_root_B, min_root_bbar

MAX_DIMENSION = 4

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_GATE = 0, 1, 2, 3


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    law: BranchingLaw
    cset: CrossingSet
    initial_state: int
    K: int
    n_paths: int
    caps: Caps
    seed: int
    fmt: str
    output: str | None


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crossing-lab", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("model")
    src.add_argument("--model", help="JSON model file")
    src.add_argument("--preset", choices=PRESETS)
    src.add_argument("--mu", type=float)
    src.add_argument("--lambda", dest="lam", type=float)
    src.add_argument("--p", type=float)
    src.add_argument("--q", type=float)
    src.add_argument("--batch-rates", type=_floats, help="comma separated lambda_1,lambda_2,...")
    src.add_argument("--rate", type=float, default=1.0, help="pure-death rate")
    src.add_argument("--set", dest="cset", help="crossing set, e.g. 0,2 (default: model file, else 0)")
    run = common.add_argument_group("run")
    run.add_argument("--initial-state", "-i", type=int, default=1)
    run.add_argument("--K", type=int)
    run.add_argument("--paths", type=int, default=10**5)
    run.add_argument("--max-steps", type=int, default=10**4)
    run.add_argument("--max-state", type=int, default=10**6)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    run.add_argument("--output", "-o")

    sub = parser.add_subparsers(dest="command", required=True)
    v = sub.add_parser("validate", parents=[common], help="check the model")
    v.add_argument("--save-model", help="write the validated model to this JSON file")
    sub.add_parser("roots", parents=[common], help="print rho and rho_0")
    sub.add_parser("dist", parents=[common], help="exact conditional crossing distribution")
    m = sub.add_parser("moments", parents=[common], help="mean and variance of one crossing count")
    m.add_argument("--component", type=int, help="b-index of the count (default: first in set)")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo estimate")
    c = sub.add_parser("compare", parents=[common], help="exact vs Monte Carlo z-score gate")
    c.add_argument("--threshold", type=float, default=1e-3)
    c.add_argument("--z-limit", type=float, default=4.0)
    s = sub.add_parser("survival-check", parents=[common], help="crossing counts of surviving paths")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--L", type=int, required=True)
    s.add_argument("--min-fraction", type=float, help="exit 3 if the fraction is below this")
    return parser


def make_config(args) -> RunConfig:
    if (args.model is None) == (args.preset is None):
        raise UsageError("give exactly one of --model or --preset")
    if args.model:
        law, cset = load_model(args.model)
        if args.cset:
            cset = CrossingSet(parse_indices(args.cset))
        cset = cset or CrossingSet((0,))
    else:
        indices = parse_indices(args.cset) if args.cset else (0,)
        law, cset = preset(args.preset, mu=args.mu, lam=args.lam, p=args.p, q=args.q,
                           batch_rates=args.batch_rates, rate=args.rate, crossing_set=indices)
    validate(law, cset).raise_if_failed()
    if len(cset) > MAX_DIMENSION:
        raise UsageError(f"crossing set has {len(cset)} indices; the CLI allows at most {MAX_DIMENSION}")
    K = args.K if args.K is not None else default_K(cset)
    if K < 1:
        raise UsageError("K must be >= 1")
    if args.initial_state < 1:
        raise UsageError("initial state must be >= 1")
    return RunConfig(law, cset, args.initial_state, K, args.paths, Caps(args.max_steps, args.max_state),
                     args.seed, args.fmt, args.output)


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(cfg: RunConfig, payload: dict, csv_text: str | None = None) -> None:
    if cfg.fmt == "csv" and csv_text is not None:
        text = csv_text
    else:
        text = json.dumps(payload, indent=2) + "\n"
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        return _dispatch(args, cfg)
    except (NumericalError, SimulationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValidationError, UsageError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def _dispatch(args, cfg: RunConfig) -> int:
    law, cset = cfg.law, cfg.cset
    cmd = args.command
    if cmd == "validate":
        report = validate(law, cset)
        if args.save_model:
            dump_model(law, cset, args.save_model)
        _emit(cfg, report.to_dict())
        return EXIT_OK if report.ok else EXIT_INVALID

    if cmd == "roots":
        rho, rho0 = min_root_B(law), min_root_bbar(law, cset)
        _emit(cfg, {
            "rho": rho.value, "rho_residual": rho.residual, "rho_iterations": rho.iterations,
            "rho0": rho0.value, "rho0_residual": rho0.residual, "rho0_iterations": rho0.iterations,
            "crossing_set": list(cset.indices),
        })
        return EXIT_OK

    if cmd == "dist":
        dist = conditional_distribution(law, cset, cfg.initial_state, cfg.K)
        _emit(cfg, dist.to_json(), dist.to_csv())
        return EXIT_OK

    if cmd == "moments":
        k = args.component if args.component is not None else cset.indices[0]
        rep = moments(law, cset, k, cfg.K)
        _emit(cfg, rep.to_json())
        return EXIT_OK

    if cmd == "simulate":
        emp = estimate_distribution(law, cset, cfg.initial_state, cfg.n_paths, cfg.caps, cfg.seed)
        rows = [list(r["index"]) + [r["count"], repr(r["value"])] for r in emp.to_json()["empirical"]]
        header = [f"Y_{k}" for k in cset.indices] + ["count", "frequency"]
        _emit(cfg, emp.to_json(), _rows_csv(header, rows))
        return EXIT_OK

    if cmd == "compare":
        exact = conditional_distribution(law, cset, cfg.initial_state, cfg.K)
        emp = estimate_distribution(law, cset, cfg.initial_state, cfg.n_paths, cfg.caps, cfg.seed)
        rep = compare(exact, emp, args.threshold, args.z_limit)
        payload = rep.to_json()
        payload["censor_rate"] = emp.censor_rate
        rows = [list(c.index) + [c.exact, c.empirical, c.stderr, c.z] for c in rep.cells]
        header = [f"Y_{k}" for k in cset.indices] + ["exact", "empirical", "stderr", "z"]
        _emit(cfg, payload, _rows_csv(header, rows))
        return EXIT_OK if rep.passed else EXIT_GATE

    if cmd == "survival-check":
        rep = survival_divergence_check(law, args.m, args.L, cfg.n_paths, cfg.caps, cfg.seed)
        _emit(cfg, rep.to_json())
        if args.min_fraction is not None and rep.fraction < args.min_fraction:
            return EXIT_GATE
        return EXIT_OK
    raise UsageError(f"unknown command {cmd}")


def main() -> None:
    sys.exit(run())
