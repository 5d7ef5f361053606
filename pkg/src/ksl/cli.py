"""Command-line front end: ``ksl {threshold,sample,certify,simulate,sweep,concentration}``.

Exit codes: 0 success (or certified), 2 certificate inconclusive, 1 error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import concentration as conc
from .dynamics import SYNCHRONIZED, default_step, integrate, random_phases
from .errors import InvalidArgument
from .graphs import load_graph, sample_er, sample_rgg, save_graph
from .sphere import save_points, threshold
from .spectral import check_certificate
from .sweep import load_config, run_sweep

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2


def _sidecar(path) -> Path:
    return Path(str(path) + ".json")


def cmd_threshold(args) -> int:
    print(repr(threshold(args.p, args.d).t))
    return EXIT_OK


def cmd_sample(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.model == "er":
        g = sample_er(args.n, args.p, rng, args.selfloops, seed=args.seed)
        cloud = None
    else:
        if args.d is None:
            raise InvalidArgument("--d is required for the rgg model")
        g, cloud = sample_rgg(args.n, args.p, args.d, rng, args.selfloops, seed=args.seed)
    save_graph(g, args.out)
    _sidecar(args.out).write_text(json.dumps(g.provenance.to_dict()) + "\n")
    if args.points:
        if cloud is None:
            raise InvalidArgument("--points only applies to the rgg model")
        save_points(cloud, args.points)
    return EXIT_OK


def _density(given, graph) -> float:
    if given is not None:
        return given
    side = _sidecar(graph)
    if side.exists():
        p = json.loads(side.read_text()).get("p")
        if p is not None:
            return p
    raise InvalidArgument("no density given and none recorded in a sidecar file")


def cmd_certify(args) -> int:
    g = load_graph(args.graph)
    if args.selfloops:
        g = g.with_self_loops()
    rep = check_certificate(g, _density(args.p0, args.graph), args.tol, rng=np.random.default_rng(args.seed))
    print(rep.to_json())
    return EXIT_OK if rep.verdict == "certified" else EXIT_INCONCLUSIVE


def cmd_simulate(args) -> int:
    g = load_graph(args.graph)
    rng = np.random.default_rng(args.seed)
    step = args.step if args.step is not None else default_step(g, args.step_scale)
    results = []
    for k in range(args.inits):
        res = integrate(g, random_phases(g.n, rng), step=step, t_max=args.t_max,
                        sample_every=args.sample_every if args.trajectory else None)
        if args.trajectory:
            Path(args.trajectory).mkdir(parents=True, exist_ok=True)
            res.write_trajectory(Path(args.trajectory) / f"init{k}.csv")
        results.append(res)
    rows = [{"init": k, "status": r.status, "steps": r.steps, "t": r.final.t,
             "final_energy": r.final_energy, "final_grad_inf_norm": r.final_grad_inf_norm,
             "final_rho1_abs": r.final_rho1_abs} for k, r in enumerate(results)]
    rate = sum(r.status == SYNCHRONIZED for r in results) / len(results) if results else float("nan")
    print(json.dumps({"inits": rows, "sync_rate": rate}))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    out = run_sweep(cfg, out=args.out, workers=args.workers)
    print(out)
    return EXIT_OK


def cmd_concentration(args) -> int:
    rng = np.random.default_rng(args.seed)
    if not (args.which == "degree" and args.graph) and (args.n is None or args.p is None):
        raise InvalidArgument("--n and --p are required")
    if args.which == "adjacency":
        samples = conc.adjacency_concentration(args.n, args.p, args.trials, rng, tol=args.tol)
    elif args.which == "degree":
        if args.graph:
            g = load_graph(args.graph)
            samples = [conc.degree_concentration(g, _density(args.p, args.graph))]
        else:
            samples = []
            for trial in range(args.trials):
                seed = int(rng.integers(0, 2**63 - 1))
                trng = np.random.default_rng(seed)
                if args.d is None:
                    g = sample_er(args.n, args.p, trng, seed=seed)
                else:
                    g, _ = sample_rgg(args.n, args.p, args.d, trng, seed=seed)
                samples.append(conc.degree_concentration(g, args.p, trial, seed))
    elif args.which == "coupled":
        eps = args.eps if args.eps is not None else conc.epsilon_of(args.n, args.p, args.d or 1).epsilon
        samples = []
        for trial in range(args.trials):
            samples.extend(conc.coupled_sandwich_trial(args.n, args.p, eps, args.vectors, rng, trial))
    else:
        raise InvalidArgument(f"unknown concentration check {args.which!r}")
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(conc.SAMPLE_FIELDS)
        for s in samples:
            row = s.as_row()
            w.writerow(["" if row[f] is None else (int(row[f]) if isinstance(row[f], bool) else
                        repr(row[f]) if isinstance(row[f], float) else row[f])
                        for f in conc.SAMPLE_FIELDS])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # exit code 2 is reserved for an inconclusive certificate
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ksl", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("threshold", help="print t(p, d)")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--d", type=int, required=True)
    s.set_defaults(func=cmd_threshold)

    s = sub.add_parser("sample", help="sample a graph to an edge-list file")
    s.add_argument("--model", choices=("er", "rgg"), required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--d", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--points", help="also dump the latent point cloud (rgg only)")
    s.add_argument("--selfloops", action="store_true")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("certify", help="evaluate the synchronization certificate")
    s.add_argument("graph")
    s.add_argument("--p0", type=float)
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--selfloops", action="store_true", help="put ones on the diagonal of A")
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("simulate", help="integrate the gradient flow from random phases")
    s.add_argument("graph")
    s.add_argument("--inits", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--step", type=float)
    s.add_argument("--step-scale", type=float, default=0.01)
    s.add_argument("--t-max", type=float, default=1e4)
    s.add_argument("--trajectory", help="directory for per-init trajectory CSVs")
    s.add_argument("--sample-every", type=int, default=100)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", help="run a Monte Carlo sweep from a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.add_argument("--workers", type=int, help="overridden by KSL_WORKERS")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("concentration", help="empirical concentration checks")
    s.add_argument("which", choices=("adjacency", "degree", "coupled"))
    s.add_argument("--n", type=int)
    s.add_argument("--p", type=float)
    s.add_argument("--d", type=int)
    s.add_argument("--eps", type=float)
    s.add_argument("--trials", type=int, default=1)
    s.add_argument("--vectors", type=int, default=100)
    s.add_argument("--graph")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--out")
    s.set_defaults(func=cmd_concentration)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as exc:  # every failure maps to exit code 1
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
