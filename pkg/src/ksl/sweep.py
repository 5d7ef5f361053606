"""Seeded Monte Carlo sweeps over (model, n, p, d) cells.

Every trial draws its randomness from a seed hashed out of the master seed,
the cell coordinates and the trial index, so rows do not depend on how work
is scheduled across processes.  Rows are written cell by cell in grid order;
a ``<out>.done`` file lists finished cells and lets an interrupted sweep
resume without redoing them.
"""
from __future__ import annotations

import csv
import hashlib
import itertools
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .dynamics import GRAD_TOL, SYNCHRONIZED, default_step, integrate, random_phases
from .errors import InvalidArgument
from .graphs import is_connected, sample_er, sample_rgg
from .sphere import threshold
from .spectral import check_certificate

log = logging.getLogger(__name__)

RECORD_FIELDS = (
    "model", "n", "p", "d", "seed", "trial", "connected", "cert_cond1", "cert_cond2",
    "cert_cond3", "cert_verdict", "ratio_a", "ratio_l", "cond3_lhs", "cond3_rhs",
    "sync_rate", "mean_final_rho1", "runtime_ms",
)
MODES = ("certify", "simulate", "both")


@dataclass
class SweepConfig:
    model: str = "rgg"
    n: List[int] = field(default_factory=lambda: [100])
    p: List[float] = field(default_factory=lambda: [0.25])
    d: List[Optional[int]] = field(default_factory=lambda: [None])
    trials: int = 1
    inits: int = 10
    seed: int = 0
    mode: str = "both"
    out: Optional[str] = None
    workers: int = 1
    selfloops: bool = False
    tol: float = 1e-6
    step_scale: float = 0.01
    t_max: float = 1e4
    grad_tol: float = GRAD_TOL

    def __post_init__(self):
        self.model = self.model.lower()
        if self.model not in ("er", "rgg"):
            raise InvalidArgument(f"model must be 'er' or 'rgg', got {self.model!r}")
        if self.model == "er":
            self.d = [None]
        if not self.n or not self.p or not self.d:
            raise InvalidArgument("n, p and d grids must be nonempty")
        if self.trials < 1 or self.inits < 0:
            raise InvalidArgument("trials must be >= 1 and inits >= 0")
        if any(not 0 < p < 1 for p in self.p):
            raise InvalidArgument(f"p values must lie in (0, 1), got {self.p}")
        if self.model == "rgg" and any(d is None or d < 2 for d in self.d):
            raise InvalidArgument(f"RGG needs d values >= 2, got {self.d}")
        if any(n < 1 for n in self.n):
            raise InvalidArgument(f"n values must be >= 1, got {self.n}")
        if self.mode not in MODES:
            raise InvalidArgument(f"mode must be one of {MODES}, got {self.mode!r}")

    @property
    def certify(self) -> bool:
        return self.mode in ("certify", "both")

    @property
    def simulate(self) -> bool:
        return self.mode in ("simulate", "both")

    def cells(self) -> List[Tuple[int, float, Optional[int]]]:
        return list(itertools.product(self.n, self.p, self.d))


_LIST_KEYS = {"n": int, "p": float, "d": int}
_SCALAR_KEYS = {
    "model": str, "trials": int, "inits": int, "seed": int, "mode": str, "out": str,
    "workers": int, "tol": float, "step_scale": float, "t_max": float, "grad_tol": float,
}


def _parse_bool(s: str) -> bool:
    if s.lower() in ("1", "true", "yes", "on"):
        return True
    if s.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(s)


def parse_config(text: str) -> SweepConfig:
    """Flat ``key = value`` lines; lists comma-separated; ``#`` starts a comment."""
    kw = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgument(f"config line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in _LIST_KEYS:
                kw[key] = [_LIST_KEYS[key](v) for v in value.split(",") if v.strip()]
            elif key in _SCALAR_KEYS:
                kw[key] = _SCALAR_KEYS[key](value)
            elif key == "selfloops":
                kw[key] = _parse_bool(value)
            else:
                raise InvalidArgument(f"config line {lineno}: unknown key {key!r}")
        except ValueError:
            raise InvalidArgument(f"config line {lineno}: bad value for {key}: {value!r}") from None
    return SweepConfig(**kw)


def load_config(path) -> SweepConfig:
    return parse_config(Path(path).read_text())


def cell_key(model: str, n: int, p: float, d: Optional[int]) -> str:
    return f"{model}:n={n}:p={p!r}:d={'' if d is None else d}"


def trial_seed(master: int, key: str, trial: int) -> int:
    h = hashlib.sha256(f"{master}|{key}|{trial}".encode()).digest()
    return int.from_bytes(h[:8], "little") & (2**63 - 1)


def run_trial(cfg: SweepConfig, n: int, p: float, d: Optional[int], trial: int,
              t: Optional[float] = None) -> Dict[str, object]:
    key = cell_key(cfg.model, n, p, d)
    seed = trial_seed(cfg.seed, key, trial)
    graph_ss, cert_ss, init_ss = np.random.SeedSequence(seed).spawn(3)
    start = time.perf_counter()
    if cfg.model == "er":
        g = sample_er(n, p, np.random.default_rng(graph_ss), cfg.selfloops, seed=seed)
    else:
        g, _ = sample_rgg(n, p, d, np.random.default_rng(graph_ss), cfg.selfloops, seed=seed, t=t)
    rec: Dict[str, object] = {f: None for f in RECORD_FIELDS}
    rec.update(model=cfg.model.upper(), n=n, p=p, d=d, seed=seed, trial=trial,
               connected=is_connected(g))
    if cfg.certify and n >= 7:
        rep = check_certificate(g, p, cfg.tol, rng=np.random.default_rng(cert_ss))
        rec.update(cert_cond1=rep.cond1, cert_cond2=rep.cond2, cert_cond3=rep.cond3,
                   cert_verdict=rep.verdict, ratio_a=rep.ratio_a, ratio_l=rep.ratio_l,
                   cond3_lhs=rep.cond3_lhs, cond3_rhs=rep.cond3_rhs)
    if cfg.simulate and cfg.inits > 0:
        irng = np.random.default_rng(init_ss)
        step = default_step(g, cfg.step_scale)
        synced, rhos = 0, []
        for _ in range(cfg.inits):
            res = integrate(g, random_phases(n, irng), step=step, t_max=cfg.t_max,
                            stop_grad_tol=cfg.grad_tol)
            synced += res.status == SYNCHRONIZED
            rhos.append(res.final_rho1_abs)
        rec.update(sync_rate=synced / cfg.inits, mean_final_rho1=float(np.mean(rhos)))
    rec["runtime_ms"] = int(round(1000 * (time.perf_counter() - start)))
    return rec


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_row(rec: Dict[str, object]) -> List[str]:
    return [format_value(rec[f]) for f in RECORD_FIELDS]


def resolve_workers(requested: int) -> int:
    env = os.environ.get("KSL_WORKERS")
    if env:
        try:
            requested = int(env)
        except ValueError:
            raise InvalidArgument(f"KSL_WORKERS must be an integer, got {env!r}") from None
    return max(1, requested)


def _run_item(args):
    return run_trial(*args)


def _read_done(state: Path) -> List[str]:
    if not state.exists():
        return []
    return [s for s in state.read_text().splitlines() if s]


def run_sweep(cfg: SweepConfig, out: Optional[str] = None, workers: Optional[int] = None) -> Path:
    """Run every (cell, trial) of ``cfg`` and write the TrialRecord CSV; returns its path."""
    out_path = Path(out or cfg.out or "sweep.csv")
    state = out_path.with_name(out_path.name + ".done")
    done = set(_read_done(state)) if out_path.exists() else set()
    cells = [c for c in cfg.cells() if cell_key(cfg.model, *c) not in done]

    if done:
        # drop rows of a cell that was being written when the run stopped
        with open(out_path, newline="") as fh:
            rows = list(csv.reader(fh))
        keep = [r for r in rows[1:]
                if cell_key(cfg.model, int(r[1]), float(r[2]), int(r[3]) if r[3] else None) in done]
        _write_rows(out_path, keep, header=True, mode="w")
        log.info("resuming: %d of %d cells already done", len(done), len(cfg.cells()))
    else:
        _write_rows(out_path, [], header=True, mode="w")
        state.write_text("")

    # quantile inversion once per (p, d), shared by all trials of the cell
    thresholds = {}
    if cfg.model == "rgg":
        for _, p, d in cells:
            thresholds.setdefault((p, d), threshold(p, d).t)

    items = [(cfg, n, p, d, k, thresholds.get((p, d))) for (n, p, d) in cells
             for k in range(cfg.trials)]
    nworkers = resolve_workers(workers if workers is not None else cfg.workers)
    if nworkers == 1:
        results = map(_run_item, items)
        _collect(cfg, cells, results, out_path, state)
    else:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            # map preserves submission order, so cells complete in grid order
            results = pool.map(_run_item, items, chunksize=1)
            _collect(cfg, cells, results, out_path, state)
    return out_path


def _collect(cfg, cells, results, out_path, state):
    results = iter(results)
    for n, p, d in cells:
        rows = [format_row(next(results)) for _ in range(cfg.trials)]
        _write_rows(out_path, rows, header=False, mode="a")
        with open(state, "a") as fh:
            fh.write(cell_key(cfg.model, n, p, d) + "\n")


def _write_rows(path: Path, rows: Sequence[Sequence[str]], header: bool, mode: str):
    with open(path, mode, newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow(RECORD_FIELDS)
        w.writerows(rows)


def read_records(path) -> List[Dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
