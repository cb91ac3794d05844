"""Monte Carlo estimates of per-user MG pairs.

Each trial draws its own realization from a substream keyed by
``(seed, trial)``.  Per-trial results are collected into arrays in trial
order before any reduction, so the estimate does not depend on how trials
were spread over worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .netmodel import HEX, Topology, hex_color_partition
from .scheduler import SCHEMES, offcolor_embb_fraction, run_scheme
from .traffic import ParamError, ScenarioParams, sample_activity, substream


def bias_allowance(K: int) -> float:
    """Slack for the O(1/K) edge effects of a finite network."""
    return 10.0 / K


@dataclass(frozen=True)
class MCEstimate:
    su_mean: float
    sum_mean: float
    se_mean: float
    su_stderr: float
    sum_stderr: float
    se_stderr: float
    trials: int
    K: int
    seed: int
    offcolor_fraction: float | None = None

    def to_json(self) -> dict:
        return asdict(self)


def _trial_block(args):
    params, scheme, topo, seed, lo, hi = args
    partition = hex_color_partition(topo) if topo.kind == HEX else None
    out = np.empty((hi - lo, 3))
    for n, t in enumerate(range(lo, hi)):
        real = sample_activity(params, topo, substream(seed, t))
        sched, tl = run_scheme(params, real, topo, scheme, partition)
        off = offcolor_embb_fraction(sched, partition) if partition is not None else math.nan
        out[n] = (tl.urllc_total / topo.K, tl.sum_total / topo.K, off)
    return out


def _chunks(trials: int, workers: int):
    n = max(1, min(trials, workers * 4))
    edges = np.linspace(0, trials, n + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def trial_values(params: ScenarioParams, scheme: str, topo: Topology, trials: int, seed: int,
                 workers: int = 1) -> np.ndarray:
    """(trials, 3) array of per-user URLLC MG, sum MG and off-color eMBB share."""
    if scheme not in SCHEMES:
        raise ParamError(f"unknown scheme {scheme!r}")
    jobs = [(params, scheme, topo, seed, a, b) for a, b in _chunks(trials, workers)]
    if workers <= 1:
        parts = [_trial_block(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_trial_block, jobs))
    return np.concatenate(parts)


def estimate(params: ScenarioParams, scheme: str, topo: Topology, trials: int, seed: int,
             workers: int = 1) -> MCEstimate:
    if trials < 2:
        raise ParamError("at least 2 trials are needed for a standard error")
    # fail fast on undefined combinations before spawning anything
    if topo.kind == HEX and params.D is not None:
        raise ParamError("hex schemes assume unlimited cooperation rounds (use D=None)")
    vals = trial_values(params, scheme, topo, trials, seed, workers)
    su, tot = vals[:, 0], vals[:, 1]
    se = tot - su
    root = math.sqrt(trials)

    def err(x):
        return float(np.std(x, ddof=1) / root)

    off = float(np.mean(vals[:, 2])) if topo.kind == HEX else None
    su_m, tot_m = float(np.mean(su)), float(np.mean(tot))
    return MCEstimate(su_m, tot_m, tot_m - su_m, err(su), err(tot), err(se), trials, topo.K, seed, off)


@dataclass(frozen=True)
class CompareReport:
    which: str
    mean: float
    target: float
    stderr: float
    k_sigma: float
    bias: float
    passed: bool

    @property
    def deviation(self) -> float:
        return abs(self.mean - self.target)

    @property
    def allowance(self) -> float:
        return self.k_sigma * self.stderr + self.bias

    def to_json(self) -> dict:
        d = asdict(self)
        d.update(deviation=self.deviation, allowance=self.allowance)
        return d


def compare(est: MCEstimate, target: float, which: str = "sum", k_sigma: float = 4.0,
            bias: float | None = None) -> CompareReport:
    """Pass iff ``|mean - target| <= k_sigma * stderr + bias`` (bias defaults to 10/K)."""
    if k_sigma <= 0:
        raise ParamError("k_sigma must be positive")
    if which not in ("su", "sum", "se"):
        raise ParamError("which must be su, sum or se")
    mean = getattr(est, f"{which}_mean")
    se = getattr(est, f"{which}_stderr")
    b = bias_allowance(est.K) if bias is None else bias
    ok = abs(mean - target) <= k_sigma * se + b
    return CompareReport(which, mean, float(target), se, k_sigma, b, bool(ok))
