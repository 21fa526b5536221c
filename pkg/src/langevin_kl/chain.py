"""ULA ensemble engine with counter-addressed noise streams.

Every standard normal consumed by the sampler is indexed by
(seed, purpose, step, chain, coordinate) through the Philox counter, so
results are independent of chunking and worker count, replayable from the
seed alone, and two ensembles built on the same seed consume identical noise,
which is exactly the synchronous coupling the contraction experiments need.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

from .planner import StepPlan
from .potentials import Potential, grad_u

__all__ = [
    "THREADS_ENV",
    "DivergedError",
    "GaussianInit",
    "PointInit",
    "GAUSSIAN_1_OVER_M",
    "Ensemble",
    "TraceRow",
    "CoupledTrace",
    "init_ensemble",
    "step",
    "run",
    "trace_csv",
    "coupled_run",
]

THREADS_ENV = "LANGEVIN_KL_THREADS"

_PURPOSE_INIT = 0
_PURPOSE_STEP = 1
_MASK64 = (1 << 64) - 1


class DivergedError(RuntimeError):
    """A chain state left the finite floats; reports the first offender."""

    def __init__(self, chain_index: int, step_index: int):
        super().__init__(f"chain {chain_index} produced a non-finite state at step {step_index}")
        self.chain_index = chain_index
        self.step_index = step_index


GAUSSIAN_1_OVER_M = "gaussian_1_over_m"


@dataclass(frozen=True)
class GaussianInit:
    """Independent Gaussian start N(mean, diag(cov_diag))."""

    mean: np.ndarray
    cov_diag: np.ndarray


@dataclass(frozen=True)
class PointInit:
    """Every chain starts at the same point x."""

    x: np.ndarray


@dataclass(frozen=True)
class Ensemble:
    """n_chains independent ULA states plus everything needed to replay them."""

    states: np.ndarray  # (n_chains, d)
    step_index: int
    h: float  # stepsize of the most recent step; 0.0 before any step
    seed: int
    potential: Potential

    @property
    def n_chains(self) -> int:
        return self.states.shape[0]

    @property
    def d(self) -> int:
        return self.states.shape[1]


def _normals(seed: int, purpose: int, step: int, lo: int, hi: int, d: int) -> np.ndarray:
    """Standard normals for chains [lo, hi) at one (purpose, step) slot.

    Chain i owns the 128-bit counter blocks [i*bpc, (i+1)*bpc) of the slot, so
    any contiguous chunk reads exactly the words a full serial pass would.
    """
    bpc = (d + 3) // 4
    bg = Philox(key=[seed & _MASK64, 0], counter=[lo * bpc, 0, step, purpose])
    raw = bg.random_raw((hi - lo) * bpc * 4).reshape(hi - lo, bpc * 4)[:, :d]
    u = (raw >> np.uint64(11)) * 2.0**-53 + 2.0**-54
    return ndtri(u)


def _workers(explicit=None) -> int:
    if explicit is not None:
        return max(1, int(explicit))
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _chunks(n: int, workers: int) -> list[tuple[int, int]]:
    w = max(1, min(workers, n))
    if w == 1:
        return [(0, n)]
    edges = np.linspace(0, n, w + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def init_ensemble(p: Potential, init, n: int, seed: int) -> Ensemble:
    """Draw n independent chains from the chosen initial law.

    init is GAUSSIAN_1_OVER_M for N(0, I/m) (requires m > 0), a GaussianInit,
    or a PointInit. Draws come from the (chain, step 0) init stream.
    """
    if n < 1:
        raise ValueError(f"need at least one chain, got {n}")
    if isinstance(init, str) and init == GAUSSIAN_1_OVER_M:
        if not p.m > 0:
            raise ValueError(
                "gaussian_1_over_m needs m > 0; for a weakly convex target pass an explicit "
                "GaussianInit or PointInit"
            )
        xi = _normals(seed, _PURPOSE_INIT, 0, 0, n, p.d)
        states = xi / math.sqrt(p.m)
    elif isinstance(init, GaussianInit):
        mean = np.atleast_1d(np.asarray(init.mean, dtype=float))
        var = np.atleast_1d(np.asarray(init.cov_diag, dtype=float))
        if mean.size != p.d or var.size != p.d:
            raise ValueError(f"init dimensions {mean.size}/{var.size} do not match d={p.d}")
        if not np.all(var > 0):
            raise ValueError("init variances must be positive")
        xi = _normals(seed, _PURPOSE_INIT, 0, 0, n, p.d)
        states = mean + np.sqrt(var) * xi
    elif isinstance(init, PointInit):
        x = np.atleast_1d(np.asarray(init.x, dtype=float))
        if x.size != p.d:
            raise ValueError(f"init point has {x.size} coordinates, potential d={p.d}")
        states = np.tile(x, (n, 1))
    else:
        raise TypeError(f"unsupported init spec {init!r}")
    return Ensemble(states, 0, 0.0, int(seed), p)


def _step_chunk(e: Ensemble, h: float, lo: int, hi: int, out: np.ndarray) -> None:
    x = e.states[lo:hi]
    xi = _normals(e.seed, _PURPOSE_STEP, e.step_index, lo, hi, e.d)
    with np.errstate(over="ignore", invalid="ignore"):  # divergence is caught below
        out[lo:hi] = x - h * grad_u(e.potential, x) + math.sqrt(2.0 * h) * xi


def step(e: Ensemble, h: float, workers: int | None = None) -> Ensemble:
    """Advance every chain one update x' = x - h grad U(x) + sqrt(2h) xi.

    The per-chain noise slot is (seed, step_index), so parallel and serial
    execution produce bit-identical states.
    """
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    n = e.n_chains
    out = np.empty_like(e.states)
    bounds = _chunks(n, _workers(workers))
    if len(bounds) == 1:
        _step_chunk(e, h, 0, n, out)
    else:
        with ThreadPoolExecutor(max_workers=len(bounds)) as pool:
            futures = [pool.submit(_step_chunk, e, h, lo, hi, out) for lo, hi in bounds]
            for f in futures:
                f.result()
    finite = np.isfinite(out).all(axis=1)
    if not finite.all():
        raise DivergedError(int(np.flatnonzero(~finite)[0]), e.step_index)
    return Ensemble(out, e.step_index + 1, float(h), e.seed, e.potential)


@dataclass(frozen=True)
class TraceRow:
    step: int
    second_moment: float
    mean_norm: float
    second_moment_se: float


def _trace_row(e: Ensemble) -> TraceRow:
    s = np.sum(e.states * e.states, axis=1)
    n = s.size
    se = float(s.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return TraceRow(
        step=e.step_index,
        second_moment=float(s.mean()),
        mean_norm=float(np.linalg.norm(e.states.mean(axis=0))),
        second_moment_se=se,
    )


def run(
    e: Ensemble, plan: StepPlan, record_every: int = 1, workers: int | None = None
) -> tuple[Ensemble, list[TraceRow]]:
    """Execute plan.k steps at plan.h, recording summary rows.

    Rows are recorded at step 0, at every record_every-th step, and at the
    final step.
    """
    if record_every < 1:
        raise ValueError(f"record_every must be >= 1, got {record_every}")
    rows = [_trace_row(e)]
    cur = e
    for i in range(plan.k):
        cur = step(cur, plan.h, workers=workers)
        if cur.step_index % record_every == 0 or i == plan.k - 1:
            rows.append(_trace_row(cur))
    return cur, rows


def trace_csv(rows: list[TraceRow], coupled_rms=None) -> str:
    """Serialize trace rows to CSV, with an optional coupled-distance column.

    coupled_rms, when given, is a sequence aligned with rows by position.
    """
    has_coupled = coupled_rms is not None
    lines = ["step,second_moment,mean_norm" + (",coupled_rms" if has_coupled else "")]
    for i, r in enumerate(rows):
        line = f"{r.step},{r.second_moment!r},{r.mean_norm!r}"
        if has_coupled:
            line += f",{float(coupled_rms[i])!r}"
        lines.append(line)
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CoupledTrace:
    """Root mean squared distance between two synchronously coupled ensembles.

    Entry t covers step t (entry 0 is the initial coupling); se holds the
    delta-method standard error of each entry.
    """

    rms: np.ndarray
    se: np.ndarray


def _coupled_stats(ea: Ensemble, eb: Ensemble) -> tuple[float, float]:
    d2 = np.sum((ea.states - eb.states) ** 2, axis=1)
    m = float(d2.mean())
    r = math.sqrt(m)
    n = d2.size
    se = float(d2.std(ddof=1) / math.sqrt(n) / (2.0 * r)) if n > 1 and r > 0 else 0.0
    return r, se


def coupled_run(
    p: Potential, init_a, init_b, h: float, k: int, n: int, seed: int, workers: int | None = None
) -> CoupledTrace:
    """Drive two ensembles with identical noise and record their RMS distance.

    Requires h <= 1/L, the regime in which a single convex smooth ULA step
    contracts every coupled pair.
    """
    if k < 1:
        raise ValueError(f"need at least one step, got k={k}")
    if h > 1.0 / p.L:
        raise ValueError(f"coupled run requires h <= 1/L = {1.0 / p.L}, got h={h}")
    ea = init_ensemble(p, init_a, n, seed)
    eb = init_ensemble(p, init_b, n, seed)
    rms = np.empty(k + 1)
    se = np.empty(k + 1)
    rms[0], se[0] = _coupled_stats(ea, eb)
    for i in range(k):
        ea = step(ea, h, workers=workers)
        eb = step(eb, h, workers=workers)
        rms[i + 1], se[i + 1] = _coupled_stats(ea, eb)
    return CoupledTrace(rms=rms, se=se)
