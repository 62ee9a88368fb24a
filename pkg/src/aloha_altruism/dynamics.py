"""Better-response dynamics and basins of attraction.

Each player climbs its own net utility at its own rate::

    dq_i/dt = r_i * dV_i/dq_i

The flow is integrated with fixed-step classical RK4 and the state clamped to
``[EPS, 1 - EPS]`` after every stage. Trajectories end when the field has
vanished (converged), after too many consecutive clamped steps (boundary) or
at ``max_time``. The discrete small-step version of the same dynamics is
available through :func:`better_response_path`.
"""
from __future__ import annotations

import enum
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import game_model as gm
from .game_model import EPS, GameSpec

log = logging.getLogger(__name__)


class Outcome(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_TIME = "MaxTimeReached"
    BOUNDARY = "Boundary"


# integer codes used inside batched runs
_CODES = (Outcome.MAX_TIME, Outcome.CONVERGED, Outcome.BOUNDARY)
_MAX_TIME, _CONVERGED, _BOUNDARY = range(3)


@dataclass(frozen=True)
class FlowConfig:
    h: float = 0.01
    max_time: float = 1e4
    convergence_tol: float = 1e-8
    eps: float = EPS
    boundary_steps: int = 100
    match_tol: float = 1e-3
    sample_every: int = 100

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("step h must be > 0")
        if not self.max_time > self.h:
            raise ValueError("max_time must exceed h")

    def step_for(self, spec: GameSpec) -> float:
        # fast players shrink the step so RK4 stays inside its stability region
        return self.h / max(1.0, float(np.max(spec.r)))


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    profiles: np.ndarray
    terminal: np.ndarray
    outcome: Outcome
    nep_index: Optional[int] = None
    time: float = 0.0
    steps: int = 0

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome.value,
            "nep_index": self.nep_index,
            "time": self.time,
            "steps": self.steps,
            "terminal": self.terminal.tolist(),
        }


@dataclass
class BasinReport:
    neps: list
    volumes: list
    unconverged: float
    grid_per_dim: int
    counts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "neps": [np.asarray(n).tolist() for n in self.neps],
            "volumes": list(self.volumes),
            "unconverged": self.unconverged,
            "grid_per_dim": self.grid_per_dim,
            "counts": dict(self.counts),
        }


def flow_field(spec: GameSpec, q) -> np.ndarray:
    """Rate-weighted gradient field; ``q`` may be one profile or a batch."""
    q = np.asarray(q, dtype=float)
    if np.any((q <= 0) | (q >= 1)):
        raise gm.DomainError("flow field is evaluated at interior profiles only")
    return spec.r * gm.gradients(spec, q)


def _match(Q: np.ndarray, neps: np.ndarray, tol: float) -> np.ndarray:
    """Index of the nearest NEP within ``tol`` (L-inf) for each row, else -1."""
    if len(neps) == 0:
        return np.full(len(Q), -1)
    dist = np.max(np.abs(Q[:, None, :] - neps[None, :, :]), axis=-1)
    best = np.argmin(dist, axis=1)
    return np.where(dist[np.arange(len(Q)), best] <= tol, best, -1)


def _run(spec: GameSpec, Q0: np.ndarray, cfg: FlowConfig, neps: np.ndarray, method: str,
         step: float, record: bool = False):
    """Advance a batch of trajectories; returns final states, outcomes and step counts.

    Rows are independent, so the result for a row does not depend on which
    other rows share the batch.
    """
    eps = cfg.eps
    lo, hi = eps, 1.0 - eps
    Q = np.clip(np.array(Q0, dtype=float), lo, hi)
    B = len(Q)
    outcome = np.full(B, _MAX_TIME)
    steps = np.zeros(B, dtype=int)
    clamped_run = np.zeros(B, dtype=int)
    active = np.ones(B, dtype=bool)
    times, samples = [0.0], [Q[0].copy()] if record else []

    def F(X):
        return spec.r * gm.gradients(spec, X)

    done = np.max(np.abs(F(Q)), axis=1) < cfg.convergence_tol
    outcome[done] = _CONVERGED
    active &= ~done
    n_steps = int(np.ceil(cfg.max_time / step - 1e-9))
    for n in range(1, n_steps + 1):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        X = Q[idx]
        if method == "rk4":
            k1 = F(X)
            k2 = F(np.clip(X + 0.5 * step * k1, lo, hi))
            k3 = F(np.clip(X + 0.5 * step * k2, lo, hi))
            k4 = F(np.clip(X + step * k3, lo, hi))
            Y = X + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        else:
            Y = X + step * F(X)
        Xn = np.clip(Y, lo, hi)
        hit = np.any(Xn != Y, axis=1)
        Q[idx] = Xn
        steps[idx] = n
        clamped_run[idx] = np.where(hit, clamped_run[idx] + 1, 0)

        conv = np.max(np.abs(F(Xn)), axis=1) < cfg.convergence_tol
        bound = ~conv & (clamped_run[idx] >= cfg.boundary_steps)
        outcome[idx[conv]] = _CONVERGED
        outcome[idx[bound]] = _BOUNDARY
        active[idx[conv | bound]] = False
        if record and (n % cfg.sample_every == 0 or not active[0]):
            times.append(n * step)
            samples.append(Q[0].copy())
    nep_idx = _match(Q, neps, cfg.match_tol)
    nep_idx = np.where(outcome == _CONVERGED, nep_idx, -1)
    return Q, outcome, nep_idx, steps, (np.array(times), np.array(samples))


def _as_neps(neps, N) -> np.ndarray:
    if neps is None:
        return np.empty((0, N))
    arr = [np.asarray(getattr(n, "q_star", n), dtype=float) for n in neps]
    return np.array(arr).reshape(len(arr), N)


def _record(Q, outcome, nep_idx, steps, samples, step) -> TrajectoryRecord:
    k = nep_idx[0]
    return TrajectoryRecord(
        times=samples[0],
        profiles=samples[1],
        terminal=Q[0],
        outcome=_CODES[outcome[0]],
        nep_index=None if k < 0 else int(k),
        time=float(steps[0] * step),
        steps=int(steps[0]),
    )


def integrate(spec: GameSpec, q0, cfg: FlowConfig = FlowConfig(), neps=None) -> TrajectoryRecord:
    """Integrate the better-response flow from ``q0``.

    ``neps`` (profiles or :class:`NepResult` objects) label converged
    trajectories; a converged end point farther than ``cfg.match_tol`` from
    every listed NEP keeps ``nep_index = None``.
    """
    q0 = gm.as_profile(q0, spec.N)
    step = cfg.step_for(spec)
    Q, out, idx, steps, samples = _run(spec, q0[None, :], cfg, _as_neps(neps, spec.N), "rk4",
                                       step, record=True)
    return _record(Q, out, idx, steps, samples, step)


def better_response_path(spec: GameSpec, q0, step: float = 1e-3, cfg: FlowConfig = FlowConfig(),
                         neps=None) -> TrajectoryRecord:
    """Discrete better-response play ``q <- q + step * r * dV/dq`` (clamped)."""
    q0 = gm.as_profile(q0, spec.N)
    Q, out, idx, steps, samples = _run(spec, q0[None, :], cfg, _as_neps(neps, spec.N), "euler",
                                       step, record=True)
    return _record(Q, out, idx, steps, samples, step)


def terminal_states(spec: GameSpec, seeds, cfg: FlowConfig = FlowConfig(), neps=None,
                    method: str = "rk4", step: float | None = None):
    """Batch version of :func:`integrate`: final states, outcomes and NEP labels."""
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    step = cfg.step_for(spec) if step is None else step
    Q, out, idx, _, _ = _run(spec, seeds, cfg, _as_neps(neps, spec.N), method, step)
    return Q, [_CODES[o] for o in out], idx


def seed_grid(N: int, grid_per_dim: int, low: float = 0.02, high: float = 0.98) -> np.ndarray:
    axis = np.linspace(low, high, grid_per_dim)
    mesh = np.meshgrid(*([axis] * N), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _basin_chunk(args):
    spec, seeds, cfg, neps = args
    _, out, idx, _, _ = _run(spec, seeds, cfg, neps, "rk4", cfg.step_for(spec))
    return out, idx


def estimate_basins(spec: GameSpec, neps, grid_per_dim: int = 21, cfg: FlowConfig = FlowConfig(),
                    workers: int = 1) -> BasinReport:
    """Fraction of a uniform seed grid over ``[0.02, 0.98]^N`` reaching each NEP.

    Seeds are split into contiguous chunks, one per worker; every trajectory is
    computed independently so the counts do not depend on ``workers``.
    """
    if grid_per_dim < 3:
        raise ValueError("grid_per_dim must be >= 3")
    nep_arr = _as_neps(neps, spec.N)
    seeds = seed_grid(spec.N, grid_per_dim)
    chunks = [c for c in np.array_split(seeds, max(1, workers)) if len(c)]
    jobs = [(spec, c, cfg, nep_arr) for c in chunks]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_basin_chunk, jobs))
    else:
        parts = [_basin_chunk(j) for j in jobs]
    outcome = np.concatenate([p[0] for p in parts])
    label = np.concatenate([p[1] for p in parts])

    total = len(seeds)
    counts = {
        "total": total,
        "per_nep": [int(np.sum(label == k)) for k in range(len(nep_arr))],
        "boundary": int(np.sum(outcome == _BOUNDARY)),
        "max_time": int(np.sum(outcome == _MAX_TIME)),
        "converged_unmatched": int(np.sum((outcome == _CONVERGED) & (label < 0))),
    }
    volumes = [c / total for c in counts["per_nep"]]
    unconverged = (total - sum(counts["per_nep"])) / total
    log.info("basins %s: %s", spec.variant, counts)
    return BasinReport(neps=[n for n in nep_arr], volumes=volumes, unconverged=unconverged,
                       grid_per_dim=grid_per_dim, counts=counts)
