"""Time-ordered integration of the master equation at the level of maps.

The full N^2 x N^2 map equation dP/dt = L(t) P is integrated rather than
individual density-matrix trajectories: one integration yields the complete
superoperator. The default integrator is an adaptive embedded 4(5)
Runge-Kutta pair with dense output; a fixed-step classical 4th-order mode is
retained for convergence studies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import linear_sum_assignment

from .errors import AccuracyLoss, IntegratorDiverged
from .model import TimePeriodicLindbladian
from .superop import choi, is_trace_preserving

__all__ = [
    "IntegratorConfig",
    "MapTrajectory",
    "propagate_window",
    "floquet_map",
    "propagate_trajectory",
    "choi_eigenvalue_trajectory",
]


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk45"  # "rk45" (adaptive embedded 4/5) or "rk4" (fixed step)
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 10_000_000
    min_substeps_per_period: int = 1000

    def __post_init__(self):
        if self.method not in ("rk45", "rk4"):
            raise ValueError(f"unknown integrator method {self.method!r}")
        if self.rel_tol <= 0 or self.abs_tol <= 0 or self.max_steps <= 0:
            raise ValueError("integrator tolerances and step budget must be positive")


@dataclass(frozen=True)
class MapTrajectory:
    """Maps P(t) on an ascending time grid starting at t = 0 (P(0) = 1)."""

    times: np.ndarray
    maps: np.ndarray  # shape (len(times), N^2, N^2)

    @property
    def hdim(self) -> int:
        return int(round(np.sqrt(self.maps.shape[-1])))


def _generator_factory(model: TimePeriodicLindbladian):
    static = model._static_part
    drive = model._drive_parts

    def gen(t: float) -> np.ndarray:
        out = static.copy()
        for commutator, profile in drive:
            out += profile(t) * commutator
        return out

    return gen


def _rk4_window(model, t0: float, t1: float, cfg: IntegratorConfig) -> np.ndarray:
    gen = _generator_factory(model)
    m = model.hdim**2
    span = t1 - t0
    steps = max(1, int(np.ceil(cfg.min_substeps_per_period * span / model.period)))
    if steps > cfg.max_steps:
        raise IntegratorDiverged(f"fixed-step count {steps} exceeds max_steps")
    h = span / steps
    p = np.eye(m, dtype=complex)
    for k in range(steps):
        t = t0 + k * h
        k1 = gen(t) @ p
        k2 = gen(t + h / 2) @ (p + h / 2 * k1)
        k3 = gen(t + h / 2) @ (p + h / 2 * k2)
        k4 = gen(t + h) @ (p + h * k3)
        p = p + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return p


def propagate_window(
    model: TimePeriodicLindbladian,
    t0: float,
    t1: float,
    cfg: IntegratorConfig | None = None,
    t_eval: np.ndarray | None = None,
) -> np.ndarray:
    """Solve dP/dt = L(t) P with P(t0) = 1 over [t0, t1].

    Returns the map at t1, or the stack of maps at ``t_eval`` when given
    (adaptive method only).
    """
    cfg = cfg or IntegratorConfig()
    if cfg.method == "rk4":
        if t_eval is not None:
            raise ValueError("t_eval sampling requires the adaptive method")
        return _rk4_window(model, t0, t1, cfg)

    gen = _generator_factory(model)
    m = model.hdim**2
    evals = 0

    def rhs(t, y):
        nonlocal evals
        evals += 1
        if evals > cfg.max_steps:
            raise IntegratorDiverged(f"integration exceeded {cfg.max_steps} evaluations")
        return (gen(t) @ y.reshape(m, m)).ravel()

    sol = solve_ivp(
        rhs,
        (t0, t1),
        np.eye(m, dtype=complex).ravel(),
        method="RK45",
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        t_eval=t_eval,
        dense_output=False,
    )
    if not sol.success:
        raise IntegratorDiverged(f"solver failed: {sol.message}")
    if t_eval is not None:
        return sol.y.T.reshape(len(t_eval), m, m)
    return sol.y[:, -1].reshape(m, m)


def floquet_map(
    model: TimePeriodicLindbladian, cfg: IntegratorConfig | None = None
) -> np.ndarray:
    """One-cycle evolution superoperator: the time-ordered exponential of
    the generator over a single period."""
    p = propagate_window(model, 0.0, model.period, cfg)
    if not is_trace_preserving(p, tol=1e-6):
        raise AccuracyLoss("one-cycle map violates trace preservation beyond 1e-6")
    return p


def propagate_trajectory(
    model: TimePeriodicLindbladian,
    t_end: float,
    samples: int,
    cfg: IntegratorConfig | None = None,
) -> MapTrajectory:
    """Maps P(t) on a uniform grid over [0, t_end]."""
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if samples < 2:
        raise ValueError("need at least two samples")
    cfg = cfg or IntegratorConfig()
    times = np.linspace(0.0, t_end, samples)
    m = model.hdim**2
    if cfg.method == "rk4":
        maps = np.empty((samples, m, m), dtype=complex)
        maps[0] = np.eye(m)
        for k in range(1, samples):
            segment = _rk4_window(model, times[k - 1], times[k], cfg)
            maps[k] = segment @ maps[k - 1]
    else:
        maps = propagate_window(model, 0.0, t_end, cfg, t_eval=times)
        maps[0] = np.eye(m)
    return MapTrajectory(times=times, maps=maps)


def choi_eigenvalue_trajectory(traj: MapTrajectory) -> np.ndarray:
    """Real Choi-matrix eigenvalues of each map, as an array of shape
    (len(times), N^2).

    The first sample is sorted ascending; subsequent samples are relabeled
    by nearest-neighbor assignment against the previous one, so each column
    is a continuous eigenvalue curve.
    """
    k = len(traj.times)
    m = traj.maps.shape[-1]
    out = np.empty((k, m))
    prev = None
    for i in range(k):
        c = choi(traj.maps[i])
        w = np.linalg.eigvalsh((c + c.conj().T) / 2)
        if prev is None:
            out[i] = w
        else:
            cost = np.abs(prev[:, None] - w[None, :])
            _, cols = linear_sum_assignment(cost)
            out[i] = w[cols]
        prev = out[i]
    return out
