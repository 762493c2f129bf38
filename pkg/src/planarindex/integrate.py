"""Thin wrapper around scipy's DOP853 with dense output.

The state may be any float array; it is flattened for the solver and
restored on output, so a batch of independent trajectories stacked in one
array is integrated in a single pass.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import BlowUp, ToleranceNotMet

RHS = Callable[[float, np.ndarray], np.ndarray]


@dataclass
class Trajectory:
    """Accepted steps of one integration, with the continuous extension when recorded."""

    t: np.ndarray
    y: np.ndarray
    sol: object = None

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def y_end(self) -> np.ndarray:
        return self.y[-1]

    def __call__(self, t: float) -> np.ndarray:
        if self.sol is None:
            raise ValueError("trajectory recorded without dense output")
        lo, hi = sorted((self.t[0], self.t[-1]))
        pad = 1e-12 * max(1.0, abs(lo), abs(hi))
        if t < lo - pad or t > hi + pad:
            raise ValueError(f"t={t} outside [{lo}, {hi}]")
        return self.sol(t).reshape(self.y.shape[1:])

    def sample(self, times) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        out = self.sol(times)
        return np.moveaxis(out, -1, 0).reshape((len(times),) + self.y.shape[1:])


def integrate(
    f: RHS,
    t0: float,
    y0,
    t_end: float,
    rtol=1e-10,
    atol=1e-12,
    *,
    dense: bool = False,
    bound: float | None = None,
    max_step: float = np.inf,
) -> Trajectory:
    """Integrate ``y' = f(t, y)`` from ``t0`` to ``t_end`` with DOP853.

    ``rtol`` and ``atol`` may be arrays broadcastable to the state shape.

    ``bound`` stops the integration with :class:`BlowUp` once ``max|y|``
    exceeds it.
    """
    y0 = np.asarray(y0, dtype=float)
    shape = y0.shape
    if t_end == t0:
        return Trajectory(np.array([t0]), y0[None].copy())
    if np.ndim(atol):
        atol = np.broadcast_to(np.asarray(atol, dtype=float), shape).ravel()
    if np.ndim(rtol):
        rtol = np.broadcast_to(np.asarray(rtol, dtype=float), shape).ravel()

    def flat(t, y):
        return np.asarray(f(t, y.reshape(shape)), dtype=float).ravel()

    events = None
    if bound is not None:

        def escape(t, y):
            return bound - np.max(np.abs(y))

        escape.terminal = True
        events = escape
    with np.errstate(over="ignore", invalid="ignore"):
        res = solve_ivp(
            flat,
            (float(t0), float(t_end)),
            y0.ravel(),
            method="DOP853",
            rtol=rtol,
            atol=atol,
            dense_output=dense,
            events=events,
            max_step=max_step,
        )
    if res.status == 1:
        raise BlowUp(f"|y| exceeded {bound:g} at t={res.t[-1]:.6g}")
    if res.status != 0:
        if bound is not None or not np.all(np.isfinite(res.y[:, -1])):
            raise BlowUp(f"integration failed at t={res.t[-1]:.6g}: {res.message}")
        raise ToleranceNotMet(f"integration failed at t={res.t[-1]:.6g}: {res.message}")
    ys = res.y.T.reshape((-1,) + shape)
    if not np.all(np.isfinite(ys[-1])):
        raise BlowUp("non-finite state")
    return Trajectory(res.t, ys, res.sol)
