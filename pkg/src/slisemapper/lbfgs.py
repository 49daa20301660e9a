from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Deque, List, Optional, Tuple

import numpy as np

from .errors import OptimisationError
from .types import LbfgsSettings

Objective = Callable[[np.ndarray], Tuple[float, np.ndarray]]
Projection = Callable[[np.ndarray], np.ndarray]
# callback(iteration, loss, gradient_inf_norm)
Progress = Callable[[int, float, float], None]


class InverseLbfgs:
    """
    Limited-memory approximation of the inverse Hessian, stored as the last `history`
    (s, y) pairs. Products with a vector use the two-loop recursion, with the initial
    matrix scaled by <s, y> / <y, y> of the newest pair.
    """

    def __init__(self, history: int = 10) -> None:
        self.history = history
        self.pairs: Deque[Tuple[np.ndarray, np.ndarray, float]] = deque(maxlen=history)

    def __len__(self) -> int:
        return len(self.pairs)

    def clear(self) -> None:
        self.pairs.clear()

    def store(self, s: np.ndarray, y: np.ndarray) -> bool:
        """Keep the pair only when the curvature condition <s, y> > 0 holds."""
        sy = float(np.dot(s, y))
        if sy <= 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(y)) or sy <= 0.0:
            return False
        self.pairs.append((s.copy(), y.copy(), 1.0 / sy))
        return True

    def matvec(self, v: np.ndarray) -> np.ndarray:
        q = np.array(v, dtype=np.float64)
        if not self.pairs:
            return q
        alphas: List[float] = []
        for s, y, rho in reversed(self.pairs):
            a = rho * float(np.dot(s, q))
            alphas.append(a)
            q -= a * y
        s, y, _ = self.pairs[-1]
        q *= float(np.dot(s, y)) / float(np.dot(y, y))
        for (s, y, rho), a in zip(self.pairs, reversed(alphas)):
            b = rho * float(np.dot(y, q))
            q += (a - b) * s
        return q


@dataclass
class LbfgsResult:
    x: np.ndarray
    loss: float
    grad: np.ndarray
    iterations: int
    converged: bool
    line_search_failed: bool
    # loss of the start point followed by every accepted step
    losses: List[float] = field(default_factory=list)

    @property
    def gradient_norm(self) -> float:
        return float(np.max(np.abs(self.grad))) if self.grad.size else 0.0


def _evaluate(fun: Objective, x: np.ndarray) -> Tuple[float, np.ndarray]:
    f, g = fun(x)
    return float(f), np.asarray(g, dtype=np.float64)


def lbfgs_minimise(
    x0: np.ndarray,
    fun: Objective,
    settings: Optional[LbfgsSettings] = None,
    project: Optional[Projection] = None,
    callback: Optional[Progress] = None,
) -> LbfgsResult:
    """
    Minimise `fun` (returning loss and gradient) from `x0`.

    Directions come from the two-loop recursion; steps from backtracking (halving) until
    the Armijo condition holds. `project`, when given, is applied to every trial point, so
    accepted iterates are always feasible. Stops when the gradient's infinity norm drops
    below `gtol`, when the loss has stalled (relative decrease of at most `ftol` over the last
    `stall_window` accepted steps) or after `max_iter` iterations. A failed line search
    returns the best point so far with `line_search_failed` set; accepted losses never
    increase.
    """
    settings = settings or LbfgsSettings()
    x = np.array(x0, dtype=np.float64).ravel()
    if project is not None:
        x = project(x)
    f, g = _evaluate(fun, x)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise OptimisationError(
            "Objective is not finite at the starting point", {"loss": f, "iterations": 0}
        )

    memory = InverseLbfgs(settings.history)
    losses = [f]
    converged = False
    failed = False
    it = 0
    while it < settings.max_iter:
        gnorm = float(np.max(np.abs(g))) if g.size else 0.0
        if gnorm < settings.gtol:
            converged = True
            break

        d = -memory.matvec(g)
        slope = float(np.dot(g, d))
        if not slope < 0.0 or not np.isfinite(slope):
            memory.clear()
            d = -g
            slope = -float(np.dot(g, g))
        # Unscaled steepest descent: start with a step of unit length
        t = 1.0 if len(memory) else min(1.0, 1.0 / max(float(np.linalg.norm(d)), 1e-12))

        accepted = False
        for _ in range(settings.max_backtracks):
            xt = x + t * d
            if project is not None:
                xt = project(xt)
            ft, gt = _evaluate(fun, xt)
            if np.isfinite(ft) and ft <= f + settings.c1 * t * slope and np.all(np.isfinite(gt)):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            if len(memory):
                # Retry once along the plain gradient before giving up
                memory.clear()
                continue
            failed = True
            break

        memory.store(xt - x, gt - g)
        x, f, g = xt, ft, gt
        losses.append(f)
        it += 1
        if callback is not None:
            callback(it, f, float(np.max(np.abs(g))) if g.size else 0.0)
        w = settings.stall_window
        if settings.ftol > 0.0 and len(losses) > w:
            if losses[-w - 1] - f <= settings.ftol * max(1.0, abs(f)):
                converged = True
                break
    else:
        gnorm = float(np.max(np.abs(g))) if g.size else 0.0
        converged = gnorm < settings.gtol

    return LbfgsResult(
        x=x,
        loss=f,
        grad=g,
        iterations=it,
        converged=converged,
        line_search_failed=failed,
        losses=losses,
    )
