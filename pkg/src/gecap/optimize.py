"""Deterministic multi-start Nelder-Mead maximization."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

DEFAULT_SEED = 42


@dataclass
class MultistartResult:
    value: float
    x: np.ndarray
    values: list[float] = field(default_factory=list)

    @property
    def starts(self) -> int:
        return len(self.values)


def restart_generators(seed: int, restarts: int) -> list[np.random.Generator]:
    """One independent generator per restart index, fixed by ``seed``."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(restarts)]


def local_maximize(objective: Callable[[np.ndarray], float], x0: np.ndarray, maxfev: int | None = None,
                   xatol: float = 1e-10, fatol: float = 1e-14) -> tuple[float, np.ndarray]:
    """Nelder-Mead ascent from ``x0``; never returns less than ``objective(x0)``."""
    x0 = np.asarray(x0, dtype=float)
    f0 = objective(x0)
    maxfev = maxfev or 400 * max(x0.size, 3)
    res = minimize(lambda x: -objective(x), x0, method="Nelder-Mead",
                   options={"maxfev": maxfev, "maxiter": maxfev, "xatol": xatol, "fatol": fatol,
                            "adaptive": x0.size > 4})
    if -res.fun >= f0:
        return float(-res.fun), np.asarray(res.x)
    return float(f0), x0


def multistart_maximize(objective: Callable[[np.ndarray], float], starts: Sequence[np.ndarray],
                        maxfev: int | None = None) -> MultistartResult:
    """Run :func:`local_maximize` from every start and reduce by ``max``.

    The reduction runs over the complete list in index order, so the result
    does not depend on evaluation scheduling; ties keep the earliest start.
    """
    best = MultistartResult(-np.inf, np.asarray(starts[0], dtype=float))
    for x0 in starts:
        value, x = local_maximize(objective, x0, maxfev=maxfev)
        best.values.append(value)
        if value > best.value:
            best.value, best.x = value, x
    return best
