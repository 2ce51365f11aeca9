"""
Comb design optimization: finesse that balances absorption and dephasing.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .comb import TOOTH_AREA_FACTOR

OBJECTIVES = {
    "raman_backward": analytic.backward_raman,
    "raman_forward": analytic.forward_raman,
    "memory_backward": analytic.backward_memory,
    "memory_forward": analytic.forward_memory,
}

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizationResult:
    objective: str
    value: float
    finesse: float
    effective_depth: float
    alpha_L: float | None
    at_boundary: bool
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"objective": self.objective, "value": self.value,
                "finesse": self.finesse, "effective_depth": self.effective_depth,
                "alpha_L": self.alpha_L, "at_boundary": self.at_boundary,
                "metadata": dict(self.metadata)}


def _objective(name):
    try:
        return OBJECTIVES[name]
    except KeyError:
        raise ValueError(f"unknown objective {name!r}; choose from {sorted(OBJECTIVES)}") from None


def golden_section(f, lo, hi, tol=1e-3):
    """Maximize a unimodal ``f`` on [lo, hi] until the bracket is below ``tol``."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _maximize(f, lo, hi, scan_points, tol, log_scan):
    grid = np.geomspace(lo, hi, scan_points) if log_scan else np.linspace(lo, hi, scan_points)
    values = np.asarray(f(grid), dtype=float)
    i = int(np.argmax(values))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, grid.size - 1)]
    x, fx = golden_section(lambda v: float(f(v)), a, b, tol)
    # keep the scan value if the refinement is beaten by a bracket edge
    if values[i] > fx:
        x, fx = float(grid[i]), float(values[i])
    at_boundary = i == 0 or i == grid.size - 1
    return x, fx, at_boundary


def max_finesse(delta0_hz: float, gamma_min_hz: float) -> float:
    """Largest reachable finesse when teeth cannot be narrower than ``gamma_min_hz``."""
    return delta0_hz / gamma_min_hz


def optimize_finesse(alpha_L: float, objective: str = "raman_backward", *,
                     f_min: float = 1.2, f_max: float = 100.0,
                     scan_points: int = 400, tol: float = 1e-3) -> OptimizationResult:
    """Best finesse at fixed central-tooth depth ``alpha_L``.

    Coarse log-spaced scan over [f_min, f_max], then golden-section
    refinement of the best bracket to ``|dF| < tol``. ``at_boundary`` is set
    when the scan maximum sits on an end of the range.
    """
    if not alpha_L > 0:
        raise ValueError("alpha_L must be positive")
    if not 0 < f_min < f_max:
        raise ValueError("need 0 < f_min < f_max")
    kernel = _objective(objective)

    def eta(f):
        return kernel(TOOTH_AREA_FACTOR * alpha_L / f, f)

    f_star, value, edge = _maximize(eta, f_min, f_max, scan_points, tol, log_scan=True)
    return OptimizationResult(
        objective=objective, value=float(value), finesse=float(f_star),
        effective_depth=TOOTH_AREA_FACTOR * alpha_L / f_star, alpha_L=alpha_L,
        at_boundary=edge,
        metadata={"bounds": [f_min, f_max], "scan_points": scan_points, "tol": tol,
                  "scan": "log"})


def optimize_depth(objective: str = "raman_forward", *, finesse: float = math.inf,
                   bounds=(1e-3, 20.0), scan_points: int = 400,
                   tol: float = 1e-6) -> OptimizationResult:
    """Best effective depth at fixed finesse (``inf`` means ideal teeth)."""
    kernel = _objective(objective)
    lo, hi = bounds
    x, value, edge = _maximize(lambda d: kernel(d, finesse), lo, hi, scan_points, tol,
                               log_scan=False)
    return OptimizationResult(
        objective=objective, value=float(value), finesse=finesse, effective_depth=float(x),
        alpha_L=None, at_boundary=edge,
        metadata={"bounds": list(bounds), "scan_points": scan_points, "tol": tol,
                  "scan": "linear"})


def efficiency_curve(objective: str, alpha_L_grid, *, max_workers: int = 1,
                     **kwargs) -> dict:
    """Optimized efficiency along ``alpha_L_grid``.

    Returns columns ``alpha_L``, ``F_star``, ``eta_star`` as arrays. A depth
    of zero gives zero efficiency and ``F_star = nan``.
    """
    grid = np.asarray(alpha_L_grid, dtype=float)
    if grid.ndim != 1 or np.any(grid < 0) or np.any(np.diff(grid) < 0):
        raise ValueError("alpha_L_grid must be sorted and non-negative")
    _objective(objective)

    def point(a):
        if a == 0:
            return math.nan, 0.0
        r = optimize_finesse(a, objective, **kwargs)
        return r.finesse, r.value

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(point, grid))
    else:
        rows = [point(a) for a in grid]
    return {"alpha_L": grid,
            "F_star": np.array([r[0] for r in rows]),
            "eta_star": np.array([r[1] for r in rows])}


def curve_to_csv(curve: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["alpha_L", "F_star", "eta_star"])
    for a, f, e in zip(curve["alpha_L"], curve["F_star"], curve["eta_star"]):
        writer.writerow([repr(float(a)), repr(float(f)), repr(float(e))])
    return buf.getvalue()
