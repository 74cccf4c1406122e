"""Fit the error law's hyperparameters from learning-curve observations.

For a fixed offset the fit is an exactly solvable log-linear least squares
problem, so the offset is the only searched dimension: a coarse grid pass
followed by golden-section refinement around the grid winner. Deterministic
and initialization-free.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import DegenerateFit, InsufficientPoints, InvariantViolation, NonPositiveShifted
from .model import ScalingLaw

__all__ = [
    "CurvePoint",
    "FitResult",
    "FitConfig",
    "fit_scaling_law",
    "predict",
    "heterogeneity_presets",
    "read_curve_csv",
]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CurvePoint:
    d: int
    eps: float

    def __post_init__(self):
        if self.d <= 0:
            raise InvariantViolation("curve point d", "must be > 0")


@dataclass(frozen=True)
class FitResult:
    law: ScalingLaw
    rmse: float
    n_points: int

    def to_dict(self) -> dict:
        return {
            "law": {
                "alpha": self.law.alpha,
                "beta": self.law.beta,
                "delta": self.law.delta,
            },
            "rmse": self.rmse,
            "n_points": self.n_points,
        }


@dataclass(frozen=True)
class FitConfig:
    delta_grid: tuple[float, ...] = tuple(round(0.01 * i, 2) for i in range(51))
    max_refine: int = 60


def _loglinear_fit(log_d: np.ndarray, eps: np.ndarray, delta: float):
    """Least squares of log(eps + delta) on log d; None if infeasible."""
    shifted = eps + delta
    if np.any(shifted <= 0):
        return None
    y = np.log(shifted)
    # Normal equations of the two-parameter line y = b0 - beta * log_d.
    x_mean = log_d.mean()
    y_mean = y.mean()
    sxx = float(np.dot(log_d - x_mean, log_d - x_mean))
    sxy = float(np.dot(log_d - x_mean, y - y_mean))
    slope = sxy / sxx
    beta = -slope
    alpha = math.exp(y_mean - slope * x_mean)
    if not (alpha > 0 and beta > 0):
        return None
    pred = alpha * np.exp(-beta * log_d) - delta
    rmse = float(np.sqrt(np.mean((pred - eps) ** 2)))
    return alpha, beta, rmse


def fit_scaling_law(points: list[CurvePoint], cfg: FitConfig | None = None) -> FitResult:
    """Fit (alpha, beta, delta) to observed (d, eps) learning-curve points."""
    cfg = cfg or FitConfig()
    if len(points) < 3 or len({p.d for p in points}) < 3:
        raise InsufficientPoints("need at least 3 points with 3 distinct d values")
    d = np.array([float(p.d) for p in points])
    eps = np.array([p.eps for p in points])
    log_d = np.log(d)

    evaluated: dict[float, tuple] = {}

    def try_delta(delta: float):
        delta = max(0.0, float(delta))
        if delta not in evaluated:
            evaluated[delta] = _loglinear_fit(log_d, eps, delta)
        return evaluated[delta]

    grid = sorted(set(float(x) for x in cfg.delta_grid))
    feasible = [(g, try_delta(g)) for g in grid]
    feasible = [(g, fit) for g, fit in feasible if fit is not None]
    if not feasible:
        raise NonPositiveShifted("eps + delta <= 0 for every offset candidate")
    best_delta, best_fit = min(feasible, key=lambda item: item[1][2])

    # Golden-section refinement of the offset around the grid winner.
    idx = grid.index(best_delta)
    lo = grid[idx - 1] if idx > 0 else max(0.0, best_delta - (grid[1] - grid[0] if len(grid) > 1 else 0.01))
    hi = grid[idx + 1] if idx + 1 < len(grid) else best_delta + (grid[-1] - grid[-2] if len(grid) > 1 else 0.01)

    def rmse_at(delta: float) -> float:
        fit = try_delta(delta)
        return fit[2] if fit is not None else math.inf

    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    e = a + GOLDEN * (b - a)
    fc, fe = rmse_at(c), rmse_at(e)
    for _ in range(max(0, cfg.max_refine)):
        if fc <= fe:
            b, e, fe = e, c, fc
            c = b - GOLDEN * (b - a)
            fc = rmse_at(c)
        else:
            a, c, fc = c, e, fe
            e = a + GOLDEN * (b - a)
            fe = rmse_at(e)

    winner_delta, winner = min(
        ((dl, fit) for dl, fit in evaluated.items() if fit is not None),
        key=lambda item: item[1][2],
    )
    alpha, beta, rmse = winner
    if not (alpha > 0 and beta > 0):
        raise DegenerateFit(f"fit produced alpha={alpha!r}, beta={beta!r}")
    return FitResult(
        law=ScalingLaw(alpha=alpha, beta=beta, delta=winner_delta),
        rmse=rmse,
        n_points=len(points),
    )


def predict(law: ScalingLaw, d) -> float:
    """Predicted error at total data volume ``d``; same path as the economics."""
    return law.error_at(d)


def read_curve_csv(path) -> list[CurvePoint]:
    """Read learning-curve points from a CSV with header ``d,eps``."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["d", "eps"]:
            raise InvariantViolation("curve csv", "expected header 'd,eps'")
        points = []
        for row in reader:
            points.append(CurvePoint(d=int(row["d"]), eps=float(row["eps"])))
    return points


# ---------------------------------------------------------------------------
# Heterogeneity presets. Illustrative configuration values only: they order
# the error curves by heterogeneity level and were calibrated so the shipped
# sweep produces interior equilibria (see README). Overridable by placing a
# presets.json in $COCOGEN_CONFIG_DIR.
# ---------------------------------------------------------------------------

PRESETS_ENV_VAR = "COCOGEN_CONFIG_DIR"


def _presets_payload() -> dict:
    override_dir = os.environ.get(PRESETS_ENV_VAR)
    if override_dir:
        candidate = os.path.join(override_dir, "presets.json")
        if os.path.exists(candidate):
            with open(candidate, "r", encoding="utf-8") as fh:
                return json.load(fh)
    ref = resources.files("cocogen").joinpath("data/presets.json")
    return json.loads(ref.read_text(encoding="utf-8"))


def heterogeneity_presets() -> dict[float, ScalingLaw]:
    """Error-law presets keyed by heterogeneity level (Dirichlet parameter)."""
    payload = _presets_payload()
    out = {}
    for key, law in payload.items():
        out[float(key)] = ScalingLaw(
            alpha=float(law["alpha"]), beta=float(law["beta"]), delta=float(law["delta"])
        )
    return out
