"""Nash-equilibrium computation: case analysis, fixed-point iteration,
an exhaustive grid oracle, and equilibrium certification.

Case classification follows the sign of the coordinate gradient of the
potential at the box-projected stationary point. The printed-direction
variant (which assigns the lower bound where the gradient analysis assigns
the upper, and vice versa) is retained behind ``case_mode="printed"`` for
comparison; disagreements between the two are counted and logged.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import economics, game
from .errors import InstanceTooLarge, ZeroTotalData
from .kernels import argmin_2d, argmin_3d, build_lower_envelope
from .model import (
    PayoffMode,
    ProfileLike,
    Scenario,
    StrategyProfile,
    as_dgen,
    validate_scenario,
)

__all__ = [
    "CaseLabel",
    "CaseQuantities",
    "SolverConfig",
    "SolveReport",
    "case_quantities",
    "classify_case",
    "interior_update",
    "fpi_solve",
    "grid_oracle",
    "GridOracleResult",
    "verify_ne",
    "NeCertificate",
]

logger = logging.getLogger(__name__)

CASE_GRADIENT = "gradient"
CASE_PRINTED = "printed"


class CaseLabel:
    LOWER_BOUND = "lower_bound"
    UPPER_BOUND = "upper_bound"
    INTERIOR = "interior"


@dataclass(frozen=True)
class CaseQuantities:
    """The three per-organization quantities of the stationarity analysis."""

    a1: float  # mean local error at the current iterate
    a2: float  # cost coefficient over the (negative) game weight
    a3: float  # (d_loc + d_gen)^(-beta - 1)


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-9
    max_iters: int = 500
    damping: float = 0.5
    init: str = "all_min"  # all_min | all_max | midpoint | given
    init_profile: np.ndarray | None = None
    case_mode: str = CASE_GRADIENT

    def __post_init__(self):
        if not (self.tol > 0):
            raise ValueError("tol must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not (0 < self.damping <= 1):
            raise ValueError("damping must lie in (0, 1]")
        if self.init not in ("all_min", "all_max", "midpoint", "given"):
            raise ValueError(f"unknown init mode {self.init!r}")
        if self.init == "given" and self.init_profile is None:
            raise ValueError("init='given' requires init_profile")
        if self.case_mode not in (CASE_GRADIENT, CASE_PRINTED):
            raise ValueError(f"unknown case mode {self.case_mode!r}")


@dataclass(frozen=True)
class SolveReport:
    profile: StrategyProfile
    cases: tuple[str, ...]
    iterations: int
    potential_trace: tuple[float, ...]
    converged: bool
    utilities: tuple[economics.UtilityBreakdown, ...]
    welfare: float
    ir: tuple[bool, ...]
    bb: dict
    case_disagreements: int = 0
    ne_certificate: "NeCertificate | None" = None

    def to_dict(self) -> dict:
        out = {
            "profile": [float(x) for x in self.profile.d_gen],
            "cases": list(self.cases),
            "iterations": self.iterations,
            "potential_trace": [float(x) for x in self.potential_trace],
            "converged": self.converged,
            "utilities": [u.to_dict() for u in self.utilities],
            "welfare": self.welfare,
            "ir": list(self.ir),
            "bb": dict(self.bb),
            "case_disagreements": self.case_disagreements,
        }
        if self.ne_certificate is not None:
            out["ne_certificate"] = self.ne_certificate.to_dict()
        return out


def case_quantities(s: Scenario, profile: ProfileLike, n: int) -> CaseQuantities:
    d = as_dgen(profile, s.n)
    eps = economics.local_errors(s, d)
    total_n = s.orgs[n].d_loc + d[n]
    return CaseQuantities(
        a1=float(eps.mean()),
        a2=s.marginal_cost_coeffs()[n] / game.z_weight(s, n),
        a3=float(total_n ** (-s.orgs[n].law.beta - 1.0)),
    )


def _benefit(s: Scenario, n: int, total: float, a1: float) -> float:
    """Marginal reduction of the global error term per generated sample."""
    org = s.orgs[n]
    law = org.law
    if total <= 0:
        raise ZeroTotalData(f"organization {n} has zero total data")
    return (
        law.alpha
        * law.beta
        / (s.n * s.economy.varrho)
        * total ** (-law.beta - 1.0)
        * math.exp((a1 - 1.0) / s.economy.varrho)
    )


def _stationary_point(s: Scenario, n: int, a1: float, a2: float) -> float:
    """Closed-form unconstrained stationary value of d_gen[n], given a1."""
    org = s.orgs[n]
    law = org.law
    varrho = s.economy.varrho
    bracket = -a2 * s.n * varrho / (law.alpha * law.beta) * math.exp(-(a1 - 1.0) / varrho)
    if bracket <= 0.0:  # cost coefficient underflowed to zero
        return math.inf
    return bracket ** (-1.0 / (law.beta + 1.0)) - org.d_loc


def classify_case(
    s: Scenario, profile: ProfileLike, n: int, case_mode: str = CASE_GRADIENT
) -> str:
    """Label organization ``n``'s coordinate as bound-pinned or interior."""
    q = case_quantities(s, profile, n)
    if case_mode == CASE_PRINTED:
        benefit = q.a3 * s.orgs[n].law.alpha * s.orgs[n].law.beta / (
            s.n * s.economy.varrho
        ) * math.exp((q.a1 - 1.0) / s.economy.varrho)
        if benefit > -q.a2:
            return CaseLabel.LOWER_BOUND
        if benefit < -q.a2:
            return CaseLabel.UPPER_BOUND
        return CaseLabel.INTERIOR

    d_star = _stationary_point(s, n, q.a1, q.a2)
    lo, hi = float(s.bounds.d_min), float(s.bounds.d_max)
    if d_star < lo:
        grad_lo = -_benefit(s, n, s.orgs[n].d_loc + lo, q.a1) - q.a2
        if grad_lo >= 0:
            return CaseLabel.LOWER_BOUND
    if d_star > hi:
        grad_hi = -_benefit(s, n, s.orgs[n].d_loc + hi, q.a1) - q.a2
        if grad_hi <= 0:
            return CaseLabel.UPPER_BOUND
    return CaseLabel.INTERIOR


def interior_update(s: Scenario, profile: ProfileLike, n: int) -> float:
    """Stationary value with the mean error frozen at the iterate, clipped."""
    q = case_quantities(s, profile, n)
    d_star = _stationary_point(s, n, q.a1, q.a2)
    return float(min(max(d_star, float(s.bounds.d_min)), float(s.bounds.d_max)))


def _sweep_targets(s: Scenario, d: np.ndarray) -> np.ndarray:
    """Clipped stationary targets for every coordinate (one Jacobi sweep)."""
    eps = economics.local_errors(s, d)
    a1 = float(eps.mean())
    a2s = s.marginal_cost_coeffs() / game.z_weights(s)
    out = np.empty(s.n)
    lo, hi = float(s.bounds.d_min), float(s.bounds.d_max)
    for n in range(s.n):
        t = _stationary_point(s, n, a1, a2s[n])
        out[n] = min(max(t, lo), hi)
    return out


def _restore_integers(s: Scenario, d: np.ndarray) -> np.ndarray:
    """Round each coordinate to the better of floor/ceil by potential value."""
    out = d.copy()
    for n in range(s.n):
        lo = math.floor(out[n])
        hi = math.ceil(out[n])
        if lo == hi:
            out[n] = float(lo)
            continue
        trial = out.copy()
        trial[n] = float(lo)
        f_lo = game.potential(s, trial)
        trial[n] = float(hi)
        f_hi = game.potential(s, trial)
        out[n] = float(lo) if f_lo <= f_hi else float(hi)
    return out


def _initial_profile(s: Scenario, cfg: SolverConfig) -> np.ndarray:
    lo, hi = float(s.bounds.d_min), float(s.bounds.d_max)
    if cfg.init == "all_min":
        return np.full(s.n, lo)
    if cfg.init == "all_max":
        return np.full(s.n, hi)
    if cfg.init == "midpoint":
        return np.full(s.n, 0.5 * (lo + hi))
    return np.clip(as_dgen(cfg.init_profile, s.n).copy(), lo, hi)


def fpi_solve(s: Scenario, cfg: SolverConfig | None = None) -> SolveReport:
    """Fixed-point iteration on the potential with damped Jacobi sweeps.

    Stops on ``|F_k - F_{k-1}| <= tol`` or on iteration exhaustion
    (reported, never raised). The converged real-relaxed profile is then
    rounded coordinate-wise to the better integer neighbour.
    """
    validate_scenario(s)
    cfg = cfg or SolverConfig()
    d = _initial_profile(s, cfg)
    f_prev = game.potential(s, d)
    trace = [f_prev]
    converged = False
    iterations = 0
    for k in range(1, cfg.max_iters + 1):
        iterations = k
        targets = _sweep_targets(s, d)
        d = (1.0 - cfg.damping) * d + cfg.damping * targets
        f_k = game.potential(s, d)
        trace.append(f_k)
        if abs(f_k - f_prev) <= cfg.tol:
            converged = True
            break
        f_prev = f_k

    disagreements = 0
    if cfg.case_mode == CASE_PRINTED:
        grad_labels = [classify_case(s, d, n, CASE_GRADIENT) for n in range(s.n)]
        printed_labels = [classify_case(s, d, n, CASE_PRINTED) for n in range(s.n)]
        disagreements = sum(g != p for g, p in zip(grad_labels, printed_labels))
        if disagreements:
            logger.warning(
                "printed case directions disagree with gradient signs for "
                "%d of %d organizations",
                disagreements,
                s.n,
            )
        cases = printed_labels
    else:
        cases = [classify_case(s, d, n, CASE_GRADIENT) for n in range(s.n)]

    d_final = _restore_integers(s, d)
    ev = economics.evaluate_profile(s, d_final)
    return SolveReport(
        profile=StrategyProfile(d_final),
        cases=tuple(cases),
        iterations=iterations,
        potential_trace=tuple(trace),
        converged=converged,
        utilities=ev.utilities,
        welfare=ev.welfare,
        ir=ev.ir,
        bb={"sum": ev.bb_sum, "balanced": ev.bb_balanced},
        case_disagreements=disagreements,
    )


# ---------------------------------------------------------------------------
# Exhaustive grid oracle. The potential factorizes over coordinates as
#   F(d) = exp(-1/varrho) * prod_n exp(eps_n(d_n) / (N varrho)) + sum_n w_n d_n,
# so the innermost axis of the 3-d scan reduces exactly to a lower-envelope
# query; the 2-d scan is a plain full scan. See cocogen.kernels.
# ---------------------------------------------------------------------------

MAX_ORACLE_ORGS = 3
MAX_POINTS_PER_AXIS = 3001


@dataclass(frozen=True)
class GridOracleResult:
    profile: StrategyProfile
    f_min: float


def _axis_arrays(s: Scenario, values: np.ndarray, n: int):
    org = s.orgs[n]
    eps = org.law.error_at(org.d_loc + values)
    g = np.exp(eps / (s.n * s.economy.varrho))
    w = -s.marginal_cost_coeffs()[n] / game.z_weight(s, n)
    return g, w * values


def grid_oracle(s: Scenario, step: float = 1.0) -> GridOracleResult:
    """Exhaustively minimize the potential over the strategy lattice.

    Ties break toward the lexicographically smallest profile. The reported
    minimum re-evaluates the winning profile through :func:`game.potential`
    so it is directly comparable with solver output.
    """
    validate_scenario(s)
    if s.n > MAX_ORACLE_ORGS:
        raise InstanceTooLarge(f"grid oracle supports N <= {MAX_ORACLE_ORGS}, got {s.n}")
    lo, hi = float(s.bounds.d_min), float(s.bounds.d_max)
    count = int(math.floor((hi - lo) / step)) + 1
    if count > MAX_POINTS_PER_AXIS:
        raise InstanceTooLarge(
            f"{count} points per axis exceeds the {MAX_POINTS_PER_AXIS} guard"
        )
    values = lo + step * np.arange(count)
    if any(o.d_loc + values[0] <= 0 for o in s.orgs):
        raise ZeroTotalData("grid includes a zero-total-data point")

    b = math.exp(-1.0 / s.economy.varrho)
    g0, lin0 = _axis_arrays(s, values, 0)
    bg0 = b * g0
    if s.n == 1:
        f = bg0 + lin0
        i = int(np.argmin(f))
        idx = (i,)
    elif s.n == 2:
        g1, lin1 = _axis_arrays(s, values, 1)
        _, i, j = argmin_2d(bg0, lin0, g1, lin1)
        idx = (i, j)
    else:
        g1, lin1 = _axis_arrays(s, values, 1)
        g2, lin2 = _axis_arrays(s, values, 2)
        env = build_lower_envelope(g2, lin2)
        _, i, j, k = argmin_3d(bg0, lin0, g1, lin1, env)
        idx = (i, j, k)

    profile = np.array([values[i] for i in idx])
    return GridOracleResult(
        profile=StrategyProfile(profile), f_min=game.potential(s, profile)
    )


# ---------------------------------------------------------------------------
# Equilibrium certification by exhaustive unilateral deviation scan.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NeCertificate:
    is_ne: bool
    worst_org: int
    worst_d_alt: float
    worst_gain: float

    def to_dict(self) -> dict:
        return {
            "is_ne": self.is_ne,
            "worst_deviation": {
                "org": self.worst_org,
                "d_alt": self.worst_d_alt,
                "gain": self.worst_gain,
            },
        }


def _unilateral_utilities(s: Scenario, profile: np.ndarray, n: int, xs: np.ndarray):
    """Utility of organization ``n`` at every deviation in ``xs`` (vectorized).

    Composes the same terms, in the same order, as :func:`economics.utility`.
    """
    eps_base = economics.local_errors(s, profile)
    org = s.orgs[n]
    varrho = s.economy.varrho
    eps_n = org.law.error_at(org.d_loc + xs)
    others = float(eps_base.sum() - eps_base[n])
    err = np.exp(((others + eps_n) / s.n - 1.0) / varrho)

    d_min = float(s.bounds.d_min)
    gamma_row = np.asarray(s.market.gamma[n]).copy()
    gamma_row[n] = 0.0

    # Counterfactual with n itself at d_min: constant in the deviation.
    eps_n_min = org.law.error_at(org.d_loc + d_min)
    err_cf_n = math.exp(((others + eps_n_min) / s.n - 1.0) / varrho)
    mc_n = err - err_cf_n

    if s.economy.bb_mode is PayoffMode.ANTISYMMETRIC:
        payoff = np.zeros_like(xs, dtype=np.float64)
        for m in range(s.n):
            if m == n or gamma_row[m] == 0.0:
                continue
            eps_m_min = s.orgs[m].law.error_at(s.orgs[m].d_loc + d_min)
            others_m = others - eps_base[m] + eps_m_min
            err_cf_m = np.exp(((others_m + eps_n) / s.n - 1.0) / varrho)
            payoff += s.market.xi * gamma_row[m] * (mc_n - (err - err_cf_m))
    else:
        payoff = s.market.xi * float(gamma_row.sum()) * mc_n

    eps0 = economics.epsilon_zero(s)
    rev = org.psi * (eps0 - err)
    cost = org.c_cmp * org.kappa * (org.eta * (org.d_loc + xs) + org.mu * xs) * org.f**2
    loss = float(np.dot(np.asarray(s.market.phi), gamma_row)) * mc_n
    return rev + payoff - cost - s.economy.c0 - loss


NE_IMPROVEMENT_TOLERANCE = 1e-6


def verify_ne(s: Scenario, profile: ProfileLike, grid_step: float = 1.0) -> NeCertificate:
    """Scan every unilateral lattice deviation for a profitable improvement."""
    d = as_dgen(profile, s.n)
    lo, hi = float(s.bounds.d_min), float(s.bounds.d_max)
    count = int(math.floor((hi - lo) / grid_step)) + 1
    xs = lo + grid_step * np.arange(count)
    worst_gain = -math.inf
    worst_org = 0
    worst_alt = float(d[0])
    is_ne = True
    for n in range(s.n):
        u_ref = economics.utility(s, d, n).utility
        gains = _unilateral_utilities(s, d, n, xs) - u_ref
        k = int(np.argmax(gains))
        if gains[k] > worst_gain:
            worst_gain = float(gains[k])
            worst_org = n
            worst_alt = float(xs[k])
        if gains[k] > NE_IMPROVEMENT_TOLERANCE * (1.0 + abs(u_ref)):
            is_ne = False
    return NeCertificate(
        is_ne=is_ne, worst_org=worst_org, worst_d_alt=worst_alt, worst_gain=worst_gain
    )
