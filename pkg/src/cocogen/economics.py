"""Pure evaluation of every economic quantity of one stage game.

All functions are pure in (scenario, profile) and reentrant. Sign
conventions follow the printed transfer formulas: the contribution gap
``global_error(d) - counterfactual_error(d, n)`` is non-positive, so raw
pairwise payoffs and the coopetition loss are non-positive as well; callers
see the raw signed values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRange, SameOrganization, ZeroTotalData
from .model import (
    Eps0Mode,
    Organization,
    PayoffMode,
    ProfileLike,
    ScalingLaw,
    Scenario,
    as_dgen,
)

__all__ = [
    "UtilityBreakdown",
    "ProfileEvaluation",
    "local_error",
    "local_errors",
    "global_error",
    "epsilon_zero",
    "counterfactual_error",
    "marginal_contribution",
    "energy",
    "compute_cost",
    "revenue",
    "payoff_transfer",
    "total_payoff",
    "coopetition_loss",
    "utility",
    "social_welfare",
    "check_ir",
    "check_bb",
    "evaluate_profile",
    "IR_TOLERANCE",
    "BB_RELATIVE_TOLERANCE",
]

IR_TOLERANCE = 1e-9
BB_RELATIVE_TOLERANCE = 1e-6


@dataclass(frozen=True)
class UtilityBreakdown:
    """One organization's utility and its components, in currency units."""

    revenue: float
    payoff_in: float
    cost: float
    server_fee: float
    coopetition_loss: float
    utility: float

    @staticmethod
    def compose(revenue, payoff_in, cost, server_fee, coopetition_loss):
        return UtilityBreakdown(
            revenue=revenue,
            payoff_in=payoff_in,
            cost=cost,
            server_fee=server_fee,
            coopetition_loss=coopetition_loss,
            utility=revenue + payoff_in - cost - server_fee - coopetition_loss,
        )

    def to_dict(self) -> dict:
        return {
            "revenue": self.revenue,
            "payoff_in": self.payoff_in,
            "cost": self.cost,
            "server_fee": self.server_fee,
            "coopetition_loss": self.coopetition_loss,
            "utility": self.utility,
        }


def local_error(law: ScalingLaw, d_loc: float, d_gen: float) -> float:
    """Local model error at ``d_loc + d_gen`` training samples."""
    return law.error_at(d_loc + d_gen)


def local_errors(s: Scenario, profile: ProfileLike) -> np.ndarray:
    """Vector of per-organization local errors at the given profile."""
    d = as_dgen(profile, s.n)
    totals = s.d_locs() + d
    if np.any(totals <= 0):
        raise ZeroTotalData("some organization has zero local plus generated data")
    return s.alphas() * np.power(totals, -s.betas()) - s.deltas()


def global_error(s: Scenario, profile: ProfileLike) -> float:
    """Global model error: exponential aggregation of the mean local error."""
    eps = local_errors(s, profile)
    return float(np.exp((eps.mean() - 1.0) / s.economy.varrho))


def epsilon_zero(s: Scenario, profile: ProfileLike | None = None) -> float:
    """Pre-training global error, per the configured mode."""
    if s.economy.eps0_mode is Eps0Mode.FIXED:
        return float(s.economy.eps0_value)
    baseline = np.full(s.n, float(s.bounds.d_min))
    return global_error(s, baseline)


def _check_index(s: Scenario, n: int) -> None:
    if not (0 <= n < s.n):
        raise IndexOutOfRange(f"organization index {n} outside [0, {s.n})")


def counterfactual_error(s: Scenario, profile: ProfileLike, n: int) -> float:
    """Global error with organization ``n`` held at the minimum strategy."""
    _check_index(s, n)
    d = as_dgen(profile, s.n).copy()
    d[n] = float(s.bounds.d_min)
    return global_error(s, d)


def marginal_contribution(s: Scenario, profile: ProfileLike, n: int) -> float:
    """Contribution gap of organization ``n``; always <= 0."""
    return global_error(s, profile) - counterfactual_error(s, profile, n)


def energy(org: Organization, d_gen: float) -> float:
    """Energy spent training on the mixed data and generating ``d_gen`` samples."""
    d_mix = org.d_loc + d_gen
    return org.kappa * (org.eta * d_mix + org.mu * d_gen) * org.f**2


def compute_cost(org: Organization, d_gen: float) -> float:
    return org.c_cmp * energy(org, d_gen)


def revenue(s: Scenario, profile: ProfileLike, n: int) -> float:
    _check_index(s, n)
    return s.orgs[n].psi * (epsilon_zero(s) - global_error(s, profile))


def payoff_transfer(s: Scenario, profile: ProfileLike, n: int, n_other: int) -> float:
    """Pairwise transfer from competitor ``n_other`` toward organization ``n``."""
    _check_index(s, n)
    _check_index(s, n_other)
    if n == n_other:
        raise SameOrganization(f"no self-transfer for organization {n}")
    rate = s.market.xi * float(s.market.gamma[n, n_other])
    if s.economy.bb_mode is PayoffMode.ANTISYMMETRIC:
        gap = marginal_contribution(s, profile, n) - marginal_contribution(
            s, profile, n_other
        )
    else:
        gap = marginal_contribution(s, profile, n)
    return rate * gap


def total_payoff(s: Scenario, profile: ProfileLike, n: int) -> float:
    """Sum of pairwise transfers into organization ``n``."""
    _check_index(s, n)
    gamma_row = np.asarray(s.market.gamma[n])
    if s.economy.bb_mode is PayoffMode.ANTISYMMETRIC:
        mc = np.array([marginal_contribution(s, profile, m) for m in range(s.n)])
        gaps = mc[n] - mc
    else:
        gaps = np.full(s.n, marginal_contribution(s, profile, n))
    terms = s.market.xi * gamma_row * gaps
    terms[n] = 0.0
    return float(terms.sum())


def coopetition_loss(s: Scenario, profile: ProfileLike, n: int) -> float:
    """Competitors' revenue attributed to ``n``'s contribution (signed)."""
    _check_index(s, n)
    mc = marginal_contribution(s, profile, n)
    terms = np.asarray(s.market.phi) * np.asarray(s.market.gamma[n]) * mc
    terms[n] = 0.0
    return float(terms.sum())


def utility(s: Scenario, profile: ProfileLike, n: int) -> UtilityBreakdown:
    _check_index(s, n)
    d = as_dgen(profile, s.n)
    return UtilityBreakdown.compose(
        revenue=revenue(s, profile, n),
        payoff_in=total_payoff(s, profile, n),
        cost=compute_cost(s.orgs[n], float(d[n])),
        server_fee=s.economy.c0,
        coopetition_loss=coopetition_loss(s, profile, n),
    )


def social_welfare(s: Scenario, profile: ProfileLike) -> float:
    return float(sum(utility(s, profile, n).utility for n in range(s.n)))


def check_ir(s: Scenario, profile: ProfileLike) -> list[bool]:
    """Individual rationality: non-negative utility, up to rounding slack."""
    return [utility(s, profile, n).utility >= -IR_TOLERANCE for n in range(s.n)]


def check_bb(s: Scenario, profile: ProfileLike) -> dict:
    """Budget balance: total transfers, and whether they net out to zero."""
    payoffs = [total_payoff(s, profile, n) for n in range(s.n)]
    total = float(sum(payoffs))
    scale = 1.0 + float(sum(abs(p) for p in payoffs))
    return {"sum": total, "balanced": abs(total) <= BB_RELATIVE_TOLERANCE * scale}


@dataclass(frozen=True)
class ProfileEvaluation:
    """Full economic read-out of one profile, shared by every scheme."""

    utilities: tuple[UtilityBreakdown, ...]
    welfare: float
    ir: tuple[bool, ...]
    bb_sum: float
    bb_balanced: bool


def evaluate_profile(s: Scenario, profile: ProfileLike) -> ProfileEvaluation:
    utilities = tuple(utility(s, profile, n) for n in range(s.n))
    bb = check_bb(s, profile)
    return ProfileEvaluation(
        utilities=utilities,
        welfare=float(sum(u.utility for u in utilities)),
        ir=tuple(u.utility >= -IR_TOLERANCE for u in utilities),
        bb_sum=bb["sum"],
        bb_balanced=bb["balanced"],
    )
