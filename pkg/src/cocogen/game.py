"""Weighted potential function of the stage game and its analysis probes.

The game admits the potential

    F(d) = global_error(d) - sum_n cost_coeff_n * d_gen[n] / z_n

with per-organization weights z_n < 0, so that any unilateral deviation
satisfies  U_n(alt) - U_n(cur) = z_n * (F(alt) - F(cur)).  The cost
coefficient includes the per-energy price: the utility's cost term carries
it, and the identity above only holds with it present.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import economics
from .errors import ConvexityViolation, NonNegativeZWeight
from .model import ProfileLike, Scenario, as_dgen

__all__ = [
    "PotentialEvaluation",
    "z_weight",
    "z_weights",
    "potential",
    "potential_batch",
    "potential_gradient",
    "weighted_potential_residual",
    "convexity_probe",
    "ConvexityReport",
]


def z_weight(s: Scenario, n: int) -> float:
    """Potential weight of organization ``n``; strictly negative by assumption."""
    gamma_row = np.asarray(s.market.gamma[n])
    z = float(np.dot(gamma_row, s.market.xi - np.asarray(s.market.phi)) - s.orgs[n].psi)
    if z >= 0:
        raise NonNegativeZWeight(n, z)
    return z


def z_weights(s: Scenario) -> np.ndarray:
    return np.array([z_weight(s, n) for n in range(s.n)])


def _linear_coeffs(s: Scenario) -> np.ndarray:
    """Coefficient of d_gen[n] in F: -cost_coeff_n / z_n (positive)."""
    return -s.marginal_cost_coeffs() / z_weights(s)


@dataclass(frozen=True)
class PotentialEvaluation:
    value: float
    gradient: np.ndarray


def potential(s: Scenario, profile: ProfileLike) -> float:
    d = as_dgen(profile, s.n)
    return economics.global_error(s, profile) + float(np.dot(_linear_coeffs(s), d))


def potential_batch(s: Scenario, profiles: np.ndarray) -> np.ndarray:
    """Potential values for a (m, N) batch of profiles."""
    p = np.asarray(profiles, dtype=np.float64)
    totals = s.d_locs()[None, :] + p
    eps = s.alphas()[None, :] * np.power(totals, -s.betas()[None, :]) - s.deltas()[None, :]
    err = np.exp((eps.mean(axis=1) - 1.0) / s.economy.varrho)
    return err + p @ _linear_coeffs(s)


def potential_gradient(s: Scenario, profile: ProfileLike) -> np.ndarray:
    """Analytic coordinate gradient of F at an interior-evaluable profile."""
    d = as_dgen(profile, s.n)
    eps = economics.local_errors(s, d)
    a1 = float(eps.mean())
    err = np.exp((a1 - 1.0) / s.economy.varrho)
    totals = s.d_locs() + d
    alphas, betas = s.alphas(), s.betas()
    benefit = (
        alphas * betas / (s.n * s.economy.varrho) * np.power(totals, -betas - 1.0) * err
    )
    a2 = s.marginal_cost_coeffs() / z_weights(s)
    return -benefit - a2


def evaluate_potential(s: Scenario, profile: ProfileLike) -> PotentialEvaluation:
    return PotentialEvaluation(
        value=potential(s, profile), gradient=potential_gradient(s, profile)
    )


def weighted_potential_residual(
    s: Scenario, profile: ProfileLike, n: int, d_alt: float
) -> float:
    """Defect of the weighted-potential identity for one unilateral deviation.

    Zero (up to float noise) for every profile, organization, and feasible
    alternative; this is the executable statement of the game being a
    weighted potential game.
    """
    base = as_dgen(profile, s.n)
    alt = base.copy()
    alt[n] = float(d_alt)
    du = economics.utility(s, alt, n).utility - economics.utility(s, base, n).utility
    df = potential(s, alt) - potential(s, base)
    return du - z_weight(s, n) * df


@dataclass(frozen=True)
class ConvexityReport:
    trials: int
    worst_midpoint_gap: float
    worst_second_difference: float


def convexity_probe(s: Scenario, trials: int = 1000, seed: int = 0) -> ConvexityReport:
    """Randomized convexity check of F over the strategy box.

    Samples profile pairs and mixing weights, asserting midpoint convexity
    within 1e-12 * |F|, plus non-negative second differences along random
    coordinate directions. Raises :class:`ConvexityViolation` with the
    witness on failure; otherwise reports the worst margins observed.
    """
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 0xC0], dtype=np.uint64)))
    lo, hi = float(s.bounds.d_min), float(s.bounds.d_max)
    # Keep totals strictly positive even when d_loc = d_min = 0.
    if lo == 0 and any(o.d_loc == 0 for o in s.orgs):
        lo = 1.0
    p = rng.uniform(lo, hi, size=(trials, s.n))
    q = rng.uniform(lo, hi, size=(trials, s.n))
    lam = rng.uniform(0.0, 1.0, size=trials)

    f_p = potential_batch(s, p)
    f_q = potential_batch(s, q)
    mid = lam[:, None] * p + (1.0 - lam)[:, None] * q
    f_mid = potential_batch(s, mid)
    chord = lam * f_p + (1.0 - lam) * f_q
    gaps = f_mid - chord
    tol = 1e-12 * np.maximum(np.abs(f_mid), np.abs(chord))
    worst_gap = float(np.max(gaps - tol))
    if worst_gap > 0:
        k = int(np.argmax(gaps - tol))
        raise ConvexityViolation(
            f"midpoint convexity violated by {gaps[k]:.3e}",
            witness={"p": p[k].tolist(), "q": q[k].tolist(), "lam": float(lam[k])},
        )

    # Second differences along random coordinates, step sized to the box.
    h = max((hi - lo) * 1e-3, 1e-3)
    coords = rng.integers(0, s.n, size=trials)
    centers = np.clip(p, lo + h, hi - h)
    plus = centers.copy()
    minus = centers.copy()
    rows = np.arange(trials)
    plus[rows, coords] += h
    minus[rows, coords] -= h
    second = potential_batch(s, plus) - 2.0 * potential_batch(s, centers) + potential_batch(s, minus)
    worst_second = float(second.min())
    if worst_second < -1e-9:
        k = int(np.argmin(second))
        raise ConvexityViolation(
            f"negative second difference {worst_second:.3e}",
            witness={"profile": centers[k].tolist(), "coord": int(coords[k]), "step": h},
        )
    return ConvexityReport(
        trials=trials,
        worst_midpoint_gap=float(np.max(gaps)),
        worst_second_difference=worst_second,
    )
