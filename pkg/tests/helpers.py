"""Shared scenario builders for the test suite."""

from __future__ import annotations

import numpy as np

from cocogen.model import (
    EconomyParams,
    Eps0Mode,
    Market,
    Organization,
    PayoffMode,
    ScalingLaw,
    Scenario,
    StrategyBounds,
    validate_scenario,
)

# Matches the shipped sweep calibration so sampled instances sit in the
# interior-equilibrium regime.
ETA = 1.79e20
MU = 1.79e20
C_CMP = 0.3438 / 3.6e6


def build_scenario(
    n=2,
    alpha=5.0,
    beta=0.5,
    delta=0.0,
    d_loc=1500,
    f=1.5,
    kappa=3.5e-18,
    eta=ETA,
    mu=MU,
    c_cmp=C_CMP,
    psi=700.0,
    gamma=None,
    xi=20.0,
    phi=250.0,
    varrho=20.0,
    c0=0.0,
    eps0_mode=Eps0Mode.AT_ZERO_GENERATION,
    eps0_value=None,
    bb_mode=PayoffMode.LITERAL,
    d_min=0,
    d_max=3000,
    seed=0,
    validate=True,
):
    """Homogeneous scenario with scalar-or-sequence overrides per field."""

    def vec(x, cast=float):
        if np.isscalar(x):
            return [cast(x) for _ in range(n)]
        return [cast(v) for v in x]

    laws = (
        [ScalingLaw(a, b, dl) for a, b, dl in zip(vec(alpha), vec(beta), vec(delta))]
        if any(not np.isscalar(v) for v in (alpha, beta, delta))
        else [ScalingLaw(alpha, beta, delta)] * n
    )
    orgs = tuple(
        Organization(
            id=i,
            d_loc=vec(d_loc, int)[i],
            f=vec(f)[i],
            kappa=vec(kappa)[i],
            eta=vec(eta)[i],
            mu=vec(mu)[i],
            c_cmp=vec(c_cmp)[i],
            psi=vec(psi)[i],
            law=laws[i],
        )
        for i in range(n)
    )
    if gamma is None:
        g = np.full((n, n), 0.5)
        np.fill_diagonal(g, 0.0)
    else:
        g = np.asarray(gamma, dtype=float)
    s = Scenario(
        orgs=orgs,
        market=Market(gamma=g, xi=xi, phi=np.asarray(vec(phi))),
        economy=EconomyParams(
            varrho=varrho,
            c0=c0,
            eps0_mode=eps0_mode,
            eps0_value=eps0_value,
            bb_mode=bb_mode,
        ),
        bounds=StrategyBounds(d_min=d_min, d_max=d_max),
        seed=seed,
    )
    return validate_scenario(s) if validate else s


def table1_scenario(seed, n=10, gamma_range=(0.0, 1.0), cost_scale=1.0, law=None, **kw):
    """Random instance drawn from the published parameter ranges."""
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 99], dtype=np.uint64)))
    g = rng.uniform(*gamma_range, size=(n, n))
    np.fill_diagonal(g, 0.0)
    law = law or ScalingLaw(21.2, 0.52, 0.12)
    return build_scenario(
        n=n,
        alpha=law.alpha,
        beta=law.beta,
        delta=law.delta,
        d_loc=rng.integers(1000, 3001, size=n),
        f=rng.uniform(1.0, 2.0, size=n),
        kappa=rng.uniform(2e-18, 5e-18, size=n),
        eta=ETA * cost_scale,
        mu=MU * cost_scale,
        psi=rng.uniform(600.0, 900.0, size=n),
        phi=rng.uniform(200.0, 300.0, size=n),
        gamma=g,
        xi=20.0,
        seed=seed,
        **kw,
    )


def random_profile(s, seed, lo=None, hi=None):
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 7], dtype=np.uint64)))
    lo = float(s.bounds.d_min) if lo is None else lo
    hi = float(s.bounds.d_max) if hi is None else hi
    return rng.uniform(lo, hi, size=s.n)
