"""Domain types for one stage game: organizations, market, economy, bounds.

Everything is an immutable dataclass. Construction is permissive except for
``ScalingLaw`` (checked eagerly); :func:`validate_scenario` collects the full
list of invariant violations so a config file can be diagnosed in one pass.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    CocogenError,
    DimensionMismatch,
    InvariantViolation,
    NonNegativeZWeight,
    ScenarioValidationError,
    ZeroTotalData,
)

__all__ = [
    "ScalingLaw",
    "Organization",
    "Market",
    "EconomyParams",
    "Eps0Mode",
    "PayoffMode",
    "StrategyBounds",
    "Scenario",
    "StrategyProfile",
    "validate_scenario",
    "scenario_to_dict",
    "scenario_from_dict",
    "load_scenario",
    "save_scenario",
    "DEFAULT_ETA",
    "DEFAULT_MU",
    "DEFAULT_C_CMP",
    "DEFAULT_C0",
]

# Cycles per sample are not published; cost magnitude is therefore a pure
# calibration choice (see README, "Cost calibration").
DEFAULT_ETA = 1.0e4
DEFAULT_MU = 1.0e4
# 0.3438 currency per kWh converted to currency per joule.
DEFAULT_C_CMP = 0.3438 / 3.6e6
DEFAULT_C0 = 0.0


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ScalingLaw:
    """Inverse power law mapping total training data to local model error."""

    alpha: float
    beta: float
    delta: float = 0.0

    def __post_init__(self):
        if not (self.alpha > 0):
            raise InvariantViolation("alpha", f"must be > 0, got {self.alpha!r}")
        if not (self.beta > 0):
            raise InvariantViolation("beta", f"must be > 0, got {self.beta!r}")
        if not (self.delta >= 0):
            raise InvariantViolation("delta", f"must be >= 0, got {self.delta!r}")

    def error_at(self, d_total):
        """Predicted local error at a total data volume (scalar or array).

        May be negative for very large volumes; the offset permits this.
        """
        d = np.asarray(d_total, dtype=np.float64)
        if np.any(d <= 0):
            raise ZeroTotalData("error law requires total data volume > 0")
        out = self.alpha * np.power(d, -self.beta) - self.delta
        return float(out) if np.isscalar(d_total) or d.ndim == 0 else out


@dataclass(frozen=True)
class Organization:
    """One silo: local data, compute profile, valuation, and its error law."""

    id: int
    d_loc: int
    f: float
    kappa: float
    law: ScalingLaw
    eta: float = DEFAULT_ETA
    mu: float = DEFAULT_MU
    c_cmp: float = DEFAULT_C_CMP
    psi: float = 700.0

    def _violations(self) -> list[CocogenError]:
        out: list[CocogenError] = []
        prefix = f"organizations[{self.id}]"
        if self.d_loc < 0:
            out.append(InvariantViolation(f"{prefix}.d_loc", "must be >= 0"))
        for name in ("f", "kappa", "eta", "mu", "c_cmp"):
            if not (getattr(self, name) > 0):
                out.append(InvariantViolation(f"{prefix}.{name}", "must be > 0"))
        if not (self.psi >= 0):
            out.append(InvariantViolation(f"{prefix}.psi", "must be >= 0"))
        return out


@dataclass(frozen=True, eq=False)
class Market:
    """Pairwise competitive intensities plus the transfer rate parameters."""

    gamma: np.ndarray
    xi: float
    phi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gamma", _readonly(self.gamma))
        object.__setattr__(self, "phi", _readonly(self.phi))

    def _violations(self, n_orgs: int) -> list[CocogenError]:
        out: list[CocogenError] = []
        g = self.gamma
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            out.append(DimensionMismatch(f"gamma must be square, got shape {g.shape}"))
            return out
        if g.shape[0] != n_orgs:
            out.append(
                DimensionMismatch(
                    f"gamma is {g.shape[0]}x{g.shape[1]} but there are {n_orgs} organizations"
                )
            )
        if self.phi.ndim != 1 or self.phi.shape[0] != g.shape[0]:
            out.append(
                DimensionMismatch(
                    f"phi has shape {self.phi.shape}, expected ({g.shape[0]},)"
                )
            )
            return out
        if np.any(g < 0) or np.any(g > 1):
            out.append(InvariantViolation("market.gamma", "entries must lie in [0, 1]"))
        if np.any(np.diagonal(g) != 0):
            out.append(InvariantViolation("market.gamma", "diagonal must be zero"))
        if not (self.xi >= 0):
            out.append(InvariantViolation("market.xi", "must be >= 0"))
        if np.any(self.phi <= 0):
            out.append(InvariantViolation("market.phi", "entries must be > 0"))
        elif self.xi > float(np.min(self.phi)):
            out.append(
                InvariantViolation(
                    "market.xi", "must not exceed min(phi) (cooperation stability)"
                )
            )
        return out


class Eps0Mode(str, Enum):
    """How the pre-training global error is obtained."""

    AT_ZERO_GENERATION = "at_zero_generation"
    FIXED = "fixed"


class PayoffMode(str, Enum):
    """Payoff-transfer convention: the printed formula, or a balanced variant."""

    LITERAL = "literal"
    ANTISYMMETRIC = "antisymmetric"


@dataclass(frozen=True)
class EconomyParams:
    varrho: float = 20.0
    c0: float = DEFAULT_C0
    eps0_mode: Eps0Mode = Eps0Mode.AT_ZERO_GENERATION
    eps0_value: float | None = None
    bb_mode: PayoffMode = PayoffMode.LITERAL

    def _violations(self) -> list[CocogenError]:
        out: list[CocogenError] = []
        if not (self.varrho > 0):
            out.append(InvariantViolation("economy.varrho", "must be > 0"))
        if not (self.c0 >= 0):
            out.append(InvariantViolation("economy.c0", "must be >= 0"))
        if self.eps0_mode is Eps0Mode.FIXED:
            v = self.eps0_value
            if v is None or not (0 < v <= 1):
                out.append(
                    InvariantViolation("economy.eps0_value", "must lie in (0, 1]")
                )
        return out


@dataclass(frozen=True)
class StrategyBounds:
    d_min: int = 0
    d_max: int = 3000

    def _violations(self) -> list[CocogenError]:
        out: list[CocogenError] = []
        if self.d_min < 0:
            out.append(InvariantViolation("bounds.d_min", "must be >= 0"))
        if self.d_max < self.d_min:
            out.append(InvariantViolation("bounds.d_max", "must be >= d_min"))
        return out


@dataclass(frozen=True)
class Scenario:
    """A complete game instance. Immutable; safe to share across workers."""

    orgs: tuple[Organization, ...]
    market: Market
    economy: EconomyParams
    bounds: StrategyBounds
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "orgs", tuple(self.orgs))

    @property
    def n(self) -> int:
        return len(self.orgs)

    # Per-organization parameter vectors, used throughout the numerics.
    def alphas(self) -> np.ndarray:
        return np.array([o.law.alpha for o in self.orgs])

    def betas(self) -> np.ndarray:
        return np.array([o.law.beta for o in self.orgs])

    def deltas(self) -> np.ndarray:
        return np.array([o.law.delta for o in self.orgs])

    def d_locs(self) -> np.ndarray:
        return np.array([float(o.d_loc) for o in self.orgs])

    def psis(self) -> np.ndarray:
        return np.array([o.psi for o in self.orgs])

    def marginal_cost_coeffs(self) -> np.ndarray:
        """c_cmp * kappa * (eta + mu) * f^2 per organization."""
        return np.array(
            [o.c_cmp * o.kappa * (o.eta + o.mu) * o.f**2 for o in self.orgs]
        )


@dataclass(frozen=True, eq=False)
class StrategyProfile:
    """Real-relaxed generated-data volumes, one entry per organization."""

    d_gen: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "d_gen", _readonly(np.atleast_1d(self.d_gen)))

    def __len__(self) -> int:
        return self.d_gen.shape[0]

    def within(self, bounds: StrategyBounds) -> bool:
        return bool(
            np.all(self.d_gen >= bounds.d_min) and np.all(self.d_gen <= bounds.d_max)
        )

    def replaced(self, n: int, value: float) -> "StrategyProfile":
        d = self.d_gen.copy()
        d[n] = value
        return StrategyProfile(d)


ProfileLike = Union[StrategyProfile, np.ndarray, Sequence[float]]


def as_dgen(profile: ProfileLike, n_orgs: int | None = None) -> np.ndarray:
    """Coerce a profile-like object to a float64 vector; check its length."""
    d = profile.d_gen if isinstance(profile, StrategyProfile) else profile
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 1:
        raise DimensionMismatch(f"profile must be 1-d, got shape {d.shape}")
    if n_orgs is not None and d.shape[0] != n_orgs:
        raise DimensionMismatch(f"profile has length {d.shape[0]}, expected {n_orgs}")
    return d


def validate_scenario(s: Scenario) -> Scenario:
    """Return ``s`` unchanged iff every invariant holds.

    Raises :class:`ScenarioValidationError` carrying the complete violation
    list otherwise. Idempotent: validating a validated scenario is a no-op.
    """
    violations: list[CocogenError] = []
    if len(s.orgs) < 1:
        violations.append(InvariantViolation("organizations", "need at least one"))
        raise ScenarioValidationError(violations)

    for i, org in enumerate(s.orgs):
        if org.id != i:
            violations.append(
                InvariantViolation(f"organizations[{i}].id", f"must equal index {i}")
            )
        try:
            ScalingLaw(org.law.alpha, org.law.beta, org.law.delta)
        except InvariantViolation as exc:
            violations.append(
                InvariantViolation(f"organizations[{i}].law.{exc.field}", exc.detail)
            )
        violations.extend(org._violations())
    violations.extend(s.market._violations(s.n))
    violations.extend(s.economy._violations())
    violations.extend(s.bounds._violations())

    if not (0 <= s.seed < 2**64):
        violations.append(InvariantViolation("seed", "must fit in 64 unsigned bits"))

    if not violations:
        # Only meaningful once the market shape checks passed.
        from .game import z_weight

        for i in range(s.n):
            try:
                z_weight(s, i)
            except NonNegativeZWeight as exc:
                violations.append(exc)

    if violations:
        raise ScenarioValidationError(violations)
    return s


# ---------------------------------------------------------------------------
# JSON config format. Strict parsing: unknown keys are an error. Floats are
# serialized via repr (shortest round-trip), so a write/read cycle is
# bit-identical.
# ---------------------------------------------------------------------------


def _check_keys(obj: dict, allowed: Iterable[str], where: str) -> None:
    unknown = set(obj) - set(allowed)
    if unknown:
        raise InvariantViolation(where, f"unknown key(s): {sorted(unknown)}")


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise InvariantViolation(where, f"missing required key {key!r}")
    return obj[key]


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "organizations": [
            {
                "d_loc": int(o.d_loc),
                "f": o.f,
                "kappa": o.kappa,
                "eta": o.eta,
                "mu": o.mu,
                "c_cmp": o.c_cmp,
                "psi": o.psi,
                "law": {"alpha": o.law.alpha, "beta": o.law.beta, "delta": o.law.delta},
            }
            for o in s.orgs
        ],
        "market": {
            "gamma": [[float(x) for x in row] for row in s.market.gamma],
            "xi": s.market.xi,
            "phi": [float(x) for x in s.market.phi],
        },
        "economy": {
            "varrho": s.economy.varrho,
            "c0": s.economy.c0,
            "eps0_mode": s.economy.eps0_mode.value,
            "eps0_value": s.economy.eps0_value,
            "bb_mode": s.economy.bb_mode.value,
        },
        "bounds": {"d_min": int(s.bounds.d_min), "d_max": int(s.bounds.d_max)},
        "seed": int(s.seed),
    }


def _law_from_dict(obj: dict, where: str) -> ScalingLaw:
    _check_keys(obj, ("alpha", "beta", "delta"), where)
    return ScalingLaw(
        alpha=float(_require(obj, "alpha", where)),
        beta=float(_require(obj, "beta", where)),
        delta=float(obj.get("delta", 0.0)),
    )


def scenario_from_dict(obj: dict, validate: bool = True) -> Scenario:
    _check_keys(obj, ("organizations", "market", "economy", "bounds", "seed"), "scenario")
    orgs = []
    raw_orgs = _require(obj, "organizations", "scenario")
    for i, raw in enumerate(raw_orgs):
        where = f"organizations[{i}]"
        _check_keys(raw, ("d_loc", "f", "kappa", "eta", "mu", "c_cmp", "psi", "law"), where)
        orgs.append(
            Organization(
                id=i,
                d_loc=int(_require(raw, "d_loc", where)),
                f=float(_require(raw, "f", where)),
                kappa=float(_require(raw, "kappa", where)),
                eta=float(raw.get("eta", DEFAULT_ETA)),
                mu=float(raw.get("mu", DEFAULT_MU)),
                c_cmp=float(raw.get("c_cmp", DEFAULT_C_CMP)),
                psi=float(_require(raw, "psi", where)),
                law=_law_from_dict(_require(raw, "law", where), f"{where}.law"),
            )
        )
    raw_m = _require(obj, "market", "scenario")
    _check_keys(raw_m, ("gamma", "xi", "phi"), "market")
    market = Market(
        gamma=np.array(_require(raw_m, "gamma", "market"), dtype=np.float64),
        xi=float(_require(raw_m, "xi", "market")),
        phi=np.array(_require(raw_m, "phi", "market"), dtype=np.float64),
    )
    raw_e = obj.get("economy", {})
    _check_keys(raw_e, ("varrho", "c0", "eps0_mode", "eps0_value", "bb_mode"), "economy")
    eps0_value = raw_e.get("eps0_value")
    economy = EconomyParams(
        varrho=float(raw_e.get("varrho", 20.0)),
        c0=float(raw_e.get("c0", DEFAULT_C0)),
        eps0_mode=Eps0Mode(raw_e.get("eps0_mode", "at_zero_generation")),
        eps0_value=None if eps0_value is None else float(eps0_value),
        bb_mode=PayoffMode(raw_e.get("bb_mode", "literal")),
    )
    raw_b = obj.get("bounds", {})
    _check_keys(raw_b, ("d_min", "d_max"), "bounds")
    bounds = StrategyBounds(
        d_min=int(raw_b.get("d_min", 0)), d_max=int(raw_b.get("d_max", 3000))
    )
    s = Scenario(
        orgs=tuple(orgs),
        market=market,
        economy=economy,
        bounds=bounds,
        seed=int(obj.get("seed", 0)),
    )
    return validate_scenario(s) if validate else s


def save_scenario(s: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(s), fh, indent=2)
        fh.write("\n")


def load_scenario(path, validate: bool = True) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh), validate=validate)


def with_payoff_mode(s: Scenario, mode: PayoffMode) -> Scenario:
    """Copy of the scenario with a different payoff-transfer convention."""
    return replace(s, economy=replace(s.economy, bb_mode=mode))
