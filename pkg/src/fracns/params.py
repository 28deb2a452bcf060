"""Index arithmetic for the three critical function-space families.

Everything here is exact (``fractions.Fraction``) whenever the inputs are
rational; decimal floats such as ``2.9`` are read through their shortest
``repr`` so that ``2.9`` becomes ``29/10``.  Irrational inputs fall back to
floating point and strict inequalities are then decided with a slack of
``FLOAT_SLACK``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Union

FLOAT_SLACK = 1e-12


class Unbounded(enum.Enum):
    """Marker for an infinite Lebesgue exponent."""

    INF = "inf"

    def __repr__(self) -> str:
        return "INF"

    def __str__(self) -> str:
        return "inf"


INF = Unbounded.INF

Number = Union[int, float, Fraction]
Exponent = Union[Number, Unbounded]


class InadmissibleIndices(ValueError):
    """Raised when a parameter bundle violates one of its range conditions."""

    def __init__(self, message: str, violations: list["Condition"]):
        super().__init__(message)
        self.violations = violations


def as_exact(x) -> Number:
    """Convert ``x`` to a Fraction when it is rational, else to float."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if s.lower() in ("inf", "infinity", "+inf"):
            raise ValueError("use INF for infinite exponents")
        return Fraction(s)
    xf = float(x)
    if not math.isfinite(xf):
        raise ValueError(f"non-finite value {x!r}")
    return Fraction(repr(xf))


def parse_exponent(x) -> Exponent:
    if x is INF:
        return INF
    if isinstance(x, str) and x.strip().lower() in ("inf", "infinity", "+inf", "∞"):
        return INF
    if isinstance(x, float) and math.isinf(x) and x > 0:
        return INF
    return as_exact(x)


def _is_exact(*xs) -> bool:
    return all(isinstance(x, Fraction) for x in xs)


def to_json_number(x):
    """JSON-friendly rendering: exact values become ``"p/q"`` plus a float."""
    if x is INF:
        return "inf"
    if isinstance(x, Fraction):
        return {"exact": f"{x.numerator}/{x.denominator}", "value": float(x)}
    return float(x)


@dataclass(frozen=True)
class Condition:
    """A strict or non-strict inequality ``lhs < rhs`` with its slack ``rhs - lhs``."""

    name: str
    slack: Number
    strict: bool = True

    @property
    def holds(self) -> bool:
        if isinstance(self.slack, Fraction):
            return self.slack > 0 if self.strict else self.slack >= 0
        if self.strict:
            return self.slack > FLOAT_SLACK
        return self.slack >= -FLOAT_SLACK

    def to_dict(self) -> dict:
        return {"name": self.name, "slack": to_json_number(self.slack), "holds": self.holds}


def _less(name: str, lhs, rhs, strict: bool = True) -> Condition:
    return Condition(name, rhs - lhs, strict)


@dataclass(frozen=True)
class ModelParams:
    """Dimension ``d`` and fractional order ``alpha`` with ``1 < alpha < 2``."""

    alpha: Number
    d: int

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_exact(self.alpha))
        if not isinstance(self.d, int) or isinstance(self.d, bool):
            raise TypeError("d must be an integer")
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if not (1 < self.alpha < 2):
            raise ValueError(f"alpha must lie in (1, 2), got {self.alpha}")

    @property
    def warnings(self) -> list[str]:
        if self.d == 2:
            return ["marginal-dimension: d = 2 is accepted, the existence results are stated for d >= 3"]
        if self.d == 1:
            return ["d = 1: kernel utilities only, index bundles are rejected"]
        return []

    @property
    def morrey_q(self) -> Number:
        """Second Morrey index (d + alpha)/(alpha - 1) of the resolution space."""
        return (self.d + self.alpha) / (self.alpha - 1)


@dataclass(frozen=True)
class ForceIndices:
    p0: Exponent
    beta: Number
    rho: Number
    conditions: tuple[Condition, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def admissible(self) -> bool:
        return all(c.holds for c in self.conditions)

    @property
    def violations(self) -> list[Condition]:
        return [c for c in self.conditions if not c.holds]

    def to_dict(self) -> dict:
        return {
            "p0": to_json_number(self.p0),
            "beta": to_json_number(self.beta),
            "rho": to_json_number(self.rho),
        }


@dataclass(frozen=True)
class MorreyForceIndices:
    p1: Number
    gamma: Number
    frak_p: Number
    frak_q: Number
    q1: Number
    conditions: tuple[Condition, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def admissible(self) -> bool:
        return all(c.holds for c in self.conditions)

    @property
    def violations(self) -> list[Condition]:
        return [c for c in self.conditions if not c.holds]

    def to_dict(self) -> dict:
        return {
            "p1": to_json_number(self.p1),
            "gamma": to_json_number(self.gamma),
            "frak_p": to_json_number(self.frak_p),
            "frak_q": to_json_number(self.frak_q),
            "q1": to_json_number(self.q1),
        }


@dataclass(frozen=True)
class EmbeddingVerdict:
    holds: bool
    violated_conditions: list[Condition] = field(default_factory=list)
    derived: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "violations": [c.to_dict() for c in self.violated_conditions],
            "derived": {k: to_json_number(v) for k, v in self.derived.items()},
        }


def _d_over(d: int, p: Exponent) -> Number:
    return Fraction(0) if p is INF else d / p


def derive_force_indices(params: ModelParams, p0, beta, strict: bool = True) -> ForceIndices:
    """Compute ``rho = 2 - (beta + d/p0 + 1)/alpha`` and check the ranges.

    With ``strict=True`` an inadmissible bundle raises
    :class:`InadmissibleIndices`; otherwise the returned indices carry the
    failed conditions.
    """
    a, d = params.alpha, params.d
    p0 = parse_exponent(p0)
    beta = as_exact(beta)
    if p0 is not INF and not _is_exact(p0, beta, a):
        p0, beta, a = float(p0), float(beta), float(a)
    dp = _d_over(d, p0)
    rho = 2 - (beta + dp + 1) / a
    conds = [
        _less("d >= 2", 2, d, strict=False),
        _less("beta > 0", 0, beta),
        _less("alpha - d/p0 - 1 < beta", a - dp - 1, beta),
        _less("beta < alpha - d/p0", beta, a - dp),
        _less("0 < rho", 0, rho),
        _less("rho < 1", rho, 1),
    ]
    if p0 is not INF:
        conds.insert(0, _less("d/alpha < p0", d / a, p0))
    warns = list(params.warnings)
    if p0 is INF:
        warns.append("p0 = inf additionally requires div(f) = 0")
    idx = ForceIndices(p0, beta, rho, tuple(conds), tuple(warns))
    if strict and not idx.admissible:
        names = ", ".join(c.name for c in idx.violations)
        raise InadmissibleIndices(f"inadmissible force indices (p0, beta): {names}", idx.violations)
    return idx


def derive_morrey_indices(params: ModelParams, p1, gamma, strict: bool = True) -> MorreyForceIndices:
    """Morrey-Sobolev force indices ``(frak_p, frak_q)`` for a resolution index ``p1``."""
    a, d = params.alpha, params.d
    p1, gamma = as_exact(p1), as_exact(gamma)
    if not _is_exact(p1, gamma, a):
        p1, gamma, a = float(p1), float(gamma), float(a)
    denom = 2 * a - 1 - gamma
    warns = list(params.warnings)
    conds = [
        _less("d >= 2", 2, d, strict=False),
        _less("2 < p1", 2, p1),
        _less("p1 < alpha/(alpha-1)", p1, a / (a - 1)),
        _less("2alpha - 1 - (alpha-1)p1 < gamma", 2 * a - 1 - (a - 1) * p1, gamma),
        _less("gamma < alpha", gamma, a),
    ]
    if p1 == 2:
        warns.append("p1 = 2 sits on the boundary: the endpoint 2 <= p1 is sometimes quoted, 2 < p1 is enforced")
    if denom > 0:
        frak_p = (a - 1) * p1 / denom
        frak_q = (d + a) / denom
        conds.append(_less("frak_p > 1", 1, frak_p))
    else:
        frak_p = frak_q = math.inf
        conds.append(Condition("2alpha - 1 - gamma > 0", denom))
    q1 = (d + a) / (a - 1)
    idx = MorreyForceIndices(p1, gamma, frak_p, frak_q, q1, tuple(conds), tuple(warns))
    if strict and not idx.admissible:
        names = ", ".join(c.name for c in idx.violations)
        raise InadmissibleIndices(f"inadmissible Morrey-Sobolev force indices (p1, gamma): {names}", idx.violations)
    return idx


def check_embedding_F_to_W(t1: ForceIndices, t2: MorreyForceIndices) -> EmbeddingVerdict:
    """Sufficient conditions ``rho*frak_p < 1``, ``frak_p <= p0``, ``beta == gamma``."""
    rp = t1.rho * t2.frak_p
    conds = [_less("rho*frak_p < 1", rp, 1)]
    if t1.p0 is INF:
        conds.append(Condition("frak_p <= p0", Fraction(1), strict=False))
    else:
        conds.append(_less("frak_p <= p0", t2.frak_p, t1.p0, strict=False))
    diff = t1.beta - t2.gamma
    if isinstance(diff, Fraction):
        same = diff == 0
    else:
        same = abs(diff) <= FLOAT_SLACK
    conds.append(Condition("beta == gamma", -abs(diff) if not same else Fraction(0), strict=False))
    bad = [c for c in conds if not c.holds]
    return EmbeddingVerdict(not bad, bad, {"rho*frak_p": rp, "beta-gamma": diff})


def check_embedding_W_to_Vinv(params: ModelParams, t2: MorreyForceIndices) -> EmbeddingVerdict:
    """``gamma = 1`` with ``frak_p = p1/2`` and ``frak_q = (d+alpha)/(2alpha-2)``."""
    a, d = params.alpha, params.d
    want_p = t2.p1 / 2
    want_q = (d + a) / (2 * a - 2)

    def _eq(name, x, y):
        dx = x - y
        ok = dx == 0 if isinstance(dx, Fraction) else abs(dx) <= FLOAT_SLACK
        return Condition(name, Fraction(0) if ok else -abs(dx), strict=False)

    conds = [
        _eq("gamma == 1", t2.gamma, 1),
        _eq("frak_p == p1/2", t2.frak_p, want_p),
        _eq("frak_q == (d+alpha)/(2alpha-2)", t2.frak_q, want_q),
    ]
    bad = [c for c in conds if not c.holds]
    return EmbeddingVerdict(
        not bad, bad, {"frak_p": t2.frak_p, "frak_q": t2.frak_q, "p1/2": want_p,
                       "(d+alpha)/(2alpha-2)": want_q}
    )


def force_w_scaling_exponent(params: ModelParams, t2: MorreyForceIndices) -> Number:
    """Power of lambda picked up by the Morrey-Sobolev force norm under force rescaling.

    Zero exactly when ``frak_q = (d + alpha)/(2 alpha - 1 - gamma)``.
    """
    a = params.alpha
    return (2 * a - 1) - t2.gamma - (params.d + a) / t2.frak_q


def force_f_scaling_exponent(params: ModelParams, t1: ForceIndices) -> Number:
    a = params.alpha
    return (2 * a - 1) - t1.beta - _d_over(params.d, t1.p0) - a * t1.rho


def verdict_json(params: ModelParams, t1: ForceIndices | None = None,
                 t2: MorreyForceIndices | None = None) -> dict:
    """The ``{admissible, derived, violations}`` object emitted by ``check-params``."""
    derived: dict = {"alpha": to_json_number(params.alpha), "d": params.d,
                     "q1": to_json_number(params.morrey_q)}
    violations: list[dict] = []
    warnings = list(params.warnings)
    for idx in (t1, t2):
        if idx is None:
            continue
        derived.update(idx.to_dict())
        violations += [c.to_dict() for c in idx.violations]
        warnings += [w for w in idx.warnings if w not in warnings]
    out = {"admissible": not violations, "derived": derived, "violations": violations,
           "warnings": warnings}
    if t1 is not None and t2 is not None and t1.admissible and t2.admissible:
        out["embedding_F_to_W"] = check_embedding_F_to_W(t1, t2).to_dict()
    if t2 is not None and t2.admissible:
        out["embedding_W_to_Vinv"] = check_embedding_W_to_Vinv(params, t2).to_dict()
    return out
