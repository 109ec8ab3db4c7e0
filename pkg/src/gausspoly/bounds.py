"""Deterministic evaluators for the theorem bounds and rates.

Every closed-form tail bound, moment envelope, cumulant bound and moderate
deviation admissibility condition is evaluated verbatim, parameterized by the
non-constructive constants (default 1).  The evaluators never claim to know
the constants; empirical comparisons report the constant that would make a
bound tight instead of inventing one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidParameterError, WindowError
from .rescale import critical_radius

__all__ = [
    "WeightProfile",
    "BoundConstants",
    "weights",
    "statistic_exponent",
    "concentration_bound",
    "ss_parameters",
    "ss_bounds",
    "cumulant_bound",
    "mdp_assess",
    "envelope_bounds",
    "rate_function",
]


@dataclass(frozen=True)
class WeightProfile:
    """The (u, v, w, z) weights attached to a geometric functional."""

    u: int
    v: int
    w: int
    z: int

    @property
    def exponent(self) -> int:
        """Unified cumulant factorial exponent 3dv + u + 5 + z needs d; see
        ``statistic_exponent``."""
        raise AttributeError("use statistic_exponent(xi, d)")


@dataclass
class BoundConstants:
    """Named positive constants; the paper's are non-constructive."""

    values: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, v in self.values.items():
            if not v > 0:
                raise InvalidParameterError(f"constant {name} must be positive")

    def get(self, name: str, default: float = 1.0) -> float:
        return self.values.get(name, default)


def _parse_xi(xi: str):
    """Normalize a functional tag to ('V', None) or ('f', j)."""
    tag = xi.replace("xi_", "")
    if tag in ("V", "volume"):
        return "V", None
    if tag.startswith("f") and tag[1:].isdigit():
        return "f", int(tag[1:])
    raise InvalidParameterError(f"unknown functional tag {xi!r}")


def weights(xi: str, d: int) -> WeightProfile:
    """Weight table: xi_V -> (0,1,2,0); xi_f0 -> (0,0,0,d);
    xi_fj (j>=1) -> (j,j,j,0)."""
    if d < 1:
        raise InvalidParameterError(f"dimension must be >= 1, got {d}")
    kind, j = _parse_xi(xi)
    if kind == "V":
        return WeightProfile(0, 1, 2, 0)
    if not 0 <= j <= d - 1:
        raise InvalidParameterError(f"face index {j} outside [0, {d - 1}]")
    if j == 0:
        return WeightProfile(0, 0, 0, d)
    return WeightProfile(j, j, j, 0)


def statistic_exponent(xi: str, d: int) -> int:
    """Unified factorial exponent 3dv + u + 5 + z.

    Specializes to 3d + 5 for the volume, d + 5 for the vertex count, and
    j(3d + 1) + 5 for higher face counts.
    """
    w = weights(xi, d)
    return 3 * d * w.v + w.u + 5 + w.z


def concentration_bound(statistic: str, y: float, lam: float, d: int,
                        constants: BoundConstants | None = None,
                        j: int | None = None) -> float:
    """Two-sided concentration tail bound at deviation y (in SD units).

    ``statistic`` is "volume", "f_j" (with j given) or a functional tag for
    the empirical-measure version; all share the min-of-two-branches form
    with the statistic's factorial exponent.
    """
    if y < 0:
        raise InvalidParameterError(f"y must be nonnegative, got {y}")
    critical_radius(lam, d)  # admissibility check
    constants = constants or BoundConstants()
    if statistic == "volume":
        xi = "V"
    elif statistic == "f_j":
        xi = f"f{j}"
    else:
        xi = statistic
    e = statistic_exponent(xi, d)
    c = constants.get("c")
    branch1 = y * y / 2.0 ** e
    branch2 = c * math.log(lam) ** ((d - 1) / (4.0 * e)) * y ** (1.0 / e)
    return 2.0 * math.exp(-0.25 * min(branch1, branch2))


def ss_parameters(xi: str, d: int, lam: float,
                  constants: BoundConstants | None = None):
    """(gamma, Delta_lambda) that reproduce the concentration bound through
    the cumulant-condition machinery: gamma = exponent - 1 and
    Delta = c^exponent * (log lam)^{(d-1)/4}."""
    constants = constants or BoundConstants()
    e = statistic_exponent(xi, d)
    c = constants.get("c")
    delta = c ** e * math.log(lam) ** ((d - 1) / 4.0)
    return e - 1, delta


def ss_bounds(kind: str, y: float, gamma: float, delta: float,
              constants: BoundConstants | None = None) -> float:
    """Tail, Berry-Esseen and relative-CLT-error bounds from the cumulant
    condition |c^k| <= (k!)^{1+gamma} / Delta^{k-2}."""
    if gamma < 0 or not delta > 0:
        raise InvalidParameterError("need gamma >= 0 and Delta > 0")
    constants = constants or BoundConstants()
    if kind == "tail":
        if y < 0:
            raise InvalidParameterError(f"y must be nonnegative, got {y}")
        branch1 = y * y / 2.0 ** (1.0 + gamma)
        branch2 = (y * delta) ** (1.0 / (1.0 + gamma))
        return 2.0 * math.exp(-0.25 * min(branch1, branch2))
    if kind == "berry-esseen":
        return constants.get("c") * delta ** (-1.0 / (1.0 + 2.0 * gamma))
    if kind == "relative-error":
        limit = constants.get("c1") * delta ** (1.0 / (1.0 + 2.0 * gamma))
        if not 0 <= y <= limit:
            raise WindowError(y, limit)
        return (constants.get("c2") * (1.0 + y ** 3)
                * delta ** (-1.0 / (1.0 + 2.0 * gamma)))
    raise InvalidParameterError(f"unknown kind {kind!r}")


def cumulant_bound(k: int, lam: float, d: int, xi: str, f_sup: float,
                   constants: BoundConstants | None = None) -> float:
    """c1 c2^k f_sup^k R^{d-1} (k!)^{3dv + u + 5 + z} for order k >= 3."""
    if k < 3:
        raise InvalidParameterError(f"cumulant order must be >= 3, got {k}")
    constants = constants or BoundConstants()
    r = critical_radius(lam, d)
    e = statistic_exponent(xi, d)
    return (constants.get("c1") * constants.get("c2") ** k * f_sup ** k
            * r ** (d - 1) * float(math.factorial(k)) ** e)


def mdp_theta(xi: str, d: int) -> float:
    """Moderate-deviation speed exponent (d-1) / (4(2(3dv+u+z) + 9))."""
    w = weights(xi, d)
    return (d - 1) / (4.0 * (2.0 * (3 * d * w.v + w.u + w.z) + 9.0))


@dataclass
class MdpAssessment:
    lam_grid: list
    a_values: list
    ratios: list            # a_lam * (log lam)^{-theta}
    theta: float
    diverges: bool          # a_lam increasing over the grid
    vanishes: bool          # ratio decreasing over the grid
    admissible: bool

    def rate(self, x: float) -> float:
        return rate_function(x)


def rate_function(x: float) -> float:
    """Gaussian moderate-deviation rate I(x) = x^2 / 2."""
    return x * x / 2.0


def mdp_assess(a_rule, lam_grid, d: int, xi: str = "V") -> MdpAssessment:
    """Check a speed sequence a_lambda against the growth conditions of the
    moderate deviation principle, numerically on a lambda grid."""
    theta = mdp_theta(xi, d)
    lam_grid = list(lam_grid)
    a_values = [float(a_rule(lam)) for lam in lam_grid]
    ratios = [a / math.log(lam) ** theta for a, lam in zip(a_values, lam_grid)]
    diverges = all(b > a for a, b in zip(a_values, a_values[1:]))
    vanishes = all(b < a for a, b in zip(ratios, ratios[1:]))
    return MdpAssessment(lam_grid, a_values, ratios, theta, diverges,
                         vanishes, diverges and vanishes)


def envelope_bounds(kind: str, lam: float, d: int, xi: str = "V",
                    k: int | None = None, y: float | None = None,
                    constants: BoundConstants | None = None):
    """Moment envelopes and the relative-CLT-error bound.

    ``moment`` returns (lower, upper) for the k-th moment: growth exponent
    d/2 per order for the volume and (d-1)/2 for face counts, with the upper
    envelope carrying the extra k! factor.  ``relative-error-clt`` returns
    the right-hand side c (1 + y^3) (log lam)^{-theta}.
    """
    constants = constants or BoundConstants()
    critical_radius(lam, d)
    kind_tag, j = _parse_xi(xi)
    if kind == "moment":
        if k is None or k < 1:
            raise InvalidParameterError("moment envelope needs k >= 1")
        g = d / 2.0 if kind_tag == "V" else (d - 1) / 2.0
        grow = math.log(lam) ** (k * g)
        lower = constants.get("c1") * constants.get("c2") ** k * grow
        upper = (constants.get("c3") * constants.get("c4") ** k
                 * float(math.factorial(k)) * grow)
        return min(lower, upper), max(lower, upper)
    if kind == "relative-error-clt":
        if y is None or y < 0:
            raise InvalidParameterError("relative-error-clt needs y >= 0")
        theta = mdp_theta(xi, d)
        limit = constants.get("c1") * math.log(lam) ** theta
        if y > limit:
            raise WindowError(y, limit)
        return (constants.get("c2") * (1.0 + y ** 3)
                * math.log(lam) ** (-theta))
    raise InvalidParameterError(f"unknown kind {kind!r}")
