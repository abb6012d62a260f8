"""Network parameters, closed-form subpacketization / transmission counts and
complexity orders for the compared caching schemes.

Scheme labels:
    LIN   cyclic caching without user grouping
    RED   cyclic caching with gcd-based user grouping
    MS    multi-antenna scheme built on t-subsets with multicast precoding
    LE    group-based scheme requiring alpha | t and alpha | K
    MB    reduced-subpacketization multicast scheme requiring (t+alpha)/(t+1) integer
    NoCC  baseline with local caching and spatial multiplexing only
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .errors import ParameterError

__all__ = [
    "Scheme",
    "SchemeParams",
    "ComplexityReport",
    "OrderDescriptor",
    "validate",
    "phi",
    "binary_entropy",
    "lin_counts",
    "red_counts",
    "ms_counts",
    "le_counts",
    "mb_counts",
    "complexity_report",
    "complexity_order",
]


class Scheme(str, Enum):
    LIN = "LIN"
    RED = "RED"
    MS = "MS"
    LE = "LE"
    MB = "MB"
    NOCC = "NoCC"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class SchemeParams:
    """Validated network parameters.

    K       number of (real) receiving users
    t       coded caching gain, t = K*M/N
    L       transmit antennas
    alpha   spatial multiplexing gain, t <= alpha <= L
    K_f     number of phantom users appended to enlarge gcd(K+K_f, t, alpha)
    N       library size (defaults to K)
    f       file size; rates are reported per file of size f
    """

    K: int
    t: int
    L: int
    alpha: int
    K_f: int = 0
    N: int | None = None
    f: float = 1.0

    def __post_init__(self):
        if self.N is None:
            object.__setattr__(self, "N", self.K)

    @property
    def K_eff(self) -> int:
        """User count the scheme is actually built over (real + phantom)."""
        return self.K + self.K_f

    @property
    def cache_fraction(self) -> float:
        """Cached fraction M/N of every file at each user."""
        return self.t / self.K

    @property
    def dof(self) -> int:
        return self.t + self.alpha

    @property
    def phi(self) -> int:
        """gcd(K_eff, t, alpha), the grouping factor of the RED scheme."""
        return phi(self.K_eff, self.t, self.alpha)


def validate(params: SchemeParams) -> SchemeParams:
    """Check all parameter invariants, returning ``params`` unchanged.

    Raises ParameterError naming the violated constraint.
    """
    p = params
    for name in ("K", "t", "L", "alpha"):
        v = getattr(p, name)
        if not isinstance(v, int) or v < 1:
            raise ParameterError(f"{name} must be a positive integer, got {v!r}")
    if not isinstance(p.K_f, int) or p.K_f < 0:
        raise ParameterError(f"K_f must be a non-negative integer, got {p.K_f!r}")
    if not isinstance(p.N, int) or p.N < 1:
        raise ParameterError(f"N must be a positive integer, got {p.N!r}")
    if p.f <= 0:
        raise ParameterError(f"f must be positive, got {p.f!r}")
    if p.t > p.alpha:
        raise ParameterError(f"t <= alpha required, got t={p.t} > alpha={p.alpha}")
    if p.alpha > p.L:
        raise ParameterError(f"alpha <= L required, got alpha={p.alpha} > L={p.L}")
    if p.N < p.K:
        raise ParameterError(f"N >= K required, got N={p.N} < K={p.K}")
    if p.K_eff <= p.t:
        raise ParameterError(
            f"K + K_f > t required, got K+K_f={p.K_eff} <= t={p.t}"
        )
    return params


def phi(K: int, t: int, alpha: int) -> int:
    """gcd of the triple (K, t, alpha)."""
    if min(K, t, alpha) < 1:
        raise ParameterError("phi arguments must be positive")
    return math.gcd(math.gcd(K, t), alpha)


def binary_entropy(gamma: float) -> float:
    """Base-2 entropy of a Bernoulli(gamma) variable."""
    if not 0.0 <= gamma <= 1.0:
        raise ParameterError(f"entropy argument must lie in [0, 1], got {gamma}")
    if gamma in (0.0, 1.0):
        return 0.0
    return -gamma * math.log2(gamma) - (1 - gamma) * math.log2(1 - gamma)


@dataclass(frozen=True)
class ComplexityReport:
    """Subpacketization and transmission count of one scheme, or unavailable.

    ``None`` marks a scheme whose parameter constraints fail; comparison
    tables render it as a dash.
    """

    scheme: Scheme
    subpacketization: int | None
    transmission_count: int | None

    @property
    def available(self) -> bool:
        return self.subpacketization is not None


def lin_counts(K: int, t: int, alpha: int) -> tuple[int, int]:
    """Ungrouped cyclic scheme: K(t+alpha) subpackets, K(K-t) transmissions."""
    return K * (t + alpha), K * (K - t)


def red_counts(K: int, t: int, alpha: int) -> tuple[int, int]:
    """Grouped cyclic scheme: both LIN counts divided by gcd(K,t,alpha)^2."""
    f2 = phi(K, t, alpha) ** 2
    s, i = lin_counts(K, t, alpha)
    return s // f2, i // f2


def ms_counts(K: int, t: int, alpha: int) -> tuple[int, int] | None:
    """C(K,t)*C(K-t-1,alpha-1) subpackets, C(K,t+alpha) transmissions.

    Unavailable when the network cannot host t+alpha served users.
    """
    if K < t + alpha:
        return None
    return math.comb(K, t) * math.comb(K - t - 1, alpha - 1), math.comb(K, t + alpha)


def le_counts(K: int, t: int, alpha: int) -> tuple[int, int] | None:
    """C(K/alpha, t/alpha) subpackets, C(K/alpha, t/alpha + 1) transmissions.

    Requires t >= alpha with alpha dividing both t and K.  The transmission
    count has no published closed form; C(K/alpha, t/alpha + 1) reproduces
    every available anchor value (6, 28, 21), so it is enabled.
    """
    if t < alpha or t % alpha or K % alpha:
        return None
    kk, tt = K // alpha, t // alpha
    if kk < tt + 1:
        return None
    return math.comb(kk, tt), math.comb(kk, tt + 1)


def mb_counts(K: int, t: int, alpha: int) -> tuple[int, int] | None:
    """C(K,t) subpackets; delivery count inferred from the stream budget.

    Requires (t+alpha)/(t+1) integer.  Each user misses C(K-1,t) subfiles and
    every transmission carries t+alpha of them, giving
    K*C(K-1,t)/(t+alpha) = C(K,t+1)*(t+1)/(t+alpha) transmissions; the single
    exact anchor (28) confirms this.  Marked unavailable if non-integral.
    """
    if (t + alpha) % (t + 1):
        return None
    num = math.comb(K, t + 1) * (t + 1)
    if num % (t + alpha):
        return None
    return math.comb(K, t), num // (t + alpha)


def complexity_report(params: SchemeParams, scheme: Scheme | str) -> ComplexityReport:
    """Exact integer counts for one scheme over the effective K + K_f users."""
    scheme = Scheme(scheme)
    K, t, alpha = params.K_eff, params.t, params.alpha
    if scheme is Scheme.LIN:
        counts = lin_counts(K, t, alpha)
    elif scheme is Scheme.RED:
        counts = red_counts(K, t, alpha)
    elif scheme is Scheme.MS:
        counts = ms_counts(K, t, alpha)
    elif scheme is Scheme.LE:
        counts = le_counts(K, t, alpha)
    elif scheme is Scheme.MB:
        counts = mb_counts(K, t, alpha)
    else:  # NoCC: each missing portion is split over the alpha appearances
        counts = (alpha, params.K)
    if counts is None:
        return ComplexityReport(scheme, None, None)
    return ComplexityReport(scheme, counts[0], counts[1])


class OrderDescriptor(NamedTuple):
    subpacketization: str
    transmissions: str


_ORDERS_FIXED = {
    Scheme.MS: OrderDescriptor("O(K^t K^{L-1})", "O(K^{t+L})"),
    Scheme.LIN: OrderDescriptor("O(K)", "O(K^2)"),
    Scheme.RED: OrderDescriptor("O(K)", "O(K^2)"),
    Scheme.LE: OrderDescriptor("O(K^{t/L})", "O(K^{t/L+1})"),
    Scheme.MB: OrderDescriptor("O(K^t)", "O(K^{t+1})"),
    Scheme.NOCC: OrderDescriptor("O(1)", "O(K)"),
}

_ORDERS_SCALING = {
    Scheme.MS: OrderDescriptor("O(2^{K H(γ)} K^{L-1})", "O(2^{K H(γ)})"),
    Scheme.LIN: OrderDescriptor("O(K^2)", "O(K^2)"),
    Scheme.RED: OrderDescriptor("O(K^2)", "O(K^2)"),
    Scheme.LE: OrderDescriptor("O(2^{K H(γ)/L^2})", "O(2^{K H(γ)/L})"),
    Scheme.MB: OrderDescriptor("O(2^{K H(γ)})", "O(2^{K H(γ)})"),
    Scheme.NOCC: OrderDescriptor("O(1)", "O(K)"),
}


def complexity_order(
    params: SchemeParams, scheme: Scheme | str, t_scales: bool
) -> OrderDescriptor:
    """Symbolic growth orders for fixed t or for t scaling linearly with K.

    In the scaling regime binomials approach 2^{K H(γ)} with γ = M/N and H
    the base-2 entropy (see :func:`binary_entropy`).
    """
    validate(params)
    table = _ORDERS_SCALING if t_scales else _ORDERS_FIXED
    return table[Scheme(scheme)]
