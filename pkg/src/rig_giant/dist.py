"""Attribute-set-size distributions on {0, 1, ..., M}.

A :class:`SizeDistribution` is the law of ``|S(v)|``. Everything downstream
(graph sampling, the branching kernel, degree limits) only reads it, so the
masses are validated once at construction and trusted afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

NORM_TOL = 1e-9
STRICT_TOL = 1e-12


class DistributionError(ValueError):
    pass


@dataclass(frozen=True)
class SizeDistribution:
    mass: tuple[float, ...]
    family: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.mass:
            raise DistributionError("empty distribution")
        if any(p < 0.0 or p > 1.0 or math.isnan(p) for p in self.mass):
            raise DistributionError("masses must lie in [0, 1]")
        if abs(math.fsum(self.mass) - 1.0) > STRICT_TOL:
            raise DistributionError("masses must sum to 1")
        if len(self.mass) > 1 and self.mass[-1] == 0.0:
            raise DistributionError("trailing zero mass beyond max_size")

    @property
    def max_size(self) -> int:
        return len(self.mass) - 1

    def __getitem__(self, t: int) -> float:
        if 0 <= t < len(self.mass):
            return self.mass[t]
        return 0.0

    @property
    def q0(self) -> float:
        return self.mass[0]

    def support(self) -> list[int]:
        return [t for t, p in enumerate(self.mass) if p > 0.0]

    def items(self) -> list[tuple[int, float]]:
        return [(t, p) for t, p in enumerate(self.mass) if p > 0.0]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.mass, dtype=float)


@dataclass(frozen=True)
class ReducedDistribution:
    """``Q*`` (conditioned on nonempty sets) with its rescaled ratio ``beta*``."""

    star: SizeDistribution
    beta_star: float
    q0: float


def _normalized(pairs: dict[int, float], family: str | None) -> SizeDistribution:
    total = math.fsum(pairs.values())
    top = max(t for t, p in pairs.items() if p > 0.0)
    mass = [0.0] * (top + 1)
    for t, p in pairs.items():
        if t <= top:
            mass[t] = p / total
    # Renormalize once more so fsum is exactly 1 to within STRICT_TOL.
    s = math.fsum(mass)
    mass = [p / s for p in mass]
    return SizeDistribution(tuple(mass), family)


def make_distribution(pairs: Iterable[tuple[int, float]], family: str | None = None) -> SizeDistribution:
    """Build a distribution from ``(t, p)`` pairs.

    Masses must already sum to 1 within ``1e-9``; they are then renormalized
    exactly. Duplicate support points raise instead of being merged.
    """
    merged: dict[int, float] = {}
    for t, p in pairs:
        t = int(t)
        p = float(p)
        if t < 0:
            raise DistributionError(f"negative set size {t}")
        if p < 0.0 or math.isnan(p):
            raise DistributionError(f"negative mass at t={t}")
        if t in merged:
            raise DistributionError(f"duplicate support point t={t}")
        merged[t] = p
    if not merged:
        raise DistributionError("empty input")
    total = math.fsum(merged.values())
    if abs(total - 1.0) > NORM_TOL:
        raise DistributionError(f"masses sum to {total!r}, not 1")
    return _normalized(merged, family)


def point_mass(t: int) -> SizeDistribution:
    return make_distribution([(t, 1.0)], family=f"point({t})")


def binomial(m: int, p: float) -> SizeDistribution:
    if m < 0 or not 0.0 <= p <= 1.0:
        raise DistributionError("binomial needs m >= 0 and p in [0, 1]")
    from scipy.stats import binom

    pmf = binom.pmf(np.arange(m + 1), m, p)
    pairs = {t: float(v) for t, v in enumerate(pmf) if v > 0.0}
    return _normalized(pairs, f"binomial({m},{p})")


def power_law(exponent: float, max_size: int, min_size: int = 1) -> SizeDistribution:
    """Truncated power law ``q_t ~ t^-exponent`` on ``min_size..max_size``."""
    if min_size < 1 or max_size < min_size:
        raise DistributionError("power law needs 1 <= min_size <= max_size")
    weights = {t: t ** (-float(exponent)) for t in range(min_size, max_size + 1)}
    return _normalized(weights, f"power_law({exponent},{min_size},{max_size})")


def geometric(ratio: float, start: int = 0, eps: float = 1e-17) -> SizeDistribution:
    """Geometric law ``q_t ~ ratio^(t - start)`` for ``t >= start``.

    The infinite tail is cut once the remaining mass drops below ``eps``.
    """
    if not 0.0 < ratio < 1.0:
        raise DistributionError("geometric ratio must be in (0, 1)")
    if start < 0:
        raise DistributionError("geometric start must be >= 0")
    # tail beyond t is ratio^(t - start + 1)
    span = int(math.ceil(math.log(eps) / math.log(ratio)))
    weights = {start + j: (1.0 - ratio) * ratio**j for j in range(span + 1)}
    return _normalized(weights, f"geometric({ratio},{start})")


FAMILIES = {
    "point": point_mass,
    "binomial": binomial,
    "power_law": power_law,
    "geometric": geometric,
}


def from_family(name: str, **params) -> SizeDistribution:
    try:
        builder = FAMILIES[name]
    except KeyError:
        raise DistributionError(f"unknown family {name!r}; known: {sorted(FAMILIES)}") from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise DistributionError(f"bad parameters for family {name!r}: {exc}") from None


def reduce(Q: SizeDistribution, beta: float) -> ReducedDistribution:
    if beta <= 0:
        raise DistributionError("beta must be positive")
    q0 = Q.q0
    if q0 >= 1.0:
        raise DistributionError("Q(0) = 1: degenerate measure, giant fraction is 0")
    keep = 1.0 - q0
    mass = [0.0] + [min(1.0, p / keep) for p in Q.mass[1:]]
    star = SizeDistribution(tuple(_fix_sum(mass)), family=f"reduced({Q.family})" if Q.family else None)
    return ReducedDistribution(star=star, beta_star=beta / keep, q0=q0)


def _fix_sum(mass: Sequence[float]) -> list[float]:
    s = math.fsum(mass)
    if abs(s - 1.0) <= STRICT_TOL:
        return list(mass)
    return [p / s for p in mass]


def truncate(Q: SizeDistribution, M: int) -> tuple[SizeDistribution, float]:
    """Restrict ``Q`` to ``{1..M}`` and renormalize.

    Returns the truncated measure and ``q_[M] = sum_{1<=t<=M} q_t``; callers
    rescale beta as ``beta / q_[M]``.
    """
    kept = [Q[t] for t in range(1, M + 1)]
    q_m = math.fsum(kept)
    if M < 1 or q_m <= 0.0:
        raise DistributionError(f"no mass on 1..{M}")
    pairs = {t: Q[t] / q_m for t in range(1, M + 1) if Q[t] > 0.0}
    return _normalized(pairs, f"truncated({Q.family},{M})" if Q.family else None), q_m


def first_moment(Q: SizeDistribution) -> float:
    return math.fsum(t * p for t, p in enumerate(Q.mass))


def degree_rate(Q: SizeDistribution, beta: float) -> float:
    """Mean degree ``a = beta^-1 sum_t t q_t`` of the limiting degree law."""
    if beta <= 0:
        raise DistributionError("beta must be positive")
    return first_moment(Q) / beta


def sample_size(Q: SizeDistribution, rng: np.random.Generator, size: int | None = None):
    """Draw set sizes from ``Q``; a scalar when ``size`` is None."""
    cdf = np.cumsum(Q.as_array())
    cdf[-1] = 1.0
    u = rng.random(size)
    out = np.searchsorted(cdf, u, side="right")
    if size is None:
        return int(out)
    return out.astype(np.int64)
