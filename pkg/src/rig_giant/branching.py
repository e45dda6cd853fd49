"""Multi-type Poisson branching process behind the giant-component limit.

A particle of type ``s`` has Poisson(``(s-1) * c_t``) children of type ``t``
with ``c_t = t q_t / beta``. The mean matrix is rank one in ``s - 1``, so
extinction probabilities take the form ``x_s = exp(-(s-1) theta)`` where
``theta`` solves the scalar equation

    theta = sum_t c_t (1 - exp(-(t-1) theta)).
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dist import DistributionError, SizeDistribution, reduce, truncate

log = logging.getLogger(__name__)


class ConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class OffspringKernel:
    beta: float
    child_rates: dict[int, float]

    def rate(self, s: int, t: int) -> float:
        """Mean number of type-``t`` children of a type-``s`` particle."""
        return (s - 1) * self.child_rates.get(t, 0.0)

    @property
    def types(self) -> list[int]:
        return sorted(self.child_rates)

    @property
    def max_type(self) -> int:
        return max(self.child_rates, default=0)

    def growth(self) -> float:
        """Derivative of the fixed-point map at zero, ``sum_t c_t (t-1)``."""
        return math.fsum(c * (t - 1) for t, c in self.child_rates.items())


def build_kernel(Q: SizeDistribution, beta: float) -> OffspringKernel:
    if beta <= 0:
        raise DistributionError("beta must be positive")
    if Q.q0 > 0:
        raise DistributionError("kernel needs a measure without mass at 0")
    rates = {t: t * p / beta for t, p in Q.items()}
    return OffspringKernel(beta=beta, child_rates=rates)


def _restricted_kernel(Q: SizeDistribution, beta: float) -> OffspringKernel:
    """Kernel on the unreduced restriction ``t >= 1`` (no renormalization)."""
    rates = {t: t * p / beta for t, p in Q.items() if t >= 1}
    return OffspringKernel(beta=beta, child_rates=rates)


@dataclass(frozen=True)
class SurvivalSolution:
    theta: float
    iterations: int
    residual: float
    max_type: int
    converged: bool = True
    lower_theta: float | None = field(default=None, compare=False)

    def extinct(self, s: int) -> float:
        return math.exp(-(s - 1) * self.theta)

    def survive(self, s: int) -> float:
        return -math.expm1(-(s - 1) * self.theta) + 0.0

    @property
    def extinct_table(self) -> dict[int, float]:
        return {s: self.extinct(s) for s in range(1, self.max_type + 2)}

    @property
    def survive_table(self) -> dict[int, float]:
        return {s: self.survive(s) for s in range(1, self.max_type + 2)}


def _fixed_point_parts(kernel: OffspringKernel):
    ts = np.array(kernel.types, dtype=float)
    cs = np.array([kernel.child_rates[t] for t in kernel.types], dtype=float)
    keep = ts > 1
    return ts[keep] - 1.0, cs[keep]


def _F(theta, d, c):
    return float(np.dot(c, -np.expm1(-d * theta)))


def _dF(theta, d, c):
    return float(np.dot(c * d, np.exp(-d * theta)))


def solve_extinction(kernel: OffspringKernel, tol: float = 1e-12, max_iter: int = 1_000_000) -> SurvivalSolution:
    """Positive root of ``theta = F(theta)``, or 0 when subcritical.

    The main run starts above the root at ``sum_t c_t (t-1)`` and descends
    monotonically; each step takes the smaller of the plain iterate ``F(theta)``
    and the Newton iterate, both of which stay at or above the root because
    ``F`` is concave. A plain iteration started just above zero checks that no
    other positive root was picked.
    """
    d, c = _fixed_point_parts(kernel)
    growth = kernel.growth()
    if d.size == 0 or growth <= 1.0:
        return SurvivalSolution(0.0, 0, 0.0, kernel.max_type)

    theta = growth
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        f = _F(theta, d, c)
        step = f
        slope = _dF(theta, d, c)
        if slope < 1.0:
            newton = theta - (theta - f) / (1.0 - slope)
            step = max(min(f, newton), 0.0)
        if abs(theta - step) <= tol * max(1.0, theta):
            theta = step
            converged = True
            break
        theta = step
    residual = abs(_F(theta, d, c) - theta)
    if not converged:
        warnings.warn(f"theta iteration stopped after {it} steps, residual {residual:.3e}", ConvergenceWarning)

    lower = _lower_start(d, c, growth, tol, max_iter)
    if lower is not None and abs(lower - theta) > 1e-8 * max(1.0, theta):
        warnings.warn(f"upper and lower starts disagree: {theta!r} vs {lower!r}", ConvergenceWarning)
    return SurvivalSolution(theta, it, residual, kernel.max_type, converged, lower)


def _lower_start(d, c, growth, tol, max_iter):
    theta = 1e-3 / growth
    for _ in range(max_iter):
        nxt = _F(theta, d, c)
        if abs(nxt - theta) <= tol * max(1.0, theta):
            return nxt
        theta = nxt
    log.debug("lower-start iteration hit max_iter")
    return None


def solve_extinction_vector(kernel: OffspringKernel, tol: float = 1e-15, max_iter: int = 1_000_000) -> np.ndarray:
    """Generic per-type iteration ``x_s <- exp(-sum_t rate(s,t) (1 - x_t))`` from ``x = 0``.

    Returns ``x`` indexed by type ``0..max_type+1`` (index 0 unused, set to 1).
    Does not use the rank-one structure.
    """
    top = kernel.max_type + 1
    lam = np.zeros((top + 1, top + 1))
    for s in range(1, top + 1):
        for t in kernel.types:
            lam[s, t] = kernel.rate(s, t)
    x = np.zeros(top + 1)
    x[0] = 1.0
    for _ in range(max_iter):
        nxt = np.exp(-lam @ (1.0 - x))
        nxt[0] = 1.0
        if np.max(np.abs(nxt - x)) <= tol:
            return nxt
        x = nxt
    warnings.warn("vector iteration hit max_iter", ConvergenceWarning)
    return x


def rho_tilde(sol: SurvivalSolution, Q: SizeDistribution) -> float:
    """``sum_t q_t rho(t+1)`` over ``t >= 1``."""
    if Q.max_size > sol.max_type and any(p > 0 for p in Q.mass[sol.max_type + 1 :]):
        raise DistributionError("measure support exceeds the solved kernel")
    return math.fsum(p * sol.survive(t + 1) for t, p in Q.items() if t >= 1)


@dataclass(frozen=True)
class Prediction:
    fraction: float
    direct: float
    theta: float
    rho_tilde: float
    q0: float
    solution: SurvivalSolution | None


def predict(Q: SizeDistribution, beta: float, agree_tol: float = 1e-12) -> Prediction:
    """Giant fraction ``(1 - q_0) * rho_tilde(Q*, beta*)`` with the direct cross-check."""
    if beta <= 0:
        raise DistributionError("beta must be positive")
    if Q.q0 >= 1.0:
        return Prediction(0.0, 0.0, 0.0, 0.0, Q.q0, None)
    red = reduce(Q, beta)
    sol = solve_extinction(build_kernel(red.star, red.beta_star))
    rt = rho_tilde(sol, red.star)
    fraction = (1.0 - red.q0) * rt

    direct_sol = solve_extinction(_restricted_kernel(Q, beta))
    direct = math.fsum(p * direct_sol.survive(t + 1) for t, p in Q.items() if t >= 1)
    if abs(direct - fraction) > agree_tol:
        raise ArithmeticError(f"reduced and direct routes disagree: {fraction!r} vs {direct!r}")
    return Prediction(fraction, direct, sol.theta, rt, red.q0, sol)


def predict_giant_fraction(Q: SizeDistribution, beta: float) -> float:
    return predict(Q, beta).fraction


def truncated_prediction(Q: SizeDistribution, beta: float, M: int) -> float:
    """``(1 - q_0) * rho_tilde`` for ``Q`` cut to ``1..M``, with beta rescaled to ``beta / q_[M]``.

    Tends to :func:`predict_giant_fraction` as ``M`` grows.
    """
    T, q_m = truncate(Q, M)
    sol = solve_extinction(build_kernel(T, beta / q_m))
    return (1.0 - Q.q0) * rho_tilde(sol, T)


CAPPED = None


def simulate_progeny(kernel: OffspringKernel, root: int, cap: int, rng: np.random.Generator):
    """Breadth-first run of one tree; total progeny, or ``CAPPED`` once it reaches ``cap``.

    Each generation is expanded in one draw: every particle of type ``s`` gets
    independent Poisson(``(s-1) c_t``) children of each type ``t``.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    types = np.array(kernel.types, dtype=np.int64)
    rates = np.array([kernel.child_rates[t] for t in kernel.types])
    frontier = np.array([root], dtype=np.int64)
    total = 1
    while True:
        if total >= cap:
            return CAPPED
        fertile = frontier[frontier > 1]
        if fertile.size == 0 or types.size == 0:
            return total
        kids = rng.poisson(np.outer(fertile - 1, rates))
        per_type = kids.sum(axis=0)
        total += int(per_type.sum())
        frontier = np.repeat(types, per_type)


def progeny_sizes(kernel: OffspringKernel, root: int, cap: int, reps: int, seed) -> np.ndarray:
    """Total progeny of ``reps`` independent trees, clipped at ``cap``.

    Trees are grown a generation at a time. The children of type ``t`` of a
    whole generation are Poisson with mean ``c_t * sum (s-1)`` over its
    members, by superposition, so one draw per type and tree suffices.
    Whether the total reaches ``cap`` does not depend on the order in which
    particles are expanded.
    """
    if cap < 1 or reps < 1:
        raise ValueError("cap and reps must be >= 1")
    rng = np.random.default_rng(seed)
    types = np.array(kernel.types, dtype=np.int64)
    rates = np.array([kernel.child_rates[t] for t in kernel.types])
    total = np.ones(reps, dtype=np.int64)
    load = np.full(reps, float(root - 1))  # sum of (s-1) over the current generation
    active = np.flatnonzero((load > 0) & (total < cap))
    while active.size:
        kids = rng.poisson(load[active, None] * rates[None, :])
        total[active] += kids.sum(axis=1)
        load[active] = kids @ (types - 1).astype(float)
        active = active[(load[active] > 0) & (total[active] < cap)]
    return np.minimum(total, cap)


@dataclass(frozen=True)
class SurvivalEstimate:
    cap: int
    estimate: float
    stderr: float
    reps: int


def survival_mc(kernel: OffspringKernel, root: int, cap: int, reps: int, seed) -> SurvivalEstimate:
    """Monte Carlo estimate of ``P(total progeny >= cap)``."""
    return survival_curve(kernel, root, [cap], reps, seed)[0]


def survival_curve(kernel: OffspringKernel, root: int, caps, reps: int, seed) -> list[SurvivalEstimate]:
    """Estimates for several caps from one set of trees, so they are monotone in the cap."""
    caps = sorted(int(k) for k in caps)
    sizes = progeny_sizes(kernel, root, caps[-1], reps, seed)
    out = []
    for k in caps:
        p = float(np.mean(sizes >= k))
        out.append(SurvivalEstimate(k, p, math.sqrt(p * (1.0 - p) / reps), reps))
    return out
