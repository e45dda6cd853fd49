"""Exact intersection probabilities for a uniform random ``a``-subset ``A``.

For a ground set of size ``k``, a fixed target ``B`` (``|B| = b``) and a
fixed avoid set ``H`` disjoint from ``B`` (``|H| = h``):

* ``p_hit``       P(A and B meet)
* ``p_one``       P(|A & B| = 1)
* ``p_two``       P(|A & B| >= 2)
* ``p_one_avoid`` P(|A & B| = 1 and A misses H)
* ``p_one_hit``   P(|A & B| = 1 and A meets H)

Values are exact :class:`~fractions.Fraction` for ``k <= EXACT_LIMIT`` and
log-gamma floats above it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

EXACT_LIMIT = 10_000
ENUM_LIMIT = 20


class QueryError(ValueError):
    pass


def _check(a, b, k, h=0):
    if k < 1:
        raise QueryError("ground set must be nonempty")
    for name, v in (("a", a), ("b", b), ("h", h)):
        if v < 0 or v > k:
            raise QueryError(f"{name}={v} outside [0, {k}]")
    if b + h > k:
        raise QueryError(f"B and H cannot be disjoint: b + h = {b + h} > k = {k}")


def _log_miss(a: int, b: int, k: int) -> float:
    """log of C(k-b, a) / C(k, a) = prod_i (1 - b/(k-i)), -inf when A must meet B.

    The product runs over min(a, b) factors (the ratio is symmetric in a, b),
    avoiding the cancellation of a log-gamma difference.
    """
    if k - b < a:
        return -math.inf
    lo, hi = min(a, b), max(a, b)
    return math.fsum(math.log1p(-hi / (k - i)) for i in range(lo))


def _one_float(a: int, b: int, k: int) -> float:
    """b C(k-b, a-1) / C(k, a) = (ab/k) C(k-1-(b-1), a-1) / C(k-1, a-1)."""
    if a == 0 or b == 0:
        return 0.0
    return a * b / k * math.exp(_log_miss(a - 1, b - 1, k - 1))


def p_hit(a: int, b: int, k: int):
    _check(a, b, k)
    if k <= EXACT_LIMIT:
        return 1 - Fraction(math.comb(k - b, a), math.comb(k, a))
    return -math.expm1(_log_miss(a, b, k))


def p_one(a: int, b: int, k: int):
    _check(a, b, k)
    if a == 0:
        return Fraction(0) if k <= EXACT_LIMIT else 0.0
    if k <= EXACT_LIMIT:
        return Fraction(b * math.comb(k - b, a - 1), math.comb(k, a))
    return _one_float(a, b, k)


def p_two(a: int, b: int, k: int):
    return p_hit(a, b, k) - p_one(a, b, k)


def p_one_avoid(a: int, b: int, h: int, k: int):
    _check(a, b, k, h)
    if a == 0:
        return Fraction(0) if k <= EXACT_LIMIT else 0.0
    if k <= EXACT_LIMIT:
        return Fraction(b * math.comb(k - b - h, a - 1), math.comb(k, a))
    # b C(k-b-h, a-1) / C(k, a): same form with b+h-1 blocked slots
    if b == 0:
        return 0.0
    return a * b / k * math.exp(_log_miss(a - 1, b + h - 1, k - 1))


def p_one_hit(a: int, b: int, h: int, k: int):
    return p_one(a, b, k) - p_one_avoid(a, b, h, k)


def _falling(x: int, r: int) -> int:
    return math.perm(x, r) if 0 <= r <= x else 0


def p_one_falling(a: int, b: int, k: int) -> Fraction:
    """``p_one`` via ``a * P(A & B = {x_1}) = a * b (k-b)_(a-1) / (k)_a``."""
    _check(a, b, k)
    if a == 0:
        return Fraction(0)
    return Fraction(a * b * _falling(k - b, a - 1), _falling(k, a))


def p_one_hit_factored(a: int, b: int, h: int, k: int) -> Fraction:
    """``p_one_hit = p_one(a, b, k) * p_hit(a - 1, h, k - b)``."""
    _check(a, b, k, h)
    if a == 0:
        return Fraction(0)
    if a == 1 or a - 1 > k - b:
        # nothing left to meet H, or A cannot meet B in a single point
        return Fraction(0)
    return Fraction(p_one(a, b, k)) * Fraction(p_hit(a - 1, h, k - b))


def p_one_avoid_factored(a: int, b: int, h: int, k: int) -> Fraction:
    """``p_one_avoid = p_one(a, b, k) * (1 - p_hit(a - 1, h, k - b))``."""
    return Fraction(p_one(a, b, k)) - p_one_hit_factored(a, b, h, k)


@dataclass(frozen=True)
class Probabilities:
    p_hit: Fraction
    p_one: Fraction
    p_two: Fraction
    p_one_avoid: Fraction
    p_one_hit: Fraction


def closed_forms(a: int, b: int, h: int, k: int) -> Probabilities:
    return Probabilities(
        p_hit=p_hit(a, b, k),
        p_one=p_one(a, b, k),
        p_two=p_two(a, b, k),
        p_one_avoid=p_one_avoid(a, b, h, k),
        p_one_hit=p_one_hit(a, b, h, k),
    )


def enumerate_oracle(a: int, b: int, h: int, k: int) -> Probabilities:
    """All five probabilities by listing every ``a``-subset of ``range(k)``.

    ``B = {0..b-1}`` and ``H = {b..b+h-1}``.
    """
    _check(a, b, k, h)
    if k > ENUM_LIMIT:
        raise QueryError(f"enumeration limited to k <= {ENUM_LIMIT}")
    total = hit = one = two = one_avoid = one_hit = 0
    for A in itertools.combinations(range(k), a):
        in_b = sum(1 for x in A if x < b)
        in_h = any(b <= x < b + h for x in A)
        total += 1
        if in_b:
            hit += 1
        if in_b == 1:
            one += 1
            if in_h:
                one_hit += 1
            else:
                one_avoid += 1
        elif in_b >= 2:
            two += 1
    return Probabilities(*(Fraction(c, total) for c in (hit, one, two, one_avoid, one_hit)))


@dataclass(frozen=True)
class BoundReport:
    name: str
    value: Fraction
    lower: Fraction | None
    upper: Fraction | None
    holds: bool
    vacuous: bool = False


def _report(name, value, lower, upper) -> BoundReport:
    vacuous = lower is not None and lower < 0
    ok = (lower is None or lower <= value) and (upper is None or value <= upper)
    return BoundReport(name, value, lower, upper, ok, vacuous)


def check_lemma1(a: int, b: int, h: int, k: int) -> list[BoundReport]:
    """Exact check of the four inequality families for one query.

    The chain ``kappa(1 - kappa') <= p_one <= p_hit <= kappa`` is split into
    three reports. The avoid-set families are only included when
    ``a + b + h <= k``; the constant multiplying ``kappa`` in the last bound is
    ``kappa'' = (a-1) h / (k-b)``.
    """
    if k < 4:
        raise QueryError("bounds need k >= 4")
    if a + b > k:
        raise QueryError("bounds need a + b <= k")
    kappa = Fraction(a * b, k)
    kappa1 = Fraction(a * b, k - a) if a < k else Fraction(0)
    one, hit, two = p_one(a, b, k), p_hit(a, b, k), p_two(a, b, k)
    reports = [
        _report("p_one>=lower", one, kappa * (1 - kappa1), None),
        _report("p_one<=p_hit", one, None, hit),
        _report("p_hit<=kappa", hit, None, kappa),
        _report("p_two<=kappa^2/2", two, None, kappa * kappa / 2),
    ]
    if a + b + h <= k:
        kappa2 = Fraction((a - 1) * h, k - b) if a >= 1 and b < k else Fraction(0)
        avoid = p_one_avoid(a, b, h, k)
        reports.append(_report("p_one_avoid", avoid, kappa * (1 - kappa1 - kappa2), kappa))
        reports.append(_report("p_one_hit<=kappa''*kappa", p_one_hit(a, b, h, k), None, kappa2 * kappa))
    return reports


def verify_grid(k_min: int = 4, k_max: int = 60):
    """Check every inequality on ``k_min <= k <= k_max``, ``a + b + h <= k``.

    Same inequalities as :func:`check_lemma1`, cleared of denominators so the
    sweep runs on integers. Returns ``(checked, vacuous, failures)`` where
    ``failures`` lists ``(a, b, h, k, name)``.
    """
    checked = vacuous = 0
    failures = []
    comb = math.comb
    for k in range(k_min, k_max + 1):
        for a in range(0, k + 1):
            C = comb(k, a)
            for b in range(0, k - a + 1):
                ab = a * b
                one = b * comb(k - b, a - 1) if a else 0
                hit = C - comb(k - b, a)
                two = hit - one
                # kappa (1 - kappa') <= p_one, scaled by C k (k-a)
                if ab:
                    lhs = ab * C * (k - a - ab)
                    checked += 1
                    if lhs < 0:
                        vacuous += 1
                    elif lhs > one * k * (k - a):
                        failures.append((a, b, 0, k, "p_one>=lower"))
                checked += 3
                if one > hit:
                    failures.append((a, b, 0, k, "p_one<=p_hit"))
                if hit * k > ab * C:
                    failures.append((a, b, 0, k, "p_hit<=kappa"))
                if two * 2 * k * k > ab * ab * C:
                    failures.append((a, b, 0, k, "p_two<=kappa^2/2"))
                for h in range(0, k - a - b + 1):
                    avoid = b * comb(k - b - h, a - 1) if a else 0
                    one_hit = one - avoid
                    checked += 3
                    if avoid * k > ab * C:
                        failures.append((a, b, h, k, "p_one_avoid<=kappa"))
                    if ab:
                        # kappa (1 - kappa' - kappa'') <= p_one_avoid, scaled by C k (k-a) (k-b)
                        bracket = (k - a) * (k - b) - ab * (k - b) - (a - 1) * h * (k - a)
                        if bracket < 0:
                            vacuous += 1
                        elif ab * C * bracket > avoid * k * (k - a) * (k - b):
                            failures.append((a, b, h, k, "p_one_avoid>=lower"))
                    if a and one_hit * k * (k - b) > (a - 1) * h * ab * C:
                        failures.append((a, b, h, k, "p_one_hit<=kappa''*kappa"))
    return checked, vacuous, failures
