import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from rig_giant.branching import (
    CAPPED,
    build_kernel,
    predict,
    predict_giant_fraction,
    rho_tilde,
    simulate_progeny,
    solve_extinction,
    solve_extinction_vector,
    survival_curve,
    survival_mc,
)
from rig_giant.dist import DistributionError, geometric, make_distribution, point_mass, reduce, truncate

# roots computed with mpmath.findroot at 30 digits
THETA_D2 = 1.59362426004004009232  # theta = 2 (1 - e^-theta)
RHO_D2 = 0.95871468949299876107  # 1 - e^(-2 theta)
X2_D2 = 0.20318786997997995384  # e^-theta
THETA_DIL = 1.41071968606103944670  # theta = 1.5 (1 - e^(-2 theta))
PRED_DIL = 0.49273949750782991007  # 0.5 (1 - e^(-3 theta))
THETA_D3 = 2.99245061320129721262  # theta = 3 (1 - e^(-2 theta))
RHO_D3 = 0.99987376329971105648


def scalar_root(c):
    """Independent oracle: bracketing root of theta = sum_t c_t (1 - e^{-(t-1) theta})."""
    f = lambda th: sum(ct * (1 - math.exp(-(t - 1) * th)) for t, ct in c.items()) - th
    hi = sum(ct * (t - 1) for t, ct in c.items())
    if hi <= 1:
        return 0.0
    return brentq(f, 1e-9, hi + 1, xtol=1e-15, rtol=1e-15)


def test_kernel_rates():
    k = build_kernel(point_mass(2), 1.0)
    assert k.child_rates == {2: 2.0}
    assert k.rate(3, 2) == 4.0
    assert k.rate(1, 2) == 0.0
    assert build_kernel(point_mass(3), 2.0).child_rates == {3: 1.5}
    k1 = build_kernel(point_mass(1), 0.7)
    assert k1.child_rates[1] == pytest.approx(1 / 0.7)
    assert k1.rate(1, 1) == 0.0
    with pytest.raises(DistributionError):
        build_kernel(make_distribution([(0, 0.5), (2, 0.5)]), 1.0)


def test_point_mass_two():
    sol = solve_extinction(build_kernel(point_mass(2), 1.0))
    assert sol.theta == pytest.approx(THETA_D2, abs=1e-12)
    assert sol.extinct(2) == pytest.approx(X2_D2, abs=1e-12)
    assert sol.survive(3) == pytest.approx(RHO_D2, abs=1e-12)
    assert sol.residual <= 1e-12
    assert sol.lower_theta == pytest.approx(sol.theta, abs=1e-9)


def test_subcritical():
    sol = solve_extinction(build_kernel(point_mass(2), 4.0))
    assert sol.theta == 0.0
    assert all(v == 0.0 for v in sol.survive_table.values())
    for beta in (0.5, 1.0, 2.0):
        sol = solve_extinction(build_kernel(point_mass(1), beta))
        assert sol.theta == 0.0
        assert sol.survive(2) == 0.0


def test_rho_tilde():
    Q = point_mass(2)
    sol = solve_extinction(build_kernel(Q, 1.0))
    assert rho_tilde(sol, Q) == pytest.approx(sol.survive(3), abs=0)
    Q3 = point_mass(3)
    sol3 = solve_extinction(build_kernel(Q3, 1.0))
    assert sol3.theta == pytest.approx(THETA_D3, abs=1e-12)
    assert rho_tilde(sol3, Q3) == pytest.approx(RHO_D3, abs=1e-12)
    sub = solve_extinction(build_kernel(Q, 4.0))
    assert rho_tilde(sub, Q) == 0.0


def test_predictions():
    assert predict_giant_fraction(point_mass(2), 1.0) == pytest.approx(RHO_D2, abs=1e-12)
    p = predict(make_distribution([(0, 0.5), (3, 0.5)]), 1.0)
    assert p.theta == pytest.approx(THETA_DIL, abs=1e-12)
    assert p.fraction == pytest.approx(PRED_DIL, abs=1e-12)
    assert predict_giant_fraction(point_mass(0), 1.0) == 0.0


def test_rank_one_form():
    Q = make_distribution([(1, 0.2), (2, 0.3), (4, 0.4), (7, 0.1)])
    k = build_kernel(Q, 1.3)
    sol = solve_extinction(k)
    x = solve_extinction_vector(k)
    for s in range(1, k.max_type + 2):
        assert x[s] == pytest.approx(math.exp(-(s - 1) * sol.theta), abs=1e-10)
    assert sol.survive_table == {s: sol.survive(s) for s in range(1, 9)}
    vals = list(sol.survive_table.values())
    assert vals == sorted(vals)


finite_q = st.dictionaries(st.integers(1, 15), st.floats(0.02, 1.0), min_size=1, max_size=6)


def _normalize(weights, q0=0.0):
    total = math.fsum(weights.values())
    pairs = [(t, (1 - q0) * w / total) for t, w in weights.items()]
    if q0:
        pairs.append((0, q0))
    return make_distribution(pairs)


@settings(max_examples=150, deadline=None)
@given(finite_q, st.floats(0.2, 6.0))
def test_theta_matches_bracketing_oracle(weights, beta):
    Q = _normalize(weights)
    k = build_kernel(Q, beta)
    sol = solve_extinction(k)
    expected = scalar_root(k.child_rates)
    assert sol.theta == pytest.approx(expected, abs=1e-9)
    assert (sol.theta > 0) == (k.growth() > 1)


@settings(max_examples=100, deadline=None)
@given(finite_q, st.floats(0.3, 5.0))
def test_vector_iteration_agrees(weights, beta):
    k = build_kernel(_normalize(weights), beta)
    if abs(k.growth() - 1) < 0.05:
        return  # linear convergence too slow to pin 1e-10 near criticality
    sol = solve_extinction(k)
    x = solve_extinction_vector(k)
    expect = np.exp(-np.arange(-1, k.max_type + 1) * sol.theta)
    assert np.max(np.abs(x[1:] - expect[1:])) <= 1e-10


@settings(max_examples=100, deadline=None)
@given(finite_q, st.floats(0.0, 0.9), st.floats(0.2, 6.0))
def test_two_routes_agree(weights, q0, beta):
    p = predict(_normalize(weights, q0), beta)
    assert abs(p.fraction - p.direct) <= 1e-12
    assert 0.0 <= p.fraction <= 1.0


def test_monotone_in_beta():
    Q = make_distribution([(0, 0.2), (1, 0.2), (2, 0.3), (5, 0.3)])
    preds = [predict_giant_fraction(Q, b) for b in np.linspace(0.2, 8.0, 60)]
    assert all(a >= b - 1e-15 for a, b in zip(preds, preds[1:]))
    assert preds[-1] == 0.0 and preds[0] > 0.5


def test_truncation_continuity():
    Q = geometric(0.5, start=0)
    beta = 0.5
    red = reduce(Q, beta)
    full = (1 - red.q0) * rho_tilde(solve_extinction(build_kernel(red.star, red.beta_star)), red.star)
    preds = []
    for M in range(2, 41):
        T, qm = truncate(Q, M)
        sol = solve_extinction(build_kernel(T, red.beta_star * (1 - red.q0) / qm))
        preds.append((1 - red.q0) * rho_tilde(sol, T))
    assert abs(preds[-1] - full) < 1e-8
    diffs = [abs(p - preds[-1]) for p in preds]
    assert diffs[-15] < 1e-4


def test_progeny_sterile_root():
    k = build_kernel(point_mass(2), 1.0)
    rng = np.random.default_rng(0)
    assert all(simulate_progeny(k, 1, 10, rng) == 1 for _ in range(50))
    k1 = build_kernel(point_mass(1), 1.0)
    # root of type 2 has Poisson(1) sterile children, nothing more
    sizes = [simulate_progeny(k1, 2, 10_000, rng) for _ in range(2000)]
    assert CAPPED not in sizes
    assert np.mean(sizes) == pytest.approx(2.0, abs=0.1)


def test_progeny_capped_fraction():
    k = build_kernel(point_mass(2), 1.0)
    rng = np.random.default_rng(17)
    runs = 4000
    capped = sum(simulate_progeny(k, 3, 1000, rng) is CAPPED for _ in range(runs))
    se = math.sqrt(RHO_D2 * (1 - RHO_D2) / runs)
    assert abs(capped / runs - RHO_D2) <= 3 * se + 0.003


def test_bfs_and_generation_samplers_agree():
    # same law, different samplers: compare small-progeny histograms
    k = build_kernel(make_distribution([(2, 0.5), (3, 0.5)]), 2.5)
    rng = np.random.default_rng(4)
    bfs = np.array([simulate_progeny(k, 2, 50, rng) or 50 for _ in range(20_000)])
    from rig_giant.branching import progeny_sizes

    gen = progeny_sizes(k, 2, 50, 20_000, seed=5)
    for size in (1, 2, 3, 50):
        p1, p2 = np.mean(bfs == size), np.mean(gen == size)
        se = math.sqrt(p1 * (1 - p1) / 20_000 + p2 * (1 - p2) / 20_000)
        assert abs(p1 - p2) <= 4 * se + 1e-3


def test_survival_mc():
    k = build_kernel(point_mass(2), 1.0)
    est = survival_mc(k, 3, 1000, 100_000, seed=1)
    assert abs(est.estimate - RHO_D2) <= 3 * est.stderr + 0.003
    again = survival_mc(k, 3, 1000, 100_000, seed=1)
    assert again == est
    sub = survival_mc(build_kernel(point_mass(2), 4.0), 3, 1000, 20_000, seed=2)
    assert sub.estimate <= 3 * sub.stderr + 1e-2


def test_survival_curve_monotone():
    k = build_kernel(point_mass(2), 1.0)
    curve = survival_curve(k, 3, [1000, 10, 100], 50_000, seed=3)
    assert [c.cap for c in curve] == [10, 100, 1000]
    est = [c.estimate for c in curve]
    assert est[0] >= est[1] >= est[2]
    assert est[2] >= RHO_D2 - 3 * curve[2].stderr
