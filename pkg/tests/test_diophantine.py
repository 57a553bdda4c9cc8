import numpy as np
import pytest

from torusdyn.diophantine import (
    approximation_constant,
    badly_approximable_search_dim4,
    badly_approximable_search_dim6,
    center_norm_minimum,
    center_plane_chart,
    lattice_ball,
)
from torusdyn.errors import OutOfHypothesesError


def test_lattice_ball_count_matches_direct_enumeration(salem_pa, salem_norm):
    ball = lattice_ball(salem_pa.lam, salem_norm, 6.0)
    # direct box enumeration oracle
    import itertools

    count = 0
    for c in itertools.product(range(-12, 13), repeat=4):
        if not any(c):
            continue
        v = np.array(c, dtype=float)
        if salem_norm.norm(v) <= 6.0 + 1e-12:
            count += 1
    assert len(ball.vectors) == count


def test_lattice_ball_sorted_and_nonzero(salem_pa, salem_norm):
    ball = lattice_ball(salem_pa.lam, salem_norm, 10.0)
    assert np.all(np.any(ball.vectors != 0, axis=1))
    rounded = np.round(ball.norms, 12)
    assert np.all(np.diff(rounded) >= 0)


def test_center_norm_minimum_salem(salem_pa, salem_norm):
    rep, ball = center_norm_minimum(salem_pa, salem_norm, 50.0)
    assert rep.r == 2
    assert rep.c_prime_empirical > 0
    assert rep.slope >= -2.25
    # by construction every scanned point obeys the reported constant
    assert np.all(ball.center_norms * ball.norms ** 2 >= rep.c_prime_empirical - 1e-9)
    # witnesses sorted by ratio
    ratios = [w["ratio"] for w in rep.witnesses]
    assert ratios == sorted(ratios)
    # determinism
    rep2, _ = center_norm_minimum(salem_pa, salem_norm, 50.0)
    assert rep2.c_prime_empirical == rep.c_prime_empirical
    assert rep2.to_json() == rep.to_json()


def test_center_norm_minimum_monotone_in_radius(salem_pa, salem_norm):
    rep1, _ = center_norm_minimum(salem_pa, salem_norm, 25.0)
    rep2, _ = center_norm_minimum(salem_pa, salem_norm, 50.0)
    assert rep2.c_prime_empirical <= rep1.c_prime_empirical + 1e-12
    assert rep2.c_prime_empirical > 0


def test_plane_chart_defining_property(salem_split, salem_pa):
    chart = center_plane_chart(salem_split, salem_pa.lam)
    b = np.array(salem_pa.lam.basis, dtype=float)
    _, cc, _ = salem_split.components(b)
    i, j = chart.basis_pair
    assert np.allclose(chart.apply(cc[i]), [1, 0], atol=1e-12)
    assert np.allclose(chart.apply(cc[j]), [0, 1], atol=1e-12)
    rng = np.random.default_rng(1)
    for _ in range(10):
        a, b2 = rng.normal(size=2)
        assert np.allclose(chart.apply(a * cc[i] + b2 * cc[j]), [a, b2], atol=1e-9)


def test_badly_approximable_dim4(salem_pa, salem_norm, salem_split):
    chart = center_plane_chart(salem_split, salem_pa.lam)
    w = badly_approximable_search_dim4(salem_pa, salem_norm, chart,
                                       candidate_count=10, k_max=200)
    assert w.c_emp > 0
    assert w.n1 != w.n2
    # the reported constant is the scan minimum: verify on a k grid
    k1, k2 = np.meshgrid(np.arange(-200, 201), np.arange(-200, 201), indexing="ij")
    kmat = np.stack([k1.ravel(), k2.ravel()], axis=1).astype(float)
    kmat = kmat[np.any(kmat != 0, axis=1)]
    ksup = np.max(np.abs(kmat), axis=1)
    d1 = np.abs(kmat @ np.array(w.alpha1) - np.round(kmat @ np.array(w.alpha1)))
    d2 = np.abs(kmat @ np.array(w.alpha2) - np.round(kmat @ np.array(w.alpha2)))
    vals = np.maximum(d1, d2) * ksup ** 2
    assert np.isclose(np.min(vals), w.c_emp, rtol=1e-9)


def test_dim6_requires_dim6(salem_pa, salem_norm, salem_split):
    chart = center_plane_chart(salem_split, salem_pa.lam)
    with pytest.raises(OutOfHypothesesError):
        badly_approximable_search_dim6(salem_pa, salem_norm, chart)


def test_rational_coordinate_collapses():
    # a rational coordinate p/q is annihilated at k = q ...
    alpha = np.array([0.5, np.sqrt(2) - 1])
    assert abs(2 * alpha[0] - round(2 * alpha[0])) == 0.0
    # ... and a fully rational alpha collapses the scan at the common denominator
    c, k = approximation_constant(np.array([0.5, 0.25]), 10, 0.1)
    assert k == 4 and c < 1e-9


def test_badly_approximable_stub_continued_fraction_bound():
    # quadratic irrationals have bounded partial quotients; for sqrt(2) - 1
    # the expansion is [0; 2, 2, ...], so dist(k alpha, Z) > 1/((2+2) k).
    alpha = np.array([np.sqrt(2) - 1, np.sqrt(3) - 1])
    c_emp, _ = approximation_constant(alpha, 10_000, 0.1)
    assert c_emp >= 0.25 - 1e-9  # min_k k^{2.1} / (4k) >= 1/4


def test_dim6_search_on_sextic_example():
    from torusdyn.intmatrix import IntMatrix
    from torusdyn.intpoly import IntPoly
    from torusdyn.pseudo_anosov import pseudo_anosov_subspace
    from torusdyn.splitting import adapted_norm, compute_splitting

    a = IntMatrix.companion(IntPoly((1, -2, 1, 1, 1, -2, 1)))
    split = compute_splitting(a)
    assert split.dims == (2, 2, 2)
    norm = adapted_norm(split)
    pa = pseudo_anosov_subspace(a, 8, split=split)
    assert pa.dim_x == 6
    chart = center_plane_chart(split, pa.lam)
    w1 = badly_approximable_search_dim6(pa, norm, chart, candidate_count=16, k_max=2000)
    w2 = badly_approximable_search_dim6(pa, norm, chart, candidate_count=16, k_max=4000)
    assert w1.c_emp > 0
    # doubling k_max never increases the constant, and it stays within 10%
    assert w2.c_emp <= w1.c_emp + 1e-12
    assert w2.c_emp >= 0.9 * w1.c_emp


def test_degenerate_pair_ranked_below(salem_pa, salem_norm, salem_split):
    chart = center_plane_chart(salem_split, salem_pa.lam)
    from torusdyn.diophantine import _candidates, _dist_to_integers

    cands = _candidates(salem_pa, salem_norm, chart, 6)
    rng_grid = np.arange(-50, 51)
    k1, k2 = np.meshgrid(rng_grid, rng_grid, indexing="ij")
    kmat = np.stack([k1.ravel(), k2.ravel()], axis=1).astype(float)
    kmat = kmat[np.any(kmat != 0, axis=1)]
    ksup = np.max(np.abs(kmat), axis=1)

    def pair_c(a1, a2):
        d1 = _dist_to_integers(kmat @ a1)
        d2 = _dist_to_integers(kmat @ a2)
        return float(np.min(np.maximum(d1, d2) * ksup ** 2))

    (n1, a1), (n2, a2) = cands[0], cands[1]
    degenerate = pair_c(a1, a1)
    proper = pair_c(a1, a2)
    assert degenerate <= proper + 1e-12
