"""Rearrangement, Hardy averages, exact/adaptive power integrals, and
the four inequality checks.

Quadrature oracle strategy: every integral has two independent routes —
the closed form / Gauss-Kronrod evaluator inside the library versus
scipy.integrate.quad on the plain callable.
"""

import numpy as np
import pytest
from scipy.integrate import quad

from treebellman import (
    StepFunction1D,
    TreeFunction,
    binary_tree,
    build_tree,
    check_hardy_domination,
    check_holder_feasibility,
    check_moment_domination,
    check_subset_moment_bound,
    hardy_average,
    hardy_weighted_integral,
    integral_p,
    maximal_operator,
    rearrange,
    rearrange_values,
)
from treebellman.battery import random_tree_function
from treebellman.rearrange import _WG, _XGK, _WGK

from conftest import random_step_function


def two_leaf_example() -> TreeFunction:
    return TreeFunction(build_tree([[0.5, 0.5]]), np.array([2.0, 0.0]))


# ---------------------------------------------------------------- step functions


def test_step_function_basics():
    g = StepFunction1D(np.array([0.0, 0.5, 1.0]), np.array([2.0, 0.0]))
    assert g(0.3) == 2.0 and g(0.5) == 2.0 and g(0.7) == 0.0 and g(1.0) == 0.0
    assert g.integral(0.25) == pytest.approx(0.5)
    assert g.integral(1.0) == pytest.approx(1.0)
    assert g.p_integral(1.0, 2.0) == pytest.approx(2.0)
    assert g.is_nonincreasing


def test_step_function_validation():
    with pytest.raises(ValueError):
        StepFunction1D(np.array([0.0, 0.5]), np.array([1.0, 2.0]))  # length mismatch
    with pytest.raises(ValueError):
        StepFunction1D(np.array([0.1, 1.0]), np.array([1.0]))  # must start at 0
    with pytest.raises(ValueError):
        StepFunction1D(np.array([0.0, 0.9]), np.array([1.0]))  # must end at 1
    with pytest.raises(ValueError):
        StepFunction1D(np.array([0.0, 0.6, 0.4, 1.0]), np.array([1.0, 1.0, 1.0]))
    with pytest.raises(ValueError):
        StepFunction1D(np.array([0.0, 1.0]), np.array([-1.0]))  # negative value


def test_rearrange_hand_example():
    g = rearrange(two_leaf_example())
    assert g.breakpoints == pytest.approx([0.0, 0.5, 1.0], abs=0.0)
    assert g.values == pytest.approx([2.0, 0.0], abs=0.0)


def test_rearrange_merges_ties():
    g = rearrange_values(np.array([1.0, 3.0, 1.0]), np.array([0.25, 0.5, 0.25]))
    assert g.values == pytest.approx([3.0, 1.0])
    assert g.breakpoints == pytest.approx([0.0, 0.5, 1.0])


def test_rearrange_equimeasurable(rng):
    for kind in ("binary", "ternary", "mixed"):
        tf = random_tree_function(rng, kind, max_depth=7)
        g = rearrange(tf)
        assert g.is_nonincreasing
        assert g.breakpoints[-1] == 1.0
        for p in (1.0, 2.0, 3.7):
            assert g.p_integral(1.0, p) == pytest.approx(tf.moment(p), rel=1e-12)
        # distribution functions agree at every jump level
        for lam in g.values:
            mass_tree = float(tf.tree.leaf_measures[tf.values > lam].sum())
            mass_line = float(np.diff(g.breakpoints)[g.values > lam].sum())
            assert mass_tree == pytest.approx(mass_line, abs=1e-12)


def test_rearrange_rejects_bad_total_measure():
    with pytest.raises(ValueError):
        rearrange_values(np.array([1.0, 2.0]), np.array([0.5, 0.4]))


# ---------------------------------------------------------------- hardy averages


def test_hardy_average_hand_values():
    h = hardy_average(rearrange(two_leaf_example()))
    assert h(0.25) == 2.0 and h(0.5) == 2.0
    assert h(0.75) == pytest.approx(4.0 / 3.0)
    assert h(1.0) == pytest.approx(1.0)


def test_hardy_average_matches_definition(rng):
    g = random_step_function(rng)
    h = hardy_average(g)
    for t in rng.uniform(0.01, 1.0, 25):
        assert h(float(t)) == pytest.approx(g.integral(float(t)) / t, rel=1e-13)


def test_hardy_average_continuous_and_nonincreasing(rng):
    g = random_step_function(rng)
    h = hardy_average(g)
    for b in g.breakpoints[1:-1]:
        assert h(b - 1e-12) == pytest.approx(h(b + 1e-12), rel=1e-9)
    t = np.linspace(1e-6, 1.0, 1500)
    vals = np.array([h(float(s)) for s in t])
    assert np.all(np.diff(vals) <= 1e-12)


def test_hardy_average_no_singularity_at_zero():
    # on the first piece the average is exactly the constant value
    g = StepFunction1D(np.array([0.0, 0.5, 1.0]), np.array([2.0, 0.0]))
    h = hardy_average(g)
    assert h(1e-300) == 2.0


# ---------------------------------------------------------------- power integrals


def test_integral_hand_value():
    # int_0^1 (A g)^2 = 4*(1/2) + int_{1/2}^1 1/t^2 = 2 + 1 = 3
    h = hardy_average(rearrange(two_leaf_example()))
    assert integral_p(h, 1.0, 2) == pytest.approx(3.0, abs=1e-12)


def test_integral_integer_vs_scipy(rng):
    for _ in range(8):
        g = random_step_function(rng)
        h = hardy_average(g)
        k = float(rng.uniform(0.15, 1.0))
        for p in (2, 3, 5):
            ref, err = quad(
                lambda t: h(t) ** p, 0.0, k,
                points=[b for b in g.breakpoints if 0 < b < k], limit=300,
            )
            assert integral_p(h, k, p) == pytest.approx(ref, rel=1e-9, abs=10 * err)


def test_integral_gk_vs_scipy(rng):
    for _ in range(8):
        g = random_step_function(rng)
        h = hardy_average(g)
        k = float(rng.uniform(0.15, 1.0))
        for p in (1.5, 2.7, 4.31):
            ref, err = quad(
                lambda t: h(t) ** p, 0.0, k,
                points=[b for b in g.breakpoints if 0 < b < k], limit=300,
            )
            assert integral_p(h, k, p) == pytest.approx(ref, rel=1e-9, abs=10 * err)


def test_integral_integer_vs_gk_cross_route():
    # same integrand, closed form vs adaptive panels
    g = StepFunction1D(np.array([0.0, 0.2, 0.7, 1.0]), np.array([4.0, 1.5, 0.5]))
    h = hardy_average(g)
    for p in (2, 3, 4):
        exact = integral_p(h, 1.0, p)
        adaptive = integral_p(h, 1.0, float(p) + 1e-13)
        assert adaptive == pytest.approx(exact, rel=1e-9)


def test_integral_step_function_direct():
    g = StepFunction1D(np.array([0.0, 0.25, 1.0]), np.array([2.0, 1.0]))
    assert integral_p(g, 1.0, 3.3) == pytest.approx(0.25 * 2.0**3.3 + 0.75, rel=1e-12)
    assert integral_p(g, 0.5, 2) == pytest.approx(0.25 * 4.0 + 0.25, rel=1e-12)


def test_gauss_kronrod_rule_exactness():
    # half-form tables: 8 Kronrod abscissae (last is 0), 4 Gauss weights
    assert _XGK.shape == (8,) and _WGK.shape == (8,) and _WG.shape == (4,)
    w15 = np.concatenate((_WGK[:-1], _WGK[::-1]))
    w7 = np.concatenate((_WG[:-1], _WG[::-1]))
    x15 = np.concatenate((-_XGK[:-1], _XGK[::-1]))
    assert w15.sum() == pytest.approx(2.0, abs=1e-14)  # integrates 1 on [-1, 1]
    assert w7.sum() == pytest.approx(2.0, abs=1e-14)
    # K15 integrates monomials up to degree 22 exactly; G7 up to 13
    for deg in (2, 8, 14, 22):
        assert float(w15 @ x15**deg) == pytest.approx(2.0 / (deg + 1), abs=1e-13)
    x7 = x15[1:14:2]
    for deg in (2, 8, 12):
        assert float(w7 @ x7**deg) == pytest.approx(2.0 / (deg + 1), abs=1e-13)


def test_hardy_weighted_integral_fubini(rng):
    # int_0^k (Ag)^p = -B^p/((p-1) k^{p-1}) + p/(p-1) int_0^k g (Ag)^{p-1}
    for _ in range(25):
        g = random_step_function(rng)
        h = hardy_average(g)
        p = float(rng.uniform(1.3, 4.5))
        k = float(rng.uniform(0.1, 1.0))
        lhs = integral_p(h, k, p)
        B = g.integral(k)
        rhs = -(B**p) / ((p - 1.0) * k ** (p - 1.0)) + p / (p - 1.0) * hardy_weighted_integral(g, k, p)
        assert lhs == pytest.approx(rhs, rel=1e-8)


# ---------------------------------------------------------------- checks


def test_hardy_domination_hand_and_random(rng):
    rep = check_hardy_domination(two_leaf_example())
    assert rep.passed
    assert rep.details["gap_at_one"] == pytest.approx(0.0, abs=1e-12)
    for _ in range(6):
        tf = random_tree_function(rng, "mixed", max_depth=7)
        rep = check_hardy_domination(tf)
        assert rep.passed, rep.to_json()


def test_moment_domination_hand_case():
    rep = check_moment_domination(two_leaf_example(), 2.0)
    assert rep.lhs == pytest.approx(2.5, abs=1e-12)
    assert rep.rhs == pytest.approx(3.0, abs=1e-12)
    assert rep.passed


def test_moment_domination_random(rng):
    for _ in range(6):
        tf = random_tree_function(rng, "ternary", max_depth=6)
        p = float(rng.uniform(1.2, 5.0))
        rep = check_moment_domination(tf, p)
        assert rep.passed, rep.to_json()


def test_moment_domination_constant_equality():
    tf = TreeFunction.constant(binary_tree(3), 2.5)
    rep = check_moment_domination(tf, 3.0)
    assert rep.lhs == pytest.approx(rep.rhs, rel=1e-12)
    assert rep.passed


def test_subset_bound_hand_equality():
    # K = first child: lhs = 2^2 * 1/2 = 2, and A = 2, B = 1 give rhs = 2
    rep = check_subset_moment_bound(two_leaf_example(), np.array([0]), 2.0)
    assert rep.lhs == pytest.approx(2.0, abs=1e-12)
    assert rep.rhs == pytest.approx(2.0, abs=1e-12)
    assert rep.details["A"] == pytest.approx(2.0)
    assert rep.details["B"] == pytest.approx(1.0)
    assert rep.passed


def test_subset_bound_random_unions(rng):
    for _ in range(5):
        tf = random_tree_function(rng, "binary", max_depth=8)
        n = tf.tree.n_leaves
        for _ in range(6):
            mask = rng.random(n) < float(rng.uniform(0.1, 0.9))
            if not mask.any():
                mask[int(rng.integers(0, n))] = True
            rep = check_subset_moment_bound(tf, mask, float(rng.uniform(1.2, 5.0)))
            assert rep.passed, rep.to_json()


def test_subset_bound_full_space(rng):
    tf = random_tree_function(rng, "mixed", max_depth=6)
    rep = check_subset_moment_bound(tf, np.arange(tf.tree.n_leaves), 2.0)
    assert rep.passed
    assert rep.parameters["k"] == pytest.approx(1.0)


def test_subset_bound_rejects_empty():
    with pytest.raises(ValueError):
        check_subset_moment_bound(two_leaf_example(), np.array([], dtype=int), 2.0)


def test_holder_feasibility_random(rng):
    for _ in range(6):
        tf = random_tree_function(rng, "mixed", max_depth=6)
        for k in (0.25, 0.5, 0.9, 1.0):
            rep = check_holder_feasibility(tf, k, float(rng.uniform(1.2, 5.0)))
            assert rep.passed, rep.to_json()
            assert set(rep.details) >= {
                "holder_on_K", "moment_nesting", "mass_nesting", "holder_off_K", "worst",
            }


def test_holder_feasibility_k_one_degenerates():
    rep = check_holder_feasibility(two_leaf_example(), 1.0, 2.0)
    assert rep.passed
    assert rep.details["holder_off_K"] == pytest.approx(0.0, abs=1e-12)


def test_check_report_shape():
    rep = check_moment_domination(two_leaf_example(), 2.0)
    doc = rep.to_dict()
    assert {"check", "parameters", "lhs", "rhs", "margin", "tolerance", "passed"} <= set(doc)
    assert doc["check"] == "moment_domination"
    assert isinstance(rep.to_json(), str)
