"""Polynomial arithmetic, kernels, blocks, norms, and serialization."""

import math

import numpy as np
import pytest

from womplab.trig import (TrigPolynomial, TrigSystem, block_index,
                          dyadic_block, fejer_kernel, lp_norm, multiply,
                          quadrature_grid_size, read_polynomial,
                          write_polynomial)


def _conj(poly: TrigPolynomial) -> TrigPolynomial:
    """Complex conjugate: reflected frequencies, conjugated coefficients."""
    return TrigPolynomial(poly.dim, {tuple(-ki for ki in k): c.conjugate()
                                     for k, c in poly.coeffs.items()})


def _random_poly(rng, dim, degree):
    system = TrigSystem(dim, (degree,) * dim)
    coeff = rng.standard_normal(system.size) + 1j * rng.standard_normal(system.size)
    return TrigPolynomial(dim, dict(zip(system.indices(), coeff)))


# ------------------------------------------------------------- arithmetic

def test_eval_frozen_values():
    f = TrigPolynomial(1, {(0,): 1.0, (1,): 2.0})
    vals = f.eval(np.array([[0.0], [np.pi]]))
    assert vals[0] == pytest.approx(3.0, abs=1e-14)
    assert vals[1] == pytest.approx(-1.0, abs=1e-14)


def test_canonicalization_drops_zero_coefficients():
    f = TrigPolynomial(1, {(0,): 1.0, (1,): 0.0})
    assert (1,) not in f.coeffs


def test_add_sub_cancel_to_zero():
    rng = np.random.default_rng(0)
    f = _random_poly(rng, 1, 5)
    z = f - f
    assert z.coeffs == {}
    assert z.l2_norm() == 0.0


def test_scalar_multiplication():
    f = TrigPolynomial(1, {(2,): 1.0 + 1.0j})
    g = 2.0 * f
    assert g.coeffs[(2,)] == 2.0 + 2.0j
    assert (-f).coeffs[(2,)] == -1.0 - 1.0j


def test_multiply_is_coefficient_convolution():
    f = TrigPolynomial(1, {(0,): 1.0, (1,): 1.0})
    sq = multiply(f, f)
    assert sq.coeffs == {(0,): 1.0, (1,): 2.0, (2,): 1.0}


def test_multiply_matches_pointwise_product():
    rng = np.random.default_rng(1)
    f = _random_poly(rng, 1, 4)
    g = _random_poly(rng, 1, 3)
    x = rng.uniform(0, 2 * np.pi, size=(40, 1))
    lhs = multiply(f, g).eval(x)
    rhs = f.eval(x) * g.eval(x)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-11, atol=1e-11)


def test_translate_shifts_the_graph():
    rng = np.random.default_rng(2)
    f = _random_poly(rng, 2, 3)
    shift = np.array([0.7, -1.3])
    g = f.translate(shift)
    x = rng.uniform(0, 2 * np.pi, size=(25, 2))
    np.testing.assert_allclose(g.eval(x), f.eval(x - shift), rtol=1e-11,
                               atol=1e-11)


def test_translate_frozen_half_turn():
    f = TrigPolynomial(1, {(0,): 1.0, (1,): 2.0})
    g = f.translate([np.pi])
    assert g.coeffs[(1,)] == pytest.approx(-2.0, abs=1e-14)


def test_dimension_mismatch_raises():
    f = TrigPolynomial(1, {(1,): 1.0})
    g = TrigPolynomial(2, {(1, 0): 1.0})
    with pytest.raises(ValueError):
        f + g
    with pytest.raises(ValueError):
        f.eval(np.zeros((3, 2)))


# ---------------------------------------------------------------- kernels

def test_fejer_order_two_frozen_coefficients():
    k2 = fejer_kernel(2)
    assert k2.coeffs == {(-1,): 0.5, (0,): 1.0, (1,): 0.5}
    assert k2.l2_norm() == pytest.approx(math.sqrt(1.5), rel=1e-15)


def test_fejer_order_three_triangle():
    k3 = fejer_kernel(3)
    expect = {(-2,): 1 / 3, (-1,): 2 / 3, (0,): 1.0, (1,): 2 / 3, (2,): 1 / 3}
    assert set(k3.coeffs) == set(expect)
    for k, c in expect.items():
        assert k3.coeffs[k] == pytest.approx(c, rel=1e-15)


def test_fejer_tensor_product_coefficients():
    k = fejer_kernel((2, 2))
    assert k.coeffs[(0, 0)] == 1.0
    assert k.coeffs[(1, 0)] == pytest.approx(0.5, rel=1e-15)
    assert k.coeffs[(1, 1)] == pytest.approx(0.25, rel=1e-15)
    assert k.degree == 1


def test_fejer_unit_mean_and_peak():
    for j in (1, 2, 5, 8):
        k = fejer_kernel(j)
        # nonnegative kernel: the L1 norm is the mean, i.e. coefficient 0
        assert lp_norm(k, 1, "mu") == pytest.approx(1.0, abs=1e-12)
        assert lp_norm(k, math.inf, "mu") == pytest.approx(float(j), rel=1e-12)


def test_fejer_nonnegative_on_fine_grid():
    for j, d in ((4, 1), (3, 2)):
        k = fejer_kernel(j, d)
        n = 512 if d == 1 else 48
        axis = 2 * np.pi * np.arange(n) / n
        if d == 1:
            grid = axis.reshape(-1, 1)
        else:
            mesh = np.meshgrid(axis, axis, indexing="ij")
            grid = np.stack([g.ravel() for g in mesh], axis=1)
        vals = k.eval(grid)
        assert vals.real.min() >= -1e-12
        assert np.abs(vals.imag).max() <= 1e-12


# ----------------------------------------------------------------- blocks

def test_block_index_frozen_values():
    assert block_index((0,)) == 0
    assert block_index((1,)) == 1
    assert block_index((-1,)) == 1
    assert block_index((2,)) == 2
    assert block_index((3,)) == 2
    assert block_index((4,)) == 3
    assert block_index((7,)) == 3
    assert block_index((8,)) == 4
    assert block_index((0, -5)) == 3


def test_dyadic_block_cardinalities():
    assert dyadic_block(0, 1) == frozenset({(0,)})
    assert dyadic_block(1, 1) == frozenset({(-1,), (1,)})
    # block 2 in two dimensions: sup norm in {2, 3}, 7x7 minus 3x3
    assert len(dyadic_block(2, 2)) == 49 - 9
    # independent check: brute force over the enclosing square
    brute = {(a, b) for a in range(-3, 4) for b in range(-3, 4)
             if 2 <= max(abs(a), abs(b)) < 4}
    assert dyadic_block(2, 2) == frozenset(brute)


def test_blocks_partition_the_box():
    box = {(a,) for a in range(-7, 8)}
    union = set()
    for j in range(4):
        block = dyadic_block(j, 1)
        assert union.isdisjoint(block)
        union |= block
    assert union == box


# ------------------------------------------------------------------ system

def test_system_lexicographic_order():
    sys1 = TrigSystem(1, (1,))
    assert sys1.indices() == [(-1,), (0,), (1,)]
    sys2 = TrigSystem(2, (1, 1))
    assert sys2.indices()[:3] == [(-1, -1), (-1, 0), (-1, 1)]
    assert sys2.size == 9


def test_system_index_roundtrip():
    system = TrigSystem(2, (2, 3))
    assert system.size == 5 * 7
    for col in range(system.size):
        assert system.column_of(system.index_at(col)) == col


def test_system_evaluation_matches_member():
    system = TrigSystem(1, (3,))
    rng = np.random.default_rng(3)
    x = rng.uniform(0, 2 * np.pi, size=(11, 1))
    mat = system.evaluate_at(x)
    for col, k in enumerate(system.indices()):
        np.testing.assert_allclose(mat[:, col], system.member(k).eval(x),
                                   rtol=1e-12, atol=1e-12)


# ------------------------------------------------------------------- norms

def test_quadrature_grid_size_frozen():
    assert quadrature_grid_size(4, 2, 8) == 41
    assert quadrature_grid_size(8, 4, 2) == 33
    assert quadrature_grid_size(0, math.inf, 8) == 9


def test_parseval_identity_random_polynomials():
    rng = np.random.default_rng(4)
    for _ in range(60):
        f = _random_poly(rng, 1, int(rng.integers(1, 17)))
        assert lp_norm(f, 2, "mu") == pytest.approx(f.l2_norm(), rel=1e-12)
    for _ in range(15):
        f = _random_poly(rng, 2, int(rng.integers(1, 6)))
        assert lp_norm(f, 2, "mu") == pytest.approx(f.l2_norm(), rel=1e-12)


def test_l4_norm_against_parseval_oracle():
    # ||f||_4^4 = || f * conj(f) ||_2^2, computable exactly from coefficients
    rng = np.random.default_rng(5)
    for _ in range(25):
        f = _random_poly(rng, 1, int(rng.integers(1, 9)))
        oracle = math.sqrt(multiply(f, _conj(f)).l2_norm())
        assert lp_norm(f, 4, "mu") == pytest.approx(oracle, rel=1e-11)


def test_sup_norm_is_a_lower_estimate():
    rng = np.random.default_rng(6)
    f = _random_poly(rng, 1, 6)
    coarse = lp_norm(f, math.inf, "mu", oversample=2)
    fine = lp_norm(f, math.inf, "mu", oversample=64)
    assert coarse <= fine * (1 + 1e-12)


def test_lp_norm_monotone_in_p():
    rng = np.random.default_rng(7)
    f = _random_poly(rng, 1, 5)
    n2, n4, n6 = (lp_norm(f, p, "mu") for p in (2, 4, 6))
    assert n2 <= n4 * (1 + 1e-12) <= n6 * (1 + 1e-12) ** 2


def test_lp_norm_validation():
    f = TrigPolynomial(1, {(0,): 1.0})
    with pytest.raises(ValueError):
        lp_norm(f, 0.5, "mu")
    with pytest.raises(ValueError):
        lp_norm(f, 2, "nu")
    with pytest.raises(ValueError):
        lp_norm(f, 2, "mu_m")  # needs a point set
    with pytest.raises(ValueError):
        lp_norm(f, 2, "mu", oversample=1)


def test_discrete_and_mixture_measures():
    from womplab.discretization import PointSet
    f = TrigPolynomial(1, {(1,): 1.0})
    pts = PointSet(1, np.array([[0.0], [np.pi / 2]]))
    # |f| = 1 everywhere, so all three measures agree
    for measure in ("mu", "mu_m", "mu_xi"):
        assert lp_norm(f, 4, measure, pointset=pts) == pytest.approx(1.0, rel=1e-12)
    g = TrigPolynomial(1, {(0,): 1.0, (1,): 1.0})
    vals = np.abs(g.eval(pts.points))
    expect_m = float(np.mean(vals ** 2) ** 0.5)
    assert lp_norm(g, 2, "mu_m", pointset=pts) == pytest.approx(expect_m, rel=1e-12)
    mix = math.sqrt(0.5 * (g.l2_norm() ** 2 + expect_m ** 2))
    assert lp_norm(g, 2, "mu_xi", pointset=pts) == pytest.approx(mix, rel=1e-12)


# --------------------------------------------------------------------- io

def test_polynomial_io_roundtrip(tmp_path):
    rng = np.random.default_rng(8)
    f = _random_poly(rng, 2, 3)
    path = tmp_path / "poly.txt"
    write_polynomial(f, path, header_lines=["note one", "note two"])
    g = read_polynomial(path)
    assert g.dim == f.dim
    assert set(g.coeffs) == set(f.coeffs)
    for k in f.coeffs:
        assert g.coeffs[k] == f.coeffs[k]  # %.17g is lossless for doubles
