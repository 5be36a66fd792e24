import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hprop import (
    ChebApprox,
    CoeffVector,
    apply_hamiltonian,
    assemble_quad_galerkin,
    assemble_square_sum,
    build_full,
    build_hyperbolic,
    cheb_of_coordinate_apply,
    custom_potential,
    direct_op,
    fast_algorithm,
    gauss_hermite_rule,
    get_applier,
    henon_heiles_perturbed,
    interpolate,
    smooth_remainder,
    square_sum_apply,
    torsional,
)

# -- test-local dense oracle, built straight from the two-band coupling rule --


def dense_coordinate(iset, axis):
    n = iset.size
    mat = np.zeros((n, n))
    for i, row in enumerate(iset.indices.tolist()):
        k = row[axis - 1]
        below = list(row)
        below[axis - 1] = k - 1
        if k > 0 and tuple(below) in iset:
            mat[i, iset.position(tuple(below))] = math.sqrt(k / 2.0)
        above = list(row)
        above[axis - 1] = k + 1
        if tuple(above) in iset:
            mat[i, iset.position(tuple(above))] = math.sqrt((k + 1) / 2.0)
    return mat


def cheb_of_matrix(mat, deg):
    t0 = np.eye(mat.shape[0])
    if deg == 0:
        return t0
    t1 = mat
    for _ in range(deg - 1):
        t0, t1 = t1, 2.0 * mat @ t1 - t0
    return t1


def dense_surrogate(iset, approx):
    # ordered product, last axis applied to the vector first
    xs = [dense_coordinate(iset, axis) / approx.halfwidth
          for axis in range(1, iset.dim + 1)]
    out = np.zeros((iset.size, iset.size))
    for row, alpha in approx.terms:
        term = np.eye(iset.size)
        for axis in range(1, iset.dim + 1):
            if row[axis - 1] > 0:
                term = term @ cheb_of_matrix(xs[axis - 1], row[axis - 1])
        out += alpha * term
    return out


# -- coordinate and single-axis application -----------------------------------


@pytest.mark.parametrize("dim,bound,axis", [(1, 12, 1), (2, 10, 1),
                                            (2, 10, 2), (3, 6, 2)])
def test_coordinate_apply_matches_coupling_rule(dim, bound, axis, rng):
    iset = build_hyperbolic(dim, bound)
    v = CoeffVector(iset, rng.standard_normal(iset.size))
    got = direct_op(iset, axis, v)
    want = dense_coordinate(iset, axis) @ v.data
    assert np.max(np.abs(got.data - want)) < 1e-14


def test_coordinate_apply_respects_pruned_neighbors():
    iset = build_hyperbolic(2, 10)
    e = np.zeros(iset.size)
    e[iset.position((2, 2))] = 1.0
    out = direct_op(iset, 1, CoeffVector(iset, e)).data
    # (3, 2) is pruned, so only the downward coupling survives
    assert out[iset.position((1, 2))] == pytest.approx(math.sqrt(1.0))
    assert np.count_nonzero(out) == 1


@pytest.mark.parametrize("deg", [0, 1, 2, 5, 8])
def test_chebyshev_of_coordinate_matches_matrix_recurrence(deg, rng):
    iset = build_hyperbolic(2, 12)
    L = 16.0
    v = CoeffVector(iset, rng.standard_normal(iset.size))
    got = cheb_of_coordinate_apply(iset, 1, deg, L, v)
    want = cheb_of_matrix(dense_coordinate(iset, 1) / L, deg) @ v.data
    assert np.max(np.abs(got.data - want)) < 1e-12


# -- whole-surrogate application ----------------------------------------------


@pytest.mark.parametrize("dim,bound,degree,potential", [
    (1, 16, 7, torsional),
    (2, 12, 5, torsional),
    (2, 12, 5, henon_heiles_perturbed),
    (3, 8, 3, henon_heiles_perturbed),
])
def test_fast_algorithm_matches_ordered_dense_product(dim, bound, degree,
                                                      potential, rng):
    iset = build_hyperbolic(dim, bound)
    spec = smooth_remainder(potential(dim))
    approx = interpolate(spec, degree, time=0.4)
    v = CoeffVector(iset, rng.standard_normal(iset.size))
    got = fast_algorithm(iset, approx, v)
    want = dense_surrogate(iset, approx) @ v.data
    scale = max(np.max(np.abs(want)), 1.0)
    assert np.max(np.abs(got.data - want)) < 1e-13 * scale


def test_shared_axis_sweep_equals_per_term_application(rng):
    # the grouped fast path must agree with running each term separately
    for dim, bound in ((2, 30), (3, 12), (4, 10)):
        iset = build_hyperbolic(dim, bound)
        spec = smooth_remainder(henon_heiles_perturbed(dim))
        approx = interpolate(spec, 7, time=0.9)
        appl = get_applier(iset)
        v = rng.standard_normal(iset.size)
        grouped = appl.apply_polynomial(approx, v)
        ordered = appl.apply_polynomial(approx, v,
                                        axis_order=list(range(dim, 0, -1)))
        assert np.max(np.abs(grouped - ordered)) < 1e-15 * np.max(np.abs(ordered))


_LIN_SET = build_hyperbolic(2, 10)
_LIN_APPROX = interpolate(torsional(2), 4)


@given(st.integers(0, 2 ** 31 - 1),
       st.complex_numbers(max_magnitude=8.0, allow_nan=False,
                          allow_infinity=False))
def test_fast_algorithm_is_linear(seed, scalar):
    iset, approx = _LIN_SET, _LIN_APPROX
    gen = np.random.default_rng(seed)
    a = gen.standard_normal(iset.size) + 1j * gen.standard_normal(iset.size)
    b = gen.standard_normal(iset.size)
    appl = get_applier(iset)
    lhs = appl.apply_polynomial(approx, scalar * a + b)
    rhs = scalar * appl.apply_polynomial(approx, a) \
        + appl.apply_polynomial(approx, b)
    scale = max(np.max(np.abs(rhs)), 1.0)
    assert np.max(np.abs(lhs - rhs)) < 1e-12 * scale


def test_full_cube_equivalence_with_order_matched_assembly(rng):
    for dim, bound in ((1, 10), (2, 8)):
        full = build_full(dim, bound)
        approx = interpolate(torsional(dim), 4)
        dense = assemble_quad_galerkin(full, approx,
                                       gauss_hermite_rule(bound)).matrix
        v = CoeffVector(full, rng.standard_normal(full.size))
        got = fast_algorithm(full, approx, v)
        assert np.max(np.abs(got.data - dense @ v.data)) < 1e-12


def test_axis_order_immaterial_on_full_cubes(rng):
    full = build_full(2, 9)
    spec = smooth_remainder(henon_heiles_perturbed(2))
    approx = interpolate(spec, 3, time=0.5)
    v = CoeffVector(full, rng.standard_normal(full.size))
    a = fast_algorithm(full, approx, v, axis_order=(2, 1))
    b = fast_algorithm(full, approx, v, axis_order=(1, 2))
    assert np.max(np.abs(a.data - b.data)) < 1e-13


def test_axis_order_matters_on_pruned_sets(rng):
    # pruning makes the per-axis factors non-commuting, so the application
    # order is part of the operation's definition
    iset = build_hyperbolic(2, 12)
    spec = smooth_remainder(henon_heiles_perturbed(2))
    approx = interpolate(spec, 3, time=0.5)
    v = CoeffVector(iset, rng.standard_normal(iset.size))
    a = fast_algorithm(iset, approx, v, axis_order=(2, 1))
    b = fast_algorithm(iset, approx, v, axis_order=(1, 2))
    assert np.max(np.abs(a.data - b.data)) > 1e-9


def test_axis_order_must_be_a_permutation(rng):
    iset = build_hyperbolic(2, 6)
    approx = interpolate(torsional(2), 3)
    v = CoeffVector(iset, rng.standard_normal(iset.size))
    with pytest.raises(ValueError, match="permute"):
        fast_algorithm(iset, approx, v, axis_order=(1, 1))


def test_apply_hamiltonian_adds_oscillator_diagonal(rng):
    iset = build_hyperbolic(2, 10)
    approx = interpolate(torsional(2), 4)
    v = CoeffVector(iset, rng.standard_normal(iset.size))
    ham = apply_hamiltonian(iset, approx, v)
    pot = fast_algorithm(iset, approx, v)
    levels = (iset.indices + 0.5).sum(axis=1)
    assert np.max(np.abs(ham.data - pot.data - levels * v.data)) < 1e-14


def test_vector_from_wrong_set_is_rejected(rng):
    iset = build_hyperbolic(2, 10)
    other = build_hyperbolic(2, 12)
    approx = interpolate(torsional(2), 4)
    v = CoeffVector(other, rng.standard_normal(other.size))
    with pytest.raises(ValueError, match="different index set"):
        fast_algorithm(iset, approx, v)


def test_degree_above_half_bound_warns(rng):
    iset = build_hyperbolic(2, 10)
    approx = interpolate(torsional(2), 8)
    v = CoeffVector(iset, rng.standard_normal(iset.size))
    with pytest.warns(UserWarning, match="exceeds half the basis bound"):
        fast_algorithm(iset, approx, v)
    # comfortable degrees stay silent
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fast_algorithm(iset, interpolate(torsional(2), 5), v)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_overflowing_application_raises():
    iset = build_full(1, 6)
    approx = ChebApprox(dim=1, degree=1, halfwidth=1.0, time=0.0,
                        degrees=np.array([[1]]), coeffs=np.array([1e308]),
                        fit_error=0.0)
    v = CoeffVector(iset, np.full(iset.size, 1e3))
    with pytest.raises(RuntimeError, match="non-finite"):
        fast_algorithm(iset, approx, v)


def test_applier_is_cached_per_set():
    iset = build_hyperbolic(2, 8)
    assert get_applier(iset) is get_applier(iset)


# -- exact quadratic confinement ----------------------------------------------


def test_square_sum_three_routes_agree(rng):
    # matrix-free banded application, closed-form dense assembly, and an
    # over-resolved quadrature assembly of the plain x**2 potential must be
    # the same operator
    iset = build_hyperbolic(2, 14)
    v = CoeffVector(iset, rng.standard_normal(iset.size))
    fast = square_sum_apply(iset, v).data
    dense = assemble_square_sum(iset).matrix @ v.data
    assert np.max(np.abs(fast - dense)) < 1e-13
    from hprop import assemble_exact_galerkin

    spec = custom_potential(lambda p, t: (p * p).sum(axis=-1), 2, 16.0)
    quad = assemble_exact_galerkin(iset, interpolate(spec, 2)).matrix
    scale = np.max(np.abs(quad))
    assert np.max(np.abs(assemble_square_sum(iset).matrix - quad)) \
        < 1e-13 * scale


def test_square_sum_diagonal_survives_pruning():
    # even where first neighbors are pruned the diagonal keeps j + 1/2
    iset = build_hyperbolic(2, 10)
    mat = assemble_square_sum(iset).matrix
    levels = (iset.indices + 0.5).sum(axis=1)
    assert np.max(np.abs(np.diag(mat) - levels)) == 0.0
    assert np.max(np.abs(mat - mat.T)) == 0.0
