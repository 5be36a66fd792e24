import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.polynomial import chebyshev as C

from hprop import (
    chebyshev_values,
    custom_potential,
    eval_interpolant,
    henon_heiles_perturbed,
    interpolate,
    potential_by_name,
    smooth_remainder,
    torsional,
    torsional_minus_harmonic,
)


@given(st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=8),
       st.integers(0, 12))
def test_chebyshev_values_match_reference(ys, deg):
    y = np.asarray(ys)
    table = chebyshev_values(y, deg)
    for k in range(deg + 1):
        ref = C.chebval(y, [0.0] * k + [1.0])
        assert np.max(np.abs(table[k] - ref)) < 1e-13


def test_chebyshev_values_reject_outside_interval():
    with pytest.raises(ValueError):
        chebyshev_values(np.array([0.0, 1.5]), 3)
    with pytest.raises(ValueError):
        chebyshev_values(0.5, -1)


def test_interpolate_1d_matches_reference_fit():
    # same first-kind node family as the reference implementation, so the
    # coefficient vectors should agree to rounding
    L = 16.0
    spec = torsional(1, L)
    deg = 8
    approx = interpolate(spec, deg)
    ref = C.chebinterpolate(lambda y: 1.0 - np.cos(y * L / L), deg)
    dense = np.zeros(deg + 1)
    for row, a in approx.terms:
        dense[row[0]] = a
    assert np.max(np.abs(dense - ref)) < 1e-14


def test_interpolate_fit_quality_torsional():
    approx = interpolate(torsional(1), 8)
    assert 1e-12 < approx.fit_error < 1e-8
    # coefficients of the analytic cosine drop fast beyond the leading pair
    # (constant and degree 2 are both about 0.23); from there each kept
    # order is at least an order of magnitude below its predecessor
    mags = [abs(a) for row, a in sorted(approx.terms)]
    assert 0.5 < mags[1] / mags[0] < 1.0
    for lo, hi in zip(mags[2:], mags[1:-1]):
        assert lo < 0.2 * hi


def test_interpolate_separable_potential_keeps_axis_terms_only():
    approx = interpolate(torsional(3), 6)
    active = (approx.degrees > 0).sum(axis=1)
    assert np.all(active <= 1)
    # constant term plus identical per-axis expansions
    per_axis = {}
    for row, a in approx.terms:
        axes = [l for l, d in enumerate(row) if d > 0]
        if axes:
            per_axis.setdefault(axes[0], {})[row[axes[0]]] = a
    assert sorted(per_axis) == [0, 1, 2]
    base = per_axis[0]
    for other in (per_axis[1], per_axis[2]):
        assert sorted(other) == sorted(base)
        for k in base:
            assert other[k] == pytest.approx(base[k], rel=1e-12)


def test_interpolate_linear_coordinate():
    L = 16.0
    spec = custom_potential(lambda p, t: p[:, 0].copy(), 1, L)
    approx = interpolate(spec, 5)
    assert approx.terms == [((1,), pytest.approx(L, rel=1e-14))]


def test_interpolate_degree_zero_constant():
    spec = custom_potential(lambda p, t: np.full(p.shape[0], 3.25), 2, 8.0)
    approx = interpolate(spec, 0)
    assert approx.nterms == 1
    assert approx.terms[0] == ((0, 0), pytest.approx(3.25))
    assert approx.fit_error < 1e-14


def test_interpolate_rejects_non_finite_potential():
    spec = custom_potential(
        lambda p, t: np.where(p[:, 0] > 0, np.inf, 1.0), 1, 4.0)
    with pytest.raises(ValueError, match="non-finite"):
        interpolate(spec, 3)


def test_eval_interpolant_reproduces_polynomials_exactly(rng):
    L = 5.0
    spec = custom_potential(
        lambda p, t: 0.5 * p[:, 0] ** 3 - p[:, 1] ** 2 + 2.0, 2, L)
    approx = interpolate(spec, 3)
    pts = rng.uniform(-L, L, size=(40, 2))
    got = eval_interpolant(approx, pts)
    want = 0.5 * pts[:, 0] ** 3 - pts[:, 1] ** 2 + 2.0
    assert np.max(np.abs(got - want)) < 1e-11
    assert approx.fit_error < 1e-11


def test_time_dependence_enters_through_reinterpolation():
    spec = henon_heiles_perturbed(2)
    a0 = interpolate(spec, 3, time=0.0)
    a1 = interpolate(spec, 3, time=1.0)
    t0 = dict(a0.terms)
    t1 = dict(a1.terms)
    # the drive term on the first axis moves with sin(t)**2
    assert t0.get((1, 0), 0.0) == pytest.approx(0.0, abs=1e-14)
    assert t1[(1, 0)] == pytest.approx(-math.sin(1.0) ** 2, rel=1e-12)
    # the static cubic couplings do not move
    for key in ((2, 1), (0, 3)):
        assert t0[key] == pytest.approx(t1[key], rel=1e-12)


def test_chained_cubic_coupling_coefficients():
    # y1**2 y2 - y2**3/3 - sin(t)**2 y1 in stretched units has the closed
    # Chebyshev form (1/2)T2T1 + (1/4)T0T1 - (1/12)T0T3 - sin(t)**2 T1T0
    spec = henon_heiles_perturbed(2)
    t = 0.7
    approx = interpolate(spec, 3, time=t)
    assert approx.fit_error < 1e-13
    terms = dict(approx.terms)
    assert terms[(2, 1)] == pytest.approx(0.5, rel=1e-12)
    assert terms[(0, 1)] == pytest.approx(0.25, rel=1e-12)
    assert terms[(0, 3)] == pytest.approx(-1.0 / 12.0, rel=1e-12)
    assert terms[(1, 0)] == pytest.approx(-math.sin(t) ** 2, rel=1e-12)
    assert len(terms) == 4


def test_smooth_remainder_subtracts_declared_confinement(rng):
    spec = torsional_minus_harmonic(2)
    assert spec.harmonic_part == -0.5
    rem = smooth_remainder(spec)
    assert rem.harmonic_part == 0.0
    pts = rng.uniform(-16, 16, size=(30, 2))
    want = spec(pts) + 0.5 * (pts ** 2).sum(axis=1)
    assert np.max(np.abs(rem(pts) - want)) < 1e-12
    # remainder of the plain potential is the potential itself
    assert smooth_remainder(torsional(2)) is not rem
    assert smooth_remainder(torsional(2)).harmonic_part == 0.0


def test_potential_by_name_roundtrip():
    for name in ("torsional", "torsional-ho", "henon-heiles"):
        spec = potential_by_name(name, 2)
        assert spec.dim == 2
        assert spec.kind == name
    with pytest.raises(ValueError, match="unknown potential"):
        potential_by_name("quartic", 2)


def test_potential_spec_call_shapes():
    spec = torsional(2)
    single = spec([1.0, 2.0])
    batch = spec(np.array([[1.0, 2.0], [0.0, 0.0]]))
    assert np.isscalar(single) or single.ndim == 0
    assert batch.shape == (2,)
    assert batch[0] == pytest.approx(float(single))
    with pytest.raises(ValueError, match="dimension"):
        spec(np.zeros((3, 3)))


def test_approx_csv_dump(tmp_path):
    approx = interpolate(torsional(2), 4)
    path = tmp_path / "surrogate.csv"
    approx.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# dim=2 degree=4")
    assert lines[1] == "r_1,r_2,alpha"
    assert len(lines) == 2 + approx.nterms
