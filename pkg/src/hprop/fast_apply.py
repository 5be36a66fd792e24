"""Matrix-free application of polynomial potentials in coefficient space.

Multiplication by the coordinate x_l acts on Hermite coefficients as the
sparse two-band operation

    (X_l v)_j = sqrt(j_l / 2) * v_{j - e_l} + sqrt((j_l + 1) / 2) * v_{j + e_l},

where a missing neighbor, whether outside the cube or pruned away by a
reduced index set, contributes zero.  Chebyshev polynomials of X_l / L then
follow from the three-term recurrence on whole coefficient vectors, and a
tensor surrogate sum_r alpha_r prod_l T_{r_l}(X_l / L) is applied at cost
O(sum_r |r| * size) instead of a dense matrix multiply.  Terms that involve
only one axis additionally share a single recurrence sweep per axis, so the
common case of separable potentials costs O(N * R * size).

Within every term the axis factors are applied from the last axis inward to
the first, matching the product as written.  On full cubes the factors
commute and the order is irrelevant; on reduced sets it is part of the
operation's definition, so the order is fixed.
"""

from __future__ import annotations

import warnings

import numpy as np

from .index_set import CoeffVector, IndexSet
from .potential_approx import ChebApprox


class PolynomialApplier:
    """Workspace-backed applier bound to one index set.

    Neighbor tables and coordinate coefficients are precomputed per axis and
    shared; the per-call scratch vectors are allocated inside each apply, so
    one applier can serve concurrent callers.
    """

    def __init__(self, iset: IndexSet):
        self.iset = iset
        n, N = iset.size, iset.dim
        self._down = []
        self._up = []
        self._cdown = []
        self._cup = []
        for axis in range(1, N + 1):
            down, up = iset.neighbor_ordinals(axis)
            # absent neighbors point at the padded zero slot n
            self._down.append(np.where(down < 0, n, down))
            self._up.append(np.where(up < 0, n, up))
            jl = iset.indices[:, axis - 1].astype(np.float64)
            self._cdown.append(np.sqrt(jl / 2.0))
            self._cup.append(np.sqrt((jl + 1.0) / 2.0))
        self.osc_levels = (iset.indices + 0.5).sum(axis=1).astype(np.float64)

    # -- single coordinate ----------------------------------------------------

    def apply_coordinate(self, axis: int, w: np.ndarray) -> np.ndarray:
        a = axis - 1
        n = self.iset.size
        pad = np.zeros(n + 1, dtype=np.result_type(w.dtype, np.float64))
        pad[:n] = w
        return (self._cdown[a] * pad[self._down[a]]
                + self._cup[a] * pad[self._up[a]])

    # -- Chebyshev factor of one coordinate ------------------------------------

    def _cheb_first(self, axis: int, halfwidth: float, wm: np.ndarray,
                    wp: np.ndarray, tmp: np.ndarray) -> None:
        """wp <- (1/L) X_axis wm on padded buffers."""
        a = axis - 1
        n = self.iset.size
        np.take(wm, self._up[a], out=tmp)
        tmp *= self._cup[a]
        np.take(wm, self._down[a], out=wp[:n])
        wp[:n] *= self._cdown[a]
        wp[:n] += tmp
        wp[:n] *= 1.0 / halfwidth

    def _cheb_step(self, axis: int, halfwidth: float, wm: np.ndarray,
                   wp: np.ndarray, sp: np.ndarray, tmp: np.ndarray) -> None:
        """sp <- (2/L) X_axis wp - wm, one recurrence advance."""
        a = axis - 1
        n = self.iset.size
        np.take(wp, self._up[a], out=tmp)
        tmp *= self._cup[a]
        np.take(wp, self._down[a], out=sp[:n])
        sp[:n] *= self._cdown[a]
        sp[:n] += tmp
        sp[:n] *= 2.0 / halfwidth
        sp[:n] -= wm[:n]

    def _chebyshev_axis(self, axis: int, deg: int, halfwidth: float,
                        wm: np.ndarray, wp: np.ndarray, sp: np.ndarray,
                        tmp: np.ndarray) -> tuple[np.ndarray, ...]:
        """In-place T_deg(X_axis / L) on the padded buffer wm; deg >= 1.

        Returns the rotated (wm, wp, sp) buffer triple whose second entry
        holds the result.  All three buffers keep a zero in slot n.
        """
        self._cheb_first(axis, halfwidth, wm, wp, tmp)
        for _ in range(deg - 1):
            self._cheb_step(axis, halfwidth, wm, wp, sp, tmp)
            wm, wp, sp = wp, sp, wm
        return wm, wp, sp

    # -- full surrogate ---------------------------------------------------------

    def apply_polynomial(self, approx: ChebApprox, v: np.ndarray,
                         axis_order=None) -> np.ndarray:
        """Multiply v by the restricted Galerkin matrix of the surrogate.

        Terms touching a single axis share one recurrence sweep per axis,
        harvesting every needed degree on the way up; only genuinely mixed
        terms pay for their own ordered product.  Passing axis_order
        disables the grouping and runs each term separately in that order,
        which is the knob the commutation checks rely on.
        """
        n, N = self.iset.size, self.iset.dim
        if axis_order is not None:
            axis_order = [int(a) for a in axis_order]
            if sorted(axis_order) != list(range(1, N + 1)):
                raise ValueError(f"axis_order must permute 1..{N}")
            return self._apply_terms(approx, v, axis_order, None)
        degrees = approx.degrees
        coeffs = approx.coeffs
        active = degrees > 0
        nactive = active.sum(axis=1)
        dtype = np.result_type(v.dtype, np.float64)
        acc = np.zeros(n, dtype=dtype)
        const = coeffs[nactive == 0].sum()
        if const != 0.0:
            acc += const * v
        single = np.nonzero(nactive == 1)[0]
        if single.size:
            wm = np.zeros(n + 1, dtype=dtype)
            wp = np.zeros(n + 1, dtype=dtype)
            sp = np.zeros(n + 1, dtype=dtype)
            tmp = np.empty(n, dtype=dtype)
            L = approx.halfwidth
            for axis in range(N, 0, -1):
                rows = single[active[single, axis - 1]]
                if rows.size == 0:
                    continue
                weights: dict[int, float] = {}
                for it in rows:
                    d = int(degrees[it, axis - 1])
                    weights[d] = weights.get(d, 0.0) + coeffs[it]
                wm[:n] = v
                self._cheb_first(axis, L, wm, wp, tmp)
                w = weights.get(1)
                if w is not None:
                    acc += w * wp[:n]
                for d in range(2, max(weights) + 1):
                    self._cheb_step(axis, L, wm, wp, sp, tmp)
                    wm, wp, sp = wp, sp, wm
                    w = weights.get(d)
                    if w is not None:
                        acc += w * wp[:n]
        mixed = np.nonzero(nactive >= 2)[0]
        if mixed.size:
            acc += self._apply_terms(approx, v, range(N, 0, -1), mixed)
        return acc

    def _apply_terms(self, approx: ChebApprox, v: np.ndarray, axis_order,
                     rows) -> np.ndarray:
        """Per-term ordered product; rows of None means every term."""
        n = self.iset.size
        dtype = np.result_type(v.dtype, np.float64)
        wm = np.zeros(n + 1, dtype=dtype)
        wp = np.zeros(n + 1, dtype=dtype)
        sp = np.zeros(n + 1, dtype=dtype)
        tmp = np.empty(n, dtype=dtype)
        acc = np.zeros(n, dtype=dtype)
        term = np.empty(n, dtype=dtype)
        L = approx.halfwidth
        degrees = approx.degrees
        coeffs = approx.coeffs
        if rows is None:
            rows = range(coeffs.shape[0])
        for it in rows:
            r = degrees[it]
            wm[:n] = v
            for axis in axis_order:
                deg = int(r[axis - 1])
                if deg == 0:
                    continue
                wm, wp, sp = self._chebyshev_axis(axis, deg, L, wm, wp, sp, tmp)
                wm, wp = wp, wm          # result becomes the next input
            np.multiply(wm[:n], coeffs[it], out=term)
            acc += term
        return acc

    def apply_hamiltonian(self, approx: ChebApprox, v: np.ndarray) -> np.ndarray:
        out = self.apply_polynomial(approx, v)
        out += self.osc_levels * v
        return out

    # -- exact quadratic confinement --------------------------------------------

    def _square_tables(self):
        """Second-neighbor ordinals and x**2 couplings, built on first use.

        The Galerkin matrix of x_l**2 is banded with closed-form entries
        (j_l + 1/2 on the diagonal, sqrt(j_l (j_l - 1)) / 2 two below,
        sqrt((j_l + 1)(j_l + 2)) / 2 two above); restricting it to the set
        just drops couplings whose partner is missing.  Downward closure
        guarantees j + 2 e_l in the set implies j + e_l in the set, so the
        two-step tables compose from the one-step ones.
        """
        tables = self.iset._derived.get("square_tables")
        if tables is None:
            n = self.iset.size
            down2, up2, cdown2, cup2 = [], [], [], []
            for a in range(self.iset.dim):
                d1, u1 = self._down[a], self._up[a]
                padded_d = np.append(d1, n)
                padded_u = np.append(u1, n)
                down2.append(padded_d[d1])
                up2.append(padded_u[u1])
                jl = self.iset.indices[:, a].astype(np.float64)
                cdown2.append(np.sqrt(jl * (jl - 1.0)) / 2.0)
                cup2.append(np.sqrt((jl + 1.0) * (jl + 2.0)) / 2.0)
            tables = (down2, up2, cdown2, cup2)
            self.iset._derived["square_tables"] = tables
        return tables

    def apply_square_sum(self, v: np.ndarray) -> np.ndarray:
        """(sum_l x_l**2) v through the exact restricted Galerkin entries.

        This is the restriction of the exact matrix, not the square of the
        restricted ladder: the diagonal keeps its full value j_l + 1/2 even
        where first neighbors are pruned away, so quadratic confinement
        shifts carry no reduction error at all.
        """
        n = self.iset.size
        down2, up2, cdown2, cup2 = self._square_tables()
        pad = np.zeros(n + 1, dtype=np.result_type(v.dtype, np.float64))
        pad[:n] = v
        out = self.osc_levels * v    # sum_l (j_l + 1/2) is the full diagonal
        for a in range(self.iset.dim):
            out += cdown2[a] * pad[down2[a]]
            out += cup2[a] * pad[up2[a]]
        return out


def get_applier(iset: IndexSet) -> PolynomialApplier:
    """Per-set applier with precomputed neighbor tables, built once."""
    appl = iset._derived.get("applier")
    if appl is None:
        appl = PolynomialApplier(iset)
        iset._derived["applier"] = appl
    return appl


def _check_vector(iset: IndexSet, v: CoeffVector) -> None:
    if v.iset is not iset and not iset.same_as(v.iset):
        raise ValueError("coefficient vector belongs to a different index set")


def _check_approx(iset: IndexSet, approx: ChebApprox) -> None:
    if approx.dim != iset.dim:
        raise ValueError(f"surrogate dimension {approx.dim} does not match "
                         f"index set dimension {iset.dim}")
    if approx.degree > iset.bound / 2:
        warnings.warn(
            f"surrogate degree {approx.degree} exceeds half the basis bound "
            f"{iset.bound}; quadrature exactness margins are thin",
            UserWarning, stacklevel=3)


def direct_op(iset: IndexSet, axis: int, v: CoeffVector) -> CoeffVector:
    """Coordinate multiplication X_axis applied to a coefficient vector."""
    if not 1 <= axis <= iset.dim:
        raise ValueError(f"axis must satisfy 1 <= axis <= {iset.dim}, got {axis}")
    _check_vector(iset, v)
    return CoeffVector(iset, get_applier(iset).apply_coordinate(axis, v.data))


def cheb_of_coordinate_apply(iset: IndexSet, axis: int, degree: int,
                             halfwidth: float, v: CoeffVector) -> CoeffVector:
    """T_degree(X_axis / halfwidth) applied through the vector recurrence."""
    if not 1 <= axis <= iset.dim:
        raise ValueError(f"axis must satisfy 1 <= axis <= {iset.dim}, got {axis}")
    if degree < 0:
        raise ValueError(f"degree must be nonnegative, got {degree}")
    if halfwidth <= 0:
        raise ValueError(f"halfwidth must be positive, got {halfwidth}")
    _check_vector(iset, v)
    if degree == 0:
        return v.copy()
    appl = get_applier(iset)
    n = iset.size
    dtype = np.result_type(v.data.dtype, np.float64)
    wm = np.zeros(n + 1, dtype=dtype)
    wp = np.zeros(n + 1, dtype=dtype)
    spare = np.zeros(n + 1, dtype=dtype)
    tmp = np.empty(n, dtype=dtype)
    wm[:n] = v.data
    _, wp, _ = appl._chebyshev_axis(axis, degree, halfwidth, wm, wp, spare, tmp)
    return CoeffVector(iset, wp[:n].copy())


def fast_algorithm(iset: IndexSet, approx: ChebApprox, v: CoeffVector,
                   *, axis_order=None) -> CoeffVector:
    """Apply the surrogate potential sum_r alpha_r prod_l T_{r_l}(X_l/L).

    ``axis_order`` overrides the application order of the per-term factors
    (first entry applied first); it exists for diagnostics, the default
    (dim, dim-1, ..., 1) is the defined behavior on reduced sets.
    """
    _check_vector(iset, v)
    _check_approx(iset, approx)
    out = get_applier(iset).apply_polynomial(approx, v.data, axis_order)
    if not np.all(np.isfinite(out)):
        raise RuntimeError("fast application produced non-finite values; "
                           "check surrogate coefficients and halfwidth")
    return CoeffVector(iset, out)


def apply_hamiltonian(iset: IndexSet, approx: ChebApprox,
                      v: CoeffVector) -> CoeffVector:
    """(D + W_pol) v with D the oscillator diagonal sum_l (j_l + 1/2)."""
    _check_vector(iset, v)
    _check_approx(iset, approx)
    out = get_applier(iset).apply_hamiltonian(approx, v.data)
    if not np.all(np.isfinite(out)):
        raise RuntimeError("Hamiltonian application produced non-finite values")
    return CoeffVector(iset, out)


def square_sum_apply(iset: IndexSet, v: CoeffVector) -> CoeffVector:
    """(sum_l x_l**2) v via the exact banded Galerkin entries on the set."""
    _check_vector(iset, v)
    return CoeffVector(iset, get_applier(iset).apply_square_sum(v.data))
