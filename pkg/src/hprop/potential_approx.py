"""Smooth potentials and their tensor Chebyshev surrogates.

The Galerkin machinery applies not the potential itself but a polynomial
surrogate

    W_pol(x, t) = sum_r alpha_r(t) * prod_l T_{r_l}(x_l / L),

obtained by interpolation on a tensor grid of Chebyshev-Gauss points
x_i = L * cos(pi (2i + 1) / (2R + 2)) per axis, where R is the maximal
per-axis degree.  Coefficients below 1e-14 times the largest magnitude are
dropped, so separable potentials keep only axis-aligned terms.  Time enters
through the potential evaluator alone; a time-dependent problem simply
re-interpolates at every requested t.

The bundled potentials all subtract the harmonic confinement that the
oscillator part of the Hamiltonian already carries, i.e. they are the W in
H = D + W with D the oscillator diagonal:

* ``torsional``      sum_l (1 - cos(x_l / L))            (no subtraction)
* ``torsional-ho``   the same minus (1/2) sum_l x_l**2
* ``henon-heiles``   chained cubic couplings with a sin(t)**2 drive on x_1,
                     minus the harmonic term
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

DROP_THRESHOLD = 1e-14
_CUBE_SLACK = 1e-12
_VALIDATION_SEED = 0

TORSIONAL = "torsional"
TORSIONAL_HO = "torsional-ho"
HENON_HEILES = "henon-heiles"


def _cheb_recurrence(y: np.ndarray, max_degree: int) -> np.ndarray:
    # unguarded three-term recurrence, valid for all real y
    out = np.empty((max_degree + 1, y.shape[0]), dtype=np.float64)
    out[0] = 1.0
    if max_degree >= 1:
        out[1] = y
    for k in range(1, max_degree):
        out[k + 1] = 2.0 * y * out[k] - out[k - 1]
    return out


def chebyshev_values(y, max_degree: int) -> np.ndarray:
    """T_0(y) .. T_R(y) on [-1, 1]; shape (R+1,) scalar / (R+1, len(y)) array."""
    if max_degree < 0:
        raise ValueError(f"max_degree must be nonnegative, got {max_degree}")
    y = np.asarray(y, dtype=np.float64)
    scalar = y.ndim == 0
    yy = np.atleast_1d(y)
    if np.any(np.abs(yy) > 1.0 + _CUBE_SLACK):
        raise ValueError("argument outside [-1, 1]")
    out = _cheb_recurrence(np.clip(yy, -1.0, 1.0), max_degree)
    return out[:, 0] if scalar else out


@dataclass(frozen=True)
class PotentialSpec:
    """A smooth potential W(x, t) on the box [-L, L]**dim.

    ``evaluator`` maps (points, t) -> values, with points of shape
    (npts, dim) and scalar t, and gives the complete potential.

    ``harmonic_part`` declares that the potential contains the quadratic
    confinement shift q * sum_l x_l**2 with q = harmonic_part, so that
    evaluator - q * sum x**2 is the genuinely non-quadratic remainder.
    Galerkin entries of x**2 are closed-form ladder products, so operator
    code can apply that piece exactly and feed only the remainder to the
    polynomial surrogate; the huge Chebyshev coefficients of q x**2 (order
    q L**2 / 2) would otherwise dominate every reduction-error budget.
    """

    kind: str
    dim: int
    halfwidth: float
    evaluator: Callable[[np.ndarray, float], np.ndarray]
    harmonic_part: float = 0.0

    def __call__(self, x, t: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if pts.shape[1] != self.dim:
            raise ValueError(f"points have dimension {pts.shape[1]}, "
                             f"potential has {self.dim}")
        vals = np.asarray(self.evaluator(pts, float(t)), dtype=np.float64)
        return vals[0] if np.asarray(x).ndim == 1 else vals


def smooth_remainder(spec: PotentialSpec) -> PotentialSpec:
    """The potential with its declared quadratic confinement removed."""
    if spec.harmonic_part == 0.0:
        return spec
    q = spec.harmonic_part
    inner = spec.evaluator

    def ev(pts, t):
        return inner(pts, t) - q * (pts * pts).sum(axis=-1)

    return PotentialSpec(spec.kind + "-remainder", spec.dim, spec.halfwidth,
                         ev, 0.0)


def torsional(dim: int, halfwidth: float = 16.0) -> PotentialSpec:
    L = float(halfwidth)

    def ev(pts, t):
        return (1.0 - np.cos(pts / L)).sum(axis=-1)

    return PotentialSpec(TORSIONAL, dim, L, ev)


def torsional_minus_harmonic(dim: int, halfwidth: float = 16.0) -> PotentialSpec:
    L = float(halfwidth)

    def ev(pts, t):
        return ((1.0 - np.cos(pts / L)).sum(axis=-1)
                - 0.5 * (pts * pts).sum(axis=-1))

    return PotentialSpec(TORSIONAL_HO, dim, L, ev, harmonic_part=-0.5)


def henon_heiles_perturbed(dim: int, halfwidth: float = 16.0) -> PotentialSpec:
    """Chained cubic couplings with a time-periodic linear drive on axis 1.

    Everything is expressed in the stretched coordinates y_l = x_l / L,
    including the drive, whose amplitude oscillates as sin(t)^2.  The
    quadratic confinement that localizes the wavepacket is not part of this
    potential; it lives in the oscillator reference operator, so the
    surrogate only ever sees the gentle anharmonic part.
    """
    L = float(halfwidth)

    def ev(pts, t):
        y = pts / L
        core = (y[:, :-1] ** 2 * y[:, 1:] - y[:, 1:] ** 3 / 3.0).sum(axis=-1)
        return core - math.sin(t) ** 2 * y[:, 0]

    return PotentialSpec(HENON_HEILES, dim, L, ev)


def custom_potential(evaluator, dim: int, halfwidth: float,
                     kind: str = "custom",
                     harmonic_part: float = 0.0) -> PotentialSpec:
    return PotentialSpec(kind, dim, float(halfwidth), evaluator,
                         harmonic_part)


_FACTORIES = {
    TORSIONAL: torsional,
    TORSIONAL_HO: torsional_minus_harmonic,
    HENON_HEILES: henon_heiles_perturbed,
}


def potential_by_name(name: str, dim: int, halfwidth: float = 16.0) -> PotentialSpec:
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise ValueError(f"unknown potential {name!r}; choose from "
                         f"{sorted(_FACTORIES)}") from None
    return factory(dim, halfwidth)


@dataclass(frozen=True)
class ChebApprox:
    """Sparse tensor Chebyshev surrogate of a potential at one time.

    ``degrees`` has shape (nterms, dim) and is sorted lexicographically;
    ``coeffs`` are the matching real coefficients.  ``fit_error`` is the
    max-norm interpolation error observed on the validation grid.
    """

    dim: int
    degree: int
    halfwidth: float
    time: float
    degrees: np.ndarray
    coeffs: np.ndarray
    fit_error: float

    @property
    def terms(self) -> list[tuple[tuple[int, ...], float]]:
        return [(tuple(row), float(a))
                for row, a in zip(self.degrees.tolist(), self.coeffs)]

    @property
    def nterms(self) -> int:
        return self.coeffs.shape[0]

    def write_csv(self, path) -> None:
        cols = [f"r_{l + 1}" for l in range(self.dim)] + ["alpha"]
        with open(path, "w", newline="\n") as fh:
            fh.write(f"# dim={self.dim} degree={self.degree} "
                     f"halfwidth={self.halfwidth:.17g} time={self.time:.17g} "
                     f"fit_error={self.fit_error:.17g}\n")
            fh.write(",".join(cols) + "\n")
            for row, a in zip(self.degrees.tolist(), self.coeffs):
                fh.write(",".join(str(r) for r in row) + f",{a:.17g}\n")


def _validation_points(dim: int, halfwidth: float) -> np.ndarray:
    if dim == 1:
        return np.linspace(-halfwidth, halfwidth, 33)[:, None]
    if dim == 2:
        g = np.linspace(-halfwidth, halfwidth, 33)
        gx, gy = np.meshgrid(g, g, indexing="ij")
        return np.stack([gx.reshape(-1), gy.reshape(-1)], axis=1)
    rng = np.random.default_rng(_VALIDATION_SEED)
    return rng.uniform(-halfwidth, halfwidth, size=(33 * 33, dim))


def interpolate(spec: PotentialSpec, degree: int, time: float = 0.0) -> ChebApprox:
    """Tensor Chebyshev-Gauss interpolation of ``spec`` at one instant.

    ``degree`` is the maximal per-axis degree R; each axis carries R+1 nodes
    L*cos(pi (2i+1) / (2R+2)).  Coefficients come from the discrete cosine
    orthogonality of the node family, applied axis by axis.
    """
    if degree < 0:
        raise ValueError(f"degree must be nonnegative, got {degree}")
    R, N, L = degree, spec.dim, spec.halfwidth
    n = R + 1
    theta = np.pi * (2.0 * np.arange(n) + 1.0) / (2.0 * n)
    y = np.cos(theta)
    grids = np.meshgrid(*([L * y] * N), indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grids], axis=1)
    vals = np.asarray(spec.evaluator(pts, float(time)), dtype=np.float64)
    if not np.all(np.isfinite(vals)):
        raise ValueError("potential evaluated to a non-finite value on the "
                         "interpolation grid")
    tensor = vals.reshape((n,) * N)
    # C[k, i] = (2 - delta_{k0})/n * cos(k * theta_i)
    C = np.cos(np.arange(n)[:, None] * theta[None, :]) * (2.0 / n)
    C[0] *= 0.5
    coeffs = tensor
    for _ in range(N):
        coeffs = np.tensordot(coeffs, C, axes=([0], [1]))
    amax = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    if amax == 0.0:
        degrees = np.zeros((0, N), dtype=np.int64)
        kept = np.zeros(0, dtype=np.float64)
    else:
        mask = np.abs(coeffs) > DROP_THRESHOLD * amax
        degrees = np.argwhere(mask).astype(np.int64)     # lexicographic
        kept = coeffs[mask]
    degrees.setflags(write=False)
    kept.setflags(write=False)
    approx = ChebApprox(N, R, L, float(time), degrees, kept, 0.0)
    vpts = _validation_points(N, L)
    resid = eval_interpolant(approx, vpts) - spec.evaluator(vpts, float(time))
    fit = float(np.max(np.abs(resid))) if resid.size else 0.0
    return ChebApprox(N, R, L, float(time), degrees, kept, fit)


def eval_interpolant(approx: ChebApprox, x) -> np.ndarray:
    """Evaluate the surrogate at points inside the box (shape (npts, dim))."""
    pts = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if pts.shape[1] != approx.dim:
        raise ValueError(f"points have dimension {pts.shape[1]}, "
                         f"surrogate has {approx.dim}")
    out = np.zeros(pts.shape[0], dtype=np.float64)
    if approx.nterms == 0:
        return out[0] if np.asarray(x).ndim == 1 else out
    prod = np.ones((approx.nterms, pts.shape[0]), dtype=np.float64)
    for l in range(approx.dim):
        table = chebyshev_values(pts[:, l] / approx.halfwidth, approx.degree)
        prod *= table[approx.degrees[:, l], :]
    out = approx.coeffs @ prod
    return out[0] if np.asarray(x).ndim == 1 else out
