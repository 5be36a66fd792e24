"""Univariate Hermite functions and Gauss-Hermite quadrature.

The Hermite functions

    phi_0(x) = pi**(-1/4) * exp(-x**2 / 2),
    phi_{k+1}(x) = sqrt(2/(k+1)) * x * phi_k(x) - sqrt(k/(k+1)) * phi_{k-1}(x),

are the L2-orthonormal eigenfunctions of the harmonic oscillator,
(1/2)(-d^2/dx^2 + x^2) phi_k = (k + 1/2) phi_k.  All evaluation happens on
the functions themselves: the bare Hermite polynomials overflow double
precision long before order 100 while the functions stay uniformly bounded
by pi**(-1/4).

Quadrature rules of order M carry the M+1 roots of phi_{M+1} as nodes.  The
raw weights integrate against exp(-x**2); the modified weights
omega_m = w_m * exp(xi_m**2) integrate plain products of Hermite functions,
(f, g) ~ sum_m omega_m f(xi_m) g(xi_m), exactly whenever f*g*exp(x**2) is a
polynomial of degree <= 2M + 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

_NEWTON_FTOL = 1e-14
_NEWTON_MAXIT = 50


def eval_hermite_functions(x, max_order: int, scaling: float = 1.0) -> np.ndarray:
    """Values phi_k(scaling * x) for k = 0..max_order.

    Returns shape (max_order+1,) for scalar ``x`` and (max_order+1, len(x))
    for a 1-d array of points.
    """
    if max_order < 0:
        raise ValueError(f"max_order must be nonnegative, got {max_order}")
    if scaling <= 0:
        raise ValueError(f"scaling must be positive, got {scaling}")
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    y = np.atleast_1d(x) * scaling
    out = np.empty((max_order + 1, y.shape[0]), dtype=np.float64)
    out[0] = np.pi ** (-0.25) * np.exp(-0.5 * y * y)
    if max_order >= 1:
        out[1] = np.sqrt(2.0) * y * out[0]
    for k in range(1, max_order):
        out[k + 1] = (np.sqrt(2.0 / (k + 1)) * y * out[k]
                      - np.sqrt(k / (k + 1.0)) * out[k - 1])
    return out[:, 0] if scalar else out


def _phi_pair(z: float, n: int) -> tuple[float, float]:
    # scalar recurrence returning (phi_n(z), phi_{n-1}(z)); n >= 1
    p0 = math.pi ** (-0.25) * math.exp(-0.5 * z * z)
    p1 = math.sqrt(2.0) * z * p0
    if n == 1:
        return p1, p0
    for k in range(1, n):
        p0, p1 = p1, (math.sqrt(2.0 / (k + 1)) * z * p1
                      - math.sqrt(k / (k + 1.0)) * p0)
    return p1, p0


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite rule of a given order with M+1 nodes.

    nodes            strictly increasing, symmetric about 0
    weights          integrate f(x) * exp(-x**2)
    modified_weights integrate products of Hermite functions directly
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray
    modified_weights: np.ndarray

    def write_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(f"# order={self.order}\n")
            fh.write("m,xi,w,omega\n")
            for m, (xi, w, om) in enumerate(
                    zip(self.nodes, self.weights, self.modified_weights)):
                fh.write(f"{m},{xi:.17g},{w:.17g},{om:.17g}\n")


@lru_cache(maxsize=128)
def gauss_hermite_rule(order: int) -> QuadratureRule:
    """Gauss-Hermite quadrature of the given order (order+1 nodes).

    Nodes are found by Newton iteration on phi_{order+1}, walking in from the
    largest root with asymptotic initial guesses; +-symmetry halves the work.
    Weights come from the derivative identity
    phi'_{n}(xi) = sqrt(2n) phi_{n-1}(xi) at a root, giving
    omega = 2 / phi'_n(xi)**2 directly, with no overflow-prone factorials.
    """
    if order < 0:
        raise ValueError(f"order must be nonnegative, got {order}")
    n = order + 1
    half = n // 2
    roots: list[float] = []  # positive roots, largest first
    for i in range(half):
        if i == 0:
            a = 2.0 * n + 1.0
            z = math.sqrt(a) - 1.85575 * a ** (-1.0 / 6.0)
        elif i == 1:
            z = roots[0] - 1.14 * n ** 0.426 / roots[0]
        elif i == 2:
            z = 1.86 * roots[1] - 0.86 * roots[0]
        elif i == 3:
            z = 1.91 * roots[2] - 0.91 * roots[1]
        else:
            z = 2.0 * roots[i - 1] - roots[i - 2]
        for _ in range(_NEWTON_MAXIT):
            f, fm1 = _phi_pair(z, n)
            slope = math.sqrt(2.0 * n) * fm1 - z * f
            dz = f / slope
            z -= dz
            if abs(f) <= _NEWTON_FTOL or abs(dz) <= 1e-15 * max(1.0, abs(z)):
                break
        else:
            raise RuntimeError(
                f"Gauss-Hermite node {i} of order {order} failed to converge "
                f"within {_NEWTON_MAXIT} Newton iterations")
        roots.append(z)
    nodes = np.empty(n, dtype=np.float64)
    nodes[:half] = -np.asarray(roots)          # ascending negatives
    if n % 2 == 1:
        nodes[half] = 0.0                      # center root is exact
    nodes[n - half:] = np.asarray(roots)[::-1]
    # derivative of phi_n at every node in one vectorized pass
    table = eval_hermite_functions(nodes, n)
    dphi = math.sqrt(2.0 * n) * table[n - 1] - nodes * table[n]
    omega = 2.0 / (dphi * dphi)
    weights = omega * np.exp(-nodes * nodes)
    for arr in (nodes, weights, omega):
        arr.setflags(write=False)
    return QuadratureRule(order, nodes, weights, omega)


@dataclass(frozen=True)
class SupportCheck:
    """Result of the basis support test S*L >= sqrt(2(K+1)) + 1."""

    ok: bool
    product: float      # S * L
    required: float     # sqrt(2 (K+1)) + 1
    margin: float       # product - required, negative when violated

    def message(self) -> str:
        if self.ok:
            return (f"support ok: S*L = {self.product:.4g} >= "
                    f"{self.required:.4g}")
        return (f"support condition violated: S*L = {self.product:.4g} < "
                f"sqrt(2(K+1)) + 1 = {self.required:.4g} "
                f"(deficit {-self.margin:.4g}); the truncated basis is not "
                f"resolved on [-L, L] and interpolation degrades")


def check_support_condition(scaling: float, halfwidth: float,
                            max_order: int) -> SupportCheck:
    """Check that the scaled box [-L, L] covers the span of the basis.

    The highest retained basis function of order K lives essentially inside
    |x| <= sqrt(2(K+1)) + 1; the box must contain that interval for the
    polynomial surrogate of the potential to see the whole wave packet.
    """
    if scaling <= 0 or halfwidth <= 0:
        raise ValueError("scaling and halfwidth must be positive")
    if max_order < 0:
        raise ValueError(f"max_order must be nonnegative, got {max_order}")
    required = math.sqrt(2.0 * (max_order + 1)) + 1.0
    product = scaling * halfwidth
    return SupportCheck(product >= required, product, required,
                        product - required)
