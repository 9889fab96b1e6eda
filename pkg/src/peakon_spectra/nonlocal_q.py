"""The compact nonlocal operator Q, its integral kernels, and identities.

Q(v) = (b-3) [ phi * ((phi^2)' v) - 2 phi' * (phi^2 v) ]

is the nonlocal part of the linearized operator about the peakon.  Both
convolution terms are integral operators with explicit kernels

    K1(xi, eta) = -2 sgn(eta) exp(-|xi-eta| - 2|eta|)
    K2(xi, eta) =   -sgn(xi-eta) exp(-|xi-eta| - 2|eta|)

whose squares integrate over the plane to 2 and 1/2 respectively, making Q
Hilbert-Schmidt and hence compact.  The normalization of K2 is pinned by its
defining convolution phi' * (phi^2 v); the square integral 1/2 is the
consistency check this module enforces.

Application of Q uses the fast Helmholtz path of :mod:`peakon_spectra.grids`;
the kernel-quadrature path (dense matrix) is honest but O(n^2) and is used
for operator assembly and as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from .errors import QuadratureError
from .grids import (
    Grid,
    GridFunction,
    convolve_phi,
    convolve_phi_prime,
    gradient_values,
    peakon,
    value_at_origin,
)

__all__ = [
    "KernelTag",
    "QuadratureError",
    "kernel_eval",
    "hs_norm_squared",
    "apply_q",
    "q_matrix",
    "trapezoid_weights",
    "IdentityReport",
    "verify_convolution_identities",
]


@dataclass(frozen=True)
class KernelTag:
    """Which integral kernel: 'k1', 'k2', or 'q' (the latter carries b)."""

    variant: str
    b: Optional[float] = None

    def __post_init__(self) -> None:
        if self.variant not in ("k1", "k2", "q"):
            raise ValueError(f"unknown kernel variant {self.variant!r}")
        if self.variant == "q":
            if self.b is None or not np.isfinite(self.b):
                raise ValueError("q kernel requires a finite b")
        elif self.b is not None:
            raise ValueError(f"kernel {self.variant!r} takes no parameter b")

    @classmethod
    def k1(cls) -> "KernelTag":
        return cls("k1")

    @classmethod
    def k2(cls) -> "KernelTag":
        return cls("k2")

    @classmethod
    def q(cls, b: float) -> "KernelTag":
        return cls("q", float(b))


def _k1(xi, eta):
    return -2.0 * np.sign(eta) * np.exp(-np.abs(xi - eta) - 2.0 * np.abs(eta))


def _k2(xi, eta):
    # np.sign(0) = 0 averages the jump across the diagonal, which is the
    # natural trapezoid treatment when the kernel is used in quadrature.
    return -np.sign(xi - eta) * np.exp(-np.abs(xi - eta) - 2.0 * np.abs(eta))


def _kernel_values(tag: KernelTag, xi, eta):
    if tag.variant == "k1":
        return _k1(xi, eta)
    if tag.variant == "k2":
        return _k2(xi, eta)
    return (tag.b - 3.0) * (_k1(xi, eta) - 2.0 * _k2(xi, eta))


def kernel_eval(tag: KernelTag, xi: float, eta: float) -> float:
    """Point evaluation of a kernel, rejecting its jump lines.

    K1 jumps across eta = 0 and the q kernel inherits that line; K2 (and q)
    jump across xi = eta.  Values exactly on a jump line are ambiguous and
    are rejected; grid-based callers never hit them because the grid is
    staggered off the origin.
    """
    if tag.variant in ("k1", "q") and eta == 0.0:
        raise ValueError("kernel is discontinuous across eta = 0")
    if tag.variant in ("k2", "q") and xi == eta:
        raise ValueError("kernel is discontinuous across xi = eta")
    return float(_kernel_values(tag, float(xi), float(eta)))


def hs_norm_squared(
    tag: KernelTag,
    tol: float = 1e-9,
    truncation: float = 20.0,
    limit: int = 200,
) -> tuple[float, float]:
    """Adaptive quadrature of the squared kernel over the plane.

    Returns (value, error_estimate).  The integrand decays at least like
    exp(-2|xi-eta| - 4|eta|), so truncating at |xi|, |eta| <= 20 perturbs
    the value below 1e-15.  The inner integral is split at the diagonal and
    the outer one at eta = 0 so every piece is smooth.

    Raises QuadratureError if the combined error estimate exceeds tol.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    T = float(truncation)
    inner_abs = tol / (16.0 * T)

    inner_err = 0.0

    def inner(eta: float) -> float:
        nonlocal inner_err
        f = lambda x: _kernel_values(tag, x, eta) ** 2
        lo, e1 = integrate.quad(f, -T, eta, limit=limit, epsabs=inner_abs)
        hi, e2 = integrate.quad(f, eta, T, limit=limit, epsabs=inner_abs)
        inner_err = max(inner_err, e1 + e2)
        return lo + hi

    neg, en = integrate.quad(inner, -T, 0.0, limit=limit, epsabs=tol / 4.0)
    pos, ep = integrate.quad(inner, 0.0, T, limit=limit, epsabs=tol / 4.0)
    value = neg + pos
    err = en + ep + 2.0 * T * inner_err
    if err > max(tol, 64.0 * np.finfo(float).eps * max(1.0, abs(value))):
        raise QuadratureError(
            f"squared-kernel integral error estimate {err:.2e} exceeds tol {tol:.2e}"
        )
    return float(value), float(err)


def apply_q(v: GridFunction, b: float) -> GridFunction:
    """Q(v) via the Green's-function convolutions (fast path)."""
    phi = peakon(v.grid.xi)
    dphi_sq = -2.0 * np.sign(v.grid.xi) * np.exp(-2.0 * np.abs(v.grid.xi))  # (phi^2)'
    term1 = convolve_phi(GridFunction(v.grid, dphi_sq * v.values))
    term2 = convolve_phi_prime(GridFunction(v.grid, phi**2 * v.values))
    return GridFunction(v.grid, (b - 3.0) * (term1.values - 2.0 * term2.values))


def trapezoid_weights(grid: Grid) -> np.ndarray:
    w = np.full(grid.n, grid.h)
    w[0] = 0.5 * grid.h
    w[-1] = 0.5 * grid.h
    return w


def q_matrix(grid: Grid, b: float) -> np.ndarray:
    """Dense kernel-quadrature discretization of Q (trapezoid weights).

    The diagonal uses the jump-average value of the kernel (sign 0 at the
    jump), which keeps the row quadrature second order across xi = eta.
    """
    xi = grid.xi
    K = _kernel_values(KernelTag.q(b), xi[:, None], xi[None, :])
    return K * trapezoid_weights(grid)[None, :]


@dataclass(frozen=True)
class IdentityReport:
    """Max pointwise residuals of the two peakon convolution identities."""

    residual_first: float
    residual_second: float

    def max_residual(self) -> float:
        return max(self.residual_first, self.residual_second)


def verify_convolution_identities(v: GridFunction, tol: float | None = None) -> IdentityReport:
    """Check the two convolution identities behind the simplification of Q.

    First:   phi * (phi'^2 v_xi)  =  phi' * (phi^2 v) - phi * ((phi^2)' v)
    Second:  phi' * (phi phi' v_xi)
                 =  (1/2) phi * ((phi^2)' v) - 2 phi' * (phi^2 v)
                    - 2 phi' (phi v - v(0))

    Both sides are evaluated on the grid (v_xi by centered differences,
    v(0) by linear interpolation across the origin) and the maximum
    pointwise residual of each identity is reported.  If tol is given, a
    ValueError is raised when either residual exceeds it.
    """
    grid = v.grid
    xi = grid.xi
    phi = peakon(xi)
    dphi = -np.sign(xi) * phi
    v_xi = gradient_values(v.values, grid.h)

    phi2v = GridFunction(grid, phi**2 * v.values)
    dphi2_v = GridFunction(grid, 2.0 * phi * dphi * v.values)

    lhs1 = convolve_phi(GridFunction(grid, dphi**2 * v_xi)).values
    rhs1 = convolve_phi_prime(phi2v).values - convolve_phi(dphi2_v).values
    res1 = float(np.max(np.abs(lhs1 - rhs1)))

    v0 = value_at_origin(v)
    lhs2 = convolve_phi_prime(GridFunction(grid, phi * dphi * v_xi)).values
    rhs2 = (
        0.5 * convolve_phi(dphi2_v).values
        - 2.0 * convolve_phi_prime(phi2v).values
        - 2.0 * dphi * (phi * v.values - v0)
    )
    res2 = float(np.max(np.abs(lhs2 - rhs2)))

    report = IdentityReport(res1, res2)
    if tol is not None and report.max_residual() > tol:
        raise ValueError(
            f"convolution identity residuals {res1:.3e}, {res2:.3e} exceed tol {tol:.1e}"
        )
    return report
