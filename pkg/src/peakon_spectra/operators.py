"""Dense discretizations of the linearized peakon operators and their spectra.

Three operators act on perturbations in the co-moving frame:

    L0   = (1 - phi^2) d/dxi + (4-b) phi phi'
    L    = L0 + Q
    L*   = (phi^2 - 1) d/dxi + (6-b) phi phi' + 2(b-3)[phi phi' (phi * .)
                                                       + phi^2 (phi' * .)]

The advection coefficient 1 - phi^2 vanishes at the peak and the transport
speed -(1 - phi^2) is nonpositive, so the default derivative stencil is the
right-biased (forward) two-point upwind stencil, flipped at the row left of
the peak so no stencil reaches across xi = 0.  Two alternatives are provided
for spectrum studies, where upwind diffusion floods the left half plane:

* ``centered``: classical centered differences with one-sided closures at
  the ends and on either side of the peak.
* ``skew``: the split form  c d/dxi = (c D + D c)/2 - c'/2  with D the
  exactly antisymmetric centered matrix and c' analytic.  The symmetric part
  of the assembled L0 is then exactly diag((5-b) phi phi'), so the discrete
  real parts obey the |5-b| band by construction; this is the scheme used
  for eigenvalue studies.

Exact spectral-band predictions (closure/point/residual bands and the
two-dimensional invariant-subspace eigenvalues) are encoded alongside so a
computed spectrum can be audited against them.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from .grids import Grid, GridFunction, peakon
from .nonlocal_q import q_matrix, trapezoid_weights

__all__ = [
    "SCHEMES",
    "OperatorMatrix",
    "BandPrediction",
    "SpectrumReport",
    "derivative_matrix",
    "assemble_L0",
    "assemble_L",
    "assemble_L_adjoint",
    "compute_spectrum",
    "band_prediction",
    "subspace_eigenvalues",
    "project_to_span",
    "subspace_restriction_eigenvalues",
]

SCHEMES = ("upwind", "centered", "skew")

#: largest matrix size accepted by the dense eigensolver
DENSE_EIGEN_CAP = 4096


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense discretization of L0, L, or L* on a grid."""

    grid: Grid
    entries: np.ndarray
    tag: str  # 'L0' | 'L' | 'Ladj'
    b: float
    scheme: str

    def __post_init__(self) -> None:
        if self.tag not in ("L0", "L", "Ladj"):
            raise ValueError(f"unknown operator tag {self.tag!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.entries.shape != (self.grid.n, self.grid.n):
            raise ValueError("entries do not match the grid size")
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("operator entries must be finite")

    def apply(self, v: GridFunction) -> GridFunction:
        if v.grid != self.grid:
            raise ValueError("grid mismatch")
        return GridFunction(self.grid, self.entries @ v.values)


def _advection_speed(xi: np.ndarray) -> np.ndarray:
    return 1.0 - peakon(xi) ** 2


def _phi_phi_prime(xi: np.ndarray) -> np.ndarray:
    return -np.sign(xi) * np.exp(-2.0 * np.abs(xi))


def derivative_matrix(grid: Grid, scheme: str = "upwind", direction: int = +1) -> np.ndarray:
    """First-derivative matrix whose stencils never cross the peak.

    direction +1 means the transport carries information from the right
    (speed <= 0 everywhere, as for L0); -1 mirrors the biasing for the
    adjoint, whose transport speed is >= 0.  ``centered`` ignores the
    direction except in its one-sided closures; ``skew`` is the exactly
    antisymmetric centered matrix with zero-decay ghost values at the outer
    ends (callers add the split-form correction).
    """
    n, h = grid.n, grid.h
    c = grid.center
    D = np.zeros((n, n))
    if scheme == "upwind":
        if direction not in (+1, -1):
            raise ValueError("direction must be +1 or -1")
        if direction == +1:
            idx = np.arange(n - 1)
            D[idx, idx] = -1.0 / h
            D[idx, idx + 1] = 1.0 / h
            for j in (c - 1, n - 1):  # keep the stencil left of the peak / in range
                D[j, :] = 0.0
                D[j, j] = 1.0 / h
                D[j, j - 1] = -1.0 / h
        else:
            idx = np.arange(1, n)
            D[idx, idx] = 1.0 / h
            D[idx, idx - 1] = -1.0 / h
            for j in (c, 0):  # keep the stencil right of the peak / in range
                D[j, :] = 0.0
                D[j, j] = -1.0 / h
                D[j, j + 1] = 1.0 / h
    elif scheme == "centered":
        idx = np.arange(1, n - 1)
        D[idx, idx - 1] = -0.5 / h
        D[idx, idx + 1] = 0.5 / h
        D[0, 0], D[0, 1] = -1.0 / h, 1.0 / h
        D[n - 1, n - 1], D[n - 1, n - 2] = 1.0 / h, -1.0 / h
        D[c - 1, :] = 0.0
        D[c - 1, c - 1], D[c - 1, c - 2] = 1.0 / h, -1.0 / h
        D[c, :] = 0.0
        D[c, c], D[c, c + 1] = -1.0 / h, 1.0 / h
    elif scheme == "skew":
        idx = np.arange(1, n - 1)
        D[idx, idx - 1] = -0.5 / h
        D[idx, idx + 1] = 0.5 / h
        D[0, 1] = 0.5 / h
        D[n - 1, n - 2] = -0.5 / h
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return D


def _advection_matrix(grid: Grid, scheme: str, direction: int) -> np.ndarray:
    """Matrix for  sigma * c(xi) d/dxi  with sigma = direction, c = 1-phi^2."""
    cvals = _advection_speed(grid.xi)
    if scheme == "skew":
        D = derivative_matrix(grid, "skew")
        B = 0.5 * (cvals[:, None] * D + D * cvals[None, :])
        # split form: c v' = (cD + Dc)/2 v - (c'/2) v, with c' analytic
        dc = 2.0 * np.sign(grid.xi) * np.exp(-2.0 * np.abs(grid.xi))
        A = B - np.diag(0.5 * dc)
        return direction * A
    D = derivative_matrix(grid, scheme, direction=direction)
    return direction * (cvals[:, None] * D)


def assemble_L0(grid: Grid, b: float, scheme: str = "upwind") -> OperatorMatrix:
    """L0 = (1 - phi^2) d/dxi + (4-b) phi phi'."""
    A = _advection_matrix(grid, scheme, direction=+1)
    A = A + np.diag((4.0 - b) * _phi_phi_prime(grid.xi))
    return OperatorMatrix(grid, A, "L0", float(b), scheme)


def assemble_L(grid: Grid, b: float, scheme: str = "upwind") -> OperatorMatrix:
    """L = L0 + Q, with Q as an honest kernel-quadrature matrix."""
    A = assemble_L0(grid, b, scheme).entries + q_matrix(grid, b)
    return OperatorMatrix(grid, A, "L", float(b), scheme)


def assemble_L_adjoint(grid: Grid, b: float, scheme: str = "upwind") -> OperatorMatrix:
    """L* = (phi^2-1) d/dxi + (6-b) phi phi' + nonlocal rank-dense part.

    The nonlocal part is  2(b-3) [ phi phi' (phi * v) + phi^2 (phi' * v) ],
    assembled as dense kernel blocks with trapezoid weights.  Its kernel is
    exactly the transpose of the Q kernel, so with the ``skew`` scheme the
    assembled matrix is the exact transpose of L up to the end-row weights.
    """
    xi = grid.xi
    phi = peakon(xi)
    pp = _phi_phi_prime(xi)
    A = _advection_matrix(grid, scheme, direction=-1)
    A = A + np.diag((6.0 - b) * pp)

    w = trapezoid_weights(grid)
    diff = xi[:, None] - xi[None, :]
    conv_phi = np.exp(-np.abs(diff)) * w[None, :]
    conv_phi_prime = -np.sign(diff) * np.exp(-np.abs(diff)) * w[None, :]
    A = A + 2.0 * (b - 3.0) * (pp[:, None] * conv_phi + (phi**2)[:, None] * conv_phi_prime)
    return OperatorMatrix(grid, A, "Ladj", float(b), scheme)


def apply_derivative(values: np.ndarray, grid: Grid, scheme: str = "centered",
                     direction: int = +1) -> np.ndarray:
    """Matrix-free application of the derivative stencil of the scheme."""
    n, h, c = grid.n, grid.h, grid.center
    v = values
    dv = np.empty_like(v)
    if scheme == "upwind":
        if direction == +1:
            dv[:-1] = (v[1:] - v[:-1]) / h
            dv[c - 1] = (v[c - 1] - v[c - 2]) / h
            dv[-1] = (v[-1] - v[-2]) / h
        else:
            dv[1:] = (v[1:] - v[:-1]) / h
            dv[c] = (v[c + 1] - v[c]) / h
            dv[0] = (v[1] - v[0]) / h
    elif scheme == "centered":
        dv[1:-1] = (v[2:] - v[:-2]) / (2 * h)
        dv[0] = (v[1] - v[0]) / h
        dv[-1] = (v[-1] - v[-2]) / h
        dv[c - 1] = (v[c - 1] - v[c - 2]) / h
        dv[c] = (v[c + 1] - v[c]) / h
    else:
        raise ValueError(f"matrix-free application supports 'upwind' and 'centered', not {scheme!r}")
    return dv


def apply_L(v: GridFunction, b: float, scheme: str = "centered") -> GridFunction:
    """Matrix-free L v: stencil advection + potential + fast-path Q.

    Unlike :func:`assemble_L`, the nonlocal part goes through the Helmholtz
    convolutions, so a single application costs O(n).  Useful for projection
    tests at resolutions where a dense matrix would not fit.
    """
    from .nonlocal_q import apply_q

    xi = v.grid.xi
    adv = _advection_speed(xi) * apply_derivative(v.values, v.grid, scheme, +1)
    pot = (4.0 - b) * _phi_phi_prime(xi) * v.values
    return GridFunction(v.grid, adv + pot + apply_q(v, b).values)


def subspace_eigenvalues(b: float) -> tuple[complex, complex]:
    """Eigenvalues of L restricted to span{phi, phi'}: +/- sqrt((b-2)(4-b)).

    Real pair for 2 < b < 4, imaginary pair +/- i sqrt((b-2)(b-4)) for b < 2
    or b > 4, and a double zero at b in {2, 4}.
    """
    lam = cmath.sqrt(complex((b - 2.0) * (4.0 - b)))
    return (lam, -lam)


@dataclass(frozen=True)
class BandPrediction:
    """Exact spectral-band geometry for given (b, function space).

    Bands are half-widths of vertical strips: the closure band is
    |Re lambda| <= closure, the point band is 0 < |Re lambda| < point, the
    residual band is 0 < |Re lambda| < residual.  None means the band is
    empty (point/residual) or not predicted (closure on H1tilde, where only
    the point/residual bands are known for general b).
    """

    b: float
    space: str  # 'L2' | 'H1tilde'
    closure: Optional[float]
    point: Optional[float]
    residual: Optional[float]
    embedded_eigenvalues: tuple[complex, complex]

    def contains(self, lam: complex, tol: float = 0.0) -> bool:
        if self.closure is None:
            raise ValueError(f"no closure band is predicted on {self.space}")
        return abs(lam.real) <= self.closure + tol


def band_prediction(b: float, space: str = "L2") -> BandPrediction:
    """Predicted spectral bands of L for parameter b on L2 or H1tilde.

    On L2 the full spectrum is the strip |Re lambda| <= |5-b|, with a point
    band of half-width 5-b for b < 5 and a residual band of half-width b-5
    for b > 5.  On the subspace of H1 functions vanishing at the origin only
    the point band (3-b, for b < 3) and residual band (b-3, for b > 3) are
    predicted.  The invariant-subspace pair is reported in both cases; for
    b <= 2 or b >= 4 it is purely imaginary and embedded in the continuous
    spectrum, while for 2 < b < 4 it is a real pair inside the point band
    (its classification there is not asserted).
    """
    b = float(b)
    emb = subspace_eigenvalues(b)
    if space == "L2":
        return BandPrediction(
            b=b,
            space=space,
            closure=abs(5.0 - b),
            point=(5.0 - b) if b < 5.0 else None,
            residual=(b - 5.0) if b > 5.0 else None,
            embedded_eigenvalues=emb,
        )
    if space == "H1tilde":
        return BandPrediction(
            b=b,
            space=space,
            closure=None,
            point=(3.0 - b) if b < 3.0 else None,
            residual=(b - 3.0) if b > 3.0 else None,
            embedded_eigenvalues=emb,
        )
    raise ValueError(f"unknown space {space!r} (expected 'L2' or 'H1tilde')")


@dataclass(frozen=True)
class SpectrumReport:
    """All eigenvalues of a dense operator matrix plus a band audit."""

    eigenvalues: np.ndarray
    b: float
    tag: str
    n: int
    half_width: float
    scheme: str
    tolerance: float
    prediction: BandPrediction = field(repr=False)

    @property
    def max_real_part(self) -> float:
        return float(self.eigenvalues.real.max())

    @property
    def band_violations(self) -> np.ndarray:
        r = self.prediction.closure
        ev = self.eigenvalues
        return ev[np.abs(ev.real) > r + self.tolerance]

    @property
    def band_excess(self) -> float:
        """max(0, largest |Re| overshoot of the closure band)."""
        return float(max(0.0, np.max(np.abs(self.eigenvalues.real)) - self.prediction.closure))

    def real_part_symmetry_defect(self) -> float:
        """Deviation of the multiset of real parts from symmetry about 0."""
        re = np.sort(self.eigenvalues.real)
        return float(np.max(np.abs(re + re[::-1])))


def compute_spectrum(
    op: OperatorMatrix,
    tolerance: float = 0.0,
    max_n: int = DENSE_EIGEN_CAP,
) -> SpectrumReport:
    """Dense eigensolve with a band audit against the L2 prediction.

    Eigenvalues are returned sorted by real part.  Eigensolver failures
    (scipy LinAlgError) propagate to the caller.
    """
    if op.grid.n > max_n:
        raise ValueError(
            f"n = {op.grid.n} exceeds the dense eigensolve cap {max_n}; "
            "raise max_n explicitly if this is intended"
        )
    ev = linalg.eigvals(op.entries, check_finite=False)
    ev = ev[np.argsort(ev.real)]
    return SpectrumReport(
        eigenvalues=ev,
        b=op.b,
        tag=op.tag,
        n=op.grid.n,
        half_width=op.grid.half_width,
        scheme=op.scheme,
        tolerance=tolerance,
        prediction=band_prediction(op.b, "L2"),
    )


def project_to_span(op: OperatorMatrix, basis: list[GridFunction]) -> np.ndarray:
    """Galerkin restriction of the operator to the span of the basis.

    Returns the matrix of the restricted operator in the given basis,
    computed with trapezoid inner products:  G^{-1} P  with
    G_ij = <b_i, b_j>, P_ij = <b_i, L b_j>.
    """
    w = trapezoid_weights(op.grid)
    V = np.column_stack([f.values for f in basis])
    G = V.conj().T @ (w[:, None] * V)
    P = V.conj().T @ (w[:, None] * (op.entries @ V))
    return np.linalg.solve(G, P)


def subspace_restriction_eigenvalues(op: OperatorMatrix) -> np.ndarray:
    """Eigenvalues of L restricted to the sampled {phi, phi'} span."""
    from .grids import peakon_derivative_on, peakon_on

    M = project_to_span(op, [peakon_on(op.grid), peakon_derivative_on(op.grid)])
    return np.linalg.eigvals(M)


def subspace_restriction_eigenvalues_fast(
    grid: Grid, b: float, scheme: str = "centered"
) -> np.ndarray:
    """Matrix-free variant of the {phi, phi'} restriction eigenvalues.

    The degenerate cases b in {2, 4} have a nilpotent restriction whose
    numerical eigenvalues scale like the square root of the discretization
    error, so this projection is best run on a fine grid; the matrix-free
    application keeps that cheap.
    """
    from .grids import peakon_derivative_on, peakon_on

    basis = [peakon_on(grid), peakon_derivative_on(grid)]
    w = trapezoid_weights(grid)
    V = np.column_stack([f.values for f in basis])
    LV = np.column_stack([apply_L(f, b, scheme).values for f in basis])
    G = V.conj().T @ (w[:, None] * V)
    P = V.conj().T @ (w[:, None] * LV)
    return np.linalg.eigvals(np.linalg.solve(G, P))
