"""Numerical laboratory for the spectral stability of b-Novikov peakons."""

from .grids import (
    Grid,
    GridFunction,
    default_grid,
    peakon,
    peakon_derivative,
    peakon_on,
    peakon_derivative_on,
    convolve_phi,
    convolve_phi_prime,
    helmholtz_solve,
    l2_norm,
    h1_norm,
    sup_norm,
    inner_product,
    value_at_origin,
)
from .nonlocal_q import (
    KernelTag,
    kernel_eval,
    hs_norm_squared,
    apply_q,
    q_matrix,
    verify_convolution_identities,
)

__version__ = "0.1.0"
