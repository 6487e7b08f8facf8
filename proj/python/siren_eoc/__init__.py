"""Sinusoidal networks with edge-of-chaos initialization."""

from ._core import (
    SirenNet,
    __version__,
    c_b_on_curve,
    fit_1d,
    lambert_w0,
    ntk,
    output_spectrum,
    psnr,
    scheme_params,
    sigma1_cb,
    sigma1_cw,
    sigma_a_closed_form,
    sigma_a_fixed_point_iterate,
    sigma_g,
    target_f1d,
    variance_profile,
)

__all__ = [
    "SirenNet",
    "__version__",
    "c_b_on_curve",
    "fit_1d",
    "lambert_w0",
    "ntk",
    "output_spectrum",
    "psnr",
    "scheme_params",
    "sigma1_cb",
    "sigma1_cw",
    "sigma_a_closed_form",
    "sigma_a_fixed_point_iterate",
    "sigma_g",
    "target_f1d",
    "variance_profile",
]
