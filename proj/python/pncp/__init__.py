"""AR(1)-plus-noise model fitting with partially noncentered EM, Gibbs and VB."""

from ._core import (
    FitReport,
    NumericalError,
    ModelParams,
    algorithm1,
    algorithm2,
    algorithm3,
    a_hat_asymptotic,
    bounds,
    e_step,
    gibbs_chain,
    lag1_autocorr,
    log_likelihood,
    rate_location,
    scale_opt,
    simulate,
    vb_fit,
    w_opt_location,
)

__all__ = [
    "FitReport",
    "NumericalError",
    "ModelParams",
    "algorithm1",
    "algorithm2",
    "algorithm3",
    "a_hat_asymptotic",
    "bounds",
    "e_step",
    "gibbs_chain",
    "lag1_autocorr",
    "log_likelihood",
    "rate_location",
    "scale_opt",
    "simulate",
    "vb_fit",
    "w_opt_location",
]
