//! INAR(1) count time series with Poisson, double-Poisson and
//! generalized-Poisson innovations.
//!
//! The crate covers the full workflow for first-order integer autoregressive
//! models built on binomial thinning: innovation distributions and their
//! moments, exact transition kernels, simulation, Yule-Walker / conditional
//! least squares / conditional maximum likelihood estimation, asymptotic
//! covariances for the CLS estimators, dispersion and likelihood-ratio tests,
//! and a Monte Carlo harness for sampling-distribution studies.

pub mod error;
pub mod estimation;
pub mod experiments;
pub mod inference;
pub mod innovations;
pub mod optimize;
pub mod process;
pub mod special;

pub use error::{Error, Result};
pub use estimation::{
    asymptotic_cov_dp, asymptotic_cov_gp, cls_alpha_mu, cls_fit_dp, cls_fit_gp, cls_fit_poisson,
    cml_fit, cml_fit_with, conditional_loglik, yw_alpha, yw_fit_dp, yw_fit_gp, yw_fit_poisson,
    AsymptoticCov, ClsEstimate, CmlInit, CmlOptions, FitResult, Method,
};
pub use experiments::{
    replicate_seed, run_cov_check, run_mc_study, CovCheck, McCell, McConfig, McResult,
};
pub use inference::{
    equidispersion_test, equidispersion_test_from_stats, information_criteria, lr_test,
    sample_stats, Direction, SampleStats, TestReport,
};
pub use innovations::{
    dp_pmf, gp_pmf, DoublePoissonParams, Family, GenPoissonParams, InnovationSampler,
    InnovationSpec, NormalizationMode, PoissonParams,
};
pub use process::{
    binomial_thinning, conditional_moments, dispersion_table, simulate, simulate_with_sampler,
    stationary_moments, stationary_third_moment, transition_log_prob, transition_prob,
    CountSeries, DispersionTable, Inar1Model, StationaryMoments,
};
