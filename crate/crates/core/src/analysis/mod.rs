//! Closed-form NDC performance model and spectral-efficiency bookkeeping.

mod ber;
mod bussgang;
mod detection;
mod normal;
mod quadrature;
mod spectral;

pub use ber::theoretical_ber;
pub use bussgang::{
    analytic_ber, analytic_curve, averaged_variances, bussgang_analysis, bussgang_factors,
    correct_detection_prob, effective_snr, signal_averages, weighted_snr, AnalyticPoint,
    BussgangModel, BussgangResult, BussgangTerms, EffectiveSnr, SignalAverages, SignalStats,
};
pub use detection::{
    conditional_moments, conditional_moments_quadrature, correct_probability,
    detection_density_correct, detection_density_wrong, ConditionalMoments, ZfInverse,
    UNDERFLOW,
};
pub use normal::{cdf as normal_cdf, mills, pdf as normal_pdf, q_function};
pub use quadrature::{integrate, integrate_scalar, Tolerance};
pub use spectral::{matched_constellations, se_table, spectral_efficiency, SeMode, SeRow};
