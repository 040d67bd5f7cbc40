//! Link-level simulation and analytical performance toolkit for non-DC-biased
//! optical OFDM (NDC-OFDM) and the DCO-OFDM / ACO-OFDM baselines carried over
//! intensity-modulated optical MIMO channels.
//!
//! The crate is organised the way a transmission chain is:
//!
//! * [`modem`]: QAM mapping, Hermitian OFDM framing, unitary transforms and
//!   the three unipolar modulators plus the optical spatial modulation (OSM)
//!   LED assignment.
//! * [`channel`]: Lambertian line-of-sight gains, preset MIMO matrices and
//!   real AWGN propagation.
//! * [`receiver`]: zero-forcing equalisation, active-LED detection, bipolar
//!   reconstruction and bit recovery.
//! * [`analysis`]: the closed-form BER pipeline (detection densities,
//!   truncated-Gaussian moments, Bussgang factors, effective SNR) and the
//!   spectral-efficiency calculators.
//! * [`montecarlo`]: the deterministic, frame-parallel BER sweep engine.
//!
//! With the default `parallel` feature, frame batches and analytic grids run
//! on a rayon pool; without it every [`Executor`] is sequential. Results are
//! identical either way.

pub mod analysis;
pub mod channel;
mod error;
mod exec;
pub mod modem;
pub mod montecarlo;
pub mod receiver;

pub use error::{Error, Result};
pub use exec::Executor;
pub use modem::Scheme;
