//! Deterministic Monte Carlo BER engine.
//!
//! Every frame draws from its own counter-keyed stream, and frames are
//! scheduled in fixed batches, so results do not depend on the worker count.

mod energy;
mod rng;
mod sweep;

pub use energy::{energy_per_bit, noise_sigma_for};
pub use rng::{substream, CALIBRATION_POINT};
pub use sweep::{
    run_point, run_sweep, BerCurve, BerPoint, CurveMeta, Simulator, SweepConfig, BATCH_FRAMES,
    CALIBRATION_FRAMES,
};
