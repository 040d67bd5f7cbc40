use crate::modem::SmFrame;
use crate::{Error, Result};

/// `Eb = N_t * (emitted energy) / (information bits)` over a set of frames.
///
/// For NDC this inverts `sigma_s^2 = Eb log2(M) (N-2) / (2 N N_t)` exactly;
/// for the OSM schemes the emitted energy includes any DC bias and the bit
/// count includes index bits.
pub fn energy_per_bit(frames: &[SmFrame], bits_per_frame: usize, n_t: usize) -> Result<f64> {
    if frames.is_empty() {
        return Err(Error::InputSize {
            expected: 1,
            actual: 0,
        });
    }
    if bits_per_frame == 0 {
        return Err(Error::Domain("frames carry no bits".into()));
    }
    let energy: f64 = frames.iter().map(SmFrame::energy).sum();
    Ok(n_t as f64 * energy / (frames.len() as f64 * bits_per_frame as f64))
}

/// `sigma_n = sqrt(N0 / 2)` with `N0 = Eb / 10^(ebn0/10)`. `+inf` dB gives 0.
pub fn noise_sigma_for(ebn0_db: f64, eb: f64) -> Result<f64> {
    if !(eb > 0.0) || !eb.is_finite() {
        return Err(Error::Domain(format!("Eb must be positive, got {eb}")));
    }
    if ebn0_db.is_nan() {
        return Err(Error::Domain("Eb/N0 is NaN".into()));
    }
    if ebn0_db == f64::INFINITY {
        return Ok(0.0);
    }
    let n0 = eb / 10f64.powf(ebn0_db / 10.0);
    Ok((n0 / 2.0).sqrt())
}
