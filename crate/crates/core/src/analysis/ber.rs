use super::normal::q_function;
use crate::{Error, Result};

/// Approximate Gray-coded M-QAM bit error rate at per-bit SNR `snr`:
///
/// `4(r-1)/(r k) Q(sqrt(g)) + 4(r-2)/(r k) Q(3 sqrt(g))`, with `r = sqrt(M)`,
/// `k = log2 M` and `g = 3 k snr / (M - 1)`.
///
/// Non-square orders use the real square root; the expression is then only an
/// approximation.
pub fn theoretical_ber(order: usize, snr: f64) -> Result<f64> {
    if order < 4 || !order.is_power_of_two() {
        return Err(Error::Domain(format!(
            "QAM order must be a power of two >= 4, got {order}"
        )));
    }
    if snr.is_nan() || snr < 0.0 {
        return Err(Error::Domain(format!("SNR must be >= 0, got {snr}")));
    }
    let m = order as f64;
    let k = m.log2();
    let r = m.sqrt();
    let arg = (3.0 * k / (m - 1.0) * snr).sqrt();
    Ok(4.0 * (r - 1.0) / (r * k) * q_function(arg) + 4.0 * (r - 2.0) / (r * k) * q_function(3.0 * arg))
}
