//! Spectral efficiency and SE-matched constellation sizes.

use crate::modem::Scheme;
use crate::{Error, Result};
use serde::Serialize;

/// Whether the `(N-2)/2N` subcarrier factor is kept or replaced by 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeMode {
    Exact { n: usize },
    Asymptotic,
}

impl SeMode {
    fn factor(self) -> f64 {
        match self {
            SeMode::Exact { n } => (n as f64 - 2.0) / (2.0 * n as f64),
            SeMode::Asymptotic => 0.5,
        }
    }
}

/// Spectral efficiency in b/s/Hz.
///
/// NDC: `f (log2(M N_t) - 1)`, DCO-OSM: `f log2(M N_t)`, ACO-OSM:
/// `log2(M N_t) / 4`, where `f` is the [`SeMode`] factor.
pub fn spectral_efficiency(scheme: Scheme, order: usize, n_t: usize, mode: SeMode) -> Result<f64> {
    if order < 2 || n_t == 0 {
        return Err(Error::Domain("order and LED count must be positive".into()));
    }
    if let SeMode::Exact { n } = mode {
        if n < 4 {
            return Err(Error::Domain(format!("frame size {n} too small")));
        }
    }
    let bits = (order as f64 * n_t as f64).log2();
    match scheme {
        Scheme::Ndc => {
            if n_t % 2 != 0 {
                return Err(Error::Domain(format!(
                    "NDC needs an even number of LEDs, got {n_t}"
                )));
            }
            Ok(mode.factor() * (bits - 1.0))
        }
        Scheme::DcoOsm => Ok(mode.factor() * bits),
        Scheme::AcoOsm => Ok(bits / 4.0),
    }
}

/// Orders `(M_NDC, M_DCO, M_ACO)` reaching `se` b/s/Hz in asymptotic mode.
pub fn matched_constellations(se: f64, n_t: usize) -> Result<(u64, u64, u64)> {
    if n_t == 0 || !n_t.is_power_of_two() || n_t % 2 != 0 {
        return Err(Error::Domain(format!(
            "matching needs an even power-of-two LED count, got {n_t}"
        )));
    }
    if !(se > 0.0) || !se.is_finite() {
        return Err(Error::NoSolution(se));
    }
    let led = n_t.trailing_zeros() as f64;
    let exponent = |x: f64| -> Result<u64> {
        let r = x.round();
        if (x - r).abs() > 1e-9 || r < 2.0 || r > 63.0 {
            return Err(Error::NoSolution(se));
        }
        Ok(1u64 << (r as u32))
    };
    Ok((
        exponent(2.0 * se + 1.0 - led)?,
        exponent(2.0 * se - led)?,
        exponent(4.0 * se - led)?,
    ))
}

/// One row of the constellation-size comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeRow {
    pub se: f64,
    pub ndc: u64,
    pub dco: u64,
    pub aco: u64,
}

/// Rows for 3.5, 4.0, ..., 5.5 b/s/Hz with two LEDs.
pub fn se_table() -> Result<Vec<SeRow>> {
    (0..5)
        .map(|i| {
            let se = 3.5 + 0.5 * i as f64;
            let (ndc, dco, aco) = matched_constellations(se, 2)?;
            Ok(SeRow { se, ndc, dco, aco })
        })
        .collect()
}
