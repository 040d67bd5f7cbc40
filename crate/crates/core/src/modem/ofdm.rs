use crate::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

const HERMITIAN_TOL: f64 = 1e-9;

/// Frequency-domain OFDM frame of `N` bins.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFrame {
    bins: Vec<Complex64>,
}

/// Real time-domain OFDM samples.
pub type TimeFrame = Vec<f64>;

fn check_frame_size(n: usize) -> Result<()> {
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::Domain(format!(
            "frame size must be a power of two >= 8, got {n}"
        )));
    }
    Ok(())
}

impl SpectralFrame {
    /// Wraps raw bins. Hermitian symmetry is checked by [`inverse_transform`],
    /// not here, so arbitrary spectra can be inspected.
    pub fn from_bins(bins: Vec<Complex64>) -> Result<Self> {
        check_frame_size(bins.len())?;
        Ok(Self { bins })
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn into_bins(self) -> Vec<Complex64> {
        self.bins
    }

    /// Largest deviation from the real-signal constraints: zero DC and
    /// Nyquist bins, and `X[N-m] = conj(X[m])`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.bins.len();
        let mut worst = self.bins[0].norm().max(self.bins[n / 2].norm());
        for m in 1..n / 2 {
            worst = worst.max((self.bins[n - m] - self.bins[m].conj()).norm());
        }
        worst
    }
}

/// Places `N/2 - 1` symbols on bins `1..N/2` and mirrors them.
pub fn build_spectral_frame(symbols: &[Complex64], n: usize) -> Result<SpectralFrame> {
    check_frame_size(n)?;
    if symbols.len() != n / 2 - 1 {
        return Err(Error::InputSize {
            expected: n / 2 - 1,
            actual: symbols.len(),
        });
    }
    let mut bins = vec![Complex64::new(0.0, 0.0); n];
    for (m, &s) in symbols.iter().enumerate() {
        bins[m + 1] = s;
        bins[n - 1 - m] = s.conj();
    }
    Ok(SpectralFrame { bins })
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn transform_in_place(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    fft.process(buf);
    let scale = (n as f64).sqrt().recip();
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Unitary inverse DFT, `x[k] = N^{-1/2} sum_m X[m] exp(j 2 pi k m / N)`.
///
/// The frame must describe a real signal; the (numerically tiny) imaginary
/// residue is discarded.
pub fn inverse_transform(frame: &SpectralFrame) -> Result<TimeFrame> {
    let scale = frame
        .bins
        .iter()
        .fold(1.0f64, |acc, b| acc.max(b.norm()));
    let defect = frame.hermitian_defect();
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::Invariant(format!(
            "spectral frame is not Hermitian (defect {defect:.3e})"
        )));
    }
    let mut buf = frame.bins.clone();
    transform_in_place(&mut buf, true);
    let residue = buf.iter().fold(0.0f64, |acc, v| acc.max(v.im.abs()));
    if residue > HERMITIAN_TOL * scale {
        return Err(Error::Invariant(format!(
            "inverse transform left imaginary residue {residue:.3e}"
        )));
    }
    Ok(buf.into_iter().map(|v| v.re).collect())
}

/// Unitary forward DFT, `X[m] = N^{-1/2} sum_k x[k] exp(-j 2 pi k m / N)`.
pub fn forward_transform(samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    if !buf.is_empty() {
        transform_in_place(&mut buf, false);
    }
    buf
}
