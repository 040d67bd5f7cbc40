//! Bussgang decomposition of the NDC reconstruction and the resulting SNR.

use super::ber::theoretical_ber;
use super::detection::{conditional_moments, ZfInverse};
use super::normal::pdf;
use super::quadrature::{integrate, Tolerance};
use crate::{Error, Executor, Result};
use serde::{Deserialize, Serialize};

/// Signal-side parameters of the analytic model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalStats {
    /// Standard deviation of the bipolar time-domain samples.
    pub sigma_s: f64,
    /// Energy per bit.
    pub eb: f64,
    pub order: usize,
    pub n: usize,
    pub n_t: usize,
}

impl SignalStats {
    /// `sigma_s = sqrt(Eb log2(M) (N-2) / (2 N N_t))`.
    pub fn from_eb(eb: f64, order: usize, n: usize, n_t: usize) -> Result<Self> {
        if !(eb > 0.0) || !eb.is_finite() {
            return Err(Error::Domain(format!("Eb must be positive, got {eb}")));
        }
        if order < 4 || !order.is_power_of_two() || n < 8 || n_t == 0 {
            return Err(Error::Domain(format!(
                "invalid signal parameters M={order} N={n} N_t={n_t}"
            )));
        }
        let k = (order as f64).log2();
        let sigma_s = (eb * k * (n as f64 - 2.0) / (2.0 * n as f64 * n_t as f64)).sqrt();
        Ok(Self {
            sigma_s,
            eb,
            order,
            n,
            n_t,
        })
    }

    /// Stats at `ebn0_db` for a noise standard deviation `sigma_n`
    /// (`N0 = 2 sigma_n^2`).
    pub fn at_ebn0(ebn0_db: f64, sigma_n: f64, order: usize, n: usize, n_t: usize) -> Result<Self> {
        let n0 = 2.0 * sigma_n * sigma_n;
        Self::from_eb(n0 * 10f64.powf(ebn0_db / 10.0), order, n, n_t)
    }

    /// Electrical energy per bit on one data subcarrier,
    /// `N sigma_s^2 / ((N-2) log2 M)`.
    pub fn eb_elec(&self) -> f64 {
        self.n as f64 * self.sigma_s * self.sigma_s
            / ((self.n as f64 - 2.0) * (self.order as f64).log2())
    }
}

/// Averages over the Gaussian signal density of everything the models need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalAverages {
    pub d_c: f64,
    pub v_bar_c: f64,
    pub v_bar_w: f64,
    /// `E[s f_c(s)]`, `E[s f_w(s)]`.
    pub s_f_c: f64,
    pub s_f_w: f64,
    /// `E[f_c^2]`, `E[f_w^2]`.
    pub f_c_sq: f64,
    pub f_w_sq: f64,
    /// `E[s F(s)]` with `F = p_c f_c + p_w f_w`, the unconditional mean.
    pub s_f: f64,
    /// Unconditional second moment of the reconstructed sample.
    pub second: f64,
    /// Some conditioning probability underflowed on the grid.
    pub underflow: bool,
}

/// One vector quadrature over `s` in `[-8 sigma_s, 8 sigma_s]`.
pub fn signal_averages(c: &ZfInverse, sigma_n: f64, stats: &SignalStats) -> Result<SignalAverages> {
    if !(sigma_n >= 0.0) {
        return Err(Error::Domain(format!("sigma_n must be >= 0, got {sigma_n}")));
    }
    let ss = stats.sigma_s;
    let underflow = std::cell::Cell::new(false);
    let v = integrate(
        |s| {
            let w = pdf(s / ss) / ss;
            let m = conditional_moments(s, c, sigma_n);
            if m.underflow {
                underflow.set(true);
            }
            let mean = m.p_correct * m.f_c + m.p_wrong * m.f_w;
            let second =
                m.p_correct * (m.v_c + m.f_c * m.f_c) + m.p_wrong * (m.v_w + m.f_w * m.f_w);
            [
                w * m.p_correct,
                w * m.v_c,
                w * m.v_w,
                w * s * m.f_c,
                w * s * m.f_w,
                w * m.f_c * m.f_c,
                w * m.f_w * m.f_w,
                w * s * mean,
                w * second,
            ]
        },
        -8.0 * ss,
        8.0 * ss,
        &[0.0],
        Tolerance::default(),
    )?;
    Ok(SignalAverages {
        d_c: v[0].clamp(0.0, 1.0),
        v_bar_c: v[1],
        v_bar_w: v[2],
        s_f_c: v[3],
        s_f_w: v[4],
        f_c_sq: v[5],
        f_w_sq: v[6],
        s_f: v[7],
        second: v[8],
        underflow: underflow.get(),
    })
}

/// `(v_bar_c, v_bar_w)`.
pub fn averaged_variances(c: &ZfInverse, sigma_n: f64, stats: &SignalStats) -> Result<(f64, f64)> {
    let a = signal_averages(c, sigma_n, stats)?;
    Ok((a.v_bar_c, a.v_bar_w))
}

/// `(alpha_c, y_c, alpha_w, y_w)`.
pub fn bussgang_factors(
    c: &ZfInverse,
    sigma_n: f64,
    stats: &SignalStats,
) -> Result<(f64, f64, f64, f64)> {
    let t = BussgangTerms::from_averages(&signal_averages(c, sigma_n, stats)?, stats);
    Ok((t.alpha_c, t.y_c, t.alpha_w, t.y_w))
}

/// Probability that the index detector picks the active LED.
pub fn correct_detection_prob(c: &ZfInverse, sigma_n: f64, stats: &SignalStats) -> Result<f64> {
    Ok(signal_averages(c, sigma_n, stats)?.d_c)
}

/// Per-outcome Bussgang gains and distortion variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BussgangTerms {
    pub alpha_c: f64,
    pub y_c: f64,
    pub alpha_w: f64,
    pub y_w: f64,
    pub v_bar_c: f64,
    pub v_bar_w: f64,
    pub d_c: f64,
    pub underflow: bool,
}

impl BussgangTerms {
    pub fn from_averages(a: &SignalAverages, stats: &SignalStats) -> Self {
        let var_s = stats.sigma_s * stats.sigma_s;
        let alpha_c = a.s_f_c / var_s;
        let alpha_w = a.s_f_w / var_s;
        Self {
            alpha_c,
            y_c: a.f_c_sq - alpha_c * alpha_c * var_s,
            alpha_w,
            y_w: a.f_w_sq - alpha_w * alpha_w * var_s,
            v_bar_c: a.v_bar_c,
            v_bar_w: a.v_bar_w,
            d_c: a.d_c,
            underflow: a.underflow,
        }
    }
}

/// Gain, noise and per-bit SNR after averaging over detection outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveSnr {
    pub alpha_bar: f64,
    pub n_bar: f64,
    pub snr_elec: f64,
}

/// `alpha_bar = d_c alpha_c + (1-d_c) alpha_w`,
/// `N_bar = d_c (v_bar_c + y_c) + (1-d_c)(v_bar_w + y_w)`,
/// `snr = alpha_bar^2 Eb_elec / N_bar`.
pub fn effective_snr(stats: &SignalStats, t: &BussgangTerms) -> Result<EffectiveSnr> {
    let alpha_bar = t.d_c * t.alpha_c + (1.0 - t.d_c) * t.alpha_w;
    let n_bar = t.d_c * (t.v_bar_c + t.y_c) + (1.0 - t.d_c) * (t.v_bar_w + t.y_w);
    finish(stats, alpha_bar, n_bar)
}

fn finish(stats: &SignalStats, alpha_bar: f64, n_bar: f64) -> Result<EffectiveSnr> {
    if !(n_bar > 0.0) {
        return Err(Error::Numerical(format!(
            "non-positive effective noise variance {n_bar:.3e}"
        )));
    }
    Ok(EffectiveSnr {
        alpha_bar,
        n_bar,
        snr_elec: alpha_bar * alpha_bar * stats.eb_elec() / n_bar,
    })
}

/// Single Bussgang decomposition of the whole reconstructed sample,
/// weighting every conditional moment by its detection probability:
/// `alpha = E[s F(s)] / sigma_s^2`, `N = E[x'^2] - alpha^2 sigma_s^2`.
pub fn weighted_snr(a: &SignalAverages, stats: &SignalStats) -> Result<EffectiveSnr> {
    let var_s = stats.sigma_s * stats.sigma_s;
    let alpha = a.s_f / var_s;
    finish(stats, alpha, a.second - alpha * alpha * var_s)
}

/// Which decomposition turns the conditional moments into an SNR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum BussgangModel {
    /// Separate factors for correct and wrong detection, mixed with `d_c`.
    #[default]
    #[serde(rename = "paper")]
    Paper,
    /// One decomposition of the probability-weighted mixture.
    #[serde(rename = "weighted")]
    Weighted,
}

impl BussgangModel {
    pub fn name(self) -> &'static str {
        match self {
            BussgangModel::Paper => "paper",
            BussgangModel::Weighted => "weighted",
        }
    }
}

impl std::str::FromStr for BussgangModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" | "split" => Ok(BussgangModel::Paper),
            "weighted" | "exact" => Ok(BussgangModel::Weighted),
            other => Err(Error::Parse(format!("unknown analytic model `{other}`"))),
        }
    }
}

/// All intermediate quantities for one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BussgangResult {
    pub alpha_c: f64,
    pub alpha_w: f64,
    pub y_c: f64,
    pub y_w: f64,
    pub v_bar_c: f64,
    pub v_bar_w: f64,
    pub d_c: f64,
    pub alpha_bar: f64,
    pub n_bar: f64,
    pub snr_elec: f64,
    pub underflow: bool,
}

pub fn bussgang_analysis(
    c: &ZfInverse,
    sigma_n: f64,
    stats: &SignalStats,
    model: BussgangModel,
) -> Result<BussgangResult> {
    let a = signal_averages(c, sigma_n, stats)?;
    let t = BussgangTerms::from_averages(&a, stats);
    let snr = match model {
        BussgangModel::Paper => effective_snr(stats, &t)?,
        BussgangModel::Weighted => weighted_snr(&a, stats)?,
    };
    Ok(BussgangResult {
        alpha_c: t.alpha_c,
        alpha_w: t.alpha_w,
        y_c: t.y_c,
        y_w: t.y_w,
        v_bar_c: t.v_bar_c,
        v_bar_w: t.v_bar_w,
        d_c: t.d_c,
        alpha_bar: snr.alpha_bar,
        n_bar: snr.n_bar,
        snr_elec: snr.snr_elec,
        underflow: t.underflow,
    })
}

/// One point of an analytic BER curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticPoint {
    pub ebn0_db: f64,
    pub ber: f64,
    pub detail: BussgangResult,
}

/// Analytic NDC BER at `ebn0_db` with fixed noise `sigma_n`; the signal
/// level follows from `Eb = N0 10^(ebn0/10)`.
pub fn analytic_ber(
    c: &ZfInverse,
    sigma_n: f64,
    ebn0_db: f64,
    order: usize,
    n: usize,
    n_t: usize,
    model: BussgangModel,
) -> Result<AnalyticPoint> {
    let stats = SignalStats::at_ebn0(ebn0_db, sigma_n, order, n, n_t)?;
    let detail = bussgang_analysis(c, sigma_n, &stats, model)?;
    Ok(AnalyticPoint {
        ebn0_db,
        ber: theoretical_ber(order, detail.snr_elec)?,
        detail,
    })
}

/// [`analytic_ber`] over a grid; points are evaluated on `exec`.
#[allow(clippy::too_many_arguments)]
pub fn analytic_curve(
    c: &ZfInverse,
    sigma_n: f64,
    ebn0_db: &[f64],
    order: usize,
    n: usize,
    n_t: usize,
    model: BussgangModel,
    exec: &Executor,
) -> Result<Vec<AnalyticPoint>> {
    exec.map_slice(ebn0_db, |&e| analytic_ber(c, sigma_n, e, order, n, n_t, model))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelMatrix;

    fn stats(sigma_s: f64) -> SignalStats {
        SignalStats {
            sigma_s,
            eb: 1.0,
            order: 16,
            n: 2048,
            n_t: 2,
        }
    }

    #[test]
    fn signal_stats_round_trip() {
        let s = SignalStats::from_eb(1.0005, 16, 2048, 2).unwrap();
        assert!((s.sigma_s - 1.0).abs() < 1e-3);
        assert!((s.eb_elec() - s.eb / 4.0).abs() < 1e-15);
    }

    #[test]
    fn small_noise_is_distortionless() {
        let c = ZfInverse::from_channel(&ChannelMatrix::preset("H8").unwrap()).unwrap();
        let r = bussgang_analysis(&c, 1e-6, &stats(1.0), BussgangModel::Paper).unwrap();
        assert!((r.alpha_c - 1.0).abs() < 1e-4);
        assert!(r.y_c.abs() < 1e-8);
        assert!(r.d_c > 0.9999);
        assert!((r.alpha_bar - 1.0).abs() < 1e-3);
        assert!(r.snr_elec > 1e8);
    }

    #[test]
    fn huge_noise_gives_coin_flip_detection() {
        let c = ZfInverse::identity();
        let d = correct_detection_prob(&c, 1e4, &stats(1.0)).unwrap();
        assert!((d - 0.5).abs() < 1e-4);
    }

    #[test]
    fn d_c_identity_closed_form() {
        let c = ZfInverse::identity();
        let d = correct_detection_prob(&c, 0.1, &stats(1.0)).unwrap();
        // independent route: plain Riemann sum of Phi(|s| / (sqrt2 sigma_n))
        let mut acc = 0.0;
        let h = 1e-4;
        let mut s = -8.0 + h / 2.0;
        while s < 8.0 {
            acc += super::super::normal::cdf(f64::abs(s) / (2f64.sqrt() * 0.1)) * pdf(s) * h;
            s += h;
        }
        assert!((d - acc).abs() < 1e-7);
    }

    #[test]
    fn d_c_one_collapses_the_mixture() {
        let t = BussgangTerms {
            alpha_c: 0.9,
            y_c: 0.01,
            alpha_w: -0.3,
            y_w: 0.5,
            v_bar_c: 0.02,
            v_bar_w: 0.7,
            d_c: 1.0,
            underflow: false,
        };
        let e = effective_snr(&stats(1.0), &t).unwrap();
        assert_eq!(e.alpha_bar, 0.9);
        assert!((e.n_bar - 0.03).abs() < 1e-15);
        let bad = BussgangTerms {
            v_bar_c: -0.01,
            y_c: 0.0,
            ..t
        };
        assert!(matches!(effective_snr(&stats(1.0), &bad), Err(Error::Numerical(_))));
    }

    #[test]
    fn variances_are_nonnegative() {
        for id in ["H1", "H4", "H8"] {
            let c = ZfInverse::from_channel(&ChannelMatrix::preset(id).unwrap()).unwrap();
            for ss in [0.05, 0.3, 2.0] {
                let r = bussgang_analysis(&c, 0.1, &stats(ss), BussgangModel::Paper).unwrap();
                assert!(r.y_c >= -1e-12 && r.y_w >= -1e-12, "{id} {ss}");
                assert!(r.v_bar_c >= 0.0 && r.v_bar_w >= 0.0);
                assert!((0.0..=1.0).contains(&r.d_c));
            }
        }
    }

    #[test]
    fn symmetric_channel_half_range() {
        let c = ZfInverse::identity();
        let st = stats(0.7);
        let full = averaged_variances(&c, 0.1, &st).unwrap().0;
        let half = integrate(
            |s| [conditional_moments(s, &c, 0.1).v_c * pdf(s / 0.7) / 0.7],
            0.0,
            5.6,
            &[],
            Tolerance::default(),
        )
        .unwrap()[0]
            * 2.0;
        assert!((full - half).abs() < 1e-10);
    }

    #[test]
    fn analytic_curve_is_monotone_on_identity() {
        let grid: Vec<f64> = (0..12).map(|i| 4.0 + 2.0 * i as f64).collect();
        let pts = analytic_curve(
            &ZfInverse::identity(),
            0.1,
            &grid,
            16,
            2048,
            2,
            BussgangModel::Paper,
            &Executor::sequential(),
        )
        .unwrap();
        for w in pts.windows(2) {
            assert!(w[1].ber < w[0].ber);
        }
    }
}
