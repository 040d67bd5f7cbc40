//! Sampling oracles for the analytic detection model.
//!
//! Nothing here uses the closed-form moments or the library quadrature: the
//! receiver is simulated sample by sample (transmit `|s|` on the LED picked by
//! the sign, add `C n`, take the argmax, rebuild the sample) and statistics
//! are plain sample averages.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

pub type Inv = [[f64; 2]; 2];

/// One noisy detection of bipolar sample `s`: `(correct, reconstructed)`.
pub fn draw(s: f64, c: &Inv, sigma_n: f64, rng: &mut ChaCha8Rng) -> (bool, f64) {
    let n1: f64 = sigma_n * rng.sample::<f64, _>(StandardNormal);
    let n2: f64 = sigma_n * rng.sample::<f64, _>(StandardNormal);
    let tx = if s >= 0.0 { [s, 0.0] } else { [0.0, -s] };
    let g0 = tx[0] + c[0][0] * n1 + c[0][1] * n2;
    let g1 = tx[1] + c[1][0] * n1 + c[1][1] * n2;
    let detected = if g1 > g0 { 1 } else { 0 };
    let active = if s >= 0.0 { 0 } else { 1 };
    let x = if detected == 0 { g0 } else { -g1 };
    (detected == active, x)
}

/// Mean and unbiased variance of the first `count` draws with the requested
/// outcome, plus the acceptance rate.
pub fn conditional(
    s: f64,
    c: &Inv,
    sigma_n: f64,
    want_correct: bool,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, f64, f64) {
    let (mut kept, mut tried) = (0usize, 0usize);
    let (mut mean, mut m2) = (0.0, 0.0);
    while kept < count {
        tried += 1;
        let (ok, x) = draw(s, c, sigma_n, rng);
        if ok != want_correct {
            continue;
        }
        kept += 1;
        let d = x - mean;
        mean += d / kept as f64;
        m2 += d * (x - mean);
    }
    (mean, m2 / (kept - 1) as f64, kept as f64 / tried as f64)
}

#[derive(Debug, Clone, Copy)]
pub struct Averages {
    pub d_c: f64,
    pub alpha_c: f64,
    pub y_c: f64,
    pub v_bar_c: f64,
}

/// Signal averages on an equal-probability quantile grid in `s`. Each grid
/// point gets two independent halves of `per_half` accepted draws so that
/// products of conditional means stay unbiased.
pub fn averages(c: &Inv, sigma_n: f64, sigma_s: f64, strata: usize, per_half: usize, seed: u64) -> Averages {
    let grid: Vec<f64> = (0..strata)
        .map(|i| sigma_s * probit((i as f64 + 0.5) / strata as f64))
        .collect();
    let (mut d, mut var_s, mut sfa, mut sfb, mut ff, mut v) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, &s) in grid.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let (fa, va, pa) = conditional(s, c, sigma_n, true, per_half, &mut rng);
        let (fb, vb, pb) = conditional(s, c, sigma_n, true, per_half, &mut rng);
        d += 0.5 * (pa + pb);
        var_s += s * s;
        sfa += s * fa;
        sfb += s * fb;
        ff += fa * fb;
        v += 0.5 * (va + vb);
    }
    let k = strata as f64;
    let (d, var_s, sfa, sfb, ff, v) = (d / k, var_s / k, sfa / k, sfb / k, ff / k, v / k);
    let alpha = 0.5 * (sfa + sfb) / var_s;
    Averages {
        d_c: d,
        alpha_c: alpha,
        y_c: ff - sfa * sfb / var_s,
        v_bar_c: v,
    }
}

/// Standard normal quantile by Acklam's rational approximation refined with
/// two Newton steps on an erfc computed from its continued fraction.
pub fn probit(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_690e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let lo = 0.02425;
    let mut x = if p < lo {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - lo {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    for _ in 0..2 {
        let err = std_cdf(x) - p;
        x -= err * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    }
    x
}

/// Standard normal CDF via a midpoint sum of the density from the nearer
/// tail; slow but self-contained.
fn std_cdf(x: f64) -> f64 {
    let tail = |t: f64| -> f64 {
        // integral of phi from t to t + 12
        let steps = 4000;
        let h = 12.0 / steps as f64;
        (0..steps)
            .map(|i| {
                let u = t + (i as f64 + 0.5) * h;
                (-0.5 * u * u).exp()
            })
            .sum::<f64>()
            * h
            / (2.0 * std::f64::consts::PI).sqrt()
    };
    if x < 0.0 {
        tail(-x).min(1.0).max(0.0)
    } else {
        1.0 - tail(x)
    }
}
