//! Index-detection probabilities and the conditional moments of the
//! reconstructed sample for a 2x2 ZF receiver.

use super::normal::{cdf, mills, mills_lower, pdf, q_function};
use super::quadrature::{integrate, Tolerance};
use crate::channel::ChannelMatrix;
use crate::{Error, Result};
use nalgebra::DMatrix;

/// Probabilities below this are treated as underflowed.
pub const UNDERFLOW: f64 = 1e-300;

/// Entries `c_ij` of `C = H^{-1}` for a 2x2 channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZfInverse {
    pub c11: f64,
    pub c12: f64,
    pub c21: f64,
    pub c22: f64,
}

impl ZfInverse {
    pub fn identity() -> Self {
        Self::from_entries(1.0, 0.0, 0.0, 1.0)
    }

    pub fn from_entries(c11: f64, c12: f64, c21: f64, c22: f64) -> Self {
        Self { c11, c12, c21, c22 }
    }

    /// Uses `c` as the inverse directly.
    pub fn from_matrix(c: &DMatrix<f64>) -> Result<Self> {
        if c.nrows() != 2 || c.ncols() != 2 {
            return Err(Error::InputSize {
                expected: 4,
                actual: c.len(),
            });
        }
        Ok(Self::from_entries(c[(0, 0)], c[(0, 1)], c[(1, 0)], c[(1, 1)]))
    }

    /// Inverts a 2x2 channel.
    pub fn from_channel(h: &ChannelMatrix) -> Result<Self> {
        if h.receivers() != 2 || h.transmitters() != 2 {
            return Err(Error::Domain(
                "the analytic pipeline covers 2x2 channels only".into(),
            ));
        }
        Self::from_matrix(h.inverse()?)
    }
}

/// Geometry of the decision for one sign of `s`: the indicator direction
/// `(a, b)`, the active row `p` and the inactive row `q` of `C`.
#[derive(Debug, Clone, Copy)]
struct Branch {
    a: f64,
    b: f64,
    p: [f64; 2],
    q: [f64; 2],
}

fn branch(s: f64, c: &ZfInverse) -> Branch {
    if s >= 0.0 {
        Branch {
            a: c.c11 - c.c21,
            b: c.c12 - c.c22,
            p: [c.c11, c.c12],
            q: [c.c21, c.c22],
        }
    } else {
        Branch {
            a: c.c21 - c.c11,
            b: c.c22 - c.c12,
            p: [c.c21, c.c22],
            q: [c.c11, c.c12],
        }
    }
}

fn sign(s: f64) -> f64 {
    if s >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn noise_density(n1: f64, n2: f64, sigma_n: f64) -> f64 {
    pdf(n1 / sigma_n) * pdf(n2 / sigma_n) / (sigma_n * sigma_n)
}

/// Density of `(n1, n2)` restricted to the event that the active LED wins.
pub fn detection_density_correct(s: f64, n1: f64, n2: f64, c: &ZfInverse, sigma_n: f64) -> f64 {
    let br = branch(s, c);
    if s.abs() + br.a * n1 + br.b * n2 > 0.0 {
        noise_density(n1, n2, sigma_n)
    } else {
        0.0
    }
}

/// Density of `(n1, n2)` restricted to the event that the inactive LED wins.
pub fn detection_density_wrong(s: f64, n1: f64, n2: f64, c: &ZfInverse, sigma_n: f64) -> f64 {
    let br = branch(s, c);
    if -(s.abs() + br.a * n1 + br.b * n2) > 0.0 {
        noise_density(n1, n2, sigma_n)
    } else {
        0.0
    }
}

/// `Pr(correct | s) = Phi(|s| / (sigma_n sqrt(a^2 + b^2)))`.
pub fn correct_probability(s: f64, c: &ZfInverse, sigma_n: f64) -> f64 {
    let br = branch(s, c);
    let sz = sigma_n * br.a.hypot(br.b);
    if sz == 0.0 {
        return 1.0;
    }
    cdf(s.abs() / sz)
}

/// Moments of the reconstructed sample given `s`, split by detection outcome.
///
/// `f_c`/`v_c` are the conditional mean and variance of the reconstructed
/// value when the active LED is detected, `f_w`/`v_w` when the other one is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalMoments {
    pub p_correct: f64,
    pub p_wrong: f64,
    pub f_c: f64,
    pub v_c: f64,
    pub f_w: f64,
    pub v_w: f64,
    /// A conditioning probability fell below [`UNDERFLOW`].
    pub underflow: bool,
}

/// Closed form via the truncated normal.
///
/// With `z = a n1 + b n2 ~ N(0, sz^2)` the correct event is `z > -|s|`. Any
/// other projection `w = u . n` splits into a part along `z` and an
/// independent remainder, which gives its conditional mean and variance
/// exactly. Tails use the Mills ratio, so moments stay finite even when the
/// conditioning probability underflows.
pub fn conditional_moments(s: f64, c: &ZfInverse, sigma_n: f64) -> ConditionalMoments {
    let br = branch(s, c);
    let sg = sign(s);
    let var_n = sigma_n * sigma_n;
    let sz2 = var_n * (br.a * br.a + br.b * br.b);
    let norm2 = |u: [f64; 2]| u[0] * u[0] + u[1] * u[1];
    if sz2 == 0.0 {
        // Noiseless, or a detector whose decision ignores the noise.
        return ConditionalMoments {
            p_correct: 1.0,
            p_wrong: 0.0,
            f_c: s,
            v_c: var_n * norm2(br.p),
            f_w: 0.0,
            v_w: 0.0,
            underflow: true,
        };
    }
    let sz = sz2.sqrt();
    let t = s.abs() / sz;
    let p_correct = cdf(t);
    let p_wrong = q_function(t);

    let lc = mills_lower(t);
    let mean_zc = sz * lc;
    let var_zc = (sz2 * (1.0 - t * lc - lc * lc)).max(0.0);
    let lw = mills(t);
    let mean_zw = -sz * lw;
    let var_zw = (sz2 * (1.0 + t * lw - lw * lw)).max(0.0);

    let project = |u: [f64; 2], mean_z: f64, var_z: f64| {
        let beta = var_n * (u[0] * br.a + u[1] * br.b) / sz2;
        let mean = beta * mean_z;
        let var = beta * beta * var_z + (var_n * norm2(u) - beta * beta * sz2).max(0.0);
        (mean, var)
    };
    let (mc, v_c) = project(br.p, mean_zc, var_zc);
    let (mw, v_w) = project(br.q, mean_zw, var_zw);
    ConditionalMoments {
        p_correct,
        p_wrong,
        f_c: sg * (s.abs() + mc),
        v_c,
        f_w: -sg * mw,
        v_w,
        underflow: p_wrong < UNDERFLOW || p_correct < UNDERFLOW,
    }
}

/// Cross-check path: the same moments by direct 2-D quadrature of the
/// indicator densities over `[-8 sigma_n, 8 sigma_n]^2`. A conditioning mass
/// below [`UNDERFLOW`] yields zero moments for that branch.
pub fn conditional_moments_quadrature(
    s: f64,
    c: &ZfInverse,
    sigma_n: f64,
) -> Result<ConditionalMoments> {
    if !(sigma_n > 0.0) {
        return Err(Error::Domain("quadrature path needs sigma_n > 0".into()));
    }
    let br = branch(s, c);
    let sg = sign(s);
    let lim = 8.0 * sigma_n;
    let tol = Tolerance {
        abs: 1e-13,
        rel: 1e-11,
        max_intervals: 4000,
    };
    // Sign of the decision statistic is constant on each side of n2*(n1).
    let inner = |n1: f64| -> [f64; 6] {
        let breaks: Vec<f64> = if br.b != 0.0 {
            vec![-(s.abs() + br.a * n1) / br.b]
        } else {
            Vec::new()
        };
        let xc0 = s.abs() + br.p[0] * n1;
        let xw0 = br.q[0] * n1;
        integrate(
            |n2| {
                let d = noise_density(n1, n2, sigma_n);
                let xc = xc0 + br.p[1] * n2;
                let xw = xw0 + br.q[1] * n2;
                if s.abs() + br.a * n1 + br.b * n2 > 0.0 {
                    [d, d * xc, d * xc * xc, 0.0, 0.0, 0.0]
                } else {
                    [0.0, 0.0, 0.0, d, d * xw, d * xw * xw]
                }
            },
            -lim,
            lim,
            &breaks,
            tol,
        )
        .unwrap_or([f64::NAN; 6])
    };
    let mut outer_breaks = vec![0.0];
    if br.b == 0.0 && br.a != 0.0 {
        outer_breaks.push(-s.abs() / br.a);
    } else if br.b != 0.0 {
        // Where the inner split point leaves the box.
        for edge in [-lim, lim] {
            if br.a != 0.0 {
                outer_breaks.push(-(s.abs() + br.b * edge) / br.a);
            }
        }
    }
    let m = integrate(inner, -lim, lim, &outer_breaks, tol)?;
    let (pc, pw) = (m[0], m[3]);
    let mut underflow = false;
    let (f_c, v_c) = if pc < UNDERFLOW {
        underflow = true;
        (0.0, 0.0)
    } else {
        let mean = m[1] / pc;
        (sg * mean, (m[2] / pc - mean * mean).max(0.0))
    };
    let (f_w, v_w) = if pw < UNDERFLOW {
        underflow = true;
        (0.0, 0.0)
    } else {
        let mean = m[4] / pw;
        (-sg * mean, (m[5] / pw - mean * mean).max(0.0))
    };
    Ok(ConditionalMoments {
        p_correct: pc,
        p_wrong: pw,
        f_c,
        v_c,
        f_w,
        v_w,
        underflow,
    })
}
