//! Adaptive Gauss-Kronrod (7/15) quadrature for vector-valued integrands.

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for [`integrate`]. A component is converged when its error
/// estimate is below `max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-12,
            rel: 1e-10,
            max_intervals: 4000,
        }
    }
}

struct Segment<const K: usize> {
    a: f64,
    b: f64,
    value: [f64; K],
    error: [f64; K],
}

fn gk15<const K: usize, F: Fn(f64) -> [f64; K]>(f: &F, a: f64, b: f64) -> Segment<K> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = [0.0; K];
    let mut gauss = [0.0; K];
    let fc = f(centre);
    for j in 0..K {
        kronrod[j] = fc[j] * WGK[7];
        gauss[j] = fc[j] * WG[3];
    }
    for i in 0..7 {
        let dx = half * XGK[i];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        for j in 0..K {
            let s = f1[j] + f2[j];
            kronrod[j] += WGK[i] * s;
            if i % 2 == 1 {
                gauss[j] += WG[i / 2] * s;
            }
        }
    }
    let mut value = [0.0; K];
    let mut error = [0.0; K];
    for j in 0..K {
        value[j] = kronrod[j] * half;
        // The raw Gauss/Kronrod difference; pessimistic for the Kronrod value.
        error[j] = ((kronrod[j] - gauss[j]) * half).abs();
    }
    Segment { a, b, value, error }
}

/// Integrates every component of `f` over `[a, b]` using one shared set of
/// evaluations. Interior `breaks` (e.g. kinks of the integrand) start as
/// segment boundaries.
pub fn integrate<const K: usize, F: Fn(f64) -> [f64; K]>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<[f64; K]> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::Numerical(format!("bad integration range [{a}, {b}]")));
    }
    if a == b {
        return Ok([0.0; K]);
    }
    let mut edges = vec![a];
    edges.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    edges.push(b);
    edges.sort_by(f64::total_cmp);
    let mut segments: Vec<Segment<K>> = edges
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk15(&f, w[0], w[1]))
        .collect();

    loop {
        let mut total = [0.0; K];
        let mut err = [0.0; K];
        for s in &segments {
            for j in 0..K {
                total[j] += s.value[j];
                err[j] += s.error[j];
            }
        }
        if total.iter().chain(err.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite integrand".into()));
        }
        let target = |j: usize| tol.abs.max(tol.rel * total[j].abs());
        let worst_component = (0..K)
            .map(|j| (j, err[j] / target(j)))
            .max_by(|x, y| x.1.total_cmp(&y.1));
        let Some((j, ratio)) = worst_component else {
            return Ok(total);
        };
        if ratio <= 1.0 {
            return Ok(total);
        }
        if segments.len() >= tol.max_intervals {
            return Err(Error::Numerical(format!(
                "quadrature did not converge: component {j} error {:.3e} > {:.3e}",
                err[j],
                target(j)
            )));
        }
        let idx = (0..segments.len())
            .max_by(|&x, &y| {
                let sx = (0..K).map(|c| segments[x].error[c] / target(c)).fold(0.0, f64::max);
                let sy = (0..K).map(|c| segments[y].error[c] / target(c)).fold(0.0, f64::max);
                sx.total_cmp(&sy)
            })
            .expect("at least one segment");
        let seg = segments.swap_remove(idx);
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            return Err(Error::Numerical("interval underflow in quadrature".into()));
        }
        segments.push(gk15(&f, seg.a, mid));
        segments.push(gk15(&f, mid, seg.b));
    }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    integrate(|x| [f(x)], a, b, &[], tol).map(|v| v[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(
            |x| [1.0, x, x * x, x.powi(7)],
            -1.0,
            2.0,
            &[],
            Tolerance::default(),
        )
        .unwrap();
        let exact = [3.0, 1.5, 3.0, (256.0 - 1.0) / 8.0];
        for (a, b) in v.iter().zip(exact) {
            assert!((a - b).abs() < 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn gaussian_mass_and_kink() {
        let g = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let v = integrate(
            |x| [g(x), x.abs() * g(x)],
            -8.0,
            8.0,
            &[0.0],
            Tolerance::default(),
        )
        .unwrap();
        assert!((v[0] - 1.0).abs() < 1e-12);
        assert!((v[1] - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-11);
    }

    #[test]
    fn discontinuity_without_break_still_converges() {
        let v = integrate_scalar(
            |x| if x > 0.3 { 1.0 } else { 0.0 },
            0.0,
            1.0,
            Tolerance {
                abs: 1e-10,
                ..Tolerance::default()
            },
        )
        .unwrap();
        assert!((v - 0.7).abs() < 1e-9);
    }

    #[test]
    fn empty_and_bad_ranges() {
        assert_eq!(integrate_scalar(|x| x, 1.0, 1.0, Tolerance::default()).unwrap(), 0.0);
        assert!(integrate_scalar(|x| x, 2.0, 1.0, Tolerance::default()).is_err());
        assert!(integrate_scalar(|_| f64::NAN, 0.0, 1.0, Tolerance::default()).is_err());
    }
}
