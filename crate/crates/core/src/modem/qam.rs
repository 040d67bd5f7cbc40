use crate::{Error, Result};
use num_complex::Complex64;

/// Gray-labelled QAM constellation with unit average symbol energy.
///
/// Square orders use the usual per-axis Gray square grid. Odd bit counts use a
/// rectangular grid with one more bit on the in-phase axis (8 = 4x2,
/// 32 = 8x4, 128 = 16x8, ...), Gray coded per axis. `points()[label]` is the
/// point carrying `label`, so labels are trivially a bijection.
#[derive(Debug, Clone, PartialEq)]
pub struct QamConstellation {
    order: usize,
    bits: usize,
    points: Vec<Complex64>,
    min_distance: f64,
}

fn gray_decode(mut g: usize) -> usize {
    let mut shift = g >> 1;
    while shift != 0 {
        g ^= shift;
        shift >>= 1;
    }
    g
}

impl QamConstellation {
    pub fn new(order: usize) -> Result<Self> {
        if order < 4 || !order.is_power_of_two() {
            return Err(Error::Domain(format!(
                "QAM order must be a power of two >= 4, got {order}"
            )));
        }
        let bits = order.trailing_zeros() as usize;
        let bits_i = bits.div_ceil(2);
        let bits_q = bits / 2;
        let (levels_i, levels_q) = (1usize << bits_i, 1usize << bits_q);
        let energy = ((levels_i * levels_i - 1) + (levels_q * levels_q - 1)) as f64 / 3.0;
        let scale = energy.sqrt().recip();
        let level = |gray: usize, levels: usize| {
            (2.0 * gray_decode(gray) as f64 - (levels as f64 - 1.0)) * scale
        };
        let points = (0..order)
            .map(|label| {
                let re = level(label >> bits_q, levels_i);
                let im = level(label & (levels_q - 1), levels_q);
                Complex64::new(re, im)
            })
            .collect();
        Ok(Self {
            order,
            bits,
            points,
            min_distance: 2.0 * scale,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }

    /// Label of the Euclidean-nearest point; ties go to the lowest label.
    pub fn nearest_label(&self, symbol: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (label, p) in self.points.iter().enumerate() {
            let d = (symbol - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        best
    }
}

/// Packs `bits` (MSB first, each 0 or 1) into a label.
pub fn bits_to_label(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b & 1))
}

/// Unpacks `label` into `out` (MSB first).
pub fn label_to_bits(label: usize, out: &mut [u8]) {
    let n = out.len();
    for (i, b) in out.iter_mut().enumerate() {
        *b = ((label >> (n - 1 - i)) & 1) as u8;
    }
}

pub fn qam_map(bits: &[u8], constellation: &QamConstellation) -> Result<Vec<Complex64>> {
    let k = constellation.bits_per_symbol();
    if bits.len() % k != 0 {
        return Err(Error::InputSize {
            expected: bits.len().div_ceil(k) * k,
            actual: bits.len(),
        });
    }
    Ok(bits
        .chunks_exact(k)
        .map(|group| constellation.point(bits_to_label(group)))
        .collect())
}

/// Maximum-likelihood (minimum distance) hard decision.
pub fn qam_demap(symbol: Complex64, constellation: &QamConstellation) -> usize {
    constellation.nearest_label(symbol)
}
