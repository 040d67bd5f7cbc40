use super::ofdm::{inverse_transform, SpectralFrame, TimeFrame};
use super::qam::{bits_to_label, label_to_bits};
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `alpha = sqrt(10^(bias_db/10) - 1)`, so that `10 log10(alpha^2 + 1)` is the
/// bias level in dB.
pub fn bias_factor(bias_db: f64) -> Result<f64> {
    if !(bias_db >= 0.0) || !bias_db.is_finite() {
        return Err(Error::Domain(format!(
            "bias level must be a finite value >= 0 dB, got {bias_db}"
        )));
    }
    Ok((10f64.powf(bias_db / 10.0) - 1.0).max(0.0).sqrt())
}

/// Output of [`modulate_dco`].
#[derive(Debug, Clone, PartialEq)]
pub struct DcoWaveform {
    pub waveform: Vec<f64>,
    /// DC bias that was added before clipping.
    pub bias: f64,
}

/// Adds `alpha * rms(x)` to every sample and clips what is still negative.
///
/// The rms is the frame's own mean square, not an ensemble value.
pub fn modulate_dco(samples: &[f64], bias_db: f64) -> Result<DcoWaveform> {
    let alpha = bias_factor(bias_db)?;
    let mean_sq = if samples.is_empty() {
        0.0
    } else {
        samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64
    };
    let bias = alpha * mean_sq.sqrt();
    let waveform = samples.iter().map(|&x| (x + bias).max(0.0)).collect();
    Ok(DcoWaveform { waveform, bias })
}

/// Hermitian frame carrying `N/4` symbols on the odd bins `1, 3, ..., N/2-1`.
pub fn aco_spectral_frame(symbols: &[Complex64], n: usize) -> Result<SpectralFrame> {
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::Domain(format!(
            "frame size must be a power of two >= 8, got {n}"
        )));
    }
    if symbols.len() != n / 4 {
        return Err(Error::InputSize {
            expected: n / 4,
            actual: symbols.len(),
        });
    }
    let mut bins = vec![Complex64::new(0.0, 0.0); n];
    for (i, &s) in symbols.iter().enumerate() {
        let m = 2 * i + 1;
        bins[m] = s;
        bins[n - m] = s.conj();
    }
    SpectralFrame::from_bins(bins)
}

/// ACO-OFDM: odd-bin frame, inverse transform, clip at zero.
pub fn modulate_aco(symbols: &[Complex64], n: usize) -> Result<TimeFrame> {
    let x = inverse_transform(&aco_spectral_frame(symbols, n)?)?;
    Ok(x.into_iter().map(|v| v.max(0.0)).collect())
}

/// Per-LED drive signals, one row per transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct SmFrame {
    rows: DMatrix<f64>,
    active: Vec<usize>,
}

impl SmFrame {
    /// `active[k]` is the 0-based LED that carries sample `k`.
    pub fn new(rows: DMatrix<f64>, active: Vec<usize>) -> Result<Self> {
        if active.len() != rows.ncols() {
            return Err(Error::InputSize {
                expected: rows.ncols(),
                actual: active.len(),
            });
        }
        for (k, &a) in active.iter().enumerate() {
            if a >= rows.nrows() {
                return Err(Error::Domain(format!(
                    "active LED {a} out of range at sample {k}"
                )));
            }
            for i in 0..rows.nrows() {
                let v = rows[(i, k)];
                if v < 0.0 || (i != a && v != 0.0) {
                    return Err(Error::Invariant(format!(
                        "sample {k} of LED {i} is {v}; only the active LED may emit"
                    )));
                }
            }
        }
        Ok(Self { rows, active })
    }

    pub fn transmitters(&self) -> usize {
        self.rows.nrows()
    }

    pub fn len(&self) -> usize {
        self.rows.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.ncols() == 0
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    /// 0-based active LED per sample.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn row(&self, led: usize) -> Vec<f64> {
        self.rows.row(led).iter().copied().collect()
    }

    /// Total emitted electrical energy, sum of squares over all LEDs.
    pub fn energy(&self) -> f64 {
        self.rows.iter().map(|v| v * v).sum()
    }
}

/// NDC split: positive samples (and exact zeros) on LED 1, magnitudes of
/// negative samples on LED 2.
pub fn modulate_ndc(samples: &[f64]) -> SmFrame {
    let n = samples.len();
    let mut rows = DMatrix::zeros(2, n);
    let mut active = Vec::with_capacity(n);
    for (k, &x) in samples.iter().enumerate() {
        if x >= 0.0 {
            rows[(0, k)] = x;
            active.push(0);
        } else {
            rows[(1, k)] = -x;
            active.push(1);
        }
    }
    SmFrame { rows, active }
}

/// How OSM index bits are spread over the time samples of a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum IndexMapping {
    /// One group of `log2(N_t)` bits per time sample.
    #[serde(rename = "per-sample")]
    PerSample,
    /// One group of bits per data subcarrier; each group selects the LED for
    /// a fixed block of samples (see [`IndexLayout`]).
    #[default]
    #[serde(rename = "per-subcarrier")]
    PerSubcarrier,
}

impl IndexMapping {
    pub fn name(self) -> &'static str {
        match self {
            IndexMapping::PerSample => "per-sample",
            IndexMapping::PerSubcarrier => "per-subcarrier",
        }
    }

    /// Layout used by `scheme` at frame size `n`. NDC has no index bits and
    /// gets the per-sample layout (unused).
    pub fn layout(self, scheme: super::Scheme, n: usize) -> IndexLayout {
        match (self, scheme) {
            (IndexMapping::PerSubcarrier, super::Scheme::DcoOsm) => IndexLayout::dco_subcarrier(n),
            (IndexMapping::PerSubcarrier, super::Scheme::AcoOsm) => IndexLayout::aco_subcarrier(n),
            _ => IndexLayout::per_sample(n),
        }
    }
}

impl std::str::FromStr for IndexMapping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-sample" | "sample" => Ok(IndexMapping::PerSample),
            "per-subcarrier" | "subcarrier" => Ok(IndexMapping::PerSubcarrier),
            other => Err(Error::Parse(format!("unknown index mapping `{other}`"))),
        }
    }
}

/// Partition of sample positions into groups that share one LED choice.
///
/// Samples outside every group always go to LED 1 and carry no index bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexLayout {
    n: usize,
    groups: Vec<Vec<usize>>,
}

impl IndexLayout {
    pub fn new(n: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for g in &groups {
            if g.is_empty() {
                return Err(Error::Domain("empty index group".into()));
            }
            for &k in g {
                if k >= n || seen[k] {
                    return Err(Error::Domain(format!(
                        "sample {k} is out of range or in two groups"
                    )));
                }
                seen[k] = true;
            }
        }
        Ok(Self { n, groups })
    }

    pub fn per_sample(n: usize) -> Self {
        Self {
            n,
            groups: (0..n).map(|k| vec![k]).collect(),
        }
    }

    /// `(N-2)/2` consecutive sample pairs, one per data subcarrier. The last
    /// two samples stay on LED 1.
    pub fn dco_subcarrier(n: usize) -> Self {
        let count = n.saturating_sub(2) / 2;
        Self {
            n,
            groups: (0..count).map(|g| vec![2 * g, 2 * g + 1]).collect(),
        }
    }

    /// `N/4` groups `{2g, 2g+1, 2g+N/2, 2g+1+N/2}`. Each group holds two
    /// antisymmetric pairs, so after clipping it always has nonzero samples.
    pub fn aco_subcarrier(n: usize) -> Self {
        let h = n / 2;
        Self {
            n,
            groups: (0..n / 4)
                .map(|g| vec![2 * g, 2 * g + 1, 2 * g + h, 2 * g + 1 + h])
                .collect(),
        }
    }

    pub fn frame_len(&self) -> usize {
        self.n
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Index bits consumed per frame with `n_t` LEDs.
    pub fn index_bits(&self, n_t: usize) -> usize {
        self.groups.len() * led_bits(n_t)
    }
}

/// `log2(n_t)`; `n_t` must be a power of two.
pub(crate) fn led_bits(n_t: usize) -> usize {
    n_t.trailing_zeros() as usize
}

fn check_transmitters(n_t: usize) -> Result<()> {
    if n_t == 0 || !n_t.is_power_of_two() {
        return Err(Error::Domain(format!(
            "OSM needs a power-of-two LED count, got {n_t}"
        )));
    }
    Ok(())
}

/// Conventional OSM: sample `k` goes to the LED named by the `k`-th group of
/// `log2(N_t)` index bits (MSB first, all-zero bits select LED 1).
pub fn osm_assign(samples: &[f64], index_bits: &[u8], n_t: usize) -> Result<SmFrame> {
    osm_assign_grouped(
        samples,
        index_bits,
        n_t,
        &IndexLayout::per_sample(samples.len()),
    )
}

/// OSM with an arbitrary [`IndexLayout`].
pub fn osm_assign_grouped(
    samples: &[f64],
    index_bits: &[u8],
    n_t: usize,
    layout: &IndexLayout,
) -> Result<SmFrame> {
    check_transmitters(n_t)?;
    if layout.frame_len() != samples.len() {
        return Err(Error::InputSize {
            expected: layout.frame_len(),
            actual: samples.len(),
        });
    }
    if let Some(k) = samples.iter().position(|&v| !(v >= 0.0)) {
        return Err(Error::Domain(format!(
            "OSM needs a unipolar waveform; sample {k} is {}",
            samples[k]
        )));
    }
    let per = led_bits(n_t);
    let needed = layout.index_bits(n_t);
    if index_bits.len() != needed {
        return Err(Error::InputSize {
            expected: needed,
            actual: index_bits.len(),
        });
    }
    let mut active = vec![0usize; samples.len()];
    if per > 0 {
        for (g, chunk) in layout.groups().iter().zip(index_bits.chunks_exact(per)) {
            let led = bits_to_label(chunk);
            for &k in g {
                active[k] = led;
            }
        }
    }
    let mut rows = DMatrix::zeros(n_t, samples.len());
    for (k, (&v, &a)) in samples.iter().zip(&active).enumerate() {
        rows[(a, k)] = v;
    }
    Ok(SmFrame { rows, active })
}

/// Index bits for the LED choices in `active`, read back through `layout`.
/// Each group uses the LED of its first sample.
pub(crate) fn layout_bits(active: &[usize], n_t: usize, layout: &IndexLayout, out: &mut Vec<u8>) {
    let per = led_bits(n_t);
    let mut buf = vec![0u8; per];
    for g in layout.groups() {
        label_to_bits(active[g[0]], &mut buf);
        out.extend_from_slice(&buf);
    }
}
