//! Zero-forcing detection and bit recovery.

use crate::channel::ChannelMatrix;
use crate::modem::{
    forward_transform, label_to_bits, layout_bits, qam_demap, IndexLayout, QamConstellation,
    Scheme, TimeFrame,
};
use crate::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// How NDC rebuilds the bipolar sample from the two equalised branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Reconstruction {
    /// Take the branch picked by the index detector, negated for LED 2.
    #[default]
    #[serde(rename = "sign-select")]
    SignSelect,
    /// `G(1,k) - G(2,k)`; no index detection, but both noise terms survive.
    #[serde(rename = "subtract")]
    Subtract,
}

impl Reconstruction {
    pub fn name(self) -> &'static str {
        match self {
            Reconstruction::SignSelect => "sign-select",
            Reconstruction::Subtract => "subtract",
        }
    }
}

impl std::str::FromStr for Reconstruction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sign-select" | "select" => Ok(Reconstruction::SignSelect),
            "subtract" | "subtraction" => Ok(Reconstruction::Subtract),
            other => Err(Error::Parse(format!("unknown reconstruction `{other}`"))),
        }
    }
}

/// `N_t x N` matrix of per-LED estimates after ZF.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualizedBlock {
    g: DMatrix<f64>,
}

impl EqualizedBlock {
    pub fn new(g: DMatrix<f64>) -> Self {
        Self { g }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn transmitters(&self) -> usize {
        self.g.nrows()
    }

    pub fn len(&self) -> usize {
        self.g.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.g.ncols() == 0
    }
}

/// `G = H^{-1} Y`.
pub fn zf_equalize(h: &ChannelMatrix, y: &DMatrix<f64>) -> Result<EqualizedBlock> {
    let inv = h.inverse()?;
    if y.nrows() != inv.ncols() {
        return Err(Error::InputSize {
            expected: inv.ncols(),
            actual: y.nrows(),
        });
    }
    Ok(EqualizedBlock { g: inv * y })
}

fn argmax<I: Iterator<Item = f64>>(values: I) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    best
}

/// Per-sample argmax over the LED rows (0-based; ties go to the lower LED).
pub fn detect_active_index(g: &EqualizedBlock) -> Vec<usize> {
    g.g.column_iter()
        .map(|col| argmax(col.iter().copied()))
        .collect()
}

/// Argmax of the group-summed estimates; every sample of a group gets the
/// group's decision. Samples outside all groups are assigned LED 1.
pub fn detect_group_index(g: &EqualizedBlock, layout: &IndexLayout) -> Result<Vec<usize>> {
    if layout.frame_len() != g.len() {
        return Err(Error::InputSize {
            expected: layout.frame_len(),
            actual: g.len(),
        });
    }
    let mut active = vec![0usize; g.len()];
    for group in layout.groups() {
        let led = argmax((0..g.transmitters()).map(|i| group.iter().map(|&k| g.g[(i, k)]).sum()));
        for &k in group {
            active[k] = led;
        }
    }
    Ok(active)
}

fn require_two(g: &EqualizedBlock) -> Result<()> {
    if g.transmitters() != 2 {
        return Err(Error::InputSize {
            expected: 2,
            actual: g.transmitters(),
        });
    }
    Ok(())
}

/// `G(l(k), k)` for every `k`.
pub fn selected_samples(g: &EqualizedBlock, active: &[usize]) -> Vec<f64> {
    active
        .iter()
        .enumerate()
        .map(|(k, &a)| g.g[(a, k)])
        .collect()
}

/// `x'(k) = G(1,k)` if LED 1 was detected, `-G(2,k)` otherwise.
pub fn reconstruct_sign_select(g: &EqualizedBlock, active: &[usize]) -> Result<TimeFrame> {
    require_two(g)?;
    if active.len() != g.len() {
        return Err(Error::InputSize {
            expected: g.len(),
            actual: active.len(),
        });
    }
    Ok(active
        .iter()
        .enumerate()
        .map(|(k, &a)| if a == 0 { g.g[(0, k)] } else { -g.g[(1, k)] })
        .collect())
}

/// `x'(k) = G(1,k) - G(2,k)`.
pub fn reconstruct_subtract(g: &EqualizedBlock) -> Result<TimeFrame> {
    require_two(g)?;
    Ok(g.g.column_iter().map(|c| c[0] - c[1]).collect())
}

/// Data bins of a received frame, ready for demapping. ACO bins are doubled
/// to undo the clipping loss.
pub fn data_bins(samples: &[f64], scheme: Scheme) -> Vec<num_complex::Complex64> {
    let n = samples.len();
    let spec = forward_transform(samples);
    match scheme {
        Scheme::Ndc | Scheme::DcoOsm => spec[1..n / 2].to_vec(),
        Scheme::AcoOsm => (0..n / 4).map(|i| spec[2 * i + 1] * 2.0).collect(),
    }
}

/// FFT, data-bin extraction and ML demapping, appending bits to `out`.
pub fn demodulate_into(
    samples: &[f64],
    constellation: &QamConstellation,
    scheme: Scheme,
    out: &mut Vec<u8>,
) -> Result<()> {
    let n = samples.len();
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::InputSize {
            expected: n.next_power_of_two().max(8),
            actual: n,
        });
    }
    let mut buf = vec![0u8; constellation.bits_per_symbol()];
    for sym in data_bins(samples, scheme) {
        label_to_bits(qam_demap(sym, constellation), &mut buf);
        out.extend_from_slice(&buf);
    }
    Ok(())
}

pub fn demodulate_frame(
    samples: &[f64],
    constellation: &QamConstellation,
    scheme: Scheme,
) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    demodulate_into(samples, constellation, scheme, &mut out)?;
    Ok(out)
}

/// OSM bit recovery: index bits from the detected LEDs (read through
/// `layout`), data bits from the selected branch values.
pub fn recover_osm_bits(
    g: &EqualizedBlock,
    active: &[usize],
    scheme: Scheme,
    constellation: &QamConstellation,
    layout: &IndexLayout,
) -> Result<(Vec<u8>, Vec<u8>)> {
    if scheme == Scheme::Ndc {
        return Err(Error::Domain(
            "NDC carries no OSM index bits; use sign-select or subtract".into(),
        ));
    }
    if active.len() != g.len() || layout.frame_len() != g.len() {
        return Err(Error::InputSize {
            expected: g.len(),
            actual: active.len(),
        });
    }
    let mut index = Vec::new();
    layout_bits(active, g.transmitters(), layout, &mut index);
    let data = demodulate_frame(&selected_samples(g, active), constellation, scheme)?;
    Ok((index, data))
}
