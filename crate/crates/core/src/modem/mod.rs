//! Bit-to-waveform conversion.

mod ofdm;
mod qam;
mod unipolar;

pub use ofdm::{
    build_spectral_frame, forward_transform, inverse_transform, SpectralFrame, TimeFrame,
};
pub use qam::{bits_to_label, label_to_bits, qam_demap, qam_map, QamConstellation};
pub use unipolar::{
    aco_spectral_frame, bias_factor, modulate_aco, modulate_dco, modulate_ndc, osm_assign,
    osm_assign_grouped, DcoWaveform, IndexLayout, IndexMapping, SmFrame,
};
pub(crate) use unipolar::{layout_bits, led_bits};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Unipolar OFDM transmission scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Non-DC-biased OFDM: the LED index carries the sample sign.
    #[serde(rename = "ndc")]
    Ndc,
    /// DC-biased optical OFDM with OSM index bits.
    #[serde(rename = "dco-osm")]
    DcoOsm,
    /// Asymmetrically clipped optical OFDM with OSM index bits.
    #[serde(rename = "aco-osm")]
    AcoOsm,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Ndc => "ndc",
            Scheme::DcoOsm => "dco-osm",
            Scheme::AcoOsm => "aco-osm",
        }
    }

    /// Number of data-carrying QAM symbols in one frame of size `n`.
    pub fn data_symbols(self, n: usize) -> usize {
        match self {
            Scheme::Ndc | Scheme::DcoOsm => n / 2 - 1,
            Scheme::AcoOsm => n / 4,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ndc" | "ndc-ofdm" => Ok(Scheme::Ndc),
            "dco" | "dco-osm" | "dco-ofdm" => Ok(Scheme::DcoOsm),
            "aco" | "aco-osm" | "aco-ofdm" => Ok(Scheme::AcoOsm),
            other => Err(crate::Error::Parse(format!("unknown scheme `{other}`"))),
        }
    }
}
