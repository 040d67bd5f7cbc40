//! Link geometry files for `channel-gain`.
//!
//! ```toml
//! [defaults]
//! semiangle = 60.0
//! detector_area = 1e-4
//! fov = 70.0
//!
//! [[link]]
//! tx = 1
//! rx = 1
//! distance = 2.0
//! radiant_angle = 0.0
//! incident_angle = 0.0
//! ```
//!
//! `tx`/`rx` are 1-based. Every (tx, rx) pair must appear exactly once.

use crate::error::{CliError, Result};
use nalgebra::DMatrix;
use ndc_ofdm::channel::{los_gain, ChannelMatrix, LinkGeometry};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    pub semiangle: Option<f64>,
    pub detector_area: Option<f64>,
    pub distance: Option<f64>,
    pub radiant_angle: Option<f64>,
    pub incident_angle: Option<f64>,
    pub filter_gain: Option<f64>,
    pub concentrator_gain: Option<f64>,
    pub fov: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkEntry {
    pub tx: usize,
    pub rx: usize,
    pub semiangle: Option<f64>,
    pub detector_area: Option<f64>,
    pub distance: Option<f64>,
    pub radiant_angle: Option<f64>,
    pub incident_angle: Option<f64>,
    pub filter_gain: Option<f64>,
    pub concentrator_gain: Option<f64>,
    pub fov: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryFile {
    #[serde(default)]
    pub defaults: Defaults,
    #[serde(default)]
    pub link: Vec<LinkEntry>,
}

impl LinkEntry {
    fn resolve(&self, d: &Defaults) -> Result<LinkGeometry> {
        let need = |v: Option<f64>, dv: Option<f64>, name: &str| {
            v.or(dv).ok_or_else(|| {
                CliError::Config(format!(
                    "link tx={} rx={}: missing `{name}`",
                    self.tx, self.rx
                ))
            })
        };
        let g = LinkGeometry {
            semiangle: need(self.semiangle, d.semiangle, "semiangle")?,
            detector_area: need(self.detector_area, d.detector_area, "detector_area")?,
            distance: need(self.distance, d.distance, "distance")?,
            radiant_angle: need(self.radiant_angle, d.radiant_angle, "radiant_angle")?,
            incident_angle: need(self.incident_angle, d.incident_angle, "incident_angle")?,
            filter_gain: self.filter_gain.or(d.filter_gain).unwrap_or(1.0),
            concentrator_gain: self.concentrator_gain.or(d.concentrator_gain).unwrap_or(1.0),
            fov: need(self.fov, d.fov, "fov")?,
        };
        g.validate().map_err(|e| {
            CliError::Config(format!("link tx={} rx={}: {e}", self.tx, self.rx))
        })?;
        Ok(g)
    }
}

impl GeometryFile {
    /// Gain matrix with receivers on rows and transmitters on columns.
    /// Out-of-view links give 0.
    pub fn gain_matrix(&self) -> Result<ChannelMatrix> {
        if self.link.is_empty() {
            return Err(CliError::Config("no [[link]] entries".into()));
        }
        if self.link.iter().any(|l| l.tx == 0 || l.rx == 0) {
            return Err(CliError::Config("tx and rx are 1-based".into()));
        }
        let n_t = self.link.iter().map(|l| l.tx).max().unwrap_or(0);
        let n_r = self.link.iter().map(|l| l.rx).max().unwrap_or(0);
        let mut h = DMatrix::from_element(n_r, n_t, f64::NAN);
        for l in &self.link {
            let cell = &mut h[(l.rx - 1, l.tx - 1)];
            if !cell.is_nan() {
                return Err(CliError::Config(format!(
                    "duplicate link tx={} rx={}",
                    l.tx, l.rx
                )));
            }
            *cell = los_gain(&l.resolve(&self.defaults)?)?;
        }
        if let Some(pos) = h.iter().position(|v| v.is_nan()) {
            return Err(CliError::Config(format!(
                "missing link tx={} rx={}",
                pos / n_r + 1,
                pos % n_r + 1
            )));
        }
        Ok(ChannelMatrix::new(h)?)
    }
}
