//! Line-of-sight optical MIMO channel.

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt;

const INVERSE_TOL: f64 = 1e-9;

/// Geometry of one LED-photodiode link. Angles are in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkGeometry {
    /// Transmitter half-power semiangle.
    pub semiangle: f64,
    /// Detector area in m².
    pub detector_area: f64,
    /// Link distance in m.
    pub distance: f64,
    pub radiant_angle: f64,
    pub incident_angle: f64,
    #[serde(default = "one")]
    pub filter_gain: f64,
    #[serde(default = "one")]
    pub concentrator_gain: f64,
    /// Receiver field of view.
    pub fov: f64,
}

fn one() -> f64 {
    1.0
}

impl LinkGeometry {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::Domain(format!("invalid {what}: {v}")));
        if !(self.detector_area > 0.0) {
            return bad("detector area", self.detector_area);
        }
        if !(self.distance > 0.0) {
            return bad("distance", self.distance);
        }
        if !(self.semiangle > 0.0 && self.semiangle < 90.0) {
            return bad("semiangle", self.semiangle);
        }
        if !(self.radiant_angle >= 0.0) {
            return bad("radiant angle", self.radiant_angle);
        }
        if !(self.incident_angle >= 0.0) {
            return bad("incident angle", self.incident_angle);
        }
        if !(self.fov >= 0.0) {
            return bad("field of view", self.fov);
        }
        if !(self.filter_gain >= 0.0 && self.concentrator_gain >= 0.0) {
            return Err(Error::Domain("optical gains must be >= 0".into()));
        }
        Ok(())
    }
}

/// Lambertian order `-ln 2 / ln(cos(semiangle))`.
pub fn lambertian_order(semiangle_deg: f64) -> Result<f64> {
    if !(semiangle_deg > 0.0 && semiangle_deg < 90.0) {
        return Err(Error::Domain(format!(
            "semiangle must lie in (0, 90) degrees, got {semiangle_deg}"
        )));
    }
    Ok(-std::f64::consts::LN_2 / semiangle_deg.to_radians().cos().ln())
}

/// DC gain of a Lambertian LOS link; zero outside the receiver field of view.
pub fn los_gain(g: &LinkGeometry) -> Result<f64> {
    g.validate()?;
    if g.incident_angle > g.fov {
        return Ok(0.0);
    }
    let beta = lambertian_order(g.semiangle)?;
    let d2 = g.distance * g.distance;
    Ok((beta + 1.0) * g.detector_area / (2.0 * std::f64::consts::PI * d2)
        * g.radiant_angle.to_radians().cos().powf(beta)
        * g.filter_gain
        * g.concentrator_gain
        * g.incident_angle.to_radians().cos())
}

/// Real `N_r x N_t` DC-gain matrix with its inverse cached when square.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    gains: DMatrix<f64>,
    inverse: Option<DMatrix<f64>>,
}

impl ChannelMatrix {
    pub fn new(gains: DMatrix<f64>) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::Domain("empty channel matrix".into()));
        }
        if gains.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("channel gains must be finite".into()));
        }
        let inverse = if gains.is_square() {
            gains.clone().try_inverse().filter(|inv| {
                let id = inv * &gains;
                let scale = inv.amax().max(1.0) * gains.amax().max(1.0);
                (id - DMatrix::identity(gains.nrows(), gains.ncols())).amax()
                    <= INVERSE_TOL * scale
            })
        } else {
            None
        };
        Ok(Self { gains, inverse })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Parse("ragged matrix rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flat_map(|row| row.iter().copied()).collect();
        Self::new(DMatrix::from_row_slice(r, c, &flat))
    }

    pub fn gains(&self) -> &DMatrix<f64> {
        &self.gains
    }

    pub fn receivers(&self) -> usize {
        self.gains.nrows()
    }

    pub fn transmitters(&self) -> usize {
        self.gains.ncols()
    }

    /// `H^{-1}`, or [`Error::SingularMatrix`].
    pub fn inverse(&self) -> Result<&DMatrix<f64>> {
        self.inverse.as_ref().ok_or(Error::SingularMatrix)
    }

    pub fn is_invertible(&self) -> bool {
        self.inverse.is_some()
    }

    /// Whitespace-separated rows, one per line. Blank lines and `#` comments
    /// are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| {
                        Error::Parse(format!("line {}: bad number `{tok}`", lineno + 1))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::Parse(format!(
                        "line {}: expected {} columns, found {}",
                        lineno + 1,
                        first.len(),
                        row.len()
                    )));
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse("no matrix rows".into()));
        }
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        Self::from_rows(&refs)
    }

    /// Inverse of [`ChannelMatrix::parse`]; values round-trip exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in 0..self.gains.nrows() {
            let row: Vec<String> = (0..self.gains.ncols())
                .map(|c| format!("{:e}", self.gains[(r, c)]))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// Looks up a preset by id (`H1`..`H8`, `HPrac1`..`HPrac4`).
    pub fn preset(id: &str) -> Result<Self> {
        let key = canonical_id(id)
            .ok_or_else(|| Error::Parse(format!("unknown channel id `{id}`")))?;
        let (_, rows) = PRESETS
            .iter()
            .find(|(name, _)| *name == key)
            .expect("canonical ids are all presets");
        let scale = if key.starts_with("HPrac") { 1e-5 } else { 1.0 };
        let flat: Vec<f64> = rows.iter().map(|v| v * scale).collect();
        Self::new(DMatrix::from_row_slice(2, 2, &flat))
    }
}

impl fmt::Display for ChannelMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

const PRESETS: [(&str, [f64; 4]); 12] = [
    ("H1", [1.0, 0.0, 0.0, 1.0]),
    ("H2", [1.0, 0.3, 0.3, 1.0]),
    ("H3", [1.0, 0.5, 0.5, 1.0]),
    ("H4", [1.0, 0.7, 0.7, 1.0]),
    ("H5", [1.0, 0.0, 0.0, 0.7]),
    ("H6", [1.0, 0.0, 0.3, 0.7]),
    ("H7", [1.0, 0.5, 0.0, 0.7]),
    ("H8", [1.0, 0.5, 0.3, 0.7]),
    // Practical channels are listed in units of 1e-5.
    ("HPrac1", [0.1889, 0.0713, 0.0713, 0.1889]),
    ("HPrac2", [0.3847, 0.1889, 0.1889, 0.3847]),
    ("HPrac3", [0.1889, 0.0713, 0.1157, 0.1889]),
    ("HPrac4", [0.3847, 0.2691, 0.1889, 0.3847]),
];

/// Ids of all preset channels, ideal ones first.
pub fn preset_ids() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(id, _)| *id)
}

/// All twelve presets in order.
pub fn preset_channels() -> Vec<(&'static str, ChannelMatrix)> {
    preset_ids()
        .map(|id| (id, ChannelMatrix::preset(id).expect("preset")))
        .collect()
}

/// Normalises spellings like `h3`, `H_Prac3`, `hprac_3`, `prac3`.
pub fn canonical_id(id: &str) -> Option<&'static str> {
    let squashed: String = id
        .chars()
        .filter(|c| !matches!(c, '_' | '-' | ' '))
        .collect::<String>()
        .to_ascii_lowercase();
    let squashed = squashed.strip_prefix('h').unwrap_or(&squashed).to_string();
    let name = if let Some(num) = squashed.strip_prefix("prac") {
        format!("HPrac{num}")
    } else {
        format!("H{squashed}")
    };
    preset_ids().find(|p| *p == name)
}

/// Real AWGN per receive branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma_n: f64,
}

impl NoiseModel {
    /// `sigma_n` is a standard deviation; zero gives a noiseless channel.
    pub fn new(sigma_n: f64) -> Result<Self> {
        if !(sigma_n >= 0.0) || !sigma_n.is_finite() {
            return Err(Error::Domain(format!("invalid noise std {sigma_n}")));
        }
        Ok(Self { sigma_n })
    }

    pub fn noiseless() -> Self {
        Self { sigma_n: 0.0 }
    }

    /// From the one-sided spectral density, `sigma_n = sqrt(N0 / 2)`.
    pub fn from_n0(n0: f64) -> Result<Self> {
        Self::new((n0 / 2.0).sqrt())
    }

    pub fn sigma(&self) -> f64 {
        self.sigma_n
    }

    pub fn n0(&self) -> f64 {
        2.0 * self.sigma_n * self.sigma_n
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.sigma_n == 0.0 {
            0.0
        } else {
            self.sigma_n * rng.sample::<f64, _>(StandardNormal)
        }
    }
}

/// `y = H s + w` for one sample instant.
pub fn propagate<R: Rng + ?Sized>(
    h: &ChannelMatrix,
    s: &[f64],
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if s.len() != h.transmitters() {
        return Err(Error::InputSize {
            expected: h.transmitters(),
            actual: s.len(),
        });
    }
    let y = &h.gains * DVector::from_column_slice(s);
    Ok(y.iter().map(|v| v + noise.sample(rng)).collect())
}

/// `Y = H S + W` for a whole frame (`S` is `N_t x N`). Noise is drawn
/// column by column, receiver by receiver.
pub fn propagate_block<R: Rng + ?Sized>(
    h: &ChannelMatrix,
    s: &DMatrix<f64>,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if s.nrows() != h.transmitters() {
        return Err(Error::InputSize {
            expected: h.transmitters(),
            actual: s.nrows(),
        });
    }
    let mut y = &h.gains * s;
    for v in y.iter_mut() {
        *v += noise.sample(rng);
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn geometry() -> LinkGeometry {
        LinkGeometry {
            semiangle: 60.0,
            detector_area: 1e-4,
            distance: 2.0,
            radiant_angle: 0.0,
            incident_angle: 0.0,
            filter_gain: 1.0,
            concentrator_gain: 1.0,
            fov: 70.0,
        }
    }

    #[test]
    fn lambertian_orders() {
        assert!((lambertian_order(60.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((lambertian_order(45.0).unwrap() - 2.0).abs() < 1e-12);
        let wide = lambertian_order(89.999).unwrap();
        assert!(wide > 0.0 && wide < 0.1);
        assert!(lambertian_order(90.0).is_err());
        assert!(lambertian_order(0.0).is_err());
    }

    #[test]
    fn gain_worked_example() {
        let h = los_gain(&geometry()).unwrap();
        assert!((h - 2.0 * 1e-4 / (2.0 * std::f64::consts::PI * 4.0)).abs() < 1e-18);
        assert!((h - 7.96e-6).abs() < 1e-8);
        let far = los_gain(&LinkGeometry {
            distance: 4.0,
            ..geometry()
        })
        .unwrap();
        assert!((far * 4.0 - h).abs() < 1e-18);
    }

    #[test]
    fn outside_fov_is_zero() {
        let g = LinkGeometry {
            incident_angle: 70.5,
            ..geometry()
        };
        assert_eq!(los_gain(&g).unwrap(), 0.0);
        assert!(los_gain(&LinkGeometry {
            incident_angle: 70.0,
            ..geometry()
        })
        .unwrap()
            > 0.0);
    }

    #[test]
    fn bad_geometry() {
        assert!(los_gain(&LinkGeometry {
            distance: 0.0,
            ..geometry()
        })
        .is_err());
        assert!(los_gain(&LinkGeometry {
            detector_area: -1.0,
            ..geometry()
        })
        .is_err());
    }

    #[test]
    fn presets_are_exact_and_invertible() {
        let h8 = ChannelMatrix::preset("H8").unwrap();
        assert_eq!(h8.gains(), &DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.3, 0.7]));
        let p4 = ChannelMatrix::preset("H_Prac4").unwrap();
        assert_eq!(p4.gains()[(0, 1)], 0.2691 * 1e-5);
        assert_eq!(
            ChannelMatrix::preset("H1").unwrap().gains(),
            &DMatrix::identity(2, 2)
        );
        for (id, h) in preset_channels() {
            let inv = h.inverse().unwrap();
            let err = (inv * h.gains() - DMatrix::identity(2, 2)).amax();
            assert!(err < 1e-9, "{id}");
        }
        assert_eq!(preset_channels().len(), 12);
        assert!(ChannelMatrix::preset("H9").is_err());
    }

    #[test]
    fn id_aliases() {
        assert_eq!(canonical_id("h3"), Some("H3"));
        assert_eq!(canonical_id("H_Prac3"), Some("HPrac3"));
        assert_eq!(canonical_id("prac-2"), Some("HPrac2"));
        assert_eq!(canonical_id("Hx"), None);
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let h = ChannelMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert_eq!(h.inverse(), Err(Error::SingularMatrix));
    }

    #[test]
    fn text_round_trip() {
        let h = ChannelMatrix::preset("HPrac3").unwrap();
        let back = ChannelMatrix::parse(&h.to_text()).unwrap();
        assert_eq!(back, h);
        let parsed = ChannelMatrix::parse("# comment\n1 0.5\n\n0.3 0.7\n").unwrap();
        assert_eq!(parsed.gains(), ChannelMatrix::preset("H8").unwrap().gains());
        assert!(ChannelMatrix::parse("1 2\n3\n").is_err());
        assert!(ChannelMatrix::parse("1 x\n").is_err());
    }

    #[test]
    fn noiseless_propagation() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p1 = ChannelMatrix::preset("HPrac1").unwrap();
        let y = propagate(&p1, &[1.0, 0.0], &NoiseModel::noiseless(), &mut rng).unwrap();
        assert!((y[0] - 0.1889e-5).abs() < 1e-20 && (y[1] - 0.0713e-5).abs() < 1e-20);
        let id = ChannelMatrix::preset("H1").unwrap();
        let y = propagate(&id, &[0.3, 2.0], &NoiseModel::noiseless(), &mut rng).unwrap();
        assert_eq!(y, vec![0.3, 2.0]);
        assert!(propagate(&id, &[1.0], &NoiseModel::noiseless(), &mut rng).is_err());
    }

    #[test]
    fn noise_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = ChannelMatrix::preset("H1").unwrap();
        let noise = NoiseModel::new(0.3).unwrap();
        let s = DMatrix::zeros(2, 500_000);
        let y = propagate_block(&h, &s, &noise, &mut rng).unwrap();
        let var = y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64;
        assert!((var / 0.09 - 1.0).abs() < 0.01, "{var}");
        assert!((NoiseModel::from_n0(2.0).unwrap().sigma() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fixed_stream_is_reproducible() {
        let h = ChannelMatrix::preset("H8").unwrap();
        let noise = NoiseModel::new(0.1).unwrap();
        let s = DMatrix::from_element(2, 8, 0.5);
        let a = propagate_block(&h, &s, &noise, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = propagate_block(&h, &s, &noise, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }
}
