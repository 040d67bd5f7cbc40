use super::energy::{energy_per_bit, noise_sigma_for};
use super::rng::{substream, CALIBRATION_POINT};
use crate::channel::{propagate_block, ChannelMatrix, NoiseModel};
use crate::modem::{
    build_spectral_frame, inverse_transform, led_bits, modulate_aco, modulate_dco, modulate_ndc,
    osm_assign_grouped, IndexLayout, IndexMapping, QamConstellation, Scheme, SmFrame,
};
use crate::receiver::{
    data_bins, detect_active_index, detect_group_index, reconstruct_sign_select,
    reconstruct_subtract, selected_samples, zf_equalize, Reconstruction,
};
use crate::{Error, Executor, Result};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Frames per scheduling batch. Stopping decisions are taken between
/// batches, so this is part of the determinism contract.
pub const BATCH_FRAMES: u64 = 32;
/// Frames used to measure the energy per bit.
pub const CALIBRATION_FRAMES: u64 = 256;

/// Everything that defines one BER curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub scheme: Scheme,
    /// Label echoed into the output.
    pub channel_id: String,
    pub channel: ChannelMatrix,
    pub order: usize,
    pub n: usize,
    pub n_t: usize,
    /// DC bias level in dB, DCO-OSM only.
    pub bias_db: Option<f64>,
    /// NDC only.
    pub reconstruction: Reconstruction,
    /// OSM schemes only.
    pub mapping: IndexMapping,
    pub ebn0_db: Vec<f64>,
    pub min_bits: u64,
    pub min_errors: u64,
    pub max_frames: u64,
    pub seed: u64,
}

impl SweepConfig {
    /// Defaults: N = 2048, two LEDs, 1e6 bits / 100 errors per point,
    /// at most 1e5 frames.
    pub fn new(scheme: Scheme, channel_id: &str, channel: ChannelMatrix, order: usize) -> Self {
        Self {
            scheme,
            channel_id: channel_id.to_string(),
            channel,
            order,
            n: 2048,
            n_t: 2,
            bias_db: None,
            reconstruction: Reconstruction::SignSelect,
            mapping: IndexMapping::PerSubcarrier,
            ebn0_db: Vec::new(),
            min_bits: 1_000_000,
            min_errors: 100,
            max_frames: 100_000,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || !self.n.is_power_of_two() {
            return Err(Error::Domain(format!(
                "frame size must be a power of two >= 8, got {}",
                self.n
            )));
        }
        if self.n_t == 0 || !self.n_t.is_power_of_two() {
            return Err(Error::Domain(format!(
                "LED count must be a power of two, got {}",
                self.n_t
            )));
        }
        if self.scheme == Scheme::Ndc && self.n_t != 2 {
            return Err(Error::Domain("NDC is defined for two LEDs".into()));
        }
        if self.scheme == Scheme::AcoOsm && self.n < 16 {
            return Err(Error::Domain("ACO needs N >= 16".into()));
        }
        if self.channel.transmitters() != self.n_t || self.channel.receivers() != self.n_t {
            return Err(Error::InputSize {
                expected: self.n_t * self.n_t,
                actual: self.channel.gains().len(),
            });
        }
        self.channel.inverse()?;
        match (self.scheme, self.bias_db) {
            (Scheme::DcoOsm, None) => {
                return Err(Error::Domain("DCO-OSM needs a bias level".into()))
            }
            (Scheme::DcoOsm, Some(b)) if !(b >= 0.0) => {
                return Err(Error::Domain(format!("bias must be >= 0 dB, got {b}")))
            }
            _ => {}
        }
        if self.ebn0_db.is_empty() {
            return Err(Error::Domain("empty Eb/N0 list".into()));
        }
        if self.ebn0_db.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(Error::Domain("Eb/N0 values must be numbers or +inf".into()));
        }
        if self.max_frames == 0 {
            return Err(Error::Domain("max_frames must be positive".into()));
        }
        QamConstellation::new(self.order)?;
        Ok(())
    }
}

/// One simulated operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub ebn0_db: f64,
    pub sigma_n: f64,
    pub frames: u64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    /// Frame cap hit before the error target.
    pub low_confidence: bool,
}

/// Curve metadata echoing the configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub scheme: Scheme,
    pub channel: String,
    #[serde(rename = "M")]
    pub order: usize,
    pub n: usize,
    pub n_t: usize,
    pub bias_db: Option<f64>,
    pub reconstruction: Option<Reconstruction>,
    pub mapping: Option<IndexMapping>,
    pub seed: u64,
    /// Measured energy per bit.
    pub eb: f64,
    pub bits_per_frame: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerCurve {
    pub meta: CurveMeta,
    pub points: Vec<BerPoint>,
    pub warnings: Vec<String>,
}

impl BerCurve {
    pub fn has_low_confidence(&self) -> bool {
        self.points.iter().any(|p| p.low_confidence)
    }
}

/// Precomputed per-configuration state.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SweepConfig,
    constellation: QamConstellation,
    layout: IndexLayout,
    data_symbols: usize,
    index_groups: usize,
    eb: f64,
}

struct Tx {
    frame: SmFrame,
    data: Vec<usize>,
    leds: Vec<usize>,
}

impl Simulator {
    /// Validates `cfg` and measures the energy per bit on calibration frames.
    pub fn new(cfg: SweepConfig) -> Result<Self> {
        cfg.validate()?;
        let constellation = QamConstellation::new(cfg.order)?;
        let layout = cfg.mapping.layout(cfg.scheme, cfg.n);
        let index_groups = match cfg.scheme {
            Scheme::Ndc => 0,
            _ if cfg.n_t == 1 => 0,
            _ => layout.groups().len(),
        };
        let mut sim = Self {
            data_symbols: cfg.scheme.data_symbols(cfg.n),
            cfg,
            constellation,
            layout,
            index_groups,
            eb: f64::NAN,
        };
        let frames = (0..CALIBRATION_FRAMES)
            .map(|f| {
                let mut rng = substream(sim.cfg.seed, CALIBRATION_POINT, f);
                sim.transmit(&mut rng).map(|t| t.frame)
            })
            .collect::<Result<Vec<_>>>()?;
        sim.eb = energy_per_bit(&frames, sim.bits_per_frame(), sim.cfg.n_t)?;
        Ok(sim)
    }

    pub fn config(&self) -> &SweepConfig {
        &self.cfg
    }

    pub fn energy_per_bit(&self) -> f64 {
        self.eb
    }

    /// Information bits per frame: data, plus index bits for OSM.
    pub fn bits_per_frame(&self) -> usize {
        self.data_symbols * self.constellation.bits_per_symbol()
            + self.index_groups * led_bits(self.cfg.n_t)
    }

    fn transmit<R: Rng>(&self, rng: &mut R) -> Result<Tx> {
        let m = self.constellation.order();
        let data: Vec<usize> = (0..self.data_symbols).map(|_| rng.random_range(0..m)).collect();
        let symbols: Vec<Complex64> = data.iter().map(|&l| self.constellation.point(l)).collect();
        let n_t = self.cfg.n_t;
        let leds: Vec<usize> = (0..self.index_groups)
            .map(|_| rng.random_range(0..n_t))
            .collect();
        let frame = match self.cfg.scheme {
            Scheme::Ndc => {
                let x = inverse_transform(&build_spectral_frame(&symbols, self.cfg.n)?)?;
                modulate_ndc(&x)
            }
            Scheme::DcoOsm => {
                let x = inverse_transform(&build_spectral_frame(&symbols, self.cfg.n)?)?;
                let bias = self.cfg.bias_db.unwrap_or(0.0);
                self.assign(&modulate_dco(&x, bias)?.waveform, &leds)?
            }
            Scheme::AcoOsm => self.assign(&modulate_aco(&symbols, self.cfg.n)?, &leds)?,
        };
        Ok(Tx { frame, data, leds })
    }

    fn assign(&self, waveform: &[f64], leds: &[usize]) -> Result<SmFrame> {
        let per = led_bits(self.cfg.n_t);
        let mut bits = Vec::with_capacity(leds.len() * per);
        let mut buf = vec![0u8; per];
        for &l in leds {
            crate::modem::label_to_bits(l, &mut buf);
            bits.extend_from_slice(&buf);
        }
        if self.index_groups == 0 {
            return osm_assign_grouped(
                waveform,
                &[],
                self.cfg.n_t,
                &IndexLayout::new(self.cfg.n, Vec::new())?,
            );
        }
        osm_assign_grouped(waveform, &bits, self.cfg.n_t, &self.layout)
    }

    /// Simulates one frame, returning `(bits, bit errors)`.
    pub fn simulate_frame<R: Rng>(&self, noise: &NoiseModel, rng: &mut R) -> Result<(u64, u64)> {
        let tx = self.transmit(rng)?;
        let y = propagate_block(&self.cfg.channel, tx.frame.rows(), noise, rng)?;
        let g = zf_equalize(&self.cfg.channel, &y)?;
        let mut errors = 0u64;
        let samples = match self.cfg.scheme {
            Scheme::Ndc => match self.cfg.reconstruction {
                Reconstruction::SignSelect => reconstruct_sign_select(&g, &detect_active_index(&g))?,
                Reconstruction::Subtract => reconstruct_subtract(&g)?,
            },
            Scheme::DcoOsm | Scheme::AcoOsm => {
                let active = if self.index_groups == 0 {
                    vec![0; self.cfg.n]
                } else {
                    detect_group_index(&g, &self.layout)?
                };
                for (grp, &sent) in self.layout.groups().iter().zip(&tx.leds) {
                    errors += u64::from((active[grp[0]] ^ sent).count_ones());
                }
                selected_samples(&g, &active)
            }
        };
        for (sym, &sent) in data_bins(&samples, self.cfg.scheme).into_iter().zip(&tx.data) {
            errors += u64::from((self.constellation.nearest_label(sym) ^ sent).count_ones());
        }
        Ok((self.bits_per_frame() as u64, errors))
    }

    /// Runs frames of point `point` in fixed batches until both the bit and
    /// error targets are met or the frame cap is reached.
    pub fn run_point(&self, point: u64, ebn0_db: f64, exec: &Executor) -> Result<BerPoint> {
        let sigma_n = noise_sigma_for(ebn0_db, self.eb)?;
        let noise = NoiseModel::new(sigma_n)?;
        let noiseless = sigma_n == 0.0;
        let (mut frames, mut bits, mut errors) = (0u64, 0u64, 0u64);
        while frames < self.cfg.max_frames {
            let end = (frames + BATCH_FRAMES).min(self.cfg.max_frames);
            let results = exec.map_range(frames..end, |f| {
                let mut rng = substream(self.cfg.seed, point, f);
                self.simulate_frame(&noise, &mut rng)
            });
            for r in results {
                let (b, e) = r?;
                bits += b;
                errors += e;
            }
            frames = end;
            if bits >= self.cfg.min_bits && (noiseless || errors >= self.cfg.min_errors) {
                break;
            }
        }
        Ok(BerPoint {
            ebn0_db,
            sigma_n,
            frames,
            bits,
            errors,
            ber: errors as f64 / bits as f64,
            low_confidence: !noiseless && errors < self.cfg.min_errors,
        })
    }

    fn meta(&self) -> CurveMeta {
        let ndc = self.cfg.scheme == Scheme::Ndc;
        CurveMeta {
            scheme: self.cfg.scheme,
            channel: self.cfg.channel_id.clone(),
            order: self.cfg.order,
            n: self.cfg.n,
            n_t: self.cfg.n_t,
            bias_db: if self.cfg.scheme == Scheme::DcoOsm {
                self.cfg.bias_db
            } else {
                None
            },
            reconstruction: ndc.then_some(self.cfg.reconstruction),
            mapping: (!ndc).then_some(self.cfg.mapping),
            seed: self.cfg.seed,
            eb: self.eb,
            bits_per_frame: self.bits_per_frame(),
        }
    }
}

/// Single point with point index 0.
pub fn run_point(cfg: &SweepConfig, ebn0_db: f64, exec: &Executor) -> Result<BerPoint> {
    Simulator::new(cfg.clone())?.run_point(0, ebn0_db, exec)
}

/// All points of `cfg`, sorted by Eb/N0. Point `i` of the sorted list uses
/// substream key `(seed, i)`.
pub fn run_sweep(cfg: &SweepConfig, exec: &Executor) -> Result<BerCurve> {
    let sim = Simulator::new(cfg.clone())?;
    let mut grid = cfg.ebn0_db.clone();
    grid.sort_by(f64::total_cmp);
    let points = grid
        .iter()
        .enumerate()
        .map(|(i, &e)| sim.run_point(i as u64, e, exec))
        .collect::<Result<Vec<_>>>()?;
    let warnings = monotonicity_warnings(&points);
    Ok(BerCurve {
        meta: sim.meta(),
        points,
        warnings,
    })
}

/// Flags BER increases larger than three binomial standard deviations.
fn monotonicity_warnings(points: &[BerPoint]) -> Vec<String> {
    let sd = |p: &BerPoint| p.ber * (1.0 - p.ber) / p.bits.max(1) as f64;
    points
        .windows(2)
        .filter(|w| w[1].ber > w[0].ber + 3.0 * (sd(&w[0]) + sd(&w[1])).sqrt())
        .map(|w| {
            format!(
                "BER rises from {:.3e} at {} dB to {:.3e} at {} dB",
                w[0].ber, w[0].ebn0_db, w[1].ber, w[1].ebn0_db
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(scheme: Scheme, order: usize) -> SweepConfig {
        let mut c = SweepConfig::new(scheme, "H8", ChannelMatrix::preset("H8").unwrap(), order);
        c.n = 64;
        c.min_bits = 20_000;
        c.min_errors = 50;
        c.max_frames = 400;
        c.ebn0_db = vec![12.0, 6.0];
        c.seed = 9;
        if scheme == Scheme::DcoOsm {
            c.bias_db = Some(7.0);
        }
        c
    }

    #[test]
    fn validation() {
        let mut c = small(Scheme::Ndc, 16);
        c.ebn0_db.clear();
        assert!(c.validate().is_err());
        let mut c = small(Scheme::DcoOsm, 8);
        c.bias_db = None;
        assert!(c.validate().is_err());
        let mut c = small(Scheme::Ndc, 16);
        c.channel = ChannelMatrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        assert_eq!(c.validate(), Err(Error::SingularMatrix));
    }

    #[test]
    fn ndc_eb_inverts_signal_variance() {
        let sim = Simulator::new(small(Scheme::Ndc, 16)).unwrap();
        // unit-energy symbols on N/2-1 bins: sigma_s^2 = (N-2)/N
        let expected = 2.0 * 64.0 * 2.0 * (62.0 / 64.0) / (62.0 * 4.0);
        assert!((sim.energy_per_bit() / expected - 1.0).abs() < 0.02);
        assert_eq!(sim.bits_per_frame(), 31 * 4);
    }

    #[test]
    fn bits_per_frame_counts_index_bits() {
        let d = Simulator::new(small(Scheme::DcoOsm, 8)).unwrap();
        assert_eq!(d.bits_per_frame(), 31 * 3 + 31);
        let a = Simulator::new(small(Scheme::AcoOsm, 32)).unwrap();
        assert_eq!(a.bits_per_frame(), 16 * 5 + 16);
        let mut c = small(Scheme::AcoOsm, 32);
        c.mapping = IndexMapping::PerSample;
        assert_eq!(Simulator::new(c).unwrap().bits_per_frame(), 16 * 5 + 64);
    }

    #[test]
    fn higher_bias_costs_energy() {
        let lo = Simulator::new(SweepConfig {
            bias_db: Some(5.0),
            ..small(Scheme::DcoOsm, 8)
        })
        .unwrap();
        let hi = Simulator::new(small(Scheme::DcoOsm, 8)).unwrap();
        assert!(hi.energy_per_bit() > lo.energy_per_bit());
    }

    #[test]
    fn noiseless_points_are_error_free() {
        for (scheme, m) in [(Scheme::Ndc, 16), (Scheme::AcoOsm, 32)] {
            let p = run_point(&small(scheme, m), f64::INFINITY, &Executor::sequential()).unwrap();
            assert_eq!(p.errors, 0);
            assert!(p.bits >= 20_000);
            assert!(!p.low_confidence);
        }
    }

    #[test]
    fn sweep_is_sorted_and_echoes_config() {
        let c = small(Scheme::Ndc, 16);
        let curve = run_sweep(&c, &Executor::sequential()).unwrap();
        assert_eq!(curve.points[0].ebn0_db, 6.0);
        assert!(curve.points[0].ber > curve.points[1].ber);
        assert_eq!(curve.meta.channel, "H8");
        assert_eq!(curve.meta.order, 16);
        assert_eq!(curve.meta.seed, 9);
        assert_eq!(curve.meta.reconstruction, Some(Reconstruction::SignSelect));
        assert_eq!(curve.meta.mapping, None);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let c = small(Scheme::DcoOsm, 8);
        let a = run_sweep(&c, &Executor::sequential()).unwrap();
        let b = run_sweep(&c, &Executor::with_workers(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn warnings_flag_large_rises() {
        let p = |e: f64, ber: f64| BerPoint {
            ebn0_db: e,
            sigma_n: 1.0,
            frames: 1,
            bits: 1_000_000,
            errors: (ber * 1e6) as u64,
            ber,
            low_confidence: false,
        };
        assert!(monotonicity_warnings(&[p(1.0, 1e-3), p(2.0, 9e-4)]).is_empty());
        assert_eq!(monotonicity_warnings(&[p(1.0, 1e-3), p(2.0, 2e-3)]).len(), 1);
    }
}
