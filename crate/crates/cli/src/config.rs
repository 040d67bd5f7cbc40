//! Run configuration files.
//!
//! A config is TOML with up to three sections:
//!
//! ```toml
//! seed = 7
//!
//! [[simulate]]
//! scheme = "dco-osm"
//! channel = "HPrac3"          # or a list of ids, or an inline [[row], [row]] matrix
//! M = 8
//! bias_db = 5.0
//! ebn0_db = { start = 110.0, stop = 150.0, step = 2.0 }
//!
//! [[analyze]]
//! channel = ["H1", "H2"]
//! M = 16
//! sigma_n = 0.1
//! ebn0_db = [0.0, 5.0, 10.0]
//! with_simulation = true
//!
//! [se_table]
//! ```
//!
//! Unknown keys anywhere are rejected.

use crate::error::{CliError, Result};
use ndc_ofdm::analysis::BussgangModel;
use ndc_ofdm::channel::{canonical_id, ChannelMatrix};
use ndc_ofdm::modem::IndexMapping;
use ndc_ofdm::montecarlo::SweepConfig;
use ndc_ofdm::receiver::Reconstruction;
use ndc_ofdm::{Error, Scheme};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; `--seed` overrides it.
    pub seed: Option<u64>,
    #[serde(default)]
    pub simulate: Vec<SimulateEntry>,
    #[serde(default)]
    pub analyze: Vec<AnalyzeEntry>,
    pub se_table: Option<SeTableEntry>,
}

/// Channel given by preset id(s) or as an inline row-major matrix.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ChannelSpec {
    Id(String),
    Ids(Vec<String>),
    Matrix(Vec<Vec<f64>>),
}

/// Explicit list or an inclusive arithmetic range.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum EbN0Spec {
    List(Vec<f64>),
    Range(EbN0Range),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EbN0Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateEntry {
    pub scheme: String,
    pub channel: Option<ChannelSpec>,
    /// Plain-text matrix file, relative to the config file.
    pub matrix_file: Option<PathBuf>,
    /// Name used in the output for inline or file matrices.
    pub label: Option<String>,
    #[serde(rename = "M")]
    pub order: usize,
    pub bias_db: Option<f64>,
    pub reconstruction: Option<Reconstruction>,
    pub mapping: Option<IndexMapping>,
    pub n: Option<usize>,
    pub n_t: Option<usize>,
    pub ebn0_db: EbN0Spec,
    pub min_bits: Option<u64>,
    pub min_errors: Option<u64>,
    pub max_frames: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeEntry {
    pub channel: Option<ChannelSpec>,
    pub matrix_file: Option<PathBuf>,
    pub label: Option<String>,
    #[serde(rename = "M", default = "default_order")]
    pub order: usize,
    /// Noise standard deviation held fixed while the signal level sweeps.
    #[serde(default = "default_sigma_n")]
    pub sigma_n: f64,
    #[serde(default)]
    pub model: BussgangModel,
    pub n: Option<usize>,
    pub ebn0_db: EbN0Spec,
    /// Also run an NDC Monte Carlo sweep on the same grid.
    #[serde(default)]
    pub with_simulation: bool,
    /// Skip simulating points whose analytic BER is below this.
    pub sim_min_ber: Option<f64>,
    pub reconstruction: Option<Reconstruction>,
    pub min_bits: Option<u64>,
    pub min_errors: Option<u64>,
    pub max_frames: Option<u64>,
}

/// Presence of `[se_table]` asks for the constellation-size table.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SeTableEntry {}

fn default_order() -> usize {
    16
}

fn default_sigma_n() -> f64 {
    0.1
}

/// Where the config came from; file-relative paths resolve against `base`.
#[derive(Debug, Clone)]
pub struct Source {
    pub name: String,
    pub text: String,
    pub base: PathBuf,
}

impl Source {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let name = path
            .file_stem()
            .map_or_else(|| "run".to_string(), |s| s.to_string_lossy().into_owned());
        let base = path.parent().map_or_else(PathBuf::new, Path::to_path_buf);
        Ok(Self { name, text, base })
    }

    pub fn parse(&self) -> Result<RunConfig> {
        toml::from_str(&self.text).map_err(|source| CliError::Toml {
            path: self.name.clone(),
            source,
        })
    }
}

/// One analytic curve, optionally paired with a simulation.
#[derive(Debug, Clone)]
pub struct AnalyzeJob {
    pub channel_id: String,
    pub channel: ChannelMatrix,
    pub order: usize,
    pub sigma_n: f64,
    pub model: BussgangModel,
    pub n: usize,
    pub ebn0_db: Vec<f64>,
    pub sim_min_ber: Option<f64>,
    pub simulation: Option<SweepConfig>,
}

impl EbN0Spec {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            EbN0Spec::List(v) => v.clone(),
            EbN0Spec::Range(r) => {
                if !(r.step > 0.0) || !r.start.is_finite() || !r.stop.is_finite() {
                    return Err(CliError::Config(format!(
                        "Eb/N0 range needs finite bounds and a positive step, got {}..{} by {}",
                        r.start, r.stop, r.step
                    )));
                }
                // Integer stepping keeps the grid free of accumulated drift.
                let count = ((r.stop - r.start) / r.step + 1e-9).floor();
                if count < 0.0 || count > 1e5 {
                    return Err(CliError::Config("Eb/N0 range is empty or huge".into()));
                }
                (0..=count as usize)
                    .map(|i| r.start + r.step * i as f64)
                    .collect()
            }
        };
        if v.is_empty() {
            return Err(CliError::Config("ebn0_db must not be empty".into()));
        }
        Ok(v)
    }
}

fn resolve_channels(
    channel: &Option<ChannelSpec>,
    matrix_file: &Option<PathBuf>,
    label: &Option<String>,
    base: &Path,
) -> Result<Vec<(String, ChannelMatrix)>> {
    let preset = |id: &str| -> Result<(String, ChannelMatrix)> {
        let key = canonical_id(id)
            .ok_or_else(|| CliError::Config(format!("unknown channel id `{id}`")))?;
        Ok((key.to_string(), ChannelMatrix::preset(key)?))
    };
    match (channel, matrix_file) {
        (Some(_), Some(_)) => Err(CliError::Config(
            "give either `channel` or `matrix_file`, not both".into(),
        )),
        (None, None) => Err(CliError::Config("missing `channel`".into())),
        (Some(ChannelSpec::Id(id)), None) => Ok(vec![preset(id)?]),
        (Some(ChannelSpec::Ids(ids)), None) => {
            if ids.is_empty() {
                return Err(CliError::Config("empty channel list".into()));
            }
            ids.iter().map(|id| preset(id)).collect()
        }
        (Some(ChannelSpec::Matrix(rows)), None) => {
            let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
            let h = ChannelMatrix::from_rows(&refs)?;
            Ok(vec![(label.clone().unwrap_or_else(|| "inline".into()), h)])
        }
        (None, Some(file)) => {
            let path = base.join(file);
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let h = ChannelMatrix::parse(&text)?;
            let name = label.clone().unwrap_or_else(|| {
                file.file_stem()
                    .map_or_else(|| "file".into(), |s| s.to_string_lossy().into_owned())
            });
            Ok(vec![(name, h)])
        }
    }
}

fn context(section: &str, idx: usize, err: CliError) -> CliError {
    match err {
        CliError::Config(msg) => CliError::Config(format!("{section}[{idx}]: {msg}")),
        CliError::Core(e @ (Error::Numerical(_) | Error::Invariant(_) | Error::SingularMatrix)) => {
            CliError::Core(e)
        }
        CliError::Core(e) => CliError::Config(format!("{section}[{idx}]: {e}")),
        other => other,
    }
}

impl RunConfig {
    pub fn effective_seed(&self, cli_seed: Option<u64>) -> u64 {
        cli_seed.or(self.seed).unwrap_or(0)
    }

    /// Expands `[[simulate]]` into validated sweeps. Curve `k` gets seed
    /// `master + k` so curves do not share noise.
    pub fn simulate_jobs(&self, master_seed: u64, base: &Path) -> Result<Vec<SweepConfig>> {
        let mut jobs = Vec::new();
        for (idx, e) in self.simulate.iter().enumerate() {
            let build = || -> Result<Vec<SweepConfig>> {
                let scheme: Scheme = e.scheme.parse()?;
                let grid = e.ebn0_db.values()?;
                let mut out = Vec::new();
                for (id, h) in resolve_channels(&e.channel, &e.matrix_file, &e.label, base)? {
                    let mut cfg = SweepConfig::new(scheme, &id, h, e.order);
                    if let Some(n) = e.n {
                        cfg.n = n;
                    }
                    if let Some(n_t) = e.n_t {
                        cfg.n_t = n_t;
                    }
                    if scheme != Scheme::DcoOsm && e.bias_db.is_some() {
                        return Err(CliError::Config("bias_db applies to dco-osm only".into()));
                    }
                    if scheme != Scheme::Ndc && e.reconstruction.is_some() {
                        return Err(CliError::Config("reconstruction applies to ndc only".into()));
                    }
                    if scheme == Scheme::Ndc && e.mapping.is_some() {
                        return Err(CliError::Config("mapping applies to OSM schemes only".into()));
                    }
                    cfg.bias_db = e.bias_db;
                    cfg.reconstruction = e.reconstruction.unwrap_or_default();
                    cfg.mapping = e.mapping.unwrap_or_default();
                    cfg.ebn0_db = grid.clone();
                    apply_stopping(&mut cfg, e.min_bits, e.min_errors, e.max_frames);
                    cfg.validate()?;
                    out.push(cfg);
                }
                Ok(out)
            };
            jobs.extend(build().map_err(|err| context("simulate", idx, err))?);
        }
        for (k, cfg) in jobs.iter_mut().enumerate() {
            cfg.seed = master_seed.wrapping_add(k as u64);
        }
        Ok(jobs)
    }

    /// Expands `[[analyze]]`. Simulation seeds continue after the
    /// `[[simulate]]` curves.
    pub fn analyze_jobs(&self, master_seed: u64, base: &Path) -> Result<Vec<AnalyzeJob>> {
        let mut jobs = Vec::new();
        for (idx, e) in self.analyze.iter().enumerate() {
            let build = || -> Result<Vec<AnalyzeJob>> {
                let grid = e.ebn0_db.values()?;
                if !(e.sigma_n > 0.0) || !e.sigma_n.is_finite() {
                    return Err(CliError::Config(format!(
                        "sigma_n must be positive, got {}",
                        e.sigma_n
                    )));
                }
                if grid.iter().any(|v| !v.is_finite()) {
                    return Err(CliError::Config("analytic grids need finite Eb/N0".into()));
                }
                if !e.with_simulation
                    && (e.reconstruction.is_some()
                        || e.sim_min_ber.is_some()
                        || e.min_bits.is_some()
                        || e.min_errors.is_some()
                        || e.max_frames.is_some())
                {
                    return Err(CliError::Config(
                        "simulation settings given without with_simulation = true".into(),
                    ));
                }
                let n = e.n.unwrap_or(2048);
                let mut out = Vec::new();
                for (id, h) in resolve_channels(&e.channel, &e.matrix_file, &e.label, base)? {
                    if h.receivers() != 2 || h.transmitters() != 2 {
                        return Err(CliError::Config(format!(
                            "channel `{id}`: the analytic model needs a 2x2 matrix"
                        )));
                    }
                    h.inverse()?;
                    let simulation = if e.with_simulation {
                        let mut cfg = SweepConfig::new(Scheme::Ndc, &id, h.clone(), e.order);
                        cfg.n = n;
                        cfg.reconstruction = e.reconstruction.unwrap_or_default();
                        cfg.ebn0_db = grid.clone();
                        apply_stopping(&mut cfg, e.min_bits, e.min_errors, e.max_frames);
                        cfg.validate()?;
                        Some(cfg)
                    } else {
                        None
                    };
                    out.push(AnalyzeJob {
                        channel_id: id,
                        channel: h,
                        order: e.order,
                        sigma_n: e.sigma_n,
                        model: e.model,
                        n,
                        ebn0_db: grid.clone(),
                        sim_min_ber: e.sim_min_ber,
                        simulation,
                    });
                }
                Ok(out)
            };
            jobs.extend(build().map_err(|err| context("analyze", idx, err))?);
        }
        let mut k = self.simulate_count(base);
        for job in &mut jobs {
            if let Some(cfg) = job.simulation.as_mut() {
                cfg.seed = master_seed.wrapping_add(k);
                k += 1;
            }
        }
        Ok(jobs)
    }

    fn simulate_count(&self, base: &Path) -> u64 {
        self.simulate
            .iter()
            .map(|e| {
                resolve_channels(&e.channel, &e.matrix_file, &e.label, base)
                    .map_or(0, |v| v.len() as u64)
            })
            .sum()
    }
}

fn apply_stopping(
    cfg: &mut SweepConfig,
    min_bits: Option<u64>,
    min_errors: Option<u64>,
    max_frames: Option<u64>,
) {
    if let Some(v) = min_bits {
        cfg.min_bits = v;
    }
    if let Some(v) = min_errors {
        cfg.min_errors = v;
    }
    if let Some(v) = max_frames {
        cfg.max_frames = v;
    }
}
