//! CSV / JSON result files.

use crate::error::{CliError, Result};
use ndc_ofdm::analysis::{AnalyticPoint, BussgangModel, SeRow};
use ndc_ofdm::montecarlo::BerCurve;
use ndc_ofdm::receiver::Reconstruction;
use ndc_ofdm::Scheme;
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const CSV_HEADER: &str = "source,scheme,channel,M,bias_db,reconstruction,ebn0_db,bits,errors,ber";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Analytic,
    Montecarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub ebn0_db: f64,
    pub bits: Option<u64>,
    pub errors: Option<u64>,
    pub ber: f64,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub low_confidence: bool,
}

/// One curve in the shape shared by analytic and simulated results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRecord {
    pub source: Origin,
    pub scheme: Scheme,
    pub channel: String,
    #[serde(rename = "M")]
    pub order: usize,
    pub bias_db: Option<f64>,
    pub reconstruction: Option<Reconstruction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<BussgangModel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub points: Vec<PointRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl CurveRecord {
    pub fn from_simulation(curve: &BerCurve) -> Self {
        let m = &curve.meta;
        Self {
            source: Origin::Montecarlo,
            scheme: m.scheme,
            channel: m.channel.clone(),
            order: m.order,
            bias_db: m.bias_db,
            reconstruction: m.reconstruction,
            model: None,
            sigma_n: None,
            seed: Some(m.seed),
            points: curve
                .points
                .iter()
                .map(|p| PointRecord {
                    ebn0_db: p.ebn0_db,
                    bits: Some(p.bits),
                    errors: Some(p.errors),
                    ber: p.ber,
                    low_confidence: p.low_confidence,
                })
                .collect(),
            warnings: curve.warnings.clone(),
        }
    }

    pub fn from_analytic(
        channel: &str,
        order: usize,
        sigma_n: f64,
        model: BussgangModel,
        points: &[AnalyticPoint],
    ) -> Self {
        Self {
            source: Origin::Analytic,
            scheme: Scheme::Ndc,
            channel: channel.to_string(),
            order,
            bias_db: None,
            reconstruction: Some(Reconstruction::SignSelect),
            model: Some(model),
            sigma_n: Some(sigma_n),
            seed: None,
            points: points
                .iter()
                .map(|p| PointRecord {
                    ebn0_db: p.ebn0_db,
                    bits: None,
                    errors: None,
                    ber: p.ber,
                    low_confidence: false,
                })
                .collect(),
            warnings: Vec::new(),
        }
    }

    pub fn low_confidence(&self) -> bool {
        self.points.iter().any(|p| p.low_confidence)
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn curves_csv(curves: &[CurveRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in curves {
        let source = match c.source {
            Origin::Analytic => "analytic",
            Origin::Montecarlo => "montecarlo",
        };
        for p in &c.points {
            let _ = writeln!(
                out,
                "{source},{},{},{},{},{},{},{},{},{:.6e}",
                c.scheme,
                c.channel,
                c.order,
                opt(c.bias_db),
                opt(c.reconstruction.map(Reconstruction::name)),
                p.ebn0_db,
                opt(p.bits),
                opt(p.errors),
                p.ber
            );
        }
    }
    out
}

#[derive(Serialize)]
struct CurvesDoc<'a> {
    curves: &'a [CurveRecord],
}

/// Non-finite Eb/N0 values (the noiseless `inf` point) serialize as `null`.
pub fn curves_json(curves: &[CurveRecord]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&CurvesDoc { curves })
        .map_err(|e| CliError::Serialize(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn se_table_csv(rows: &[SeRow]) -> String {
    let mut out = String::from("se,ndc_M,dco_M,aco_M\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.se, r.ndc, r.dco, r.aco);
    }
    out
}

pub fn se_table_json(rows: &[SeRow]) -> Result<String> {
    let mut s =
        serde_json::to_string_pretty(rows).map_err(|e| CliError::Serialize(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Human-readable table for the terminal.
pub fn se_table_text(rows: &[SeRow]) -> String {
    let mut out = format!("{:>8} {:>10} {:>10} {:>10}\n", "SE", "NDC", "DCO", "ACO");
    for r in rows {
        let _ = writeln!(out, "{:>8} {:>10} {:>10} {:>10}", r.se, r.ndc, r.dco, r.aco);
    }
    out
}

/// Writes through a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty());
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let file_name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp: PathBuf = path.with_file_name(format!(".{file_name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    Ok(())
}
