use crate::config::{AnalyzeJob, RunConfig, Source};
use crate::error::{CliError, Result, EXIT_LOW_CONFIDENCE};
use crate::geometry::GeometryFile;
use crate::manifest::{digest, timestamp, RunManifest};
use crate::output::{self, CurveRecord, Format};
use crate::recipes;
use chrono::Utc;
use ndc_ofdm::analysis::{analytic_curve, se_table, SeRow, ZfInverse};
use ndc_ofdm::montecarlo::{run_sweep, SweepConfig};
use ndc_ofdm::Executor;
use std::path::{Path, PathBuf};

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Options {
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    /// 0 means one per core.
    pub workers: usize,
    pub format: Format,
    /// Progress lines on stderr.
    pub verbose: bool,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            seed: None,
            out_dir: PathBuf::from("."),
            workers: 0,
            format: Format::Csv,
            verbose: false,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    pub curves: Vec<CurveRecord>,
    pub se_rows: Vec<SeRow>,
    pub low_confidence: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.low_confidence {
            EXIT_LOW_CONFIDENCE
        } else {
            0
        }
    }
}

/// Resolves `--config` / `--recipe`; exactly one must be given.
pub fn load_source(config: Option<&Path>, recipe: Option<&str>) -> Result<Source> {
    match (config, recipe) {
        (Some(path), None) => Source::from_file(path),
        (None, Some(name)) => recipes::source(name),
        (Some(_), Some(_)) => Err(CliError::Config(
            "--config and --recipe are mutually exclusive".into(),
        )),
        (None, None) => Err(CliError::Config("need --config or --recipe".into())),
    }
}

#[derive(Clone, Copy)]
struct Sections {
    simulate: bool,
    analyze: bool,
    se_table: bool,
}

/// Runs the `[[simulate]]` entries.
pub fn cmd_simulate(src: &Source, opts: &Options) -> Result<Outcome> {
    execute(
        "simulate",
        src,
        opts,
        Sections {
            simulate: true,
            analyze: false,
            se_table: false,
        },
    )
}

/// Runs the `[[analyze]]` entries (and their paired simulations).
pub fn cmd_analyze(src: &Source, opts: &Options) -> Result<Outcome> {
    execute(
        "analyze",
        src,
        opts,
        Sections {
            simulate: false,
            analyze: true,
            se_table: false,
        },
    )
}

/// Runs every section present in the config.
pub fn cmd_run(src: &Source, opts: &Options) -> Result<Outcome> {
    execute(
        "run",
        src,
        opts,
        Sections {
            simulate: true,
            analyze: true,
            se_table: true,
        },
    )
}

/// Computes the constellation-size table and writes `se_table.<ext>`.
pub fn cmd_se_table(opts: &Options) -> Result<Outcome> {
    let started = Utc::now();
    let rows = se_table()?;
    let mut outcome = Outcome {
        se_rows: rows,
        ..Outcome::default()
    };
    let mut manifest = RunManifest::new("se-table", started, 1);
    write_se_table(&mut outcome, "se_table", opts)?;
    finish(&mut manifest, &mut outcome, "se_table", opts)?;
    Ok(outcome)
}

/// Builds `H` from a geometry file and writes it as a plain-text matrix.
pub fn cmd_channel_gain(path: &Path, opts: &Options) -> Result<(Outcome, String)> {
    let started = Utc::now();
    let src = Source::from_file(path)?;
    let geometry: GeometryFile = toml::from_str(&src.text).map_err(|source| CliError::Toml {
        path: src.name.clone(),
        source,
    })?;
    let text = geometry.gain_matrix()?.to_text();
    let mut outcome = Outcome::default();
    let out = opts.out_dir.join(format!("{}.txt", src.name));
    output::write_atomic(&out, &text)?;
    outcome.outputs.push(out);
    let mut manifest = RunManifest::new("channel-gain", started, 1);
    manifest.config_digest = Some(digest(&src.text));
    manifest.config_name = Some(src.name.clone());
    finish(&mut manifest, &mut outcome, &src.name, opts)?;
    Ok((outcome, text))
}

fn execute(command: &str, src: &Source, opts: &Options, sections: Sections) -> Result<Outcome> {
    let started = Utc::now();
    let cfg: RunConfig = src.parse()?;
    let seed = cfg.effective_seed(opts.seed);

    // Validate everything before any long computation starts.
    let sims = if sections.simulate {
        cfg.simulate_jobs(seed, &src.base)?
    } else {
        Vec::new()
    };
    let analyses = if sections.analyze {
        cfg.analyze_jobs(seed, &src.base)?
    } else {
        Vec::new()
    };
    let want_table = sections.se_table && cfg.se_table.is_some();
    if sims.is_empty() && analyses.is_empty() && !want_table {
        let what = match command {
            "simulate" => "no [[simulate]] entries",
            "analyze" => "no [[analyze]] entries",
            _ => "config has nothing to run",
        };
        return Err(CliError::Config(format!("{}: {what}", src.name)));
    }

    let exec = Executor::with_workers(opts.workers);
    let mut outcome = Outcome::default();
    for cfg in &sims {
        outcome.curves.push(simulate(cfg, &exec, opts)?);
    }
    for job in &analyses {
        analyze(job, &exec, opts, &mut outcome.curves)?;
    }
    if !outcome.curves.is_empty() {
        let path = opts
            .out_dir
            .join(format!("{}.{}", src.name, opts.format.extension()));
        let body = match opts.format {
            Format::Csv => output::curves_csv(&outcome.curves),
            Format::Json => output::curves_json(&outcome.curves)?,
        };
        output::write_atomic(&path, &body)?;
        outcome.outputs.push(path);
    }
    if want_table {
        outcome.se_rows = se_table()?;
        write_se_table(&mut outcome, &format!("{}_se_table", src.name), opts)?;
    }
    outcome.low_confidence = outcome.curves.iter().any(CurveRecord::low_confidence);

    let mut manifest = RunManifest::new(command, started, exec.workers());
    manifest.config_digest = Some(digest(&src.text));
    manifest.config_name = Some(src.name.clone());
    manifest.master_seed = Some(seed);
    finish(&mut manifest, &mut outcome, &src.name, opts)?;
    Ok(outcome)
}

fn simulate(cfg: &SweepConfig, exec: &Executor, opts: &Options) -> Result<CurveRecord> {
    if opts.verbose {
        eprintln!(
            "simulating {} on {} (M={}{}), {} points",
            cfg.scheme,
            cfg.channel_id,
            cfg.order,
            cfg.bias_db.map(|b| format!(", bias {b} dB")).unwrap_or_default(),
            cfg.ebn0_db.len()
        );
    }
    let curve = run_sweep(cfg, exec)?;
    if opts.verbose {
        for w in &curve.warnings {
            eprintln!("  warning: {w}");
        }
    }
    Ok(CurveRecord::from_simulation(&curve))
}

fn analyze(
    job: &AnalyzeJob,
    exec: &Executor,
    opts: &Options,
    curves: &mut Vec<CurveRecord>,
) -> Result<()> {
    if opts.verbose {
        eprintln!(
            "analysing {} (M={}, sigma_n={}), {} points",
            job.channel_id,
            job.order,
            job.sigma_n,
            job.ebn0_db.len()
        );
    }
    let c = ZfInverse::from_channel(&job.channel)?;
    let points = analytic_curve(
        &c,
        job.sigma_n,
        &job.ebn0_db,
        job.order,
        job.n,
        2,
        job.model,
        exec,
    )?;
    curves.push(CurveRecord::from_analytic(
        &job.channel_id,
        job.order,
        job.sigma_n,
        job.model,
        &points,
    ));
    if let Some(sim) = &job.simulation {
        let mut sim = sim.clone();
        if let Some(floor) = job.sim_min_ber {
            sim.ebn0_db = points
                .iter()
                .filter(|p| p.ber >= floor)
                .map(|p| p.ebn0_db)
                .collect();
        }
        if !sim.ebn0_db.is_empty() {
            curves.push(simulate(&sim, exec, opts)?);
        }
    }
    Ok(())
}

fn write_se_table(outcome: &mut Outcome, stem: &str, opts: &Options) -> Result<()> {
    let path = opts
        .out_dir
        .join(format!("{stem}.{}", opts.format.extension()));
    let body = match opts.format {
        Format::Csv => output::se_table_csv(&outcome.se_rows),
        Format::Json => output::se_table_json(&outcome.se_rows)?,
    };
    output::write_atomic(&path, &body)?;
    outcome.outputs.push(path);
    Ok(())
}

fn finish(
    manifest: &mut RunManifest,
    outcome: &mut Outcome,
    stem: &str,
    opts: &Options,
) -> Result<()> {
    manifest.low_confidence = outcome.low_confidence;
    manifest.outputs = outcome
        .outputs
        .iter()
        .map(|p| p.display().to_string())
        .collect();
    manifest.finished = timestamp(Utc::now());
    let path = opts.out_dir.join(format!("{stem}.manifest.json"));
    output::write_atomic(&path, &manifest.to_json()?)?;
    outcome.outputs.push(path);
    Ok(())
}
