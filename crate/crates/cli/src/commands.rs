use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sparse_doppler::experiments::{
    design_report, run_compare, run_estimate, run_mse, run_spectrogram, simulate_frames, Estimator,
    ExperimentConfig, OutputFormat, PatternSpec, Spectrogram, SpectrogramFrame,
};
use sparse_doppler::signal_model::{snapshots_to_csv, write_snapshots_binary};
use sparse_doppler::Error;

use crate::{Common, DesignArgs};

const DEFAULT_OUT_DIR: &str = "out";

/// 2 for configuration problems, 3 for everything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_config() => 2,
        _ => 3,
    }
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(lambda) = common.lambda {
        cfg.nest.lambda = lambda;
        cfg.nesprit.threshold.lambda = lambda;
    }
    if let Some(p) = &common.pattern {
        cfg.pattern = p.parse::<PatternSpec>()?;
    }
    if let Some(e) = common.estimator {
        cfg.estimators = vec![e.into()];
    }
    if let Some(dir) = &common.out_dir {
        cfg.out_dir = Some(dir.clone());
    }
    if let Some(f) = common.format {
        cfg.format = f.into();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let dir = cfg
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write(dir: &Path, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value");
    s.push('\n');
    s
}

pub fn design(args: &DesignArgs) -> Result<()> {
    let mut cfg = load(&args.common)?;
    if let Some(p) = args.window {
        cfg.p = p;
    }
    cfg.pattern.preference = args.preference.into();
    let report = design_report(cfg.p, &cfg.pattern)?;
    println!(
        "P={} family={} N={} savings={:.1}% gaps={} contiguous={}",
        report.p,
        report.family.as_str(),
        report.transmissions,
        report.savings_percent,
        report.gap_count,
        report.contiguous_coarray
    );
    if !report.nested_optima.is_empty() {
        let optima: Vec<String> = report
            .nested_optima
            .iter()
            .map(|(a, b)| format!("(N1={a}, N2={b})"))
            .collect();
        println!("nested optima: {}", optima.join(", "));
    }
    let dir = out_dir(&cfg)?;
    match cfg.format {
        OutputFormat::Json => write(&dir, "design.json", json_text(&report.to_json()))?,
        _ => write(&dir, "design.csv", report.to_csv())?,
    }
    write(&dir, "pattern.json", json_text(&report.pattern))
}

pub fn simulate(common: &Common) -> Result<()> {
    let cfg = load(common)?;
    if cfg.analytic {
        return Err(Error::Config("simulate draws samples; disable 'analytic'".into()).into());
    }
    let pattern = cfg.build_pattern()?;
    let data = simulate_frames(&cfg, &pattern)?;
    let dir = out_dir(&cfg)?;
    for (i, snap) in data.snapshots.iter().enumerate() {
        let mut bin = Vec::new();
        write_snapshots_binary(snap, &mut bin)?;
        write(&dir, &format!("frame_{i:04}.sdsn"), bin)?;
        match cfg.format {
            OutputFormat::Json => {
                let d = snap.data();
                let rows: Vec<Vec<[f64; 2]>> = (0..d.nrows())
                    .map(|k| {
                        (0..d.ncols())
                            .map(|j| [d[(k, j)].re, d[(k, j)].im])
                            .collect()
                    })
                    .collect();
                let doc = serde_json::json!({
                    "pattern": pattern.to_json(),
                    "noise_power": snap.noise_power(),
                    "samples": rows,
                });
                write(&dir, &format!("frame_{i:04}.json"), json_text(&doc))?;
            }
            _ => write(&dir, &format!("frame_{i:04}.csv"), snapshots_to_csv(snap))?,
        }
    }
    println!(
        "{} frames, Q={}, N={} of P={}, noise power {:.6e}",
        data.snapshots.len(),
        cfg.q,
        pattern.len(),
        cfg.p,
        data.noise_power
    );
    Ok(())
}

pub fn estimate(common: &Common) -> Result<()> {
    let cfg = load(common)?;
    let report = run_estimate(&cfg)?;
    let dir = out_dir(&cfg)?;
    let pattern = cfg.build_pattern()?;
    for (est, spectrum) in &report.results {
        match spectrum.peak_frequency() {
            Some(nu) => println!("{est}: peak at nu={nu:.6}"),
            None => println!("{est}: empty spectrum"),
        }
        match cfg.format {
            OutputFormat::Csv => write(&dir, &format!("{est}.csv"), spectrum.to_csv())?,
            OutputFormat::Json => {
                write(&dir, &format!("{est}.json"), json_text(&spectrum.to_json()))?
            }
            OutputFormat::Pgm => {
                let bins = if *est == Estimator::Welch {
                    cfg.p
                } else {
                    2 * cfg.p - 1
                };
                let frame = SpectrogramFrame {
                    cpi: 0,
                    spectrum: spectrum.to_grid(bins),
                };
                let image =
                    Spectrogram::new(*est, pattern.clone(), vec![frame], serde_json::Value::Null)?;
                write(&dir, &format!("{est}.pgm"), image.to_pgm())?;
            }
        }
    }
    Ok(())
}

fn write_spectrogram(dir: &Path, stem: &str, s: &Spectrogram, format: OutputFormat) -> Result<()> {
    write(dir, &format!("{stem}.pgm"), s.to_pgm())?;
    match format {
        OutputFormat::Json => write(dir, &format!("{stem}.json"), json_text(&s.to_json())),
        _ => write(dir, &format!("{stem}.csv"), s.to_csv()),
    }
}

pub fn spectrogram(common: &Common) -> Result<()> {
    let cfg = load(common)?;
    let dir = out_dir(&cfg)?;
    for &est in &cfg.estimators {
        let s = run_spectrogram(&cfg, est)?;
        println!("{est}: {} frames x {} bins", s.frames.len(), s.bins());
        write_spectrogram(&dir, &format!("spectrogram_{est}"), &s, cfg.format)?;
    }
    Ok(())
}

pub fn mse(common: &Common) -> Result<()> {
    let cfg = load(common)?;
    let table = run_mse(&cfg)?;
    for r in &table.rows {
        println!(
            "snr={:>6.1} dB  {:<8} mse={:.4e}",
            r.snr_db,
            r.estimator.as_str(),
            r.mse
        );
    }
    let dir = out_dir(&cfg)?;
    match cfg.format {
        OutputFormat::Json => write(&dir, "mse.json", json_text(&table.to_json())),
        _ => write(&dir, "mse.csv", table.to_csv()),
    }
}

pub fn compare(common: &Common) -> Result<()> {
    let cfg = load(common)?;
    let report = run_compare(&cfg)?;
    let dir = out_dir(&cfg)?;
    for s in &report.summaries {
        let tag = if s.filtered { "" } else { "_unfiltered" };
        println!(
            "{}{tag}: ridge within 1 bin {:.1}%, artifact energy {:.2} dB",
            s.estimator,
            100.0 * s.ridge.within_one_bin,
            s.artifact_energy_db
        );
        write_spectrogram(
            &dir,
            &format!("compare_{}{tag}", s.estimator),
            &s.spectrogram,
            cfg.format,
        )?;
    }
    match cfg.format {
        OutputFormat::Json => write(&dir, "compare.json", json_text(&report.to_json())),
        _ => write(&dir, "compare.csv", report.to_csv()),
    }
}
