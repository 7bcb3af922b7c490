//! Acceptance criteria. Each test writes one `criterion N: PASS|FAIL` line
//! straight to stderr so the summary survives output capture.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_doppler::array_design::{
    build_klevel, build_nested, build_super_nested, difference_set, optimal_klevel, optimal_nested,
    verify_contiguous_coarray, EmissionPattern, KLevelParams, NestedPreference,
};
use sparse_doppler::coarray::{build_toeplitz, lag_average, CovarianceEstimate, Window};
use sparse_doppler::estimators::{grid_bin, nesprit_with, nest, NespritOptions};
use sparse_doppler::experiments::{
    run_compare, run_estimate, run_mse, Estimator, ExperimentConfig, FilterSpec, ToneSpec,
};
use sparse_doppler::signal_model::{
    analytic_covariance, ClutterTone, SinusoidalTrajectory, Tone, ToneSet,
};
use sparse_doppler::Error;

fn report(n: u32, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n:>2}: {verdict}  {detail}");
}

fn brute_force_lags(slots: &[usize]) -> BTreeSet<i64> {
    let mut lags = BTreeSet::new();
    for &a in slots {
        for &b in slots {
            lags.insert(a as i64 - b as i64);
        }
    }
    lags
}

#[test]
fn criterion_01_nested_coarray_is_contiguous() {
    const LIMIT: Duration = Duration::from_secs(10);
    let start = Instant::now();
    let mut failures = Vec::new();
    for n1 in 1..=30usize {
        for n2 in 1..=30usize {
            let pattern = build_nested(n1, n2).unwrap();
            let p = pattern.window_size() as i64;
            let lags = brute_force_lags(pattern.slots());
            let expected: BTreeSet<i64> = (-(p - 1)..=p - 1).collect();
            if lags != expected || lags.len() != 2 * n2 * (n1 + 1) - 1 {
                failures.push((n1, n2));
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = failures.is_empty() && elapsed < LIMIT;
    report(
        1,
        ok,
        &format!("900 pairs, {} failures, {elapsed:.2?}", failures.len()),
    );
    assert!(failures.is_empty(), "{failures:?}");
    assert!(elapsed < LIMIT);
}

fn is_prime(p: usize) -> bool {
    p >= 2
        && (2..)
            .take_while(|d| d * d <= p)
            .all(|d| !p.is_multiple_of(d))
}

#[test]
fn criterion_02_nested_optimum_matches_divisor_search() {
    const LIMIT: Duration = Duration::from_secs(30);
    let start = Instant::now();
    let mut failures = Vec::new();
    for p in 4..=10_000usize {
        if is_prime(p) {
            continue;
        }
        let best = (1..=p)
            .filter(|n2| p % n2 == 0 && p / n2 >= 2)
            .map(|n2| p / n2 - 1 + n2)
            .min()
            .unwrap();
        for pref in [
            NestedPreference::FewerLargerGaps,
            NestedPreference::MoreSmallerGaps,
        ] {
            let (n1, n2) = optimal_nested(p, pref).unwrap();
            if n2 * (n1 + 1) != p || n1 + n2 != best {
                failures.push(p);
            }
        }
    }
    let n256 = optimal_nested(256, NestedPreference::FewerLargerGaps).unwrap();
    let n128 = optimal_nested(128, NestedPreference::FewerLargerGaps).unwrap();
    let spots = n256.0 + n256.1 == 31 && n128.0 + n128.1 == 23;
    let elapsed = start.elapsed();
    let ok = failures.is_empty() && spots && elapsed < LIMIT;
    report(
        2,
        ok,
        &format!(
            "{} mismatches, P=256 -> {}, P=128 -> {}, {elapsed:.2?}",
            failures.len(),
            n256.0 + n256.1,
            n128.0 + n128.1
        ),
    );
    assert!(failures.is_empty(), "{failures:?}");
    assert!(spots);
    assert!(elapsed < LIMIT);
}

/// Smallest `sum (f_i - 1)` over ordered factorizations of `m` into
/// factors of at least two.
fn min_prefix_cost(m: usize, memo: &mut Vec<Option<usize>>) -> usize {
    if m == 1 {
        return 0;
    }
    if let Some(v) = memo[m] {
        return v;
    }
    let best = (2..=m)
        .filter(|f| m.is_multiple_of(*f))
        .map(|f| f - 1 + min_prefix_cost(m / f, memo))
        .min()
        .unwrap();
    memo[m] = Some(best);
    best
}

/// Fewest emissions over every level vector with `N_K * prod(N_i + 1) = P`.
fn klevel_oracle(p: usize, memo: &mut Vec<Option<usize>>) -> usize {
    (2..=p)
        .filter(|last| p.is_multiple_of(*last))
        .map(|last| last + min_prefix_cost(p / last, memo))
        .min()
        .unwrap()
}

fn factor_formula(mut p: usize) -> usize {
    let mut n = 1;
    let mut f = 2;
    while p > 1 {
        while p.is_multiple_of(f) {
            n += f - 1;
            p /= f;
        }
        f += 1;
    }
    n
}

#[test]
fn criterion_03_klevel_optimum_matches_factorization_search() {
    const LIMIT: Duration = Duration::from_secs(60);
    let start = Instant::now();
    let mut memo = vec![None; 2001];
    let mut failures = Vec::new();
    for p in 2..=2000usize {
        let params = optimal_klevel(p).unwrap();
        let n = params.transmissions();
        let built = build_klevel(&params);
        if n != klevel_oracle(p, &mut memo)
            || n != factor_formula(p)
            || built.len() != n
            || built.window_size() != p
        {
            failures.push(p);
        }
    }
    let twelve = optimal_klevel(12).unwrap();
    let spot = twelve.transmissions() == 5 && twelve.levels() == [1, 1, 3];
    let elapsed = start.elapsed();
    let ok = failures.is_empty() && spot && elapsed < LIMIT;
    report(
        3,
        ok,
        &format!(
            "{} mismatches, P=12 -> N={} levels {:?}, {elapsed:.2?}",
            failures.len(),
            twelve.transmissions(),
            twelve.levels()
        ),
    );
    assert!(failures.is_empty(), "{failures:?}");
    assert!(spot);
    assert!(elapsed < LIMIT);
}

fn optimal_nested_pattern(p: usize) -> EmissionPattern {
    let (n1, n2) = optimal_nested(p, NestedPreference::FewerLargerGaps).unwrap();
    build_nested(n1, n2).unwrap()
}

#[test]
fn criterion_04_coarray_toeplitz_reproduces_full_covariance() {
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sizes = [16usize, 64, 256];
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let p = sizes[trial % sizes.len()];
        let m = rng.random_range(1..=6);
        let tones: Vec<Tone> = (0..m)
            .map(|_| Tone::new(rng.random_range(-0.5..0.5), rng.random_range(0.1..10.0)))
            .collect();
        let tones = ToneSet::new(tones).unwrap();
        let noise = rng.random_range(0.0..2.0);
        let pattern = optimal_nested_pattern(p);
        let cov = CovarianceEstimate::exact(analytic_covariance(&tones, &pattern, noise));
        let z = lag_average(&cov, &difference_set(&pattern)).unwrap();
        let full = analytic_covariance(&tones, &EmissionPattern::standard(p).unwrap(), noise);
        let err = (build_toeplitz(&z) - full)
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        worst = worst.max(err);
    }
    let ok = worst < TOL;
    report(4, ok, &format!("100 tone sets, max abs error {worst:.3e}"));
    assert!(ok, "max error {worst}");
}

#[test]
fn criterion_05_nesprit_noiseless_precision() {
    const TOL: f64 = 1e-9;
    let pattern = build_nested(3, 2).unwrap();
    let tones = ToneSet::new(vec![Tone::new(0.2, 1.0)]).unwrap();
    let cov = CovarianceEstimate::exact(analytic_covariance(&tones, &pattern, 0.0));
    let z = lag_average(&cov, &difference_set(&pattern)).unwrap();
    let opts = NespritOptions {
        lambda: 1e-6,
        ..NespritOptions::default()
    };
    let lines = nesprit_with(&z, &opts).unwrap();
    let nu = lines.strongest().map(|l| l.nu).unwrap_or(f64::NAN);
    let err = (nu - 0.2).abs();
    let ok = lines.model_order == 1 && err < TOL;
    report(
        5,
        ok,
        &format!("M={} nu_hat={nu:.15} error {err:.3e}", lines.model_order),
    );
    assert!(ok);
}

#[test]
fn criterion_06_nest_exact_on_dense_grid() {
    const TOL: f64 = 1e-10;
    let mut worst_power = 0.0f64;
    let mut worst_leak = 0.0f64;
    let mut bad = Vec::new();
    for p in [8usize, 16, 64, 256] {
        let pattern = optimal_nested_pattern(p);
        let diffs = difference_set(&pattern);
        let len = 2 * p - 1;
        let step = if p > 64 { 17 } else { 1 };
        for bin in (0..len).step_by(step) {
            let nu = (bin as f64 - (len / 2) as f64) / len as f64;
            let power = 1.0 + bin as f64 / len as f64;
            let tones = ToneSet::new(vec![Tone::new(nu, power)]).unwrap();
            let cov = CovarianceEstimate::exact(analytic_covariance(&tones, &pattern, 0.0));
            let s = nest(&lag_average(&cov, &diffs).unwrap(), 0.0);
            let target = grid_bin(len, nu);
            let leak = s
                .powers()
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != target)
                .map(|(_, v)| v.abs())
                .fold(0.0, f64::max);
            let err = (s.powers()[target] - power).abs();
            let nonzero = s.powers().iter().filter(|v| v.abs() > TOL).count();
            worst_power = worst_power.max(err);
            worst_leak = worst_leak.max(leak);
            if target != bin || nonzero != 1 || err >= TOL {
                bad.push((p, bin));
            }
        }
    }
    let ok = bad.is_empty();
    report(
        6,
        ok,
        &format!("max power error {worst_power:.3e}, max off-bin {worst_leak:.3e}"),
    );
    assert!(ok, "{bad:?}");
}

#[test]
fn criterion_07_mse_ordering() {
    const LIMIT: Duration = Duration::from_secs(300);
    let cfg = ExperimentConfig {
        p: 8,
        pattern: "nested:3,2".parse().unwrap(),
        tones: vec![ToneSpec::at(0.2, 1.0)],
        q: 200,
        trials: 1000,
        seed: 2024,
        ..ExperimentConfig::default()
    };
    let start = Instant::now();
    let table = run_mse(&cfg).unwrap();
    let elapsed = start.elapsed();
    let quant = (0.5 / (2 * cfg.p - 1) as f64).powi(2);
    let mut high_ok = true;
    let mut low_ok = true;
    let mut notes = Vec::new();
    for &snr in &cfg.snr_list {
        let nest = table.get(snr, Estimator::Nest).unwrap();
        let nesprit = table.get(snr, Estimator::Nesprit).unwrap();
        let welch = table.get(snr, Estimator::Welch).unwrap();
        if snr >= 25.0 {
            high_ok &= nesprit < welch && nest <= quant;
        }
        if snr <= -5.0 {
            let hi = nest.max(nesprit).max(welch);
            let lo = nest.min(nesprit).min(welch);
            let within = hi <= 10.0 * lo;
            low_ok &= within;
            if !within {
                notes.push(format!(
                    "{snr} dB spread nest={nest:.2e} nesprit={nesprit:.2e} welch={welch:.2e}"
                ));
            }
        }
    }
    let ok = high_ok && low_ok && elapsed < LIMIT;
    report(
        7,
        ok,
        &format!(
            "high-SNR ordering {}, low-SNR within 10x {}, {elapsed:.2?} {}",
            if high_ok { "ok" } else { "violated" },
            if low_ok { "ok" } else { "violated" },
            notes.join("; ")
        ),
    );
    assert!(high_ok, "high-SNR ordering");
    assert!(low_ok, "low-SNR spread: {}", notes.join("; "));
    assert!(elapsed < LIMIT);
}

#[test]
fn criterion_08_clutter_suppression() {
    let cfg = ExperimentConfig {
        p: 256,
        tones: vec![ToneSpec::at(0.2, 1.0)],
        clutter: Some(ClutterTone {
            nu: 0.005,
            relative_db: 40.0,
        }),
        filter: Some(FilterSpec::Butterworth {
            order: 6,
            cutoff: 0.03,
        }),
        window: Some(Window::Blackman),
        analytic: true,
        snr_db: 60.0,
        estimators: vec![Estimator::Nest],
        ..ExperimentConfig::default()
    };
    let rep = run_estimate(&cfg).unwrap();
    let grid = rep.results[0].1.to_grid(2 * cfg.p - 1);
    let peak = grid.peak_bin().unwrap();
    let blood = grid.bin_of(0.2);
    let clutter = grid.bin_of(0.005);
    let ratio_db = 10.0 * (grid.powers()[clutter].max(0.0) / grid.powers()[peak]).log10();
    let ok = peak.abs_diff(blood) <= 1 && ratio_db <= -30.0;
    report(
        8,
        ok,
        &format!("peak bin {peak} (tone bin {blood}), clutter bin {ratio_db:.1} dB below peak"),
    );
    assert!(ok);
}

#[test]
fn criterion_09_minimal_rate_spectrogram() {
    const LIMIT: Duration = Duration::from_secs(120);
    let mut cfg = ExperimentConfig {
        p: 256,
        pattern: "nested:15,16".parse().unwrap(),
        trajectory: Some(SinusoidalTrajectory {
            frames: 40,
            mean_nu: 0.15,
            swing_nu: 0.12,
            period_frames: 20.0,
            band_tones: 5,
            band_spacing: 0.001957,
            peak_power: 1.0,
            band_width_tones: 1.0,
            clutter: None,
        }),
        q: 100,
        snr_db: 20.0,
        seed: 7,
        ..ExperimentConfig::default()
    };
    cfg.nesprit.threshold.lambda = 5.0;
    cfg.nesprit.threshold.relative = true;
    let start = Instant::now();
    let rep = run_compare(&cfg).unwrap();
    let elapsed = start.elapsed();
    let nest = rep.summary(Estimator::Nest, true).unwrap();
    let nesprit = rep.summary(Estimator::Nesprit, true).unwrap();
    let welch = rep.summary(Estimator::Welch, true).unwrap();
    let emissions = rep.pattern["slots"].as_array().map_or(0, Vec::len);
    let excess = welch.artifact_energy_db - nest.artifact_energy_db;
    let ok = emissions == 31
        && nest.ridge.within_one_bin >= 0.9
        && nesprit.ridge.within_one_bin >= 0.9
        && excess >= 6.0
        && elapsed < LIMIT;
    report(
        9,
        ok,
        &format!(
            "{emissions}/256 emissions, ridge within 1 bin nest {:.0}% nesprit {:.0}%, welch artifacts {excess:.1} dB above nest, {elapsed:.2?}",
            100.0 * nest.ridge.within_one_bin,
            100.0 * nesprit.ridge.within_one_bin
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_10_coarray_failure_diagnostics() {
    let klevel = build_klevel(&KLevelParams::new(vec![3, 3, 3, 4], 256).unwrap());
    let tones = ToneSet::new(vec![Tone::new(0.2, 1.0)]).unwrap();
    let cov = CovarianceEstimate::exact(analytic_covariance(&tones, &klevel, 0.1));
    let missing = match lag_average(&cov, &difference_set(&klevel)) {
        Err(Error::NonContiguousCoarray { missing, .. }) => missing,
        other => panic!("expected a missing-lag error, got {other:?}"),
    };

    let peak_of = |pattern: &EmissionPattern| {
        let cov = CovarianceEstimate::exact(analytic_covariance(&tones, pattern, 0.1));
        nest(&lag_average(&cov, &difference_set(pattern)).unwrap(), 0.0).peak_bin()
    };
    let super_nested = build_super_nested(15, 16).unwrap();
    let nested = build_nested(15, 16).unwrap();
    let contiguous = verify_contiguous_coarray(&super_nested);
    let (a, b) = (peak_of(&super_nested), peak_of(&nested));
    let ok = !missing.is_empty() && contiguous && a.is_some() && a == b;
    report(
        10,
        ok,
        &format!(
            "k-level missing {} lags (first {:?}), super-nested contiguous {contiguous}, peaks {a:?}/{b:?}",
            missing.len(),
            missing.first()
        ),
    );
    assert!(ok);
}

fn run_cli(dir: &Path, config: &Path, sub: &str) {
    let status = Command::new(env!("CARGO_BIN_EXE_sparse-doppler"))
        .args([sub, "--config"])
        .arg(config)
        .args(["--seed", "11", "--format", "csv", "--out-dir"])
        .arg(dir)
        .env("SPARSE_DOPPLER_THREADS", "4")
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success(), "{sub} failed");
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn criterion_11_cli_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"P":64,"tones":[{"nu":0.12,"power":1.0},{"nu":-0.21,"power":0.5}],
            "trajectory":{"frames":6,"mean_nu":0.1,"swing_nu":0.05,"period_frames":6,
                          "band_tones":3,"band_spacing":0.008,"peak_power":1.0,"band_width_tones":1.0},
            "Q":40,"snr_db":10,"trials":20,"snr_list":[-5,5,15],"welch":{"zero_fill":true}}"#,
    )
    .unwrap();
    let subs = [
        "design",
        "simulate",
        "estimate",
        "spectrogram",
        "mse",
        "compare",
    ];
    let runs: Vec<_> = (0..2)
        .map(|i| {
            let dir = tmp.path().join(format!("run{i}"));
            for sub in subs {
                run_cli(&dir, &config, sub);
            }
            csv_files(&dir)
        })
        .collect();
    let names: Vec<&str> = runs[0].iter().map(|(n, _)| n.as_str()).collect();
    let ok = !runs[0].is_empty() && runs[0] == runs[1];
    report(
        11,
        ok,
        &format!("{} csv files compared: {}", names.len(), names.join(" ")),
    );
    assert!(ok);
}
