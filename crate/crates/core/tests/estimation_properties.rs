use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use sparse_doppler::array_design::{build_nested, difference_set, EmissionPattern};
use sparse_doppler::coarray::{
    apodize, build_toeplitz, butterworth_highpass, clutter_filter, estimate_covariance,
    lag_average, ClutterFilter, CoarraySignal, CovarianceEstimate, Window,
};
use sparse_doppler::estimators::{grid_bin, grid_frequency, nesprit_with, nest, NespritOptions};
use sparse_doppler::signal_model::{
    analytic_covariance, generate_snapshots, read_snapshots_binary, write_snapshots_binary, Tone,
    ToneSet,
};

fn exact_coarray(tones: &ToneSet, pattern: &EmissionPattern, noise: f64) -> CoarraySignal {
    let cov = CovarianceEstimate::exact(analytic_covariance(tones, pattern, noise));
    lag_average(&cov, &difference_set(pattern)).unwrap()
}

/// Tones at least `sep` apart on the circle, sorted by frequency.
fn separated_tones(max: usize, sep: f64) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-0.5f64..0.5, 0.5f64..4.0), 1..=max).prop_filter(
        "tones too close",
        move |v| {
            v.iter().enumerate().all(|(i, a)| {
                v[i + 1..].iter().all(|b| {
                    let d = (a.0 - b.0).abs();
                    d.min(1.0 - d) >= sep
                })
            })
        },
    )
}

fn tone_set(v: &[(f64, f64)]) -> ToneSet {
    ToneSet::new(v.iter().map(|&(nu, p)| Tone::new(nu, p)).collect()).unwrap()
}

fn circular(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lag_average_matches_direct_grouping(
        n1 in 1usize..6,
        n2 in 1usize..6,
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 144),
    ) {
        let pattern = build_nested(n1, n2).unwrap();
        let n = pattern.len();
        let raw = DMatrix::from_fn(n, n, |a, b| {
            let (re, im) = entries[a * 12 + b];
            Complex64::new(re, im)
        });
        let cov = CovarianceEstimate::exact(raw);
        let z = lag_average(&cov, &difference_set(&pattern)).unwrap();
        let s = pattern.slots();
        let p = pattern.window_size() as i64;
        for lag in -(p - 1)..p {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut count = 0;
            for a in 0..n {
                for b in 0..n {
                    if s[a] as i64 - s[b] as i64 == lag {
                        sum += cov.matrix[(a, b)];
                        count += 1;
                    }
                }
            }
            prop_assert!((z.at(lag) - sum / count as f64).norm() < 1e-12);
        }
        prop_assert!(z.hermitian_defect() < 1e-12);
    }

    #[test]
    fn toeplitz_of_coarray_is_full_covariance(
        n1 in 1usize..8,
        n2 in 1usize..8,
        tones in separated_tones(5, 0.0),
        noise in 0.0f64..3.0,
    ) {
        let pattern = build_nested(n1, n2).unwrap();
        let tones = tone_set(&tones);
        let z = exact_coarray(&tones, &pattern, noise);
        let full = analytic_covariance(&tones, &EmissionPattern::standard(pattern.window_size()).unwrap(), noise);
        let err = (build_toeplitz(&z) - full).iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-10);
    }

    #[test]
    fn nest_threshold_is_monotone(
        tones in separated_tones(4, 0.0),
        noise in 0.0f64..1.0,
        l1 in 0.0f64..0.5,
        dl in 0.0f64..0.5,
    ) {
        let pattern = build_nested(3, 4).unwrap();
        let z = exact_coarray(&tone_set(&tones), &pattern, noise);
        let lo = nest(&z, l1);
        let hi = nest(&z, l1 + dl);
        for (a, b) in lo.powers().iter().zip(hi.powers()) {
            prop_assert!(*b >= 0.0);
            prop_assert!(b <= a);
            prop_assert!(a - b <= dl + 1e-12);
        }
    }

    #[test]
    fn nesprit_recovers_separated_tones(tones in separated_tones(4, 0.08)) {
        let pattern = build_nested(5, 6).unwrap();
        let set = tone_set(&tones);
        let z = exact_coarray(&set, &pattern, 0.0);
        let opts = NespritOptions { order: Some(tones.len()), ..NespritOptions::default() };
        let lines = nesprit_with(&z, &opts).unwrap();
        prop_assert_eq!(lines.lines.len(), tones.len());
        for &(nu, power) in &tones {
            let hit = lines
                .lines
                .iter()
                .min_by(|a, b| circular(a.nu, nu).total_cmp(&circular(b.nu, nu)))
                .unwrap();
            prop_assert!(circular(hit.nu, nu) < 1e-8, "{} vs {}", hit.nu, nu);
            prop_assert!((hit.power - power).abs() < 1e-6 * power.max(1.0));
        }
        let resynth = lines.synthesize(pattern.window_size(), true);
        let resid = z
            .values()
            .iter()
            .zip(resynth.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        prop_assert!(resid < 1e-8);
    }

    #[test]
    fn grid_bin_inverts_grid_frequency(len in 1usize..600, bin_frac in 0.0f64..1.0) {
        let bin = ((len as f64 * bin_frac) as usize).min(len - 1);
        prop_assert_eq!(grid_bin(len, grid_frequency(len, bin)), bin);
    }

    #[test]
    fn snapshots_survive_binary_round_trip(seed in any::<u64>(), q in 1usize..20) {
        let pattern = build_nested(2, 3).unwrap();
        let tones = tone_set(&[(0.1, 1.0)]);
        let snap = generate_snapshots(&tones, &pattern, q, 0.5, seed).unwrap();
        let mut buf = Vec::new();
        write_snapshots_binary(&snap, &mut buf).unwrap();
        let back = read_snapshots_binary(&pattern, buf.as_slice()).unwrap();
        prop_assert_eq!(back.data(), snap.data());
        prop_assert_eq!(back.noise_power(), snap.noise_power());
    }
}

#[test]
fn nest_is_pattern_invariant_for_equal_windows() {
    let tones = tone_set(&[(0.13, 1.0), (-0.31, 0.4)]);
    let a = nest(
        &exact_coarray(&tones, &build_nested(15, 8).unwrap(), 0.2),
        0.0,
    );
    let b = nest(
        &exact_coarray(&tones, &build_nested(7, 16).unwrap(), 0.2),
        0.0,
    );
    let c = nest(
        &exact_coarray(&tones, &EmissionPattern::standard(128).unwrap(), 0.2),
        0.0,
    );
    for ((x, y), w) in a.powers().iter().zip(b.powers()).zip(c.powers()) {
        assert!((x - y).abs() < 1e-10 && (x - w).abs() < 1e-10);
    }
}

#[test]
fn coarray_grid_resolves_tones_closer_than_a_window_bin() {
    // Adjacent coarray bins are closer than one bin of a P-point grid.
    let p = 64usize;
    let len = 2 * p - 1;
    let f = |bin: usize| grid_frequency(len, bin);
    let (b1, b2) = (80usize, 81usize);
    assert!((f(b2) - f(b1)) < 1.0 / p as f64);
    let tones = tone_set(&[(f(b1), 1.0), (f(b2), 1.0)]);
    let (n1, n2) = (7, 8);
    let s = nest(
        &exact_coarray(&tones, &build_nested(n1, n2).unwrap(), 0.0),
        0.0,
    );
    let pw = s.powers();
    assert!((pw[b1] - 1.0).abs() < 1e-10 && (pw[b2] - 1.0).abs() < 1e-10);
    assert!(pw[b1 - 1].abs() < 1e-10 && pw[b2 + 1].abs() < 1e-10);
}

#[test]
fn sample_coarray_converges_with_snapshots() {
    let pattern = build_nested(3, 4).unwrap();
    let tones = tone_set(&[(0.21, 1.0), (-0.07, 0.5)]);
    let exact = exact_coarray(&tones, &pattern, 0.5);
    let err = |q: usize| {
        let mut total = 0.0;
        for seed in 0..8 {
            let snap = generate_snapshots(&tones, &pattern, q, 0.5, seed).unwrap();
            let cov = estimate_covariance(&snap, false).unwrap();
            let z = lag_average(&cov, &difference_set(&pattern)).unwrap();
            total += z
                .values()
                .iter()
                .zip(exact.values())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>();
        }
        total / 8.0
    };
    let (coarse, fine) = (err(100), err(10_000));
    // Mean squared error scales as 1/Q.
    assert!(fine < coarse / 30.0, "{coarse} -> {fine}");
}

#[test]
fn nesprit_noise_floor_tracks_true_noise() {
    let pattern = build_nested(5, 6).unwrap();
    let tones = tone_set(&[(0.17, 1.0)]);
    let snap = generate_snapshots(&tones, &pattern, 10_000, 1.0, 99).unwrap();
    let cov = estimate_covariance(&snap, false).unwrap();
    let z = lag_average(&cov, &difference_set(&pattern)).unwrap();
    let opts = NespritOptions {
        order: Some(1),
        ..NespritOptions::default()
    };
    let lines = nesprit_with(&z, &opts).unwrap();
    assert!(
        (lines.noise_estimate - 1.0).abs() < 0.2,
        "{}",
        lines.noise_estimate
    );
    assert!(circular(lines.lines[0].nu, 0.17) < 1e-3);
}

#[test]
fn filter_and_window_commute_only_trivially() {
    let pattern = build_nested(4, 5).unwrap();
    let tones = tone_set(&[(0.2, 1.0), (0.01, 50.0)]);
    let z = exact_coarray(&tones, &pattern, 0.1);
    let p = z.window_size();
    let max_diff = |a: &CoarraySignal, b: &CoarraySignal| {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    };

    let id = ClutterFilter::identity();
    let w = Window::Hann.coefficients(p);
    let a = apodize(&clutter_filter(&z, &id).unwrap(), &w).unwrap();
    let b = clutter_filter(&apodize(&z, &w).unwrap(), &id).unwrap();
    assert!(max_diff(&a, &b) < 1e-12);

    let hp = butterworth_highpass(4, 0.05).unwrap();
    let a = apodize(&clutter_filter(&z, &hp).unwrap(), &w).unwrap();
    let b = clutter_filter(&apodize(&z, &w).unwrap(), &hp).unwrap();
    assert!(max_diff(&a, &b) > 1e-3);
}
