//! End-to-end acceptance checks on synthetic data with known ground truth.
//! Prints one PASS/FAIL line per criterion and exits nonzero if any fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use wavedep::contagion::{event_table, rolling_wavelet_correlation, RollingOptions};
use wavedep::cwt::{significance_montecarlo, wavelet_coherence, MorletParams, SignificanceOptions, Smoothing};
use wavedep::dependence::{smooth_covariance, wavelet_correlation, wavelet_covariance, wavelet_cross_correlation, wmc};
use wavedep::longmemory::{
    cluster_markets, estimate_hurst, fractal_connectivity, rolling_hurst, synth_fgn, Cut, ScalingParams,
};
use wavedep::modwt::{build_filter, modwt_transform, BoundaryMode, FilterKind, FilterPair};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn noise(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn la8() -> FilterPair {
    build_filter("la8").unwrap()
}

fn sum_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// The 100-series grid shared by the additivity and energy checks.
fn random_grid() -> Vec<(Vec<f64>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let lengths = [512, 1024, 4096];
    (0..100)
        .map(|i| {
            let n = lengths[i % 3];
            let levels = rng.random_range(1..=6);
            let scale = rng.random_range(0.01..10.0);
            let drift = rng.random_range(-1.0..1.0);
            let x = noise(n, &mut rng).into_iter().map(|v| scale * v + drift).collect();
            (x, levels)
        })
        .collect()
}

fn mra_additivity() -> Outcome {
    let f = la8();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (x, levels) in random_grid() {
        let dec = modwt_transform(&x, levels, &f, BoundaryMode::Periodic).unwrap();
        let mra = dec.mra().unwrap();
        for t in 0..x.len() {
            let sum: f64 = mra.details.iter().map(|d| d[t]).sum::<f64>() + mra.smooth[t];
            worst = worst.max((sum - x[t]).abs());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-8 && elapsed < Duration::from_secs(5),
        format!(
            "max |x - sum(MRA)| = {worst:.3e} (<= 1e-8), {:.2}s (< 5s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn energy_preservation() -> Outcome {
    let f = la8();
    let mut worst = 0.0f64;
    for (x, levels) in random_grid() {
        let dec = modwt_transform(&x, levels, &f, BoundaryMode::Periodic).unwrap();
        let total: f64 = (1..=levels).map(|j| sum_sq(dec.details(j))).sum::<f64>() + sum_sq(dec.smooth());
        let e = sum_sq(&x);
        worst = worst.max((total - e).abs() / e);
    }
    outcome(
        worst <= 1e-10,
        format!("max relative energy error = {worst:.3e} (<= 1e-10)"),
    )
}

fn covariance_decomposition() -> Outcome {
    let f = la8();
    let mut rng = ChaCha8Rng::seed_from_u64(3003);
    let mut worst = 0.0f64;
    for &n in &[500usize, 1024, 3000] {
        let x: Vec<f64> = noise(n, &mut rng).into_iter().map(|v| 0.5 + v).collect();
        let y: Vec<f64> = x
            .iter()
            .zip(noise(n, &mut rng))
            .map(|(a, b)| 0.7 * a + 0.5 * b - 0.2)
            .collect();
        let (mx, my) = (x.iter().sum::<f64>() / n as f64, y.iter().sum::<f64>() / n as f64);
        let sample = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / n as f64;
        let dx = modwt_transform(&x, 6, &f, BoundaryMode::Periodic).unwrap();
        let dy = modwt_transform(&y, 6, &f, BoundaryMode::Periodic).unwrap();
        let scales: f64 = wavelet_covariance(&dx, &dy).unwrap().iter().sum();
        let total = scales + smooth_covariance(&dx, &dy).unwrap();
        worst = worst.max((total - sample).abs() / sample.abs());
    }
    outcome(
        worst <= 1e-8,
        format!("max relative error vs sample covariance = {worst:.3e} (<= 1e-8)"),
    )
}

fn self_correlation() -> Outcome {
    let f = la8();
    let mut rng = ChaCha8Rng::seed_from_u64(4004);
    let mut worst = 0.0f64;
    for mode in [
        BoundaryMode::Periodic,
        BoundaryMode::Brickwall,
        BoundaryMode::Reflection,
    ] {
        let x = noise(2048, &mut rng);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let dx = modwt_transform(&x, 6, &f, mode).unwrap();
        let dn = modwt_transform(&neg, 6, &f, mode).unwrap();
        let same = wavelet_correlation(&dx, &dx, 0.95).unwrap();
        let opposite = wavelet_correlation(&dx, &dn, 0.95).unwrap();
        for (s, o) in same.estimate.iter().zip(&opposite.estimate) {
            worst = worst.max((s - 1.0).abs()).max((o + 1.0).abs());
        }
    }
    outcome(
        worst <= 1e-12,
        format!("max |rho(x,x) - 1|, |rho(x,-x) + 1| = {worst:.3e} (<= 1e-12)"),
    )
}

/// Sum of sinusoids with frequencies inside the level-3 pass band.
fn band_limited(n: usize, shift: f64, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let waves: Vec<(f64, f64, f64)> = (0..24)
        .map(|_| {
            (
                rng.random_range(1.0 / 16.0..1.0 / 8.0),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(0.5..1.5),
            )
        })
        .collect();
    let eval = |t: f64| -> f64 {
        waves
            .iter()
            .map(|(f, p, a)| a * (std::f64::consts::TAU * f * t + p).cos())
            .sum()
    };
    let x = (0..n).map(|t| eval(t as f64)).collect();
    let y = (0..n).map(|t| eval(t as f64 - shift)).collect();
    (x, y)
}

fn lag_recovery() -> Outcome {
    let f = la8();
    let mut hits = 0;
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let (x, y) = band_limited(1024, 5.0, &mut rng);
        let dx = modwt_transform(&x, 4, &f, BoundaryMode::Brickwall).unwrap();
        let dy = modwt_transform(&y, 4, &f, BoundaryMode::Brickwall).unwrap();
        let profiles = wavelet_cross_correlation(&dx, &dy, 10, 0.95).unwrap();
        if profiles[2].peak_lag == 5 {
            hits += 1;
        }
    }
    outcome(
        hits == 20,
        format!("peak at lag 5 on level 3 in {hits}/20 seeds (20/20)"),
    )
}

fn hurst_calibration() -> Outcome {
    let f = la8();
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for &h in &[0.5, 0.7, 0.9] {
        let estimates: Vec<f64> = (0..50)
            .map(|r| {
                let x = synth_fgn(h, 4096, 6000 + r).unwrap();
                estimate_hurst(&x, 2, 8, &f).unwrap().hurst
            })
            .collect();
        let mean = estimates.iter().sum::<f64>() / 50.0;
        let sd = (estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / 49.0).sqrt();
        pass &= (mean - h).abs() <= 0.03 && sd <= 0.05;
        parts.push(format!("H={h}: mean {mean:.4} sd {sd:.4}"));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(30);
    outcome(
        pass,
        format!(
            "{} (|bias| <= 0.03, sd <= 0.05), {:.2}s (< 30s)",
            parts.join("; "),
            elapsed.as_secs_f64()
        ),
    )
}

fn scaling_identities() -> Outcome {
    let rows = [(0.117, 0.558, -0.442, 2.442), (0.247, 0.624, -0.376, 2.376)];
    let mut worst = 0.0f64;
    for (alpha, h, holder, dim) in rows {
        let p = ScalingParams::from_alpha(alpha, (alpha, alpha), 1.0);
        worst = worst
            .max((p.hurst - h).abs())
            .max((p.holder - holder).abs())
            .max((p.fractal_dim - dim).abs());
    }
    // Tabulated values are rounded to three decimals.
    outcome(
        worst <= 5e-4 + 1e-12,
        format!("max deviation from tabulated (H, h, D) = {worst:.1e} (<= 5e-4)"),
    )
}

fn coherence_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8008);
    let mut outside = 0usize;
    let mut min_self = f64::INFINITY;
    for _ in 0..3 {
        let n = 512;
        let params = MorletParams::for_length(n);
        let x = noise(n, &mut rng);
        let y: Vec<f64> = x.iter().zip(noise(n, &mut rng)).map(|(a, b)| 0.3 * a + b).collect();
        let field = wavelet_coherence(&x, &y, &params, Smoothing::Standard).unwrap();
        outside += field.r2.iter().flatten().filter(|v| !(0.0..=1.0).contains(*v)).count();
        let own = wavelet_coherence(&x, &x, &params, Smoothing::Standard).unwrap();
        outside += own.r2.iter().flatten().filter(|v| !(0.0..=1.0).contains(*v)).count();
        for s in 0..own.scales.len() {
            for t in 0..n {
                if own.inside_coi(s, t) {
                    min_self = min_self.min(own.r2[s][t]);
                }
            }
        }
    }
    outcome(
        outside == 0 && min_self >= 0.99,
        format!("{outside} cells outside [0,1]; min self-coherence inside COI = {min_self:.6} (>= 0.99)"),
    )
}

fn significance_calibration() -> Outcome {
    let start = Instant::now();
    let n = 256;
    let params = MorletParams::for_length(n);
    let mut fractions = Vec::new();
    for trial in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + trial);
        let x = noise(n, &mut rng);
        let y = noise(n, &mut rng);
        let opts = SignificanceOptions {
            n_surrogates: 300,
            seed: 90_000 + trial,
            ..SignificanceOptions::default()
        };
        let field = significance_montecarlo(&x, &y, &params, &opts).unwrap();
        fractions.push(field.significant_fraction_in_coi().unwrap());
    }
    let mean = fractions.iter().sum::<f64>() / fractions.len() as f64;
    let elapsed = start.elapsed();
    outcome(
        (0.03..=0.07).contains(&mean) && elapsed < Duration::from_secs(180),
        format!(
            "mean significant fraction inside COI = {:.2}% (3%-7%), {:.1}s (< 180s)",
            100.0 * mean,
            elapsed.as_secs_f64()
        ),
    )
}

const EVENT: usize = 1280;

fn contagion_options() -> RollingOptions {
    RollingOptions {
        levels: 3,
        window: 64,
        step: 64,
        filter: FilterKind::La8,
        boundary: BoundaryMode::Reflection,
    }
}

/// Rejections at `alpha` on levels 1-3 of the before/after test.
fn contagion_rejections(x: &[f64], y: &[f64], alpha: f64) -> Vec<bool> {
    let series = rolling_wavelet_correlation(x, y, &contagion_options()).unwrap();
    event_table(&series, EVENT, EVENT, x.len() - EVENT)
        .unwrap()
        .iter()
        .map(|r| r.p_value < alpha)
        .collect()
}

fn contagion_power_and_size() -> Outcome {
    let n = 2 * EVENT;
    let mut power_hits = 0;
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(10_000 + seed);
        let x = noise(n, &mut rng);
        let z = noise(n, &mut rng);
        let y: Vec<f64> = (0..n)
            .map(|t| if t < EVENT { z[t] } else { 0.6 * x[t] + 0.8 * z[t] })
            .collect();
        if contagion_rejections(&x, &y, 0.01).iter().all(|&r| r) {
            power_hits += 1;
        }
    }
    let (mut rejected, mut tests) = (0, 0);
    for seed in 0..200 {
        let mut rng = ChaCha8Rng::seed_from_u64(20_000 + seed);
        let x = noise(n, &mut rng);
        let y: Vec<f64> = x
            .iter()
            .zip(noise(n, &mut rng))
            .map(|(a, b)| 0.3 * a + 0.91f64.sqrt() * b)
            .collect();
        for r in contagion_rejections(&x, &y, 0.05) {
            tests += 1;
            rejected += r as usize;
        }
    }
    let size = rejected as f64 / tests as f64;
    outcome(
        power_hits >= 45 && (0.02..=0.09).contains(&size),
        format!(
            "shift rejected at 1% on d1-d3 in {power_hits}/50 seeds (>= 45); stationary rejection rate at 5% = {:.1}% (2%-9%)",
            100.0 * size
        ),
    )
}

fn wmc_leader() -> Outcome {
    let f = la8();
    let mut rng = ChaCha8Rng::seed_from_u64(11_011);
    let n = 4096;
    let others: Vec<Vec<f64>> = (0..4).map(|_| noise(n, &mut rng)).collect();
    let hub: Vec<f64> = (0..n)
        .map(|t| others.iter().map(|s| s[t]).sum::<f64>() / 4.0 + 0.05 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let mut panel = vec![hub];
    panel.extend(others);
    let decs: Vec<_> = panel
        .iter()
        .map(|x| modwt_transform(x, 8, &f, BoundaryMode::Brickwall).unwrap())
        .collect();
    let profile = wmc(&decs, 0.95).unwrap();
    let leaders_ok = profile.levels.iter().all(|l| l.leader_index == 0 && l.phi >= 0.99);
    let min_phi = profile.levels.iter().map(|l| l.phi).fold(f64::INFINITY, f64::min);

    let x = noise(2048, &mut rng);
    let y: Vec<f64> = x.iter().zip(noise(2048, &mut rng)).map(|(a, b)| 0.5 * a - b).collect();
    let dx = modwt_transform(&x, 6, &f, BoundaryMode::Periodic).unwrap();
    let dy = modwt_transform(&y, 6, &f, BoundaryMode::Periodic).unwrap();
    let pairwise = wavelet_correlation(&dx, &dy, 0.95).unwrap();
    let two = wmc(&[dx, dy], 0.95).unwrap();
    let gap = two
        .levels
        .iter()
        .zip(&pairwise.estimate)
        .map(|(l, r)| (l.phi - r.abs()).abs())
        .fold(0.0, f64::max);
    outcome(
        leaders_ok && profile.levels.len() == 8 && gap <= 1e-10,
        format!(
            "leader 0 on {}/8 levels, min phi {min_phi:.4} (>= 0.99); two-series |WMC - |rho|| = {gap:.1e} (<= 1e-10)",
            profile.levels.iter().filter(|l| l.leader_index == 0).count()
        ),
    )
}

fn rolling_hurst_regime() -> Outcome {
    let f = la8();
    let (half, window, step) = (2048usize, 260usize, 24usize);
    let mut hits = 0;
    let mut diffs = Vec::new();
    for seed in 0..20u64 {
        let mut x = synth_fgn(0.5, half, 12_000 + seed).unwrap();
        x.extend(synth_fgn(0.8, half, 13_000 + seed).unwrap());
        let points = rolling_hurst(&x, window, step, 2, 6, &f).unwrap();
        let pre: Vec<f64> = points.iter().filter(|p| p.anchor < half).map(|p| p.fit.hurst).collect();
        let post: Vec<f64> = points
            .iter()
            .filter(|p| p.anchor + 1 >= half + window)
            .map(|p| p.fit.hurst)
            .collect();
        let diff = post.iter().sum::<f64>() / post.len() as f64 - pre.iter().sum::<f64>() / pre.len() as f64;
        diffs.push(diff);
        if diff >= 0.15 {
            hits += 1;
        }
    }
    let min = diffs.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        hits >= 18,
        format!("post - pre mean Hurst >= 0.15 in {hits}/20 seeds (>= 18), smallest gap {min:.3}"),
    )
}

fn connectivity_clustering() -> Outcome {
    let f = la8();
    let groups = [0usize, 1, 0, 1, 1, 0];
    let mut recovered = 0;
    let mut structure_ok = true;
    for seed in 0..10u64 {
        let base = 14_000 + 10 * seed;
        let factors = [
            synth_fgn(0.8, 4096, base).unwrap(),
            synth_fgn(0.8, 4096, base + 1).unwrap(),
        ];
        let decs: Vec<_> = groups
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                let own = synth_fgn(0.6, 4096, base + 2 + i as u64).unwrap();
                let x: Vec<f64> = factors[g].iter().zip(&own).map(|(a, b)| a + 0.5 * b).collect();
                modwt_transform(&x, 7, &f, BoundaryMode::Periodic).unwrap()
            })
            .collect();
        let result = fractal_connectivity(&decs, 4, 7, 0.2).unwrap();
        for i in 0..6 {
            structure_ok &= result.f[i][i] == 1.0;
            for l in 0..6 {
                structure_ok &= result.f[i][l] == result.f[l][i];
            }
        }
        let clusters = cluster_markets(&result.f, Cut::Clusters(2)).unwrap();
        let same_partition =
            (0..6).all(|i| (0..6).all(|l| (groups[i] == groups[l]) == (clusters.labels[i] == clusters.labels[l])));
        if same_partition {
            recovered += 1;
        }
    }
    outcome(
        recovered == 10 && structure_ok,
        format!("two blocks recovered in {recovered}/10 panels; F symmetric with unit diagonal: {structure_ok}"),
    )
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_wavedep"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr).trim()))
    }
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn cli_determinism() -> Outcome {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/correlated_pair.csv");
    let data = data.to_str().unwrap();
    let work = tempfile::tempdir().unwrap();
    let config = work.path().join("run.conf");
    fs::write(&config, "seed = 17\nsurrogates = 100\nconfidence = 0.95\ntag = det\n").unwrap();
    let config = config.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["stats", data],
        vec!["decompose", data],
        vec!["wcor", data],
        vec!["wccor", data],
        vec!["wmc", data],
        vec!["wmcc", data],
        vec!["leaders", data],
        vec!["coherence", data],
        vec!["rolling-cor", data, "--step", "8"],
        vec![
            "contagion-test",
            data,
            "--event",
            "2012-01-02",
            "--levels",
            "3",
            "--window",
            "64",
            "--pre",
            "200",
            "--post",
            "200",
        ],
        vec!["logscale", data],
        vec!["hurst", data],
        vec!["rolling-hurst", data],
        vec!["connectivity", data],
        vec!["synth-fgn", "--H", "0.7", "--n", "1024"],
    ];
    let dirs = [work.path().join("a"), work.path().join("b")];
    for dir in &dirs {
        for args in &runs {
            let mut full = args.clone();
            full.extend(["--config", config]);
            if let Err(e) = run_cli(dir, &full) {
                return outcome(false, e);
            }
        }
    }
    let (a, b) = (read_dir_sorted(&dirs[0]), read_dir_sorted(&dirs[1]));
    let commands_seen = runs
        .iter()
        .filter(|r| a.iter().any(|(name, _)| name.starts_with(&format!("{}-det.", r[0]))))
        .count();
    outcome(
        a == b && commands_seen == runs.len(),
        format!(
            "{} output files from {commands_seen}/{} subcommands byte-identical across runs: {}",
            a.len(),
            runs.len(),
            a == b
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("MRA additivity", mra_additivity),
        ("energy preservation", energy_preservation),
        ("covariance decomposition", covariance_decomposition),
        ("self-correlation", self_correlation),
        ("lag recovery", lag_recovery),
        ("Hurst calibration", hurst_calibration),
        ("scaling-parameter identities", scaling_identities),
        ("coherence bounds and self-coherence", coherence_bounds),
        ("significance calibration", significance_calibration),
        ("contagion power and size", contagion_power_and_size),
        ("WMC leader", wmc_leader),
        ("rolling Hurst regime detection", rolling_hurst_regime),
        ("connectivity clustering", connectivity_clustering),
        ("CLI determinism", cli_determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failures += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
