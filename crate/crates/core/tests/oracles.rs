//! Library results checked against direct formulas and reference values
//! computed outside the crate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use wavedep::cwt::{ar1_fit, cwt_morlet, Ar1Params, MorletParams};
use wavedep::dependence::wavelet_variance;
use wavedep::longmemory::synth_fgn;
use wavedep::modwt::{build_filter, modwt_transform, BoundaryMode};
use wavedep::stats::{chi_squared_quantile, normal_critical, t_two_sided_p, welch_t_test};

fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Circular convolution `sum_l f[l] x[(t - l) mod n]`.
fn circular(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|t| {
            f.iter()
                .enumerate()
                .map(|(l, c)| c * x[(t + n * f.len() - l) % n])
                .sum()
        })
        .collect()
}

fn upsample(f: &[f64], factor: usize) -> Vec<f64> {
    let mut out = vec![0.0; (f.len() - 1) * factor + 1];
    for (i, v) in f.iter().enumerate() {
        out[i * factor] = *v;
    }
    out
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (k, y) in b.iter().enumerate() {
            out[i + k] += x * y;
        }
    }
    out
}

#[test]
fn pyramid_matches_equivalent_filter_convolution() {
    let f = build_filter("la8").unwrap();
    let h: Vec<f64> = f.wavelet().iter().map(|v| v / 2f64.sqrt()).collect();
    let g: Vec<f64> = f.scaling().iter().map(|v| v / 2f64.sqrt()).collect();
    let x = noise(200, 1);
    let dec = modwt_transform(&x, 2, &f, BoundaryMode::Periodic).unwrap();

    let w1 = circular(&x, &h);
    let h2 = convolve(&g, &upsample(&h, 2));
    let w2 = circular(&x, &h2);
    let v2 = circular(&x, &convolve(&g, &upsample(&g, 2)));
    for t in 0..x.len() {
        assert!((dec.details(1)[t] - w1[t]).abs() < 1e-12);
        assert!((dec.details(2)[t] - w2[t]).abs() < 1e-12);
        assert!((dec.smooth()[t] - v2[t]).abs() < 1e-12);
    }
}

#[test]
fn white_noise_wavelet_variance_halves_per_level() {
    // For unit white noise the level-j MODWT variance is 2^-j.
    let x = noise(1 << 15, 2);
    let dec = modwt_transform(&x, 5, &build_filter("la8").unwrap(), BoundaryMode::Brickwall).unwrap();
    let profile = wavelet_variance(&dec, 0.95).unwrap();
    for j in 1..=5 {
        let truth = 0.5f64.powi(j as i32);
        let est = profile.estimate[j - 1];
        assert!((est / truth - 1.0).abs() < 0.06, "level {j}: {est} vs {truth}");
        assert!(profile.ci_low[j - 1] < truth && truth < profile.ci_high[j - 1]);
    }
}

#[test]
fn distribution_quantiles_match_reference_values() {
    assert!((chi_squared_quantile(0.975, 10.0) - 20.483177350807388).abs() < 1e-8);
    assert!((chi_squared_quantile(0.025, 10.0) - 3.2469727802368413).abs() < 1e-8);
    assert!((normal_critical(0.95) - 1.959963984540054).abs() < 1e-9);
    assert!((t_two_sided_p(2.228, 10.0) - 0.050011771817111327).abs() < 1e-9);
}

#[test]
fn welch_test_matches_reference_values() {
    let r = welch_t_test(&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 6.0, 8.0, 10.0]);
    assert!((r.t - -2.2514363231593695).abs() < 1e-12);
    assert!((r.df - 5.520787746170677).abs() < 1e-10);
    assert!((r.p_value - 0.06913359319239236).abs() < 1e-9);
}

#[test]
fn fgn_sample_autocovariance_follows_power_law() {
    let h = 0.75;
    let truth = |k: f64| 0.5 * ((k + 1.0).powf(2.0 * h) - 2.0 * k.powf(2.0 * h) + (k - 1.0).abs().powf(2.0 * h));
    let (n, reps) = (1024usize, 200u64);
    for lag in [0usize, 1, 2, 5, 20] {
        let mut acc = 0.0;
        for r in 0..reps {
            let x = synth_fgn(h, n, 500 + r).unwrap();
            acc += (0..n - lag).map(|t| x[t] * x[t + lag]).sum::<f64>() / (n - lag) as f64;
        }
        let est = acc / reps as f64;
        assert!(
            (est - truth(lag as f64)).abs() < 0.03,
            "lag {lag}: {est} vs {}",
            truth(lag as f64)
        );
    }
}

#[test]
fn ar1_parameters_are_recovered() {
    let truth = Ar1Params { phi: 0.6, sigma: 2.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = truth.simulate(20_000, &mut rng);
    let fit = ar1_fit(&x).unwrap();
    assert!((fit.phi - 0.6).abs() < 0.02, "phi {}", fit.phi);
    assert!((fit.sigma - 2.0).abs() < 0.05, "sigma {}", fit.sigma);
}

#[test]
fn cwt_power_peaks_at_sinusoid_period() {
    let n = 1024;
    let x: Vec<f64> = (0..n)
        .map(|t| (std::f64::consts::TAU * t as f64 / 32.0).sin())
        .collect();
    let params = MorletParams::for_length(n);
    let field = cwt_morlet(&x, &params).unwrap();
    let power = field.power();
    let mid = n / 2;
    let best = (0..field.scales.len())
        .max_by(|&a, &b| power[a][mid].total_cmp(&power[b][mid]))
        .unwrap();
    let ratio = field.periods[best] / 32.0;
    // Within one scale step of the true period.
    assert!(
        (ratio.log2()).abs() <= params.dj + 1e-9,
        "peak period {}",
        field.periods[best]
    );
}
