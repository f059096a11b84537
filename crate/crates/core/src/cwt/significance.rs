//! Red-noise Monte Carlo significance for wavelet coherence.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::coherence::{CoherenceField, Smoothing, Thresholds};
use super::transform::{cone_of_influence, CwtEngine, MorletParams};
use crate::error::{Result, WaveError};
use crate::stats::{mean, sample_variance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ar1Params {
    pub phi: f64,
    pub sigma: f64,
}

impl Ar1Params {
    /// Stationary AR(1) path of length `n`.
    pub fn simulate<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        let stationary_sd = self.sigma / (1.0 - self.phi * self.phi).sqrt();
        let mut prev = stationary_sd * rng.sample::<f64, _>(StandardNormal);
        out.push(prev);
        for _ in 1..n {
            prev = self.phi * prev + self.sigma * rng.sample::<f64, _>(StandardNormal);
            out.push(prev);
        }
        out
    }
}

/// Red-noise fit: lag-1 autocorrelation clamped to `[0, 0.999]`, innovation
/// variance chosen to reproduce the sample variance.
pub fn ar1_fit(x: &[f64]) -> Result<Ar1Params> {
    if x.len() < 8 {
        return Err(WaveError::InsufficientData(format!(
            "AR(1) fit needs at least 8 observations, got {}",
            x.len()
        )));
    }
    let m = mean(x);
    let denom: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    if denom <= 0.0 {
        return Err(WaveError::ConstantSeries);
    }
    let num: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    let phi = (num / denom).clamp(0.0, 0.999);
    let sigma = (sample_variance(x) * (1.0 - phi * phi)).sqrt();
    Ok(Ar1Params { phi, sigma })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// One threshold per scale from surrogate values pooled over times inside
    /// the cone of influence (all times when the cone excludes the scale).
    #[default]
    PerScale,
    /// One threshold per cell from the surrogate values at that cell.
    PerCell,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignificanceOptions {
    pub n_surrogates: usize,
    pub quantile: f64,
    pub seed: u64,
    pub pooling: Pooling,
}

impl Default for SignificanceOptions {
    fn default() -> Self {
        SignificanceOptions {
            n_surrogates: 300,
            quantile: 0.95,
            seed: 0,
            pooling: Pooling::PerScale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Ordered(f64);

impl Eq for Ordered {}

impl PartialOrd for Ordered {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ordered {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Streams values of a pool of known total size and keeps only the largest
/// ones needed to evaluate one upper quantile exactly.
struct UpperTail {
    total: usize,
    seen: usize,
    keep: usize,
    heap: BinaryHeap<Reverse<Ordered>>,
}

impl UpperTail {
    fn new(total: usize, q: f64) -> Self {
        let h = (total - 1) as f64 * q;
        let keep = total - h.floor() as usize;
        UpperTail {
            total,
            seen: 0,
            keep,
            heap: BinaryHeap::with_capacity(keep + 1),
        }
    }

    fn push(&mut self, v: f64) {
        self.seen += 1;
        if self.heap.len() < self.keep {
            self.heap.push(Reverse(Ordered(v)));
        } else if let Some(Reverse(Ordered(min))) = self.heap.peek() {
            if v > *min {
                self.heap.pop();
                self.heap.push(Reverse(Ordered(v)));
            }
        }
    }

    /// Type-7 quantile of everything pushed.
    fn quantile(self, q: f64) -> f64 {
        debug_assert_eq!(self.seen, self.total);
        let h = (self.total - 1) as f64 * q;
        let lo = h.floor() as usize;
        let mut tail: Vec<f64> = self.heap.into_iter().map(|Reverse(Ordered(v))| v).collect();
        tail.sort_by(f64::total_cmp);
        // tail[0] is order statistic `lo`.
        let offset = self.total - tail.len();
        let a = tail[lo - offset];
        let b = tail[(h.ceil() as usize - offset).min(tail.len() - 1)];
        a + (h - lo as f64) * (b - a)
    }
}

/// Per-stream RNG for surrogate `i`, independent of scheduling.
fn surrogate_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

impl CwtEngine {
    /// Thresholds from `opts.n_surrogates` coherence fields of independent
    /// AR(1) pairs fitted to `x` and `y`.
    pub fn surrogate_thresholds(&self, x: &[f64], y: &[f64], opts: &SignificanceOptions) -> Result<Thresholds> {
        if opts.n_surrogates < 100 {
            return Err(WaveError::param(
                "surrogates",
                format!("{} is below the minimum of 100", opts.n_surrogates),
            ));
        }
        if !(opts.quantile > 0.0 && opts.quantile < 1.0) {
            return Err(WaveError::param(
                "quantile",
                format!("{} is not in (0, 1)", opts.quantile),
            ));
        }
        self.check_len(x)?;
        self.check_len(y)?;
        let fx = ar1_fit(x)?;
        let fy = ar1_fit(y)?;
        let n = self.n;
        let coi = cone_of_influence(n, &self.params);
        let ns = self.scales.len();
        let q = opts.quantile;

        // Times pooled at each scale.
        let pools: Vec<Vec<usize>> = self
            .scales
            .iter()
            .map(|&s| {
                let inside: Vec<usize> = (0..n).filter(|&t| s <= coi[t]).collect();
                if inside.is_empty() {
                    (0..n).collect()
                } else {
                    inside
                }
            })
            .collect();
        let mut tails: Vec<UpperTail> = match opts.pooling {
            Pooling::PerScale => pools
                .iter()
                .map(|p| UpperTail::new(p.len() * opts.n_surrogates, q))
                .collect(),
            Pooling::PerCell => (0..ns * n).map(|_| UpperTail::new(opts.n_surrogates, q)).collect(),
        };

        // Surrogates are generated in parallel batches and folded in index
        // order, so the result does not depend on the thread count.
        let batch = (4 * rayon::current_num_threads()).max(4);
        let mut start = 0;
        while start < opts.n_surrogates {
            let end = (start + batch).min(opts.n_surrogates);
            let fields: Vec<Vec<Vec<f64>>> = (start..end)
                .into_par_iter()
                .map(|i| {
                    let mut rng = surrogate_rng(opts.seed, i);
                    let sx = fx.simulate(n, &mut rng);
                    let sy = fy.simulate(n, &mut rng);
                    self.coherence_grid(&sx, &sy, Smoothing::Standard).map(|g| g.r2)
                })
                .collect::<Result<_>>()?;
            for r2 in &fields {
                match opts.pooling {
                    Pooling::PerScale => {
                        for (s, pool) in pools.iter().enumerate() {
                            for &t in pool {
                                tails[s].push(r2[s][t]);
                            }
                        }
                    }
                    Pooling::PerCell => {
                        for (s, row) in r2.iter().enumerate() {
                            for (t, &v) in row.iter().enumerate() {
                                tails[s * n + t].push(v);
                            }
                        }
                    }
                }
            }
            start = end;
        }

        let values: Vec<f64> = tails.into_iter().map(|t| t.quantile(q)).collect();
        Ok(match opts.pooling {
            Pooling::PerScale => Thresholds::PerScale(values),
            Pooling::PerCell => Thresholds::PerCell(values.chunks(n).map(|c| c.to_vec()).collect()),
        })
    }
}

impl CoherenceField {
    /// Marks cells whose coherence exceeds the thresholds.
    pub fn apply_thresholds(&mut self, thresholds: Thresholds, n_surrogates: usize) {
        let mask = self
            .r2
            .iter()
            .enumerate()
            .map(|(s, row)| row.iter().enumerate().map(|(t, &r)| r > thresholds.at(s, t)).collect())
            .collect();
        self.sig_mask = Some(mask);
        self.thresholds = Some(thresholds);
        self.n_surrogates = n_surrogates;
    }
}

/// Observed coherence of `x` and `y` with its Monte Carlo significance mask.
pub fn significance_montecarlo(
    x: &[f64],
    y: &[f64],
    params: &MorletParams,
    opts: &SignificanceOptions,
) -> Result<CoherenceField> {
    if x.len() != y.len() {
        return Err(WaveError::Mismatch(format!(
            "series lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let engine = CwtEngine::new(x.len(), *params)?;
    let mut field = engine.coherence(x, y, Smoothing::Standard)?;
    let thresholds = engine.surrogate_thresholds(x, y, opts)?;
    field.apply_thresholds(thresholds, opts.n_surrogates);
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn ar1_fit_white_noise() {
        let fit = ar1_fit(&noise(4096, 1)).unwrap();
        assert!(fit.phi.abs() < 0.05);
    }

    #[test]
    fn ar1_fit_recovers_coefficient() {
        let truth = Ar1Params { phi: 0.7, sigma: 1.0 };
        let x = truth.simulate(4096, &mut ChaCha8Rng::seed_from_u64(2));
        let fit = ar1_fit(&x).unwrap();
        assert!((0.65..=0.75).contains(&fit.phi), "{}", fit.phi);
        let implied = fit.sigma * fit.sigma / (1.0 - fit.phi * fit.phi);
        assert!((implied - sample_variance(&x)).abs() < 1e-9 * implied);
    }

    #[test]
    fn ar1_fit_rejects_constant() {
        assert!(matches!(ar1_fit(&[2.0; 20]), Err(WaveError::ConstantSeries)));
    }

    #[test]
    fn upper_tail_quantile_is_exact() {
        let values: Vec<f64> = noise(1000, 3);
        for q in [0.5, 0.95, 0.99] {
            let mut tail = UpperTail::new(values.len(), q);
            for &v in &values {
                tail.push(v);
            }
            let mut sorted = values.clone();
            let exact = crate::stats::quantile(&mut sorted, q);
            assert_eq!(tail.quantile(q), exact);
        }
    }

    #[test]
    fn higher_quantile_gives_sparser_mask() {
        let n = 64;
        let x = noise(n, 4);
        let y = noise(n, 5);
        let p = MorletParams::for_length(n);
        let base = SignificanceOptions {
            n_surrogates: 100,
            seed: 9,
            ..Default::default()
        };
        let m95 = significance_montecarlo(&x, &y, &p, &base).unwrap();
        let m99 = significance_montecarlo(&x, &y, &p, &SignificanceOptions { quantile: 0.99, ..base }).unwrap();
        let (a, b) = (m95.sig_mask.unwrap(), m99.sig_mask.unwrap());
        for (ra, rb) in a.iter().zip(&b) {
            for (&sa, &sb) in ra.iter().zip(rb) {
                assert!(!sb || sa);
            }
        }
    }

    #[test]
    fn identical_pair_is_significant() {
        let n = 128;
        let x = noise(n, 6);
        let p = MorletParams::for_length(n);
        let f = significance_montecarlo(
            &x,
            &x,
            &p,
            &SignificanceOptions {
                n_surrogates: 100,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(f.significant_fraction_in_coi().unwrap() > 0.95);
    }

    #[test]
    fn per_cell_pooling_and_determinism() {
        let n = 48;
        let x = noise(n, 7);
        let y = noise(n, 8);
        let p = MorletParams::for_length(n);
        let opts = SignificanceOptions {
            n_surrogates: 100,
            seed: 3,
            pooling: Pooling::PerCell,
            ..Default::default()
        };
        let a = significance_montecarlo(&x, &y, &p, &opts).unwrap();
        let b = significance_montecarlo(&x, &y, &p, &opts).unwrap();
        assert_eq!(a.sig_mask, b.sig_mask);
        assert!(matches!(a.thresholds, Some(Thresholds::PerCell(_))));
    }

    #[test]
    fn too_few_surrogates_rejected() {
        let x = noise(32, 1);
        let opts = SignificanceOptions {
            n_surrogates: 10,
            ..Default::default()
        };
        assert!(significance_montecarlo(&x, &x, &MorletParams::for_length(32), &opts).is_err());
    }
}
