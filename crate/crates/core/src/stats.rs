//! Small statistical helpers shared across modules.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with the n-1 denominator.
pub fn sample_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Two-sided standard normal critical value for the given confidence level,
/// e.g. 1.959964 for 0.95.
pub fn normal_critical(confidence: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    n.inverse_cdf(1.0 - (1.0 - confidence) / 2.0)
}

pub fn normal_cdf(z: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").cdf(z)
}

/// Two-sided p-value of a Student t statistic.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return 1.0;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
}

pub fn chi_squared_quantile(p: f64, df: f64) -> f64 {
    ChiSquared::new(df).expect("positive df").inverse_cdf(p)
}

/// Fisher z-transform confidence interval for a correlation estimate.
///
/// Returns `(-1, 1)` when the effective size leaves no degrees of freedom.
pub fn fisher_ci(rho: f64, effective_n: f64, confidence: f64) -> (f64, f64) {
    if effective_n <= 3.0 {
        return (-1.0, 1.0);
    }
    let z = rho.clamp(-1.0, 1.0).atanh();
    let half = normal_critical(confidence) / (effective_n - 3.0).sqrt();
    let lo = (z - half).tanh();
    let hi = (z + half).tanh();
    (lo.min(rho), hi.max(rho))
}

/// Empirical quantile with linear interpolation between order statistics
/// (the "type 7" definition). `sorted` must be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quantile(values: &mut [f64], q: f64) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    quantile_sorted(values, q)
}

/// Weighted least-squares line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Variance of the slope when the weights are inverse variances of `y`.
    pub slope_variance: f64,
    pub intercept_variance: f64,
}

pub fn wls_line(x: &[f64], y: &[f64], w: &[f64]) -> LineFit {
    let s0: f64 = w.iter().sum();
    let s1: f64 = w.iter().zip(x).map(|(w, x)| w * x).sum();
    let s2: f64 = w.iter().zip(x).map(|(w, x)| w * x * x).sum();
    let t0: f64 = w.iter().zip(y).map(|(w, y)| w * y).sum();
    let t1: f64 = w.iter().zip(x).zip(y).map(|((w, x), y)| w * x * y).sum();
    let det = s0 * s2 - s1 * s1;
    let slope = (s0 * t1 - s1 * t0) / det;
    let intercept = (s2 * t0 - s1 * t1) / det;
    LineFit {
        slope,
        intercept,
        slope_variance: s0 / det,
        intercept_variance: s2 / det,
    }
}

/// Welch two-sample t-test of `mean(a) - mean(b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
}

pub fn welch_t_test(a: &[f64], b: &[f64]) -> WelchTest {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let diff = mean(a) - mean(b);
    let va = sample_variance(a) / na;
    let vb = sample_variance(b) / nb;
    let se2 = va + vb;
    if se2 <= 0.0 {
        // Both samples degenerate: equal means carry no evidence, distinct
        // means are infinitely significant.
        return if diff == 0.0 {
            WelchTest {
                t: 0.0,
                df: na + nb - 2.0,
                p_value: 1.0,
            }
        } else {
            WelchTest {
                t: diff.signum() * f64::INFINITY,
                df: na + nb - 2.0,
                p_value: 0.0,
            }
        };
    }
    let t = diff / se2.sqrt();
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    WelchTest {
        t,
        df,
        p_value: t_two_sided_p(t, df),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_critical_95() {
        assert!((normal_critical(0.95) - 1.959_963_984_540_054).abs() < 1e-9);
    }

    #[test]
    fn quantile_type7() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert!((quantile_sorted(&v, 0.5) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn wls_equal_weights_is_ols() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.1, 3.9, 6.2, 7.8, 10.1];
        let fit = wls_line(&x, &y, &[3.0; 5]);
        // closed-form OLS
        let mx = mean(&x);
        let my = mean(&y);
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        assert!((fit.slope - sxy / sxx).abs() < 1e-12);
        assert!((fit.intercept - (my - sxy / sxx * mx)).abs() < 1e-12);
    }

    #[test]
    fn welch_identical_samples() {
        let a = [0.1, 0.3, 0.2, 0.5];
        let r = welch_t_test(&a, &a);
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn t_pvalue_matches_reference() {
        // scipy.stats.t.sf(2.0, 10) * 2 = 0.07338803...
        assert!((t_two_sided_p(2.0, 10.0) - 0.073_388_034).abs() < 1e-6);
    }
}
