//! Small statistics toolbox used by the verification suites: chi-square
//! goodness of fit, Kolmogorov-Smirnov distance, and paired sign tests.

use crate::error::{Error, Result};
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, DiscreteCDF, Normal};

/// Standard normal CDF.
pub fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    Normal::new(mean, sd).expect("valid normal").cdf(x)
}

/// Pearson chi-square statistic of observed counts against expected
/// probabilities. Cells with expected count below `min_expected` (default
/// guard 5 is the caller's business) are still included; callers choose
/// targets with adequate support. Returns `(statistic, degrees_of_freedom)`.
pub fn chi_square_statistic(observed: &[u64], expected_probs: &[f64]) -> Result<(f64, usize)> {
    if observed.len() != expected_probs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} observed cells vs {} expected",
            observed.len(),
            expected_probs.len()
        )));
    }
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(Error::Config("chi-square needs at least one sample".into()));
    }
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&obs, &p) in observed.iter().zip(expected_probs) {
        if p <= 0.0 {
            if obs > 0 {
                return Err(Error::Domain(
                    "observed count in a zero-probability cell".into(),
                ));
            }
            continue;
        }
        let exp = p * n as f64;
        stat += (obs as f64 - exp).powi(2) / exp;
        cells += 1;
    }
    Ok((stat, cells.saturating_sub(1)))
}

/// Upper-tail p-value of a chi-square statistic.
pub fn chi_square_pvalue(stat: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(df as f64).expect("positive df");
    1.0 - dist.cdf(stat)
}

/// One-sample Kolmogorov-Smirnov statistic `sup_x |F_n(x) - F(x)|` against
/// a reference CDF. Sorts a copy of the sample.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Config("KS statistic needs samples".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    Ok(d)
}

/// Asymptotic two-sided KS critical value: the `D` above which the test
/// rejects at level `alpha` for sample size `n`. Uses the Kolmogorov tail
/// series `Q(x) = 2 sum_k (-1)^{k-1} exp(-2 k^2 x^2)` inverted by bisection.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    let q = |x: f64| -> f64 {
        let mut s = 0.0;
        for k in 1..=100 {
            let term = (-2.0 * (k as f64).powi(2) * x * x).exp();
            s += if k % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        2.0 * s
    };
    let (mut lo, mut hi) = (0.2f64, 4.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) / (n as f64).sqrt()
}

/// One-sided paired sign test. `n_pos` pairs moved in the hypothesized
/// direction, `n_neg` against it; ties are dropped by the caller. Returns
/// the p-value `P(X >= n_pos)` for `X ~ Binomial(n_pos + n_neg, 1/2)`.
pub fn sign_test_pvalue(n_pos: u64, n_neg: u64) -> f64 {
    let n = n_pos + n_neg;
    if n == 0 {
        return 1.0;
    }
    let dist = Binomial::new(0.5, n).expect("valid binomial");
    if n_pos == 0 {
        1.0
    } else {
        1.0 - dist.cdf(n_pos - 1)
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn chi_square_pvalue_matches_tables() {
        // chi2(df=3) upper 1% point is 11.345
        assert!((chi_square_pvalue(11.345, 3) - 0.01).abs() < 1e-4);
        assert!((chi_square_pvalue(0.0, 3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_square_statistic_balanced() {
        let (stat, df) = chi_square_statistic(&[25, 25, 25, 25], &[0.25; 4]).unwrap();
        assert_eq!(stat, 0.0);
        assert_eq!(df, 3);
        let (stat, _) = chi_square_statistic(&[30, 20, 25, 25], &[0.25; 4]).unwrap();
        assert_relative_eq!(stat, (25.0 + 25.0) / 25.0);
    }

    #[test]
    fn ks_on_exact_grid() {
        // empirical CDF of {0.25, 0.75} against U(0,1): D = 1/4
        let d = ks_statistic(&[0.25, 0.75], |x| x.clamp(0.0, 1.0)).unwrap();
        assert_relative_eq!(d, 0.25);
    }

    #[test]
    fn ks_critical_known_constants() {
        // classic asymptotic coefficients: 1.358 (5%), 1.628 (1%)
        assert!((ks_critical(10_000, 0.05) * 100.0 - 1.358).abs() < 2e-3);
        assert!((ks_critical(10_000, 0.01) * 100.0 - 1.628).abs() < 2e-3);
    }

    #[test]
    fn sign_test_small_cases() {
        assert_relative_eq!(sign_test_pvalue(1, 0), 0.5, epsilon = 1e-12);
        assert_relative_eq!(sign_test_pvalue(2, 0), 0.25, epsilon = 1e-12);
        assert_relative_eq!(sign_test_pvalue(0, 5), 1.0, epsilon = 1e-12);
        // 32 of 50 one direction: p ~ 0.0325
        let p = sign_test_pvalue(32, 18);
        assert!((p - 0.03245).abs() < 1e-4, "p = {p}");
    }
}
