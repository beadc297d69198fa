//! Shared statistical plumbing: negative-binomial laws, chi-square
//! goodness-of-fit with tail pooling, and (weighted) log-log fits.

use statrs::function::gamma::{gamma_ur, ln_gamma};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("nonpositive value where a positive one is required: {0}")]
    NonPositive(String),
}

/// pmf of NegBin(r, p) at m: C(m+r-1, m) p^r (1-p)^m for m = 0, 1, ...
///
/// The convention is fixed so that for r = 2, p = 1/n the tail satisfies
/// P(X > K) = ((K+n)/n)(1-1/n)^K, the slice-size law of the reduced ensembles.
pub fn negbin_pmf(r: u32, p: f64, m: u64) -> Result<f64, StatsError> {
    if r == 0 {
        return Err(StatsError::Parameter("negbin r must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&p) || p <= 0.0 {
        return Err(StatsError::Parameter(format!("negbin p = {p} not in (0, 1]")));
    }
    if p == 1.0 {
        return Ok(if m == 0 { 1.0 } else { 0.0 });
    }
    let (r, m) = (f64::from(r), m as f64);
    let ln_coeff = ln_gamma(m + r) - ln_gamma(m + 1.0) - ln_gamma(r);
    Ok((ln_coeff + r * p.ln() + m * (1.0 - p).ln()).exp())
}

/// Tail P(X > K) of NegBin(2, p); closed form (1 + K p)(1-p)^K.
pub fn negbin2_tail(p: f64, k: u64) -> f64 {
    (1.0 + k as f64 * p) * (1.0 - p).powf(k as f64)
}

/// Result of a chi-square goodness-of-fit test.
#[derive(Debug, Clone)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Number of bins actually used after tail pooling.
    pub bins: usize,
}

/// Chi-square test of observed category counts against a discrete pmf.
///
/// `expected_probs[i]` is the model probability of category i; any residual
/// mass `1 - sum` is treated as an extra overflow category. Bins are pooled
/// from the right until every expected count is at least `min_bin`.
pub fn chi_square_test(
    observed: &[u64],
    expected_probs: &[f64],
    min_bin: f64,
) -> Result<ChiSquare, StatsError> {
    if observed.len() != expected_probs.len() {
        return Err(StatsError::Parameter("observed/expected length mismatch".into()));
    }
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(StatsError::InsufficientData("no observations".into()));
    }
    let residual = (1.0 - expected_probs.iter().sum::<f64>()).max(0.0);
    let mut exp: Vec<f64> = expected_probs.iter().map(|p| p * n as f64).collect();
    let mut obs: Vec<f64> = observed.iter().map(|&o| o as f64).collect();
    exp.push(residual * n as f64);
    obs.push(0.0);

    // Pool the tail (rightmost bins) until the pooled bin is big enough.
    while exp.len() > 1 {
        let last = exp.len() - 1;
        if exp[last] >= min_bin {
            break;
        }
        let (e, o) = (exp.pop().unwrap(), obs.pop().unwrap());
        *exp.last_mut().unwrap() += e;
        *obs.last_mut().unwrap() += o;
    }
    // Pool any interior underfilled bin into its right neighbour, scanning left.
    let mut i = 0;
    while i < exp.len() {
        if exp[i] < min_bin && exp.len() > 1 {
            let e = exp.remove(i);
            let o = obs.remove(i);
            let j = i.min(exp.len() - 1);
            exp[j] += e;
            obs[j] += o;
        } else {
            i += 1;
        }
    }
    if exp.len() < 2 {
        return Err(StatsError::InsufficientData("fewer than 2 bins after pooling".into()));
    }
    let statistic: f64 = exp
        .iter()
        .zip(&obs)
        .map(|(&e, &o)| {
            let d = o - e;
            d * d / e
        })
        .sum();
    let dof = exp.len() - 1;
    let p_value = gamma_ur(dof as f64 / 2.0, statistic / 2.0);
    Ok(ChiSquare { statistic, dof, p_value, bins: exp.len() })
}

/// Straight-line weighted least squares y = a + b x.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

/// Weighted least squares with per-point standard deviations (`None` = unit
/// weights). The slope standard error comes from the weight matrix, scaled by
/// the reduced chi-square when it exceeds 1 (to stay honest about misfit).
pub fn linear_fit(xs: &[f64], ys: &[f64], y_errs: Option<&[f64]>) -> Result<LineFit, StatsError> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(StatsError::InsufficientData(format!("{n} points")));
    }
    let weights: Vec<f64> = match y_errs {
        Some(errs) => {
            if errs.len() != n {
                return Err(StatsError::Parameter("y_errs length mismatch".into()));
            }
            errs.iter()
                .map(|&e| if e > 0.0 { 1.0 / (e * e) } else { 1.0 })
                .collect()
        }
        None => vec![1.0; n],
    };
    let sw: f64 = weights.iter().sum();
    let swx: f64 = weights.iter().zip(xs).map(|(w, x)| w * x).sum();
    let swy: f64 = weights.iter().zip(ys).map(|(w, y)| w * y).sum();
    let xbar = swx / sw;
    let ybar = swy / sw;
    let sxx: f64 = weights.iter().zip(xs).map(|(w, x)| w * (x - xbar) * (x - xbar)).sum();
    if sxx <= 0.0 {
        return Err(StatsError::InsufficientData("degenerate x grid".into()));
    }
    let sxy: f64 = weights
        .iter()
        .zip(xs.iter().zip(ys))
        .map(|(w, (x, y))| w * (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let mut var_slope = 1.0 / sxx;
    if n > 2 {
        let chi2: f64 = weights
            .iter()
            .zip(xs.iter().zip(ys))
            .map(|(w, (x, y))| {
                let r = y - (intercept + slope * x);
                w * r * r
            })
            .sum();
        let red = chi2 / (n - 2) as f64;
        // Unit-weight fits always scale by residual variance; weighted fits
        // only when the data scatter exceeds the quoted errors.
        if y_errs.is_none() || red > 1.0 {
            var_slope *= red;
        }
    }
    Ok(LineFit { slope, intercept, slope_se: var_slope.sqrt() })
}

/// Least squares of log y against log x; `y_errs` are absolute errors on y.
pub fn loglog_fit(xs: &[f64], ys: &[f64], y_errs: Option<&[f64]>) -> Result<LineFit, StatsError> {
    if xs.iter().chain(ys).any(|&v| v <= 0.0 || !v.is_finite()) {
        return Err(StatsError::NonPositive("loglog_fit input".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let lerr: Option<Vec<f64>> = y_errs.map(|errs| {
        errs.iter().zip(ys).map(|(&e, &y)| e / y).collect()
    });
    linear_fit(&lx, &ly, lerr.as_deref())
}

/// Sample mean and its standard error.
pub fn mean_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    if samples.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Median (of a copy; input order untouched).
pub fn median(samples: &[f64]) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Standard error of an empirical proportion `k/n`.
pub fn proportion_se(k: u64, n: u64) -> f64 {
    let p = k as f64 / n as f64;
    (p * (1.0 - p) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    #[test]
    fn negbin_matches_slice_tail() {
        // r=2, p=1/2, tail at K=1 must be 3/4.
        let tail: f64 = (2..=4000).map(|m| negbin_pmf(2, 0.5, m).unwrap()).sum();
        assert!((tail - 0.75).abs() < 1e-12, "tail {tail}");
        assert!((negbin2_tail(0.5, 1) - 0.75).abs() < 1e-15);
        // Tail at K=0 is 1.
        assert_eq!(negbin2_tail(0.37, 0), 1.0);
    }

    #[test]
    fn negbin_normalises() {
        for &p in &[0.01, 0.1, 0.5] {
            let total: f64 = (0..=10_000).map(|m| negbin_pmf(2, p, m).unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-10, "p={p} total={total}");
        }
    }

    #[test]
    fn chi_square_exact_match_gives_p_one() {
        let probs = [0.25, 0.25, 0.25, 0.25];
        let obs = [250u64, 250, 250, 250];
        let t = chi_square_test(&obs, &probs, 5.0).unwrap();
        assert!((t.p_value - 1.0).abs() < 1e-12);
        assert_eq!(t.dof, 4 - 1 + 1 - 1); // overflow bin pooled away
    }

    #[test]
    fn chi_square_detects_shift() {
        // Mean shifted by far more than 3 SD: p-value must collapse.
        let probs: Vec<f64> = (0..20).map(|m| negbin_pmf(2, 0.5, m).unwrap()).collect();
        let mut counts = vec![0u64; 20];
        let mut rng = stream(11, 0);
        for _ in 0..20_000 {
            // NegBin(2, 1/3) instead of NegBin(2, 1/2).
            let mut m = 0u64;
            for _ in 0..2 {
                while rng.gen::<f64>() > 1.0 / 3.0 {
                    m += 1;
                }
            }
            if (m as usize) < counts.len() {
                counts[m as usize] += 1;
            }
        }
        let t = chi_square_test(&counts, &probs, 5.0).unwrap();
        assert!(t.p_value < 1e-6, "p = {}", t.p_value);
    }

    #[test]
    fn chi_square_calibration_under_null() {
        // Rejection rate at level 0.01 should be about 1% when sampling from
        // the model itself; also p-values look uniform (coarse KS bound).
        let probs: Vec<f64> = (0..40).map(|m| negbin_pmf(2, 0.5, m).unwrap()).collect();
        let mut rng = stream(12, 0);
        let reps = 1000;
        let mut rejections = 0;
        let mut pvals = Vec::with_capacity(reps);
        for _ in 0..reps {
            let mut counts = vec![0u64; 40];
            for _ in 0..2000 {
                let mut m = 0usize;
                for _ in 0..2 {
                    while rng.gen::<bool>() {
                        m += 1;
                    }
                }
                if m < counts.len() {
                    counts[m] += 1;
                }
            }
            let t = chi_square_test(&counts, &probs, 5.0).unwrap();
            if t.p_value < 0.01 {
                rejections += 1;
            }
            pvals.push(t.p_value);
        }
        assert!((1..=30).contains(&rejections), "rejections = {rejections}");
        pvals.sort_by(|a, b| a.total_cmp(b));
        let ks = pvals
            .iter()
            .enumerate()
            .map(|(i, p)| (p - (i + 1) as f64 / reps as f64).abs())
            .fold(0.0f64, f64::max);
        assert!(ks < 0.05, "KS distance {ks}");
    }

    #[test]
    fn loglog_recovers_exact_square() {
        let xs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let fit = loglog_fit(&xs, &ys, None).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!(fit.slope_se < 1e-10);
    }

    #[test]
    fn loglog_recovers_noisy_exponent() {
        let mut rng = stream(13, 0);
        let xs: Vec<f64> = (1..=40).map(|i| 1.2f64.powi(i)).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| 3.0 * x.powf(1.5) * (1.0 + 0.01 * (rng.gen::<f64>() - 0.5)))
            .collect();
        let errs: Vec<f64> = ys.iter().map(|y| 0.003 * y).collect();
        let fit = loglog_fit(&xs, &ys, Some(&errs)).unwrap();
        assert!((fit.slope - 1.5).abs() < 0.05, "slope {}", fit.slope);
    }

    #[test]
    fn loglog_constant_is_flat() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys = [5.0, 5.0, 5.0, 5.0];
        let fit = loglog_fit(&xs, &ys, None).unwrap();
        assert!(fit.slope.abs() < 1e-14);
    }

    #[test]
    fn loglog_rejects_nonpositive() {
        assert!(loglog_fit(&[1.0, 2.0], &[1.0, 0.0], None).is_err());
    }
}
