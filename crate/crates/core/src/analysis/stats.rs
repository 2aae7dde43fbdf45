//! Goodness-of-fit tests and least-squares fits used by the estimators.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov
/// distribution and Stephens' small-sample correction. Ties are allowed; the
/// test is then conservative.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::param("sample", "both samples must be non-empty"));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(Error::param("sample", "NaN in sample"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = (n * m / (n + m)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    Ok(TestResult {
        statistic: d,
        p_value: kolmogorov_survival(lambda),
    })
}

/// `P(K > x)` for the Kolmogorov distribution.
fn kolmogorov_survival(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pearson chi-square goodness of fit of `observed` counts to the cell
/// probabilities `probs`.
///
/// Adjacent cells are pooled from the right until every pooled cell has an
/// expected count of at least `min_expected`; the mass not covered by
/// `probs` is added to the last cell, which receives every observation
/// beyond it. Degrees of freedom are `cells - 1`.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], min_expected: f64) -> Result<(TestResult, usize)> {
    if observed.len() != probs.len() || probs.is_empty() {
        return Err(Error::param("probs", "one probability per observed cell is needed"));
    }
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(Error::param("observed", "no observations"));
    }
    let covered: f64 = probs.iter().sum();
    let mut expected: Vec<f64> = probs.iter().map(|p| p * n as f64).collect();
    *expected.last_mut().unwrap() += (1.0 - covered).max(0.0) * n as f64;

    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (k, (&ok, &ek)) in observed.iter().zip(&expected).enumerate() {
        o += ok as f64;
        e += ek;
        let rest: f64 = expected[k + 1..].iter().sum();
        if e >= min_expected && rest >= min_expected {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match cells.last_mut() {
            Some(last) if e < min_expected => {
                last.0 += o;
                last.1 += e;
            }
            _ => cells.push((o, e)),
        }
    }
    if cells.len() < 2 {
        return Err(Error::Domain("fewer than two cells after pooling".into()));
    }
    let stat: f64 = cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Domain(e.to_string()))?;
    Ok((
        TestResult {
            statistic: stat,
            p_value: dist.sf(stat),
        },
        dof,
    ))
}

/// Least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineFit {
    pub slope: f64,
    pub intercept: f64,
    /// `max_i |residual_i| / max_j |y_j|`.
    pub max_relative_residual: f64,
}

pub fn affine_fit(x: &[f64], y: &[f64]) -> Result<AffineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::param("grid", "an affine fit needs at least two points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::param("grid", "grid points must not all coincide"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = x
        .iter()
        .zip(y)
        .fold(0.0f64, |m, (a, b)| m.max((b - intercept - slope * a).abs()));
    Ok(AffineFit {
        slope,
        intercept,
        max_relative_residual: if scale > 0.0 { worst / scale } else { 0.0 },
    })
}
