//! Stability verdicts for the single- and two-chunk networks.

use std::fmt;

use super::thresholds::{lambda_star, ThresholdModel};
use crate::kernel::EstimateSummary;
use crate::processes::{Boundary, SingleChunkParams, TwoChunkParams};

/// Relative tolerance under which two rates are treated as equal.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Ergodic,
    Transient,
    Critical,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Ergodic => "Ergodic",
            Verdict::Transient => "Transient",
            Verdict::Critical => "Critical",
            Verdict::Inconclusive => "Inconclusive",
        })
    }
}

/// Result of [`classify`].
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    pub verdict: Verdict,
    pub regime: String,
    /// `lambda*` or `lambda^S` when the verdict depends on one.
    pub threshold: Option<f64>,
    /// The result the verdict rests on.
    pub citation: &'static str,
    pub lambda: f64,
    pub note: Option<String>,
}

/// Diagnostics of an estimate that may not converge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailDiagnostic {
    /// Largest single-replication value over the sum of all of them.
    pub max_to_sum_ratio: f64,
    /// Whether the estimate moved by less than 5% when the horizon doubled.
    pub stabilized: bool,
}

/// Network whose stability is classified.
#[derive(Debug, Clone)]
pub enum Network {
    SingleChunk(SingleChunkParams),
    TwoChunk(TwoChunkParams),
}

const TRANSIENCE: &str = "Transience Prop.";
const ERGODICITY: &str = "Ergodicity Prop.";
const TWO_CHUNK: &str = "Two-chunk Prop.";
const NONE: &str = "none";

/// Formats a number with at most six decimals and no trailing zeros.
pub fn short(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs())
}

impl fmt::Display for StabilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.verdict)?;
        let name = if self.regime.contains("case 2") { "λ^S" } else { "λ*" };
        match (self.verdict, self.threshold) {
            (Verdict::Transient, Some(t)) => write!(f, " (λ={} > {name}={})", short(self.lambda), short(t))?,
            (Verdict::Ergodic, Some(t)) => write!(f, " (λ={} < {name}={})", short(self.lambda), short(t))?,
            (Verdict::Critical, Some(t)) => write!(f, " (λ={} = {name}={})", short(self.lambda), short(t))?,
            _ => write!(f, " ({})", self.regime)?,
        }
        if self.citation != NONE {
            write!(f, " [{}]", self.citation)?;
        }
        if let Some(note) = &self.note {
            write!(f, "; {note}")?;
        }
        Ok(())
    }
}

fn verdict(
    verdict: Verdict,
    regime: &str,
    threshold: Option<f64>,
    citation: &'static str,
    lambda: f64,
    note: Option<String>,
) -> StabilityVerdict {
    StabilityVerdict {
        verdict,
        regime: regime.into(),
        threshold,
        citation,
        lambda,
        note,
    }
}

/// Compares `lambda` with a finite threshold.
fn against(lambda: f64, threshold: f64, regime: &str, ergodic: &'static str, transient: &'static str) -> StabilityVerdict {
    if ties(lambda, threshold) {
        verdict(
            Verdict::Critical,
            regime,
            Some(threshold),
            NONE,
            lambda,
            Some("no result covers λ on the threshold".into()),
        )
    } else if lambda < threshold {
        verdict(Verdict::Ergodic, regime, Some(threshold), ergodic, lambda, None)
    } else {
        verdict(Verdict::Transient, regime, Some(threshold), transient, lambda, None)
    }
}

/// Classifies a network.
///
/// Two-chunk case 2 is classified against `lambda_s`, the estimated
/// equilibrium departure rate of the saturated system with its diagnostic;
/// without a stabilized estimate whose interval keeps away from `lambda`
/// the verdict is `Inconclusive`.
pub fn classify(network: &Network, lambda_s: Option<(&EstimateSummary, &TailDiagnostic)>) -> StabilityVerdict {
    match network {
        Network::SingleChunk(p) => classify_single(p),
        Network::TwoChunk(p) => classify_two(p, lambda_s),
    }
}

fn classify_single(p: &SingleChunkParams) -> StabilityVerdict {
    let (lambda, mu, nu) = (p.lambda, p.mu, p.nu);
    if !p.rate_fn.tends_to_one() {
        return verdict(
            Verdict::Inconclusive,
            "single-chunk, r(x0, x1) not tending to 1",
            None,
            NONE,
            lambda,
            Some("the results need r(x0, x1) -> 1 as x0 -> inf".into()),
        );
    }
    if mu >= nu || ties(mu, nu) {
        return verdict(Verdict::Ergodic, "single-chunk μ≥ν", None, ERGODICITY, lambda, None);
    }
    let model = match p.boundary {
        Boundary::OrOne => ThresholdModel::FreeOrOne,
        Boundary::PlusOne => ThresholdModel::FreePlusOne,
    };
    let threshold = lambda_star(model, mu, nu, 1.0).expect("mu < nu gives a finite threshold");
    against(lambda, threshold, "single-chunk μ<ν", ERGODICITY, TRANSIENCE)
}

fn classify_two(p: &TwoChunkParams, lambda_s: Option<(&EstimateSummary, &TailDiagnostic)>) -> StabilityVerdict {
    let TwoChunkParams { lambda, mu1, mu2, nu } = *p;
    let alpha = mu2 - nu;
    if ties(mu2, nu) || ties(alpha, mu1) {
        return verdict(
            Verdict::Inconclusive,
            "two-chunk boundary",
            None,
            NONE,
            lambda,
            Some("μ2 = ν or μ2 - ν = μ1 is not covered".into()),
        );
    }
    if nu > mu2 {
        let threshold = lambda_star(ThresholdModel::TwoChunk, mu2, nu, 1.0).expect("nu > mu2");
        return against(lambda, threshold, "two-chunk case 3", TWO_CHUNK, TWO_CHUNK);
    }
    if mu1 > alpha {
        return verdict(Verdict::Ergodic, "two-chunk case 1", None, TWO_CHUNK, lambda, None);
    }
    let regime = "two-chunk case 2";
    let Some((est, diag)) = lambda_s else {
        return verdict(
            Verdict::Inconclusive,
            regime,
            None,
            NONE,
            lambda,
            Some("needs an estimate of λ^S".into()),
        );
    };
    if !diag.stabilized || !est.mean.is_finite() {
        return verdict(
            Verdict::Inconclusive,
            regime,
            None,
            NONE,
            lambda,
            Some(format!("λ^S estimate {} did not stabilize", short(est.mean))),
        );
    }
    if (lambda - est.mean).abs() <= est.ci_half_width {
        return verdict(
            Verdict::Inconclusive,
            regime,
            Some(est.mean),
            NONE,
            lambda,
            Some(format!(
                "λ={} lies within the interval of λ^S={} ± {}",
                short(lambda),
                short(est.mean),
                short(est.ci_half_width)
            )),
        );
    }
    against(lambda, est.mean, regime, TWO_CHUNK, TWO_CHUNK)
}
