//! Browser bindings for the single- and two-chunk stability demo.
//!
//! Built with `wasm-bindgen --target web`; see `www/index.html`.

use swarm_stability::analysis::{classify, lambda_star, Network, ThresholdModel, Verdict};
use swarm_stability::kernel::{RngStream, StoppingRule};
use swarm_stability::processes::{simulate_single_chunk, SingleChunkParams, TwoChunkParams};
use wasm_bindgen::prelude::*;

/// Hard cap on events per demo path so the page stays responsive.
const MAX_EVENTS: u64 = 2_000_000;

/// Simulates one single-chunk path and samples it on `points` equally
/// spaced times. Returns `[t, x0, x1]` triples, flattened.
#[wasm_bindgen]
pub fn single_chunk_path(lambda: f64, mu: f64, nu: f64, horizon: f64, points: usize, seed: u64) -> Result<Vec<f64>, String> {
    let params = SingleChunkParams::plain(lambda, mu, nu).map_err(|e| e.to_string())?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(format!("horizon must be positive, got {horizon}"));
    }
    let stop = StoppingRule::horizon(horizon).with_max_events(MAX_EVENTS);
    let traj = simulate_single_chunk(&params, [0, 0], &stop, &mut RngStream::new(seed, 0)).map_err(|e| e.to_string())?;
    let points = points.max(2);
    let end = traj.end_time();
    let mut out = Vec::with_capacity(3 * points);
    for i in 0..points {
        let t = end * i as f64 / (points - 1) as f64;
        let s = traj.state_at(t);
        out.extend([t, s[0] as f64, s[1] as f64]);
    }
    Ok(out)
}

fn code(v: Verdict) -> u8 {
    match v {
        Verdict::Ergodic => 0,
        Verdict::Critical => 1,
        Verdict::Transient => 2,
        Verdict::Inconclusive => 3,
    }
}

/// Verdicts of the single-chunk network on a `cols x rows` grid with
/// `lambda` in `(0, lambda_max]` along columns and `mu` in `(0, mu_max]`
/// along rows (bottom row first). Codes: 0 ergodic, 1 critical,
/// 2 transient, 3 inconclusive.
#[wasm_bindgen]
pub fn regime_map(nu: f64, lambda_max: f64, mu_max: f64, cols: usize, rows: usize) -> Result<Vec<u8>, String> {
    let mut out = Vec::with_capacity(cols * rows);
    for r in 0..rows {
        let mu = mu_max * (r + 1) as f64 / rows as f64;
        for c in 0..cols {
            let lambda = lambda_max * (c + 1) as f64 / cols as f64;
            let params = SingleChunkParams::plain(lambda, mu, nu).map_err(|e| e.to_string())?;
            out.push(code(classify(&Network::SingleChunk(params), None).verdict));
        }
    }
    Ok(out)
}

/// `lambda*` of the single-chunk network; `inf` when `mu >= nu`.
#[wasm_bindgen]
pub fn single_chunk_threshold(mu: f64, nu: f64) -> Result<f64, String> {
    lambda_star(ThresholdModel::FreeOrOne, mu, nu, 1.0).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn classify_single_chunk(lambda: f64, mu: f64, nu: f64) -> Result<String, String> {
    let params = SingleChunkParams::plain(lambda, mu, nu).map_err(|e| e.to_string())?;
    Ok(classify(&Network::SingleChunk(params), None).to_string())
}

/// Case 2 needs a `lambda^S` estimate and is reported as inconclusive here.
#[wasm_bindgen]
pub fn classify_two_chunk(lambda: f64, mu1: f64, mu2: f64, nu: f64) -> Result<String, String> {
    let params = TwoChunkParams::new(lambda, mu1, mu2, nu).map_err(|e| e.to_string())?;
    Ok(classify(&Network::TwoChunk(params), None).to_string())
}
