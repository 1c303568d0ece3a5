//! Stopping-time bias probe.
//!
//! For many seeded sequences, evaluates the sampling-loop statistic `n F` at
//! every `theta_i`, whether or not the loop would have stopped earlier, and
//! compares its distribution over all sequences against the distribution
//! over the sequences that actually reach iteration `i` (all earlier checks
//! failed). The report is descriptive only.

use std::fmt;

use anyhow::Result;
use imm_core::select::node_selection;
use imm_core::{Graph, ImmParams, RRSequence, Variant};
use rayon::prelude::*;

use crate::stats::{welch_t, Summary};

pub const DEFAULT_MIN_COUNT: usize = 30;

#[derive(Debug, Clone)]
pub struct BiasRow {
    pub i: u32,
    pub x: f64,
    pub theta: usize,
    pub unconditional: Summary,
    /// Sequences on which iterations `1..i` all failed.
    pub conditioned: Summary,
    /// Welch t of conditioned minus unconditional, when both sides have data.
    pub t: Option<f64>,
    pub low_count: bool,
}

#[derive(Debug, Clone)]
pub struct BiasReport {
    pub params: ImmParams,
    pub sequences: u64,
    pub min_count: usize,
    pub rows: Vec<BiasRow>,
}

/// `n F` at each `theta_i` for one sequence, and whether each check passed.
fn per_iteration(g: &Graph, params: &ImmParams, seed: u64) -> Result<Vec<(f64, bool)>> {
    let n = params.n as f64;
    let lambda_prime = match params.lambda_prime {
        Some(l) => l,
        None => return Ok(Vec::new()),
    };
    let mut seq = RRSequence::new(g, seed);
    (1..=params.sampling_rounds())
        .map(|i| {
            let x = n / 2f64.powi(i as i32);
            let theta = (lambda_prime / x).ceil() as usize;
            let picked = node_selection(seq.prefix(theta)?, params.n as usize, params.k as usize)?;
            let value = n * picked.coverage();
            Ok((value, value >= (1.0 + params.eps_prime) * x))
        })
        .collect()
}

pub fn bias_probe(
    g: &Graph,
    k: usize,
    eps: f64,
    ell: f64,
    sequences: u64,
    base_seed: u64,
    min_count: usize,
) -> Result<BiasReport> {
    let params = ImmParams::new(g.n() as u64, k as u64, eps, ell, Variant::Imm)?;
    let runs = (0..sequences)
        .into_par_iter()
        .map(|s| per_iteration(g, &params, base_seed.wrapping_add(s)))
        .collect::<Result<Vec<_>>>()?;

    let n = params.n as f64;
    let lambda_prime = params.lambda_prime.unwrap_or(0.0);
    let rows = (1..=params.sampling_rounds())
        .map(|i| {
            let idx = i as usize - 1;
            let all: Vec<f64> = runs.iter().map(|r| r[idx].0).collect();
            let reached: Vec<f64> =
                runs.iter().filter(|r| r[..idx].iter().all(|&(_, passed)| !passed)).map(|r| r[idx].0).collect();
            let unconditional = Summary::of(&all);
            let conditioned = Summary::of(&reached);
            let x = n / 2f64.powi(i as i32);
            BiasRow {
                i,
                x,
                theta: (lambda_prime / x).ceil() as usize,
                t: welch_t(&conditioned, &unconditional),
                low_count: conditioned.count < min_count,
                unconditional,
                conditioned,
            }
        })
        .collect();
    Ok(BiasReport { params, sequences, min_count, rows })
}

impl fmt::Display for BiasReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "# bias probe: n={} k={} eps={} ell_eff={:.4} sequences={}",
            self.params.n, self.params.k, self.params.eps, self.params.ell_eff, self.sequences
        )?;
        writeln!(f, "i,x,theta,threshold,uncond_n,uncond_mean,cond_n,cond_mean,welch_t,low_count")?;
        for r in &self.rows {
            let fmt_mean = |s: &Summary| if s.count == 0 { String::new() } else { format!("{:.6}", s.mean) };
            writeln!(
                f,
                "{},{},{},{:.6},{},{},{},{},{},{}",
                r.i,
                r.x,
                r.theta,
                (1.0 + self.params.eps_prime) * r.x,
                r.unconditional.count,
                fmt_mean(&r.unconditional),
                r.conditioned.count,
                fmt_mean(&r.conditioned),
                r.t.map(|t| format!("{t:.4}")).unwrap_or_default(),
                r.low_count,
            )?;
        }
        Ok(())
    }
}
