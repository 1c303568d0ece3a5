//! IMM: parameter formulas, the sampling phase with its random stopping
//! time, and the three end-to-end variants.
//!
//! All logarithms are natural except the `log2 n` loop bound and the
//! `ln(log2 n)` term of `lambda'`.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::graph::Graph;
use crate::rr::{RRSequence, RRSet};
use crate::seed;
use crate::select::{node_selection, SeedResult};

const ONE_MINUS_INV_E: f64 = 1.0 - 1.0 / std::f64::consts::E;

/// Binary-search precision for `gamma`.
pub const GAMMA_PRECISION: f64 = 1e-3;

/// Tag for the seed of the sequence regenerated by [`Variant::W1`].
pub const W1_REGEN_TAG: &str = "w1-regen";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Original IMM: the final selection reads a prefix of the sampling
    /// sequence.
    Imm,
    /// Final selection on a freshly generated, independent sequence.
    W1,
    /// Single sequence, confidence exponent inflated by `gamma`.
    W2,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Imm, Variant::W1, Variant::W2];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Imm => "imm",
            Variant::W1 => "w1",
            Variant::W2 => "w2",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "imm" => Ok(Variant::Imm),
            "w1" => Ok(Variant::W1),
            "w2" => Ok(Variant::W2),
            other => Err(Error::domain(format!("unknown variant {other:?} (expected imm|w1|w2)"))),
        }
    }
}

/// `ln C(n, k)` as a sum of logs over `min(k, n - k)` factors.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    assert!(k <= n, "ln_binomial: k > n");
    let j = k.min(n - k);
    (1..=j).map(|i| ((n - j + i) as f64 / i as f64).ln()).sum()
}

fn check_instance(n: u64, k: u64, eps: f64, ell: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    if k == 0 || k > n {
        return Err(Error::domain(format!("k = {k} must lie in [1, n = {n}]")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!("epsilon = {eps} must lie in (0, 1)")));
    }
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(Error::domain(format!("ell = {ell} must be positive")));
    }
    Ok(())
}

/// Accuracy used inside the sampling loop: `sqrt(2) * eps`.
pub fn eps_prime(eps: f64) -> f64 {
    std::f64::consts::SQRT_2 * eps
}

/// `lambda*(ell) = 2n ((1-1/e) sqrt(ell ln n + ln 2)
///   + sqrt((1-1/e)(ln C(n,k) + ell ln n + ln 2)))^2 / eps^2`.
pub fn lambda_star(n: u64, k: u64, eps: f64, ell: f64) -> Result<f64> {
    check_instance(n, k, eps, ell)?;
    let ln_n = (n as f64).ln();
    let ln2 = std::f64::consts::LN_2;
    let alpha = (ell * ln_n + ln2).sqrt();
    let beta = (ONE_MINUS_INV_E * (ln_binomial(n, k) + ell * ln_n + ln2)).sqrt();
    let s = ONE_MINUS_INV_E * alpha + beta;
    Ok(2.0 * n as f64 * s * s / (eps * eps))
}

/// `lambda' = (2 + 2/3 eps') (ln C(n,k) + ell ln n + ln log2 n) n / eps'^2`.
/// Needs `n >= 4` so that `ln log2 n` is positive.
pub fn lambda_prime(n: u64, k: u64, eps_prime: f64, ell: f64) -> Result<f64> {
    if n < 4 {
        return Err(Error::domain(format!("lambda' needs n >= 4, got {n}")));
    }
    if k == 0 || k > n {
        return Err(Error::domain(format!("k = {k} must lie in [1, n = {n}]")));
    }
    if !(eps_prime > 0.0 && eps_prime.is_finite()) || !(ell > 0.0 && ell.is_finite()) {
        return Err(Error::domain("eps' and ell must be positive"));
    }
    let n_f = n as f64;
    let log_term = ln_binomial(n, k) + ell * n_f.ln() + n_f.log2().ln();
    Ok((2.0 + 2.0 / 3.0 * eps_prime) * log_term * n_f / (eps_prime * eps_prime))
}

/// Exponent actually used by the algorithm: `ell + ln 2 / ln n`, plus
/// `gamma` for [`Variant::W2`]. For `n = 1` the `ln 2 / ln n` term is
/// dropped since every `n^ell` equals one.
pub fn adjust_ell(ell: f64, n: u64, variant: Variant, gamma: f64) -> f64 {
    let base = if n >= 2 { ell + std::f64::consts::LN_2 / (n as f64).ln() } else { ell };
    match variant {
        Variant::Imm | Variant::W1 => base,
        Variant::W2 => base + gamma,
    }
}

/// `ceil(lambda*(ell + gamma)) <= n^gamma`.
pub fn gamma_condition(n: u64, k: u64, eps: f64, ell: f64, gamma: f64) -> Result<bool> {
    let lhs = lambda_star(n, k, eps, ell + gamma)?.ceil();
    Ok(lhs <= (n as f64).powf(gamma))
}

/// The conservative closed-form choice `4 + ln(8 ln n) / ln n`.
pub fn conservative_gamma(n: u64) -> f64 {
    let ln_n = (n as f64).ln();
    4.0 + (8.0 * ln_n).ln() / ln_n
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSearch {
    pub gamma: f64,
    /// `ceil(lambda*(ell + gamma))`.
    pub lambda_ceil: f64,
    /// `n^gamma`.
    pub n_pow_gamma: f64,
}

/// Smallest `gamma` (to [`GAMMA_PRECISION`]) with
/// `ceil(lambda*(ell + gamma)) <= n^gamma`.
///
/// The upper end of the bracket starts at [`conservative_gamma`] plus some
/// slack and is checked directly before bisecting; it is widened a few times
/// if the check fails (small `n`), and the search errors out rather than
/// loop if no bracket is found.
pub fn gamma_search(n: u64, k: u64, eps: f64, ell: f64) -> Result<GammaSearch> {
    check_instance(n, k, eps, ell)?;
    const MAX_HI: f64 = 1024.0;
    if n < 2 {
        return Err(Error::GammaUnsatisfiable { hi: MAX_HI });
    }
    let cond = |g: f64| gamma_condition(n, k, eps, ell, g);

    let mut hi = conservative_gamma(n) + 0.5;
    while !cond(hi)? {
        hi *= 2.0;
        if hi > MAX_HI {
            return Err(Error::GammaUnsatisfiable { hi: MAX_HI });
        }
    }
    let mut lo = 0.0;
    if cond(lo)? {
        hi = lo;
    }
    while hi - lo > GAMMA_PRECISION {
        let mid = 0.5 * (lo + hi);
        if cond(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let gamma = hi;
    if !cond(gamma)? || (gamma >= GAMMA_PRECISION && cond(gamma - GAMMA_PRECISION)?) {
        return Err(Error::domain(format!("gamma condition not monotone near {gamma}")));
    }
    Ok(GammaSearch {
        gamma,
        lambda_ceil: lambda_star(n, k, eps, ell + gamma)?.ceil(),
        n_pow_gamma: (n as f64).powf(gamma),
    })
}

/// Instance parameters and the constants derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct ImmParams {
    pub n: u64,
    pub k: u64,
    pub eps: f64,
    /// Confidence exponent requested by the caller.
    pub ell: f64,
    pub variant: Variant,
    pub eps_prime: f64,
    /// Zero unless `variant` is W2.
    pub gamma: f64,
    /// Exponent the constants below are computed with.
    pub ell_eff: f64,
    /// `None` when `n < 4`; the sampling loop is empty then.
    pub lambda_prime: Option<f64>,
    pub lambda_star: f64,
}

impl ImmParams {
    pub fn new(n: u64, k: u64, eps: f64, ell: f64, variant: Variant) -> Result<Self> {
        check_instance(n, k, eps, ell)?;
        let gamma = match variant {
            Variant::W2 => gamma_search(n, k, eps, ell)?.gamma,
            Variant::Imm | Variant::W1 => 0.0,
        };
        Self::with_gamma(n, k, eps, ell, variant, gamma)
    }

    /// Like [`ImmParams::new`] with a caller-provided `gamma` for W2.
    pub fn with_gamma(n: u64, k: u64, eps: f64, ell: f64, variant: Variant, gamma: f64) -> Result<Self> {
        check_instance(n, k, eps, ell)?;
        let gamma = if variant == Variant::W2 { gamma } else { 0.0 };
        let ell_eff = adjust_ell(ell, n, variant, gamma);
        let eps_prime = eps_prime(eps);
        let lambda_prime = if n >= 4 { Some(lambda_prime(n, k, eps_prime, ell_eff)?) } else { None };
        Ok(ImmParams {
            n,
            k,
            eps,
            ell,
            variant,
            eps_prime,
            gamma,
            ell_eff,
            lambda_prime,
            lambda_star: lambda_star(n, k, eps, ell_eff)?,
        })
    }

    /// Largest possible stopping time, `ceil(lambda*)`.
    pub fn max_theta(&self) -> usize {
        self.lambda_star.ceil() as usize
    }

    /// Number of sampling iterations, `floor(log2 n) - 1` (possibly zero).
    pub fn sampling_rounds(&self) -> u32 {
        (u64::BITS - 1 - self.n.leading_zeros()).saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub i: u32,
    /// `n / 2^i`.
    pub x: f64,
    pub theta: usize,
    /// Coverage fraction of the greedy seeds on the first `theta` sets.
    pub coverage: f64,
    /// Whether `n * coverage >= (1 + eps') * x`.
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingTrace {
    pub iterations: Vec<IterationRecord>,
    pub lb: f64,
    pub theta_tilde: usize,
    /// Sets materialized in the sampling sequence when the loop ended.
    pub rr_sets: usize,
}

impl SamplingTrace {
    /// Index of the iteration that broke the loop, if any.
    pub fn stopped_at(&self) -> Option<u32> {
        self.iterations.iter().find(|r| r.passed).map(|r| r.i)
    }
}

/// The sampling phase. For `i = 1 ..= floor(log2 n) - 1` it takes the first
/// `ceil(lambda' / x_i)` sets of `seq`, runs greedy selection and stops with
/// `LB = n F / (1 + eps')` once `n F >= (1 + eps') x_i`. Without a break
/// `LB = 1`. The stopping time is `ceil(lambda* / LB)`.
pub fn sampling(params: &ImmParams, seq: &mut RRSequence<'_>) -> Result<SamplingTrace> {
    let n = params.n as f64;
    let k = params.k as usize;
    let mut iterations = Vec::new();
    let mut lb = 1.0;
    for i in 1..=params.sampling_rounds() {
        let lambda_prime = params.lambda_prime.expect("rounds > 0 implies n >= 4");
        let x = n / 2f64.powi(i as i32);
        let theta = (lambda_prime / x).ceil() as usize;
        let prefix = seq.prefix(theta)?;
        let picked = node_selection(prefix, params.n as usize, k)?;
        let coverage = picked.coverage();
        let passed = n * coverage >= (1.0 + params.eps_prime) * x;
        iterations.push(IterationRecord { i, x, theta, coverage, passed });
        if passed {
            lb = n * coverage / (1.0 + params.eps_prime);
            break;
        }
    }
    let theta_tilde = (params.lambda_star / lb).ceil() as usize;
    Ok(SamplingTrace { iterations, lb, theta_tilde, rr_sets: seq.len() })
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    pub sampling: Duration,
    /// Final RR-set materialization plus the final node selection.
    pub selection: Duration,
    pub total: Duration,
}

#[derive(Debug, Clone)]
pub struct ImmOutput {
    pub variant: Variant,
    pub params: ImmParams,
    pub result: SeedResult,
    pub trace: SamplingTrace,
    pub timings: Timings,
    /// All RR sets generated, over both sequences for W1.
    pub rr_sets_total: usize,
    pub sampling_seed: u64,
    pub final_seed: u64,
}

/// The sequences a run read from, kept for inspection.
#[derive(Debug)]
pub struct RunSequences<'g> {
    pub sampling: RRSequence<'g>,
    /// The regenerated sequence, W1 only.
    pub regenerated: Option<RRSequence<'g>>,
}

impl RunSequences<'_> {
    /// The sets the final node selection ran on.
    pub fn final_prefix(&self, theta_tilde: usize) -> &[RRSet] {
        let seq = self.regenerated.as_ref().unwrap_or(&self.sampling);
        &seq.materialized()[..theta_tilde]
    }
}

/// Runs the variant named in `params` with all randomness derived from
/// `master_seed`.
pub fn run(g: &Graph, params: &ImmParams, master_seed: u64) -> Result<ImmOutput> {
    run_detailed(g, params, master_seed, Exec::default()).map(|(out, _)| out)
}

pub fn run_detailed<'g>(
    g: &'g Graph,
    params: &ImmParams,
    master_seed: u64,
    exec: Exec,
) -> Result<(ImmOutput, RunSequences<'g>)> {
    if params.n != g.n() as u64 {
        return Err(Error::domain(format!("params built for n = {}, graph has n = {}", params.n, g.n())));
    }
    let start = Instant::now();
    let mut sampling_seq = RRSequence::new(g, master_seed).with_exec(exec);
    let trace = sampling(params, &mut sampling_seq)?;
    let sampling_time = start.elapsed();

    let select_start = Instant::now();
    let theta = trace.theta_tilde;
    let k = params.k as usize;
    let n = params.n as usize;
    // The regenerated sequence is created only after theta_tilde is fixed.
    let (result, regenerated, final_seed, rr_sets_total) = match params.variant {
        Variant::Imm | Variant::W2 => {
            let result = node_selection(sampling_seq.prefix(theta)?, n, k)?;
            (result, None, master_seed, sampling_seq.len())
        }
        Variant::W1 => {
            let regen_seed = seed::derive(master_seed, W1_REGEN_TAG);
            let mut regen = RRSequence::new(g, regen_seed).with_exec(exec);
            let result = node_selection(regen.prefix(theta)?, n, k)?;
            let total = sampling_seq.len() + regen.len();
            (result, Some(regen), regen_seed, total)
        }
    };
    let selection_time = select_start.elapsed();

    let out = ImmOutput {
        variant: params.variant,
        params: params.clone(),
        result,
        trace,
        timings: Timings { sampling: sampling_time, selection: selection_time, total: start.elapsed() },
        rr_sets_total,
        sampling_seed: master_seed,
        final_seed,
    };
    Ok((out, RunSequences { sampling: sampling_seq, regenerated }))
}
