use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use imm_core::imm::{gamma_search, lambda_star};
use imm_core::oracle::OracleReport;
use imm_core::{Graph, Model, NodeId};

use crate::bias::{bias_probe, DEFAULT_MIN_COUNT};
use crate::config::{parse_k_list, parse_variants, ExperimentConfig, Settings};
use crate::experiment::{maximize, write_csv};
use crate::plot;
use crate::verify::verify_guarantee;

/// Exit code when a guarantee check ran but did not hold.
pub const EXIT_GUARANTEE_FAILED: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "imm", version, about = "Influence maximization with IMM and its corrected variants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run seed selection over a (variant, k, seed) grid and write the trial CSV.
    Maximize(ExpArgs),
    /// Measure failure rates against the exact optimum on a tiny graph.
    VerifyGuarantee(ExpArgs),
    /// Compare sampling-loop statistics with and without conditioning on reaching each iteration.
    BiasProbe {
        #[command(flatten)]
        exp: ExpArgs,
        /// Conditioned sample count below which a row is flagged.
        #[arg(long, default_value_t = DEFAULT_MIN_COUNT)]
        min_count: usize,
    },
    /// Binary-search the W2 inflation gamma.
    Gamma {
        /// Node count; alternatively read from --graph.
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, default_value = "wc")]
        model: String,
        /// k values: list and/or start:end:step ranges.
        #[arg(long)]
        k: String,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        ell: f64,
    },
    /// Render spread-vs-k and time-vs-k SVG charts from trial CSVs.
    Plot {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Exact OPT and exact spreads by exhaustive enumeration.
    Oracle {
        #[command(flatten)]
        exp: ExpArgs,
        /// Seed sets to evaluate, e.g. "0,1;2,3".
        #[arg(long)]
        sets: Option<String>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ExpArgs {
    /// key=value file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// wc | explicit
    #[arg(long)]
    pub model: Option<String>,
    /// imm | w1 | w2, comma separated.
    #[arg(long)]
    pub variant: Option<String>,
    /// k values: list and/or start:end:step ranges.
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub ell: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub mc_runs: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for the trial pool.
    #[arg(long)]
    pub workers: Option<usize>,
}

impl ExpArgs {
    fn settings(&self) -> Result<Settings> {
        let file = match &self.config {
            Some(p) => Settings::from_file(p)?,
            None => Settings::default(),
        };
        let flags = Settings {
            graph: self.graph.clone(),
            model: self.model.as_deref().map(str::parse).transpose()?,
            variants: self.variant.as_deref().map(parse_variants).transpose()?,
            ks: self.k.as_deref().map(parse_k_list).transpose()?,
            eps: self.eps,
            ell: self.ell,
            trials: self.trials,
            seed: self.seed,
            mc_runs: self.mc_runs,
            out: self.out.clone(),
            workers: self.workers,
        };
        Ok(file.merge(flags))
    }

    pub fn resolve(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::resolve(self.settings()?)
    }
}

fn load_graph(cfg: &ExperimentConfig) -> Result<Graph> {
    Graph::load(&cfg.graph, cfg.model).with_context(|| format!("loading {}", cfg.graph.display()))
}

/// Writes `text` to `out/name` when an output directory is set, else stdout.
fn emit(out: Option<&PathBuf>, name: &str, text: &[u8]) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join(name);
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => io::stdout().write_all(text)?,
    }
    Ok(())
}

fn parse_sets(spec: &str) -> Result<Vec<Vec<NodeId>>> {
    spec.split(';')
        .map(|set| {
            set.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<NodeId>().with_context(|| format!("bad node id {t:?}")))
                .collect()
        })
        .collect()
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Maximize(args) => {
            let cfg = args.resolve()?;
            let g = load_graph(&cfg)?;
            let records = maximize(&cfg, &g)?;
            let mut buf = Vec::new();
            write_csv(&records, &mut buf)?;
            emit(cfg.out.as_ref(), "trials.csv", &buf)?;
        }
        Command::VerifyGuarantee(args) => {
            let cfg = args.resolve()?;
            let g = load_graph(&cfg)?;
            let reports = verify_guarantee(&cfg, &g)?;
            let text: String = reports.iter().map(|r| format!("{r}\n")).collect();
            emit(cfg.out.as_ref(), "verify.txt", text.as_bytes())?;
            if reports.iter().any(|r| r.pass() == Some(false)) {
                return Ok(ExitCode::from(EXIT_GUARANTEE_FAILED));
            }
        }
        Command::BiasProbe { exp, min_count } => {
            let cfg = exp.resolve()?;
            let g = load_graph(&cfg)?;
            cfg.check_against(g.n())?;
            let mut text = String::new();
            for &k in &cfg.ks {
                let report = bias_probe(&g, k, cfg.eps, cfg.ell, cfg.trials, cfg.seed, min_count)?;
                text.push_str(&report.to_string());
            }
            emit(cfg.out.as_ref(), "bias.csv", text.as_bytes())?;
        }
        Command::Gamma { n, graph, model, k, eps, ell } => {
            let n = match (n, graph) {
                (Some(n), _) => n,
                (None, Some(path)) => Graph::load(&path, model.parse::<Model>()?)?.n() as u64,
                (None, None) => bail!("gamma needs --n or --graph"),
            };
            let mut out = io::stdout().lock();
            for k in parse_k_list(&k)? {
                let r = gamma_search(n, k as u64, eps, ell)?;
                let holds = r.lambda_ceil <= r.n_pow_gamma;
                writeln!(
                    out,
                    "n={n} k={k} eps={eps} ell={ell} gamma={:.4} ceil(lambda*(ell+gamma))={} n^gamma={:.1} holds={holds} lambda*(ell)={:.1}",
                    r.gamma,
                    r.lambda_ceil,
                    r.n_pow_gamma,
                    lambda_star(n, k as u64, eps, ell)?,
                )?;
            }
        }
        Command::Plot { csv, out } => {
            for path in plot::render(&csv, &out)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Oracle { exp, sets } => {
            let cfg = exp.resolve()?;
            let g = load_graph(&cfg)?;
            cfg.check_against(g.n())?;
            let queries = sets.as_deref().map(parse_sets).transpose()?.unwrap_or_default();
            let mut text = String::new();
            for &k in &cfg.ks {
                let report = OracleReport::compute(&g, k, &queries, None)?;
                text.push_str(&format!("k={} opt={:.9} opt_set={:?}\n", k, report.opt_value, report.opt_set));
                for (set, sigma) in &report.exact_sigma {
                    text.push_str(&format!("sigma({set:?})={sigma:.9}\n"));
                }
            }
            emit(cfg.out.as_ref(), "oracle.txt", text.as_bytes())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
