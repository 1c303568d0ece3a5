//! Experiment configuration: `key=value` files merged with CLI flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use imm_core::{Model, Variant};

/// Settings as given, before defaults and validation. Each source (config
/// file, flags) produces one of these; later sources override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub graph: Option<PathBuf>,
    pub model: Option<Model>,
    pub variants: Option<Vec<Variant>>,
    pub ks: Option<Vec<usize>>,
    pub eps: Option<f64>,
    pub ell: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub mc_runs: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key=value", idx + 1))?;
            let (key, value) = (key.trim(), value.trim());
            s.set(key, value).with_context(|| format!("line {}: key {key:?}", idx + 1))?;
        }
        Ok(s)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.replace('-', "_").as_str() {
            "graph" => self.graph = Some(PathBuf::from(value)),
            "model" => self.model = Some(value.parse()?),
            "variant" | "variants" => self.variants = Some(parse_variants(value)?),
            "k" => self.ks = Some(parse_k_list(value)?),
            "eps" => self.eps = Some(value.parse()?),
            "ell" => self.ell = Some(value.parse()?),
            "trials" => self.trials = Some(value.parse()?),
            "seed" => self.seed = Some(value.parse()?),
            "mc_runs" => self.mc_runs = Some(value.parse()?),
            "out" => self.out = Some(PathBuf::from(value)),
            "workers" => self.workers = Some(value.parse()?),
            other => bail!("unknown key {other:?}"),
        }
        Ok(())
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merge(self, other: Settings) -> Settings {
        Settings {
            graph: other.graph.or(self.graph),
            model: other.model.or(self.model),
            variants: other.variants.or(self.variants),
            ks: other.ks.or(self.ks),
            eps: other.eps.or(self.eps),
            ell: other.ell.or(self.ell),
            trials: other.trials.or(self.trials),
            seed: other.seed.or(self.seed),
            mc_runs: other.mc_runs.or(self.mc_runs),
            out: other.out.or(self.out),
            workers: other.workers.or(self.workers),
        }
    }
}

/// Comma-separated variant names.
pub fn parse_variants(value: &str) -> Result<Vec<Variant>> {
    value
        .split(',')
        .map(|v| v.trim().parse::<Variant>().map_err(Into::into))
        .collect()
}

/// `k` values as a comma list (`2,5,9`) and/or inclusive ranges
/// `start:end:step` (`50:500:50`).
pub fn parse_k_list(value: &str) -> Result<Vec<usize>> {
    let mut ks = Vec::new();
    for part in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let fields: Vec<&str> = part.split(':').collect();
        match fields.as_slice() {
            [single] => ks.push(single.parse()?),
            [start, end, step] => {
                let (start, end, step): (usize, usize, usize) = (start.parse()?, end.parse()?, step.parse()?);
                if step == 0 {
                    bail!("zero step in k range {part:?}");
                }
                ks.extend((start..=end).step_by(step));
            }
            _ => bail!("bad k spec {part:?}"),
        }
    }
    if ks.is_empty() {
        bail!("empty k list");
    }
    Ok(ks)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub graph: PathBuf,
    pub model: Model,
    pub variants: Vec<Variant>,
    pub ks: Vec<usize>,
    pub eps: f64,
    pub ell: f64,
    pub trials: u64,
    /// Trial `t` runs with master seed `seed + t`.
    pub seed: u64,
    pub mc_runs: u64,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    /// Applies defaults and checks everything that does not need the graph.
    pub fn resolve(s: Settings) -> Result<Self> {
        let graph = s.graph.ok_or_else(|| anyhow!("no graph given (--graph or graph= in --config)"))?;
        if !graph.exists() {
            bail!("graph file {} does not exist", graph.display());
        }
        let cfg = ExperimentConfig {
            graph,
            model: s.model.unwrap_or(Model::WeightedCascade),
            variants: s.variants.unwrap_or_else(|| Variant::ALL.to_vec()),
            ks: s.ks.ok_or_else(|| anyhow!("no k given (--k)"))?,
            eps: s.eps.unwrap_or(0.1),
            ell: s.ell.unwrap_or(1.0),
            trials: s.trials.unwrap_or(1),
            seed: s.seed.unwrap_or(0),
            mc_runs: s.mc_runs.unwrap_or(10_000),
            out: s.out,
            workers: s.workers,
        };
        if cfg.trials == 0 {
            bail!("trials must be at least 1");
        }
        if cfg.mc_runs == 0 {
            bail!("mc-runs must be at least 1");
        }
        if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
            bail!("eps = {} must lie in (0, 1)", cfg.eps);
        }
        if cfg.ell.is_nan() || cfg.ell <= 0.0 {
            bail!("ell = {} must be positive", cfg.ell);
        }
        if cfg.variants.is_empty() {
            bail!("no variants selected");
        }
        if cfg.ks.contains(&0) {
            bail!("k must be at least 1");
        }
        if cfg.workers == Some(0) {
            bail!("workers must be at least 1");
        }
        Ok(cfg)
    }

    /// Checks that need the node count.
    pub fn check_against(&self, n: usize) -> Result<()> {
        if let Some(&k) = self.ks.iter().find(|&&k| k > n) {
            bail!("k = {k} exceeds n = {n}");
        }
        Ok(())
    }

    pub fn trial_seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.trials).map(move |t| self.seed.wrapping_add(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_lists() {
        assert_eq!(parse_k_list("2").unwrap(), vec![2]);
        assert_eq!(parse_k_list("1, 3,5").unwrap(), vec![1, 3, 5]);
        assert_eq!(parse_k_list("50:500:50").unwrap().len(), 10);
        assert_eq!(parse_k_list("1:3:1,9").unwrap(), vec![1, 2, 3, 9]);
        assert!(parse_k_list("").is_err());
        assert!(parse_k_list("1:5:0").is_err());
        assert!(parse_k_list("a").is_err());
    }

    #[test]
    fn file_parsing_and_override() {
        let file = Settings::parse("# exp\ngraph = g.txt\nmodel=explicit\nvariant=imm,w2\nk=1:3:1\neps=0.2\nmc-runs=50\n").unwrap();
        assert_eq!(file.model, Some(Model::Explicit));
        assert_eq!(file.variants, Some(vec![Variant::Imm, Variant::W2]));
        assert_eq!(file.mc_runs, Some(50));
        let flags = Settings { eps: Some(0.3), ..Default::default() };
        let merged = file.merge(flags);
        assert_eq!(merged.eps, Some(0.3));
        assert_eq!(merged.ks, Some(vec![1, 2, 3]));
        assert!(Settings::parse("bogus=1").is_err());
        assert!(Settings::parse("no equals sign").is_err());
    }

    #[test]
    fn resolve_checks() {
        let dir = tempfile::tempdir().unwrap();
        let g = dir.path().join("g.txt");
        std::fs::write(&g, "2 1\n0 1\n").unwrap();
        let base = Settings { graph: Some(g), ks: Some(vec![1]), ..Default::default() };
        let cfg = ExperimentConfig::resolve(base.clone()).unwrap();
        assert_eq!(cfg.variants, Variant::ALL.to_vec());
        assert!(cfg.check_against(2).is_ok());
        assert!(ExperimentConfig { ks: vec![3], ..cfg.clone() }.check_against(2).is_err());
        assert!(ExperimentConfig::resolve(Settings { trials: Some(0), ..base.clone() }).is_err());
        assert!(ExperimentConfig::resolve(Settings { eps: Some(1.5), ..base.clone() }).is_err());
        assert!(ExperimentConfig::resolve(Settings { graph: Some(dir.path().join("nope")), ..base }).is_err());
    }
}
