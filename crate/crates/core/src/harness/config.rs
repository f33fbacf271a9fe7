use crate::error::{Result, RrwError};
use crate::kernels::Regime;
use crate::manifolds::{sphere, ManifoldSpec};
use crate::stats::CFProbe;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Kernels,
    Weyl,
    Szclt,
    Decor,
    Nodal,
    NodalMeasure,
    LocalGlobal,
    Kacrice,
    Negmom,
    Tightness,
    Crofton,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 11] = [
        ExperimentId::Kernels,
        ExperimentId::Weyl,
        ExperimentId::Szclt,
        ExperimentId::Decor,
        ExperimentId::Nodal,
        ExperimentId::NodalMeasure,
        ExperimentId::LocalGlobal,
        ExperimentId::Kacrice,
        ExperimentId::Negmom,
        ExperimentId::Tightness,
        ExperimentId::Crofton,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentId::Kernels => "kernels",
            ExperimentId::Weyl => "weyl",
            ExperimentId::Szclt => "szclt",
            ExperimentId::Decor => "decor",
            ExperimentId::Nodal => "nodal",
            ExperimentId::NodalMeasure => "nodal-measure",
            ExperimentId::LocalGlobal => "local-global",
            ExperimentId::Kacrice => "kacrice",
            ExperimentId::Negmom => "negmom",
            ExperimentId::Tightness => "tightness",
            ExperimentId::Crofton => "crofton",
        }
    }
}

impl FromStr for ExperimentId {
    type Err = RrwError;
    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.name() == s.trim())
            .ok_or_else(|| RrwError::Config(format!("unknown experiment `{s}`")))
    }
}

impl std::fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything that determines an experiment's numbers. `out` is where results
/// go and is not part of the canonical form.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub manifold: ManifoldSpec,
    pub regime: Regime,
    pub lambdas: Vec<f64>,
    pub replicas: usize,
    pub grid: usize,
    pub x_draws: usize,
    pub patches: usize,
    pub probe_offsets: Vec<Vec<f64>>,
    pub probe_weights: Vec<f64>,
    pub nu: f64,
    /// Dimension of the kernel curve of the `kernels` experiment.
    pub kernel_dim: usize,
    /// Largest radius of the `kernels` experiment.
    pub rmax: f64,
    pub seed: u64,
    pub out: PathBuf,
}

/// First 16 hex digits of the SHA-256 of `text`.
pub fn hash_text(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// `2π n` for each `n`.
pub fn tau_ladder(ns: &[f64]) -> Vec<f64> {
    ns.iter().map(|n| TAU * n).collect()
}

/// Parses one ladder entry: a plain number, `2pi*N` / `tau*N`, or `l=N` (the
/// sphere frequency `√(4π N(N+1))`).
pub fn parse_lambda(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || RrwError::Config(format!("bad lambda entry `{s}`"));
    if let Some(rest) = s.strip_prefix("2pi*").or_else(|| s.strip_prefix("tau*")) {
        return Ok(TAU * rest.parse::<f64>().map_err(|_| bad())?);
    }
    if let Some(rest) = s.strip_prefix("l=") {
        return Ok(sphere::degree_frequency(rest.parse::<usize>().map_err(|_| bad())?));
    }
    s.parse::<f64>().map_err(|_| bad())
}

pub fn parse_lambda_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(parse_lambda).collect()
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|_| RrwError::Config(format!("bad number `{t}`"))))
        .collect()
}

impl ExperimentConfig {
    /// Defaults matching the acceptance settings of each experiment.
    pub fn default_for(experiment: ExperimentId) -> Self {
        let torus2 = ManifoldSpec::Torus { dim: 2 };
        let ladder = tau_ladder(&[15.0, 30.0, 60.0, 120.0]);
        let mut c = ExperimentConfig {
            experiment,
            manifold: torus2,
            regime: Regime::LargeBand,
            lambdas: ladder,
            replicas: 1,
            grid: 0,
            x_draws: 0,
            patches: 0,
            probe_offsets: vec![vec![0.0, 0.0]],
            probe_weights: vec![1.0],
            nu: 0.012,
            kernel_dim: 2,
            rmax: 50.0,
            seed: 0,
            out: PathBuf::from("out"),
        };
        match experiment {
            ExperimentId::Kernels => {
                c.lambdas = vec![];
                c.grid = 200;
            }
            ExperimentId::Weyl => {
                c.lambdas = tau_ladder(&[10.0, 20.0, 40.0, 80.0]);
                c.grid = 20;
            }
            ExperimentId::Szclt => c.replicas = 200,
            ExperimentId::Decor => {}
            ExperimentId::Nodal | ExperimentId::NodalMeasure => {
                c.lambdas = tau_ladder(&[40.0]);
                c.replicas = 20;
                c.grid = 2048;
                c.patches = 500;
            }
            ExperimentId::LocalGlobal => {
                c.lambdas = tau_ladder(&[20.0]);
                c.grid = 1024;
                c.x_draws = 20_000;
            }
            ExperimentId::Kacrice => {
                c.lambdas = vec![];
                c.replicas = 100_000;
                c.grid = 256;
            }
            ExperimentId::Negmom => {}
            ExperimentId::Tightness => {
                c.patches = 200;
                c.grid = 24;
            }
            ExperimentId::Crofton => {
                c.lambdas = tau_ladder(&[30.0]);
                c.replicas = 100;
                c.grid = 128;
                c.x_draws = 64;
            }
        }
        c
    }

    pub fn probe(&self) -> Result<CFProbe> {
        CFProbe::new(self.probe_offsets.clone(), self.probe_weights.clone())
    }

    /// Canonical `key=value` text; the config hash is taken over this.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        let offsets = self
            .probe_offsets
            .iter()
            .map(|v| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(":"))
            .collect::<Vec<_>>()
            .join(";");
        let _ = writeln!(s, "experiment={}", self.experiment);
        let _ = writeln!(s, "manifold={}", self.manifold);
        let _ = writeln!(s, "regime={}", self.regime);
        let _ = writeln!(s, "lambdas={}", fmt_list(&self.lambdas));
        let _ = writeln!(s, "replicas={}", self.replicas);
        let _ = writeln!(s, "grid={}", self.grid);
        let _ = writeln!(s, "x_draws={}", self.x_draws);
        let _ = writeln!(s, "patches={}", self.patches);
        let _ = writeln!(s, "probe_offsets={offsets}");
        let _ = writeln!(s, "probe_weights={}", fmt_list(&self.probe_weights));
        let _ = writeln!(s, "nu={:?}", self.nu);
        let _ = writeln!(s, "kernel_dim={}", self.kernel_dim);
        let _ = writeln!(s, "rmax={:?}", self.rmax);
        let _ = writeln!(s, "seed={}", self.seed);
        s
    }

    /// [`hash_text`] of [`canonical_text`](Self::canonical_text).
    pub fn config_hash(&self) -> String {
        hash_text(&self.canonical_text())
    }

    /// Overrides fields from `key=value` pairs; unknown keys are errors.
    pub fn apply_pairs(&mut self, pairs: &BTreeMap<String, String>) -> Result<()> {
        let num = |k: &str, v: &str| -> Result<usize> {
            v.trim().parse().map_err(|_| RrwError::Config(format!("bad value for {k}: `{v}`")))
        };
        for (k, v) in pairs {
            match k.as_str() {
                "experiment" => self.experiment = v.parse()?,
                "manifold" => self.manifold = v.parse()?,
                "regime" => self.regime = v.parse()?,
                "lambdas" => self.lambdas = parse_lambda_list(v)?,
                "replicas" => self.replicas = num(k, v)?,
                "grid" => self.grid = num(k, v)?,
                "x_draws" => self.x_draws = num(k, v)?,
                "patches" => self.patches = num(k, v)?,
                "probe_offsets" => {
                    self.probe_offsets = v
                        .split(';')
                        .filter(|t| !t.trim().is_empty())
                        .map(|t| parse_list(&t.replace(':', ",")))
                        .collect::<Result<_>>()?
                }
                "probe_weights" => self.probe_weights = parse_list(v)?,
                "nu" => self.nu = v.trim().parse().map_err(|_| RrwError::Config(format!("bad nu `{v}`")))?,
                "kernel_dim" => self.kernel_dim = num(k, v)?,
                "rmax" => self.rmax = v.trim().parse().map_err(|_| RrwError::Config(format!("bad rmax `{v}`")))?,
                "seed" => self.seed = v.trim().parse().map_err(|_| RrwError::Config(format!("bad seed `{v}`")))?,
                "out" => self.out = PathBuf::from(v.trim()),
                other => return Err(RrwError::Config(format!("unknown key `{other}`"))),
            }
        }
        Ok(())
    }

    /// Parses `key=value` lines (`#` comments allowed) or a JSON object. Keys
    /// not given keep the experiment's defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            let raw: serde_json::Value = serde_json::from_str(text)?;
            let obj = raw.as_object().ok_or_else(|| RrwError::Config("config JSON must be an object".into()))?;
            let mut pairs = BTreeMap::new();
            for (k, v) in obj {
                let s = match v {
                    serde_json::Value::String(s) => s.clone(),
                    serde_json::Value::Array(items) => items
                        .iter()
                        .map(|i| match i {
                            serde_json::Value::Array(inner) => {
                                inner.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(":")
                            }
                            serde_json::Value::String(s) => s.clone(),
                            other => other.to_string(),
                        })
                        .collect::<Vec<_>>()
                        .join(if k == "probe_offsets" { ";" } else { "," }),
                    other => other.to_string(),
                };
                pairs.insert(k.clone(), s);
            }
            return Self::from_pairs(pairs);
        }
        let mut pairs = BTreeMap::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| RrwError::Config(format!("expected key=value, got `{line}`")))?;
            pairs.insert(k.trim().to_string(), v.trim().to_string());
        }
        Self::from_pairs(pairs)
    }

    fn from_pairs(mut pairs: BTreeMap<String, String>) -> Result<Self> {
        let id: ExperimentId = pairs
            .remove("experiment")
            .ok_or_else(|| RrwError::Config("config needs an `experiment` key".into()))?
            .parse()?;
        let mut c = Self::default_for(id);
        c.apply_pairs(&pairs)?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Rejects combinations no experiment can run.
    pub fn validate(&self) -> Result<()> {
        if self.experiment == ExperimentId::Kernels {
            crate::kernels::KernelSpec::new(self.kernel_dim, self.regime)?;
            if !(self.rmax > 0.0) {
                return Err(RrwError::Config("rmax must be positive".into()));
            }
            return Ok(());
        }
        crate::kernels::KernelSpec::new(self.manifold.dim(), self.regime)?;
        if matches!(self.manifold, ManifoldSpec::Torus { .. }) && self.regime == Regime::Monochromatic {
            return Err(RrwError::InvalidSpec("monochromatic bands are only realized on the sphere".into()));
        }
        if self.lambdas.iter().any(|l| !(*l > 0.0)) {
            return Err(RrwError::Config("lambdas must be positive".into()));
        }
        Ok(())
    }
}
