use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use rrw_core::harness::acceptance::{acceptance_suite_with, Tier};
use rrw_core::harness::config::{hash_text, parse_lambda, ExperimentConfig, ExperimentId};
use rrw_core::harness::report::{verify_outputs, CsvTable, ExperimentReport};
use rrw_core::harness::experiments::draw_seed;
use rrw_core::harness::run;
use rrw_core::manifolds::{enumerate_spectrum, uniform_point, ManifoldSpec};
use rrw_core::rng::{substream, tag};
use rrw_core::wavefields::sample_wave;
use rrw_core::Result;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser, Debug)]
#[command(name = "rrw", version, about = "Riemannian random waves: kernels, nodal sets and limit statistics")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Config file, `key=value` lines or a JSON object. Flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct ExpArgs {
    /// torus1 | torus2 | torus3 | sphere2
    #[arg(long)]
    manifold: Option<String>,
    /// largeband | mono
    #[arg(long)]
    regime: Option<String>,
    /// Comma-separated ladder: numbers, `2pi*N` or `l=N`.
    #[arg(long = "lambda-list")]
    lambda_list: Option<String>,
    #[arg(long)]
    replicas: Option<usize>,
    /// Grid side; for `kernels`, the number of radii.
    #[arg(long, visible_alias = "n")]
    grid: Option<usize>,
    /// Kernel dimension of the `kernels` curve.
    #[arg(long)]
    dim: Option<usize>,
    /// Largest radius of the `kernels` experiment.
    #[arg(long)]
    rmax: Option<f64>,
    /// Nodes or Monte Carlo points for averages over the base point.
    #[arg(long = "x-draws")]
    x_draws: Option<usize>,
    #[arg(long)]
    patches: Option<usize>,
    /// Probe offsets `v1:v2;w1:w2;...`.
    #[arg(long = "probe-offsets")]
    probe_offsets: Option<String>,
    /// Probe weights `t1,t2,...`.
    #[arg(long = "probe-weights")]
    probe_weights: Option<String>,
    /// Negative-moment exponent.
    #[arg(long)]
    nu: Option<f64>,
}

impl ExpArgs {
    fn pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        put("manifold", self.manifold.clone());
        put("regime", self.regime.clone());
        put("lambdas", self.lambda_list.clone());
        put("replicas", self.replicas.map(|x| x.to_string()));
        put("grid", self.grid.map(|x| x.to_string()));
        put("x_draws", self.x_draws.map(|x| x.to_string()));
        put("patches", self.patches.map(|x| x.to_string()));
        put("probe_offsets", self.probe_offsets.clone());
        put("probe_weights", self.probe_weights.clone());
        put("nu", self.nu.map(|x| format!("{x:?}")));
        put("kernel_dim", self.dim.map(|x| x.to_string()));
        put("rmax", self.rmax.map(|x| format!("{x:?}")));
        m
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Limit kernels against angular quadrature.
    Kernels(ExpArgs),
    /// Weyl counts and the local Weyl sup error.
    Weyl(ExpArgs),
    /// One random wave in the rescaled chart `v -> f(exp_x(v/lambda))` at a
    /// seeded uniform base point, on an N x N grid.
    Field {
        #[arg(long, default_value = "torus2")]
        manifold: String,
        #[arg(long, default_value = "largeband")]
        regime: String,
        #[arg(long, default_value = "2pi*10")]
        lambda: String,
        #[arg(long, default_value_t = 128)]
        grid: usize,
    },
    /// Nodal volume per unit volume and frequency.
    Nodal(ExpArgs),
    /// Weighted nodal integrals.
    NodalMeasure(ExpArgs),
    /// Local-ball representation of nodal length.
    LocalGlobal(ExpArgs),
    /// Characteristic-function convergence and its rate.
    Szclt(ExpArgs),
    /// Decorrelation statistic and its rate.
    Decor(ExpArgs),
    /// Negative moments over the ladder.
    Negmom(ExpArgs),
    /// Kac-Rice chain for the limit field.
    Kacrice(ExpArgs),
    /// Derivative moments and second moments of patch nodal lengths.
    Tightness(ExpArgs),
    /// Crofton vertex-line bound on nodal patches.
    Crofton(ExpArgs),
    /// Run the acceptance suite.
    Acceptance {
        #[arg(long, default_value = "fast")]
        tier: String,
    },
    /// Check that CSV files in --out carry the config hash of the report.
    Verify {
        #[arg(long)]
        experiment: String,
    },
}

fn experiment_config(cli: &Cli, id: ExperimentId, args: &ExpArgs) -> Result<ExperimentConfig> {
    let mut c = match &cli.config {
        Some(path) => {
            let c = ExperimentConfig::load(path)?;
            if c.experiment != id {
                return Err(rrw_core::RrwError::Config(format!(
                    "config is for `{}`, command is `{id}`",
                    c.experiment
                )));
            }
            c
        }
        None => ExperimentConfig::default_for(id),
    };
    let mut pairs = args.pairs();
    if let Some(s) = cli.seed {
        pairs.insert("seed".into(), s.to_string());
    }
    c.apply_pairs(&pairs)?;
    if let Some(out) = &cli.out {
        c.out = out.clone();
    }
    Ok(c)
}

fn print_report(r: &ExperimentReport) {
    println!("experiment={} config_hash={} wall_clock_s={:.2}", r.experiment, r.config_hash, r.wall_clock_s);
    for row in &r.rows {
        let lam = row.lambda.map(|l| format!("{l:.4}")).unwrap_or_else(|| "-".into());
        let status = match row.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "    ",
        };
        let target = row.target.map(|t| format!(" target={t:.6}")).unwrap_or_default();
        let crit = row.criterion.as_deref().map(|c| format!(" [{c}]")).unwrap_or_default();
        println!("{status} lambda={lam} {}={:.6e}{target}{crit}", row.quantity, row.estimate);
    }
    if let Some(rate) = &r.rate {
        println!("rate slope={:.4} r2={:.4}", rate.slope, rate.r2);
    }
}

fn field(cli: &Cli, manifold: &str, regime: &str, lambda: &str, grid: usize) -> Result<bool> {
    let m: ManifoldSpec = manifold.parse()?;
    let lam = parse_lambda(lambda)?;
    let seed = cli.seed.unwrap_or(0);
    let canonical = format!("command=field\nmanifold={m}\nregime={regime}\nlambda={lam:?}\ngrid={grid}\nseed={seed}\n");
    let b = Arc::new(enumerate_spectrum(m, lam, regime.parse()?)?);
    let sample = sample_wave(b, draw_seed(seed, "field", 0, 0));
    let base = uniform_point(m, &mut substream(seed, &[tag("field-base")]));
    let view = sample.rescaled(base);
    let d = m.dim();
    let n = grid.max(2);
    // Square inscribed in the chart's domain ball.
    let half = (1.0 - 1e-9) * view.domain_radius() / if d == 1 { 1.0 } else { 2f64.sqrt() };
    let axis: Vec<f64> = (0..n).map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64).collect();
    let pts: Vec<Vec<f64>> = if d == 1 {
        axis.iter().map(|&v| vec![v]).collect()
    } else {
        (0..n * n)
            .map(|k| {
                let mut v = vec![0.0; d];
                v[0] = axis[k % n];
                v[1] = axis[k / n];
                v
            })
            .collect()
    };
    let values: Vec<f64> = pts.par_iter().map(|v| view.eval(v)).collect::<Result<_>>()?;
    let mut t = if d == 1 {
        CsvTable::new("field_values", &["v1", "value"])
    } else {
        CsvTable::new("field_values", &["v1", "v2", "value"])
    };
    for (v, x) in pts.iter().zip(&values) {
        let mut row: Vec<String> = v.iter().take(2).map(|c| format!("{c:?}")).collect();
        row.push(format!("{x:?}"));
        t.push(row);
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("field_values.csv"), t.render(seed, &hash_text(&canonical)))?;
    println!("wrote {} values to {}", values.len(), out.join("field_values.csv").display());
    Ok(true)
}

fn dispatch(cli: &Cli) -> Result<bool> {
    let exp = |id: ExperimentId, a: &ExpArgs| -> Result<bool> {
        let c = experiment_config(cli, id, a)?;
        let r = run(&c)?;
        print_report(&r);
        Ok(r.passed())
    };
    match &cli.command {
        Command::Kernels(a) => exp(ExperimentId::Kernels, a),
        Command::Weyl(a) => exp(ExperimentId::Weyl, a),
        Command::Nodal(a) => exp(ExperimentId::Nodal, a),
        Command::NodalMeasure(a) => exp(ExperimentId::NodalMeasure, a),
        Command::LocalGlobal(a) => exp(ExperimentId::LocalGlobal, a),
        Command::Szclt(a) => exp(ExperimentId::Szclt, a),
        Command::Decor(a) => exp(ExperimentId::Decor, a),
        Command::Negmom(a) => exp(ExperimentId::Negmom, a),
        Command::Kacrice(a) => exp(ExperimentId::Kacrice, a),
        Command::Tightness(a) => exp(ExperimentId::Tightness, a),
        Command::Crofton(a) => exp(ExperimentId::Crofton, a),
        Command::Field { manifold, regime, lambda, grid } => field(cli, manifold, regime, lambda, *grid),
        Command::Acceptance { tier } => {
            let tier: Tier = tier.parse()?;
            let summary = acceptance_suite_with(tier, cli.seed.unwrap_or(0), cli.out.as_deref())?;
            for line in summary.lines() {
                println!("{line}");
            }
            println!("wall_clock_s={:.1}", summary.wall_clock_s);
            Ok(summary.passed())
        }
        Command::Verify { experiment } => {
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            let h = verify_outputs(&dir, experiment)?;
            println!("ok config_hash={h}");
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
