use super::config::{ExperimentConfig, ExperimentId};
use super::report::{write_outputs, CsvTable, ExperimentReport, RateSummary, ReportRow};
use crate::error::{Result, RrwError};
use crate::kernels::{
    expected_gradient_norm, kac_rice_constant, kernel_asymptotic, kernel_second_derivative_at_zero, KernelSpec,
    Regime,
};
use crate::manifolds::{enumerate_spectrum, local_weyl_sup_error, uniform_point, weyl_ratio, ManifoldSpec, Point, SpectralBasis};
use crate::nodal::{
    chart_patch_soup, count_zeros_1d, crofton_lower_bound, local_global_check, mean_patch_nodal_length,
    nodal_length_2d, nodal_measure_integral, patch_nodal_length, rolle_vertex_bound_check, torus_nodal_length,
};
use crate::quadrature::GaussLegendre;
use crate::rng::{mean, std_dev, substream, tag};
use crate::stats::{
    cf_error_weighted_sup, cf_from_values, decorrelation_stat, delta_pair, derivative_moment, kendall_trend,
    kolmogorov_distance, limit_cf, loglog_slope, negative_moment, offset_values, Estimate, RateFit,
    SPHERE_MIN_DRAWS,
};
use crate::wavefields::{sample_limit_field, sample_wave, WaveSample};
use rand::Rng;
use rayon::prelude::*;
use serde_json::json;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;
use std::time::Instant;

/// Everything an experiment produces before it is written out.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: ExperimentReport,
    pub tables: Vec<CsvTable>,
    pub extra_json: Vec<(String, serde_json::Value)>,
}

/// Ladder entry where the tightness moment is compared with its limit.
pub const TIGHTNESS_ANCHOR: f64 = TAU * 60.0;
/// Patch half-width (rescaled units) of the Crofton squares.
pub const CROFTON_HALF: f64 = 4.0;
const WEYL_TREND_POINTS: usize = 32;

fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Seed of coefficient draw `replica` at ladder index `li`. Draws are keyed by
/// `label`, so experiments that share a label share draws.
pub fn draw_seed(master: u64, label: &str, li: usize, replica: usize) -> u64 {
    substream(master, &[tag(label), li as u64, replica as u64]).random()
}

fn basis(c: &ExperimentConfig, lambda: f64) -> Result<Arc<SpectralBasis>> {
    Ok(Arc::new(enumerate_spectrum(c.manifold, lambda, c.regime)?))
}

fn spec_of(c: &ExperimentConfig) -> Result<KernelSpec> {
    KernelSpec::new(c.manifold.dim(), c.regime)
}

/// `E_X` node count: explicit, or about 8 nodes per wavelength per axis on the
/// torus and [`SPHERE_MIN_DRAWS`] on the sphere.
fn x_nodes(c: &ExperimentConfig, lambda: f64, per_wavelength: f64) -> usize {
    if c.x_draws > 0 {
        return c.x_draws;
    }
    match c.manifold {
        ManifoldSpec::Torus { dim } => ((per_wavelength * lambda / TAU).ceil() as usize).pow(dim as u32),
        ManifoldSpec::Sphere2 => SPHERE_MIN_DRAWS,
    }
}

fn need_ladder(c: &ExperimentConfig, min: usize) -> Result<()> {
    if c.lambdas.len() < min {
        return Err(RrwError::Config(format!("{} needs at least {min} lambda values", c.experiment)));
    }
    Ok(())
}

fn need_torus2(c: &ExperimentConfig) -> Result<()> {
    if c.manifold != (ManifoldSpec::Torus { dim: 2 }) {
        return Err(RrwError::Config(format!("{} runs on torus2", c.experiment)));
    }
    Ok(())
}

fn nearest_index(xs: &[f64], target: f64) -> usize {
    (0..xs.len())
        .min_by(|&a, &b| (xs[a] - target).abs().total_cmp(&(xs[b] - target).abs()))
        .unwrap_or(0)
}

/// Slope-window rows shared by the rate experiments.
fn rate_rows(fit: &RateFit, quantity: &str, lo: f64, hi: f64, criterion: &str) -> Vec<ReportRow> {
    vec![
        ReportRow::window(None, &format!("{quantity}_slope"), fit.slope, lo, hi, criterion),
        ReportRow::check(None, &format!("{quantity}_r2"), fit.r2, Some(0.9), fit.r2 >= 0.9, criterion),
    ]
}

/// Runs the experiment without touching the filesystem.
pub fn execute(c: &ExperimentConfig) -> Result<RunOutput> {
    c.validate()?;
    let start = Instant::now();
    let (rows, tables, rate, extra_json) = match c.experiment {
        ExperimentId::Kernels => kernels(c)?,
        ExperimentId::Weyl => weyl(c)?,
        ExperimentId::Szclt => szclt(c)?,
        ExperimentId::Decor => decor(c)?,
        ExperimentId::Nodal => nodal(c)?,
        ExperimentId::NodalMeasure => nodal_measure(c)?,
        ExperimentId::LocalGlobal => local_global(c)?,
        ExperimentId::Kacrice => kacrice(c)?,
        ExperimentId::Negmom => negmom(c)?,
        ExperimentId::Tightness => tightness(c)?,
        ExperimentId::Crofton => crofton(c)?,
    };
    let report = ExperimentReport {
        experiment: c.experiment.name().to_string(),
        config_hash: c.config_hash(),
        rows,
        rate: rate.as_ref().map(RateSummary::from),
        wall_clock_s: start.elapsed().as_secs_f64(),
    };
    Ok(RunOutput { report, tables, extra_json })
}

/// Runs the experiment and writes its CSV tables, JSON report and canonical
/// config into `c.out`.
pub fn run(c: &ExperimentConfig) -> Result<ExperimentReport> {
    let out = execute(c)?;
    write_outputs(&c.out, c.seed, &c.canonical_text(), &out.report, &out.tables, &out.extra_json)?;
    Ok(out.report)
}

type Parts = (Vec<ReportRow>, Vec<CsvTable>, Option<RateFit>, Vec<(String, serde_json::Value)>);

/// `∫_0^π cos(r cos θ) sin^k θ dθ / ∫_0^π sin^k θ dθ`: the Fourier transform of the
/// uniform measure on the ball (`k = d`) or sphere (`k = d − 2`).
fn angular_oracle(gl: &GaussLegendre, k: i32, r: f64) -> f64 {
    let num = gl.integrate(0.0, PI, 64, |t| (r * t.cos()).cos() * t.sin().powi(k));
    let den = gl.integrate(0.0, PI, 64, |t| t.sin().powi(k));
    num / den
}

fn kernels(c: &ExperimentConfig) -> Result<Parts> {
    let n = c.grid.max(2);
    let gl = GaussLegendre::new(24);
    let radii: Vec<f64> = (0..n).map(|i| c.rmax * i as f64 / (n - 1) as f64).collect();
    let mut table = CsvTable::new("kernels_values", &["kernel", "d", "r", "value", "oracle", "abs_err"]);
    let mut rows = Vec::new();
    let cases = [("B", 1usize), ("B", 2), ("B", 3), ("S", 2), ("S", 3)];
    for (kind, d) in cases {
        let (spec, k) = if kind == "B" {
            (KernelSpec::large_band(d)?, d as i32)
        } else {
            (KernelSpec::monochromatic(d)?, d as i32 - 2)
        };
        let mut worst: f64 = 0.0;
        for &r in &radii {
            let v = spec.eval(r);
            let o = angular_oracle(&gl, k, r);
            worst = worst.max((v - o).abs());
            table.push([kind.to_string(), d.to_string(), num(r), num(v), num(o), num((v - o).abs())]);
        }
        rows.push(ReportRow::check(None, &format!("max_abs_err_{kind}{d}"), worst, Some(0.0), worst <= 1e-8, "kernel-exactness"));
    }
    // Exact against leading asymptotics; empty below the asymptotic range.
    let spec = KernelSpec::new(c.kernel_dim, c.regime)?;
    let mut curve = CsvTable::new("kernels_curve", &["r", "exact", "asymptotic", "abs_err"]);
    for &r in &radii {
        let exact = spec.eval(r);
        match kernel_asymptotic(spec, r) {
            Ok(a) => curve.push([num(r), num(exact), num(a), num((exact - a).abs())]),
            Err(_) => curve.push([num(r), num(exact), String::new(), String::new()]),
        }
    }
    Ok((rows, vec![table, curve], None, vec![]))
}

fn weyl(c: &ExperimentConfig) -> Result<Parts> {
    need_ladder(c, 2)?;
    let d = c.manifold.dim();
    let mut rows = Vec::new();
    let mut table = CsvTable::new("weyl_counts", &["lambda", "count", "weyl_ratio", "local_sup_err"]);
    let mut base_rng = substream(c.seed, &[tag("weyl-base")]);
    let x = uniform_point(c.manifold, &mut base_rng);
    let mut sups = Vec::new();
    for &lam in &c.lambdas {
        let b = enumerate_spectrum(c.manifold, lam, c.regime)?;
        let ratio = b.weyl_ratio();
        let sup = if d == 2 { local_weyl_sup_error(&b, x, c.grid.max(2), 10.0)? } else { f64::NAN };
        sups.push(sup);
        table.push([num(lam), b.count().to_string(), num(ratio), num(sup)]);
        rows.push(ReportRow::info(Some(lam), "weyl_ratio", ratio, None));
        if d == 2 {
            rows.push(ReportRow::info(Some(lam), "local_weyl_sup_err", sup, None));
        }
    }
    let top = c.lambdas.len() - 1;
    let lam_top = c.lambdas[top];
    let ratio_top = enumerate_spectrum(c.manifold, lam_top, c.regime)?.weyl_ratio();
    rows.push(ReportRow::within(Some(lam_top), "weyl_ratio", ratio_top, None, 1.0, 0.05, "weyl-law"));

    // The lattice remainder oscillates, so the trend is fitted on a dense
    // geometric ladder spanning the configured one.
    let (lo, hi) = (c.lambdas[0], lam_top);
    let mut trend = CsvTable::new("weyl_trend", &["lambda", "count", "abs_ratio_err"]);
    let mut pts = Vec::new();
    if c.regime == Regime::LargeBand {
        for i in 0..WEYL_TREND_POINTS {
            let lam = lo * (hi / lo).powf(i as f64 / (WEYL_TREND_POINTS - 1) as f64);
            let count = enumerate_spectrum(c.manifold, lam, c.regime)?.count();
            let err = (weyl_ratio(d, lam, count) - 1.0).abs();
            trend.push([num(lam), count.to_string(), num(err)]);
            if err > 0.0 {
                pts.push((lam, err));
            }
        }
    }
    let fit = loglog_slope(&pts).ok();
    if let Some(f) = &fit {
        rows.push(ReportRow::check(None, "weyl_err_slope", f.slope, Some(0.0), f.slope < 0.0, "weyl-law"));
    }
    if d == 2 {
        let reference = nearest_index(&c.lambdas, lam_top / 4.0);
        if reference != top {
            let q = sups[top] / sups[reference];
            rows.push(ReportRow::check(Some(lam_top), "local_weyl_sup_ratio", q, Some(0.5), q <= 0.5, "local-weyl"));
        }
    }
    Ok((rows, vec![table, trend], fit, vec![]))
}

fn zero_offset(d: usize) -> Vec<f64> {
    vec![0.0; d]
}

fn szclt(c: &ExperimentConfig) -> Result<Parts> {
    need_ladder(c, 1)?;
    let spec = spec_of(c)?;
    let d = c.manifold.dim();
    let probe = c.probe()?;
    let target = limit_cf(&probe, spec);
    let mut v_grid = vec![zero_offset(d)];
    for k in 0..d {
        let mut e = zero_offset(d);
        e[k] = 1.0;
        v_grid.push(e);
    }
    let t_grid = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];
    let seed = draw_seed(c.seed, "szclt", 0, 0);
    let mut rows = Vec::new();
    let mut table = CsvTable::new(
        "szclt_ladder",
        &["lambda", "count", "x_nodes", "cf_err_single", "cf_err_weighted_sup", "delta1", "delta1_se", "delta2", "delta2_se"],
    );
    let mut d1_pts = Vec::new();
    let mut d2_pts = Vec::new();
    let mut sup_pts = Vec::new();
    let top = c.lambdas.len() - 1;
    for (li, &lam) in c.lambdas.iter().enumerate() {
        let b = basis(c, lam)?;
        let xn = x_nodes(c, lam, 8.0);
        let sample = sample_wave(b.clone(), seed);
        let mut rng = substream(c.seed, &[tag("szclt-x"), li as u64]);
        let values = offset_values(&sample, &probe.offsets, xn, &mut rng)?;
        let err = (cf_from_values(&values, &probe.weights) - target).norm();
        let sup = cf_error_weighted_sup(&sample, spec, &v_grid, &t_grid, 2, xn, &mut rng)?;
        let nan = Estimate { value: f64::NAN, se: f64::NAN };
        let (d1, d2) = if c.replicas > 0 {
            delta_pair(&b, &probe, spec, c.replicas, xn, substream(c.seed, &[tag("szclt-delta"), li as u64]).random())?
        } else {
            (nan, nan)
        };
        table.push([
            num(lam),
            b.count().to_string(),
            xn.to_string(),
            num(err),
            num(sup),
            num(d1.value),
            num(d1.se),
            num(d2.value),
            num(d2.se),
        ]);
        rows.push(ReportRow::info(Some(lam), "cf_err_single_draw", err, None));
        rows.push(ReportRow::info(Some(lam), "cf_err_weighted_sup", sup, None));
        if c.replicas > 0 {
            rows.push(ReportRow::info(Some(lam), "delta1", d1.value, Some(d1.se)));
            rows.push(ReportRow::info(Some(lam), "delta2", d2.value, Some(d2.se)));
            d1_pts.push((lam, d1.value));
            d2_pts.push((lam, d2.value));
        }
        sup_pts.push((lam, sup));
        if li == top {
            rows.push(ReportRow::within(Some(lam), "cf_err_single_draw", err, None, 0.0, 0.02, "sz-clt"));
            let zero = offset_values(&sample, &[zero_offset(d)], xn, &mut rng)?;
            let ks = kolmogorov_distance(&zero[0])?;
            rows.push(ReportRow::within(Some(lam), "kolmogorov_distance", ks, None, 0.0, 0.04, "sz-clt"));
        }
    }
    if let Ok(f) = loglog_slope(&sup_pts) {
        rows.push(ReportRow::info(None, "cf_err_weighted_sup_slope", f.slope, None));
    }
    if let Ok(f) = loglog_slope(&d2_pts) {
        rows.push(ReportRow::info(None, "delta2_slope", f.slope, None));
    }
    let fit = loglog_slope(&d1_pts).ok();
    if let Some(f) = &fit {
        rows.extend(rate_rows(f, "delta1", -1.3, -0.7, "clt-rate"));
    }
    Ok((rows, vec![table], fit, vec![]))
}

fn decor(c: &ExperimentConfig) -> Result<Parts> {
    need_ladder(c, 1)?;
    let probe = c.probe()?;
    let mut rows = Vec::new();
    let mut table = CsvTable::new("decor_ladder", &["lambda", "count", "xy_nodes", "decorrelation"]);
    let mut pts = Vec::new();
    for (li, &lam) in c.lambdas.iter().enumerate() {
        let b = basis(c, lam)?;
        let xn = x_nodes(c, lam, 16.0);
        let mut rng = substream(c.seed, &[tag("decor"), li as u64]);
        let v = decorrelation_stat(&b, &probe, xn, &mut rng)?;
        table.push([num(lam), b.count().to_string(), xn.to_string(), num(v)]);
        rows.push(ReportRow::info(Some(lam), "decorrelation", v, None));
        pts.push((lam, v));
    }
    let fit = loglog_slope(&pts).ok();
    if let Some(f) = &fit {
        rows.extend(rate_rows(f, "decorrelation", -1.25, -0.75, "decorrelation"));
    }
    Ok((rows, vec![table], fit, vec![]))
}

/// Per-replica nodal values at one `λ`, normalized to a density per unit
/// volume and `λ`.
struct NodalLadderEntry {
    lambda: f64,
    values: Vec<f64>,
    grid_ns: Vec<usize>,
    coarse: Vec<f64>,
}

fn sphere_bases(c: &ExperimentConfig, li: usize, r: usize) -> Vec<Point> {
    let mut rng = substream(c.seed, &[tag("nodal-bases"), li as u64, r as u64]);
    (0..c.patches.max(1)).map(|_| uniform_point(c.manifold, &mut rng)).collect()
}

fn torus2_n0(c: &ExperimentConfig) -> usize {
    (c.grid / 2).max(8)
}

fn nodal_entry(c: &ExperimentConfig, li: usize, lam: f64) -> Result<NodalLadderEntry> {
    let b = basis(c, lam)?;
    let reps = c.replicas.max(1);
    let per: Vec<(f64, usize, f64)> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let sample = sample_wave(b.clone(), draw_seed(c.seed, "nodal", li, r));
            let lam = sample.lambda();
            match c.manifold {
                ManifoldSpec::Torus { dim: 1 } => {
                    let f = |x: f64| sample.eval_field(&[x, 0.0, 0.0]);
                    let min_n = (4.0 * lam / TAU).ceil() as usize;
                    let e = count_zeros_1d(&f, (0.0, 1.0), c.grid.max(min_n), lam)?;
                    Ok((e.value / lam, e.grid_n, e.coarse_value / lam))
                }
                ManifoldSpec::Torus { dim: 2 } => {
                    let (e, _) = torus_nodal_length(&sample, torus2_n0(c), 4 * c.grid.max(16))?;
                    Ok((e.value / lam, e.grid_n, e.coarse_value / lam))
                }
                ManifoldSpec::Sphere2 => {
                    let e = mean_patch_nodal_length(&sample, &sphere_bases(c, li, r), 12, 256)?;
                    Ok((e.value, e.grid_n, e.coarse_value))
                }
                ManifoldSpec::Torus { .. } => {
                    Err(RrwError::Config("nodal volume is implemented for torus1, torus2 and sphere2".into()))
                }
            }
        })
        .collect::<Result<_>>()?;
    Ok(NodalLadderEntry {
        lambda: lam,
        values: per.iter().map(|p| p.0).collect(),
        grid_ns: per.iter().map(|p| p.1).collect(),
        coarse: per.iter().map(|p| p.2).collect(),
    })
}

fn nodal(c: &ExperimentConfig) -> Result<Parts> {
    need_ladder(c, 1)?;
    let spec = spec_of(c)?;
    let target = kac_rice_constant(spec);
    // (criterion, tolerance on the mean, tolerance on a single draw)
    let gate = match (c.manifold, c.regime) {
        (ManifoldSpec::Torus { dim: 1 }, _) => Some(("nodal-constant-d1", 0.01, Some(0.03))),
        (ManifoldSpec::Torus { dim: 2 }, _) => Some(("nodal-constant-d2-large-band", 0.03, Some(0.08))),
        (ManifoldSpec::Sphere2, Regime::Monochromatic) => Some(("nodal-constant-d2-monochromatic", 0.05, None)),
        _ => None,
    };
    let mut rows = Vec::new();
    let mut tables = Vec::new();
    let mut summary = Vec::new();
    for (li, &lam) in c.lambdas.iter().enumerate() {
        let e = nodal_entry(c, li, lam)?;
        let mut table = CsvTable::new(
            &format!("nodal_lambda{li}"),
            &["replica", "lambda", "length", "length_over_lambda", "grid_n", "coarse_length_over_lambda"],
        );
        for (r, v) in e.values.iter().enumerate() {
            table.push([
                r.to_string(),
                num(e.lambda),
                num(v * e.lambda),
                num(*v),
                e.grid_ns[r].to_string(),
                num(e.coarse[r]),
            ]);
        }
        tables.push(table);
        let m = mean(&e.values);
        let sd = std_dev(&e.values);
        let se = sd / (e.values.len() as f64).sqrt();
        summary.push(json!({"lambda": e.lambda, "mean": m, "sd": sd, "target_constant": target}));
        match gate {
            Some((crit, tol_mean, tol_single)) => {
                rows.push(ReportRow::within(Some(lam), "nodal_density_mean", m, Some(se), target, tol_mean * target, crit));
                if let Some(t) = tol_single {
                    rows.push(ReportRow::within(Some(lam), "nodal_density_single_draw", e.values[0], None, target, t * target, crit));
                }
            }
            None => {
                let mut row = ReportRow::info(Some(lam), "nodal_density_mean", m, Some(se));
                row.target = Some(target);
                rows.push(row);
            }
        }
    }
    let extra = vec![("nodal_summary".to_string(), serde_json::Value::Array(summary))];
    Ok((rows, tables, None, extra))
}

/// Weight of the nodal-measure experiment.
pub fn measure_weight(x: [f64; 2]) -> f64 {
    1.0 + (TAU * x[0]).cos()
}

fn nodal_measure(c: &ExperimentConfig) -> Result<Parts> {
    need_ladder(c, 1)?;
    need_torus2(c)?;
    let target = kac_rice_constant(spec_of(c)?); // ∫ h dμ = 1
    let mut rows = Vec::new();
    let mut table = CsvTable::new("nodal-measure_replicas", &["lambda", "replica", "weighted", "unweighted", "grid_n"]);
    for (li, &lam) in c.lambdas.iter().enumerate() {
        let b = basis(c, lam)?;
        let per: Vec<(f64, f64, usize)> = (0..c.replicas.max(1))
            .into_par_iter()
            .map(|r| {
                let sample = sample_wave(b.clone(), draw_seed(c.seed, "nodal", li, r));
                let (e, soup) = torus_nodal_length(&sample, torus2_n0(c), 4 * c.grid.max(16))?;
                Ok((nodal_measure_integral(&soup, measure_weight, lam), e.value / lam, e.grid_n))
            })
            .collect::<Result<_>>()?;
        for (r, p) in per.iter().enumerate() {
            table.push([num(lam), r.to_string(), num(p.0), num(p.1), p.2.to_string()]);
        }
        let w: Vec<f64> = per.iter().map(|p| p.0).collect();
        let se = std_dev(&w) / (w.len() as f64).sqrt();
        rows.push(ReportRow::within(Some(lam), "weighted_nodal_integral_mean", mean(&w), Some(se), target, 0.05 * target, "nodal-measure"));
    }
    Ok((rows, vec![table], None, vec![]))
}

fn local_global(c: &ExperimentConfig) -> Result<Parts> {
    need_ladder(c, 1)?;
    need_torus2(c)?;
    let lam = c.lambdas[0];
    let xs = c.x_draws.max(1);
    // Two straight nodal circles; the local-ball average is exact for lines.
    let closed = |x: [f64; 2]| (TAU * x[0]).sin();
    let (_, soup) = nodal_length_2d(&closed, 1.0, (c.grid / 4).max(8), 8 * c.grid.max(16), lam)?;
    let r_closed = local_global_check(&soup, lam, xs)?;
    let sample = sample_wave(basis(c, lam)?, draw_seed(c.seed, "local-global", 0, 0));
    let (_, soup) = torus_nodal_length(&sample, (c.grid / 2).max(8), 8 * c.grid.max(16))?;
    let r_draw = local_global_check(&soup, lam, xs)?;
    let mut table = CsvTable::new("local-global_ratios", &["field", "lambda", "ratio"]);
    table.push(["sin(2pi x)".to_string(), num(lam), num(r_closed)]);
    table.push(["random-draw".to_string(), num(lam), num(r_draw)]);
    let rows = vec![
        ReportRow::window(Some(lam), "ratio_closed_form", r_closed, 0.97, 1.03, "local-global"),
        ReportRow::window(Some(lam), "ratio_random_draw", r_draw, 0.97, 1.03, "local-global"),
    ];
    Ok((rows, vec![table], None, vec![]))
}

fn kacrice(c: &ExperimentConfig) -> Result<Parts> {
    let spec = spec_of(c)?;
    let d = spec.dim();
    let m = if c.grid == 0 { crate::wavefields::DEFAULT_LIMIT_MODES } else { c.grid };
    let n = c.replicas.max(2);
    let grads: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|r| {
            let s = substream(c.seed, &[tag("kacrice"), r as u64]).random();
            Ok(sample_limit_field(spec, m, s)?.gradient(&zero_offset(d)))
        })
        .collect::<Result<_>>()?;
    let var_target = kernel_second_derivative_at_zero(spec);
    let mut rows = Vec::new();
    let mut table = CsvTable::new("kacrice_summary", &["quantity", "estimate", "target"]);
    for k in 0..d {
        let sq: Vec<f64> = grads.iter().map(|g| g[k] * g[k]).collect();
        let v = mean(&sq);
        table.push([format!("grad_var_{k}"), num(v), num(var_target)]);
        rows.push(ReportRow::within(None, &format!("grad_var_{k}"), v, Some(std_dev(&sq) / (n as f64).sqrt()), var_target, 0.02 * var_target, "kac-rice"));
    }
    let norms: Vec<f64> = grads.iter().map(|g| g.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let en = mean(&norms);
    let en_se = std_dev(&norms) / (n as f64).sqrt();
    let en_target = expected_gradient_norm(spec);
    let density = en / TAU.sqrt();
    let density_target = kac_rice_constant(spec);
    table.push(["grad_norm_mean".to_string(), num(en), num(en_target)]);
    table.push(["zero_density".to_string(), num(density), num(density_target)]);
    rows.push(ReportRow::within(None, "grad_norm_mean", en, Some(en_se), en_target, 0.01 * en_target, "kac-rice"));
    rows.push(ReportRow::within(None, "zero_density", density, Some(en_se / TAU.sqrt()), density_target, 0.01 * density_target, "kac-rice"));
    Ok((rows, vec![table], None, vec![]))
}

fn negmom(c: &ExperimentConfig) -> Result<Parts> {
    need_ladder(c, 2)?;
    let d = c.manifold.dim();
    let seed = draw_seed(c.seed, "negmom", 0, 0);
    let mut table = CsvTable::new("negmom_ladder", &["lambda", "x_nodes", "negative_moment"]);
    let mut rows = Vec::new();
    let mut vals = Vec::new();
    for (li, &lam) in c.lambdas.iter().enumerate() {
        let sample = sample_wave(basis(c, lam)?, seed);
        let xn = x_nodes(c, lam, 8.0);
        let mut rng = substream(c.seed, &[tag("negmom-x"), li as u64]);
        let v = negative_moment(&sample, &zero_offset(d), c.nu, xn, &mut rng)?;
        table.push([num(lam), xn.to_string(), num(v)]);
        rows.push(ReportRow::info(Some(lam), "negative_moment", v, None));
        vals.push(v);
    }
    let k = kendall_trend(&vals)?;
    let max = vals.iter().cloned().fold(f64::MIN, f64::max);
    rows.push(ReportRow::check(None, "kendall_p_increasing", k.p_increasing, Some(0.05), !k.increasing_at(0.05), "negative-moments"));
    rows.push(ReportRow::check(None, "negative_moment_max", max, Some(1.2), max <= 1.2, "negative-moments"));
    Ok((rows, vec![table], None, vec![]))
}

fn tightness(c: &ExperimentConfig) -> Result<Parts> {
    need_ladder(c, 2)?;
    let spec = spec_of(c)?;
    let d = c.manifold.dim();
    if d != 2 {
        return Err(RrwError::Config("tightness runs on two-dimensional manifolds".into()));
    }
    let seed = draw_seed(c.seed, "tightness", 0, 0);
    let target = kernel_second_derivative_at_zero(spec);
    let grid = c.grid.max(8);
    let mut table = CsvTable::new("tightness_ladder", &["lambda", "derivative_moment", "z_second_moment", "z_mean"]);
    let mut rows = Vec::new();
    let mut moments = Vec::new();
    let mut z2s = Vec::new();
    for (li, &lam) in c.lambdas.iter().enumerate() {
        let sample = sample_wave(basis(c, lam)?, seed);
        let xn = x_nodes(c, lam, 8.0);
        let mut rng = substream(c.seed, &[tag("tightness-x"), li as u64]);
        let mut alpha = vec![0u32; d];
        alpha[0] = 1;
        let dm = derivative_moment(&sample, &alpha, 1, xn, grid, &mut rng)?;
        let bases: Vec<Point> = (0..c.patches.max(1)).map(|_| uniform_point(c.manifold, &mut rng)).collect();
        let zs: Vec<f64> = bases
            .par_iter()
            .map(|b| patch_nodal_length(&sample, *b, grid))
            .collect::<Result<_>>()?;
        let z2: Vec<f64> = zs.iter().map(|z| z * z).collect();
        let m2 = mean(&z2);
        table.push([num(lam), num(dm), num(m2), num(mean(&zs))]);
        rows.push(ReportRow::info(Some(lam), "derivative_moment", dm, None));
        rows.push(ReportRow::info(Some(lam), "z_second_moment", m2, Some(std_dev(&z2) / (z2.len() as f64).sqrt())));
        moments.push(dm);
        z2s.push(m2);
    }
    let a = nearest_index(&c.lambdas, TIGHTNESS_ANCHOR);
    rows.push(ReportRow::within(Some(c.lambdas[a]), "derivative_moment", moments[a], None, target, 0.05 * target, "tightness-moments"));
    let mx = moments.iter().cloned().fold(f64::MIN, f64::max);
    let mn = moments.iter().cloned().fold(f64::MAX, f64::min);
    rows.push(ReportRow::check(None, "derivative_moment_max_over_min", mx / mn, Some(1.3), mx / mn <= 1.3, "tightness-moments"));
    let k = kendall_trend(&z2s)?;
    rows.push(ReportRow::check(None, "z_second_moment_kendall_p_increasing", k.p_increasing, Some(0.05), !k.increasing_at(0.05), "uniform-integrability"));
    Ok((rows, vec![table], None, vec![]))
}

/// Best line count, bound verdict, nodal length, required length and the
/// Rolle check `(holds, lhs, rhs)` of one Crofton patch.
type PatchOutcome = (usize, bool, f64, f64, Option<(bool, f64, f64)>);

fn crofton(c: &ExperimentConfig) -> Result<Parts> {
    need_ladder(c, 1)?;
    if c.manifold.dim() != 2 {
        return Err(RrwError::Config("crofton runs on two-dimensional manifolds".into()));
    }
    let lam = c.lambdas[0];
    let sample: WaveSample = sample_wave(basis(c, lam)?, draw_seed(c.seed, "crofton", 0, 0));
    let mut base_rng = substream(c.seed, &[tag("crofton-bases")]);
    let bases: Vec<Point> = (0..c.replicas.max(1)).map(|_| uniform_point(c.manifold, &mut base_rng)).collect();
    let a = 2.0 * CROFTON_HALF;
    let grid = c.grid.max(8);
    let samples = c.x_draws.max(1);
    let per: Vec<PatchOutcome> = bases
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let soup = chart_patch_soup(&sample, *x, CROFTON_HALF, grid)?;
            let mut rng = substream(c.seed, &[tag("crofton-lines"), i as u64]);
            let res = crofton_lower_bound(&soup, [-CROFTON_HALF, -CROFTON_HALF], a, samples, &mut rng);
            let rolle = match res.best_segment {
                Some(seg) if res.best_count > 0 => {
                    let view = sample.rescaled(*x);
                    let dir = [seg[1][0] - seg[0][0], seg[1][1] - seg[0][1]];
                    let len = dir[0].hypot(dir[1]);
                    let g = |s: f64| {
                        let t = s / len;
                        view.eval(&[seg[0][0] + t * dir[0], seg[0][1] + t * dir[1]]).unwrap_or(f64::NAN)
                    };
                    let p = res.best_count.min(3);
                    match rolle_vertex_bound_check(&g, len, p, 512) {
                        Ok(r) => Some((r.holds, r.lhs, r.rhs)),
                        Err(RrwError::Vacuous(_)) => None,
                        Err(e) => return Err(e),
                    }
                }
                _ => None,
            };
            Ok((res.best_count, res.bound_ok, res.nodal_length, res.required, rolle))
        })
        .collect::<Result<_>>()?;
    let mut table = CsvTable::new(
        "crofton_patches",
        &["patch", "best_count", "required", "nodal_length", "bound_ok", "rolle_holds", "rolle_lhs", "rolle_rhs"],
    );
    for (i, p) in per.iter().enumerate() {
        let (rh, rl, rr) = match p.4 {
            Some((h, l, r)) => (h.to_string(), num(l), num(r)),
            None => ("vacuous".to_string(), String::new(), String::new()),
        };
        table.push([i.to_string(), p.0.to_string(), num(p.3), num(p.2), p.1.to_string(), rh, rl, rr]);
    }
    let ok = per.iter().filter(|p| p.1).count();
    let total = per.len();
    let rolle_checked = per.iter().filter(|p| p.4.is_some()).count();
    let rolle_ok = per.iter().filter(|p| matches!(p.4, Some((true, _, _)))).count();
    let rows = vec![
        ReportRow::check(Some(lam), "bound_ok_fraction", ok as f64 / total as f64, Some(1.0), ok == total, "crofton"),
        ReportRow::info(Some(lam), "rolle_holds_fraction", rolle_ok as f64 / rolle_checked.max(1) as f64, None),
        ReportRow::info(Some(lam), "mean_best_count", mean(&per.iter().map(|p| p.0 as f64).collect::<Vec<_>>()), None),
    ];
    Ok((rows, vec![table], None, vec![]))
}
