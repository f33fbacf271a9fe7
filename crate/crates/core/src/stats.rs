//! Statistics comparing finite-`λ` fields with their limits: characteristic
//! functions under a random evaluation point, decorrelation, negative and
//! derivative moments, Kolmogorov distance, rate regression and trend tests.
//!
//! `E_X` is a tensor-grid trapezoid rule on the torus (spectrally accurate for
//! periodic integrands) and Monte Carlo on the sphere.

use crate::error::{Result, RrwError};
use crate::kernels::{KernelSpec, Regime};
use crate::manifolds::{uniform_point, ManifoldSpec, Point, SpectralBasis};
use crate::rng::{mean, pairwise_sum, std_dev, substream, tag};
use crate::special::normal_cdf;
use crate::wavefields::{ball_radius, sample_wave, WaveSample};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Exponent `ε` in the weight `1 + |t|^{2+ε}`.
pub const CF_WEIGHT_EPS: f64 = 0.1;
/// Minimum Monte Carlo size for `E_X` on the sphere.
pub const SPHERE_MIN_DRAWS: usize = 10_000;

/// `η(λ)`: `log λ` (large band, `d = 1`), `√λ` (monochromatic, `d = 2`), else 1.
pub fn eta(lambda: f64, spec: KernelSpec) -> Result<f64> {
    if !(lambda > 1.0) {
        return Err(RrwError::Domain(format!("eta needs lambda > 1, got {lambda}")));
    }
    Ok(match (spec.regime(), spec.dim()) {
        (Regime::LargeBand, 1) => lambda.ln(),
        (Regime::Monochromatic, 2) => lambda.sqrt(),
        _ => 1.0,
    })
}

/// Offsets `v_i ∈ R^d` and weights `t_i` of the linear statistic
/// `N(v, t) = Σ t_i g(v_i)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CFProbe {
    pub offsets: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl CFProbe {
    pub fn new(offsets: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if offsets.is_empty() || offsets.len() != weights.len() {
            return Err(RrwError::InvalidSpec("probe needs p >= 1 offsets with one weight each".into()));
        }
        let d = offsets[0].len();
        if d == 0 || offsets.iter().any(|v| v.len() != d) {
            return Err(RrwError::InvalidSpec("probe offsets must share a positive dimension".into()));
        }
        Ok(Self { offsets, weights })
    }

    /// `p = 1`, `v = 0`.
    pub fn single(dim: usize, t: f64) -> Self {
        Self { offsets: vec![vec![0.0; dim]], weights: vec![t] }
    }

    pub fn dim(&self) -> usize {
        self.offsets[0].len()
    }

    pub fn negated(&self) -> Self {
        Self { offsets: self.offsets.clone(), weights: self.weights.iter().map(|t| -t).collect() }
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().map(|t| t * t).sum::<f64>().sqrt()
    }

    /// Errors if an offset leaves the ball of radius `guard`.
    pub fn check_guard(&self, guard: f64) -> Result<()> {
        for v in &self.offsets {
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > guard {
                return Err(RrwError::ChartGuard { norm, guard });
            }
        }
        Ok(())
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `Σ_ij t_i t_j K(‖v_i − v_j‖)`.
pub fn probe_variance(probe: &CFProbe, spec: KernelSpec) -> f64 {
    let p = probe.weights.len();
    let mut acc = 0.0;
    for i in 0..p {
        for j in 0..p {
            acc += probe.weights[i] * probe.weights[j] * spec.eval(dist(&probe.offsets[i], &probe.offsets[j]));
        }
    }
    acc
}

/// `exp(−½ Σ_ij t_i t_j K(‖v_i − v_j‖))`, `K = B_d` or `S_d`.
pub fn limit_cf(probe: &CFProbe, spec: KernelSpec) -> Complex64 {
    Complex64::new((-0.5 * probe_variance(probe, spec)).exp(), 0.0)
}

/// Values of `g^X_λ(v)` for each offset `v` over the `E_X` nodes.
///
/// Torus (`d ≤ 2`): the FFT grid with `n^d ≥ x_draws` nodes, `n` raised above
/// the aliasing limit when needed. 3-torus: a pointwise tensor grid. Sphere:
/// `x_draws` uniform points from `rng`.
pub fn offset_values<R: Rng + ?Sized>(
    sample: &WaveSample,
    offsets: &[Vec<f64>],
    x_draws: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if x_draws == 0 {
        return Err(RrwError::Domain("need at least one X node".into()));
    }
    let lam = sample.lambda();
    let d = sample.basis.dim();
    if offsets.iter().any(|v| v.len() != d) {
        return Err(RrwError::Domain(format!("offsets must have dimension {d}")));
    }
    match sample.basis.manifold {
        ManifoldSpec::Torus { dim } => {
            let mk = sample.basis.torus_modes().map(|t| t.max_k as usize).unwrap_or(0);
            let n = torus_grid_side(x_draws, dim, mk);
            if dim <= 2 {
                offsets
                    .iter()
                    .map(|v| {
                        let shift = [v[0] / lam, if dim == 2 { v[1] / lam } else { 0.0 }];
                        sample.torus_grid(n, shift, [0, 0])
                    })
                    .collect()
            } else {
                let h = 1.0 / n as f64;
                Ok(offsets
                    .iter()
                    .map(|v| {
                        (0..n * n * n)
                            .into_par_iter()
                            .map(|k| {
                                let x = [
                                    h * (k % n) as f64 + v[0] / lam,
                                    h * ((k / n) % n) as f64 + v[1] / lam,
                                    h * (k / (n * n)) as f64 + v[2] / lam,
                                ];
                                sample.eval_field(&x)
                            })
                            .collect()
                    })
                    .collect())
            }
        }
        ManifoldSpec::Sphere2 => {
            let xs: Vec<Point> = (0..x_draws).map(|_| uniform_point(sample.basis.manifold, rng)).collect();
            offsets
                .iter()
                .map(|v| {
                    xs.par_iter()
                        .map(|x| sample.rescaled(*x).eval(v))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect()
        }
    }
}

/// Grid side for `E_X` on a `dim`-torus: `n^dim ≥ x_draws` and `n > 2 k_max`.
pub fn torus_grid_side(x_draws: usize, dim: usize, max_k: usize) -> usize {
    let n = (x_draws as f64).powf(1.0 / dim as f64).ceil() as usize;
    let n = if n.pow(dim as u32) < x_draws { n + 1 } else { n };
    n.max(2 * max_k + 2)
}

/// `E_X exp(i Σ t_i values_i)` over precomputed offset values.
pub fn cf_from_values(values: &[Vec<f64>], weights: &[f64]) -> Complex64 {
    let n = values[0].len();
    let (re, im): (Vec<f64>, Vec<f64>) = (0..n)
        .into_par_iter()
        .map(|k| {
            let s: f64 = weights.iter().zip(values).map(|(t, v)| t * v[k]).sum();
            let (sn, cs) = s.sin_cos();
            (cs, sn)
        })
        .unzip();
    Complex64::new(pairwise_sum(&re), pairwise_sum(&im)) / n as f64
}

/// `E_X[e^{i N_λ(v, t)}]` for a fixed coefficient draw.
pub fn empirical_cf<R: Rng + ?Sized>(
    sample: &WaveSample,
    probe: &CFProbe,
    x_draws: usize,
    rng: &mut R,
) -> Result<Complex64> {
    if probe.weights.iter().all(|t| *t == 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let values = offset_values(sample, &probe.offsets, x_draws, rng)?;
    Ok(cf_from_values(&values, &probe.weights))
}

/// `max_{v, t} |E_X e^{iN_λ} − limit| / (1 + |t|^{2+ε})` over probes built from
/// `v_grid` (all single offsets, and all pairs when `max_p ≥ 2`) and weight
/// tuples from `t_grid`.
pub fn cf_error_weighted_sup<R: Rng + ?Sized>(
    sample: &WaveSample,
    spec: KernelSpec,
    v_grid: &[Vec<f64>],
    t_grid: &[f64],
    max_p: usize,
    x_draws: usize,
    rng: &mut R,
) -> Result<f64> {
    if v_grid.is_empty() || t_grid.is_empty() {
        return Err(RrwError::Domain("empty probe grid".into()));
    }
    let values = offset_values(sample, v_grid, x_draws, rng)?;
    let mut sets: Vec<Vec<usize>> = (0..v_grid.len()).map(|i| vec![i]).collect();
    if max_p >= 2 {
        for i in 0..v_grid.len() {
            for j in i + 1..v_grid.len() {
                sets.push(vec![i, j]);
            }
        }
    }
    let mut sup: f64 = 0.0;
    for set in &sets {
        let mut tuples: Vec<Vec<f64>> = vec![vec![]];
        for _ in set {
            tuples = tuples
                .into_iter()
                .flat_map(|t| t_grid.iter().map(move |x| [t.clone(), vec![*x]].concat()))
                .collect();
        }
        let vals: Vec<Vec<f64>> = set.iter().map(|&i| values[i].clone()).collect();
        let offsets: Vec<Vec<f64>> = set.iter().map(|&i| v_grid[i].clone()).collect();
        for t in tuples {
            let probe = CFProbe::new(offsets.clone(), t.clone())?;
            let err = (cf_from_values(&vals, &t) - limit_cf(&probe, spec)).norm();
            sup = sup.max(err / (1.0 + probe.weight_norm().powf(2.0 + CF_WEIGHT_EPS)));
        }
    }
    Ok(sup)
}

/// Coefficients whose normalized field is `z ↦ K_λ(z, 0)/K` on a torus.
fn torus_kernel_sample(basis: &Arc<SpectralBasis>) -> Result<WaveSample> {
    let k = basis.count();
    let s = 1.0 / (k as f64).sqrt();
    let coeffs = (0..k)
        .map(|n| if n == 0 { s } else if n % 2 == 1 { std::f64::consts::SQRT_2 * s } else { 0.0 })
        .collect();
    WaveSample::from_coeffs(basis.clone(), coeffs)
}

/// `|Cov_a(N^X, N^Y)| = |Σ_ij t_i t_j K_λ(Φ_X(v_i/λ), Φ_Y(v_j/λ))/K|`.
pub fn decorrelation_at(basis: &SpectralBasis, probe: &CFProbe, x: Point, y: Point) -> Result<f64> {
    let lam = basis.lambda;
    let cx = crate::manifolds::chart_at(basis.manifold, x);
    let cy = crate::manifolds::chart_at(basis.manifold, y);
    let scale = |v: &Vec<f64>| v.iter().map(|c| c / lam).collect::<Vec<_>>();
    let mut acc = 0.0;
    for (ti, vi) in probe.weights.iter().zip(&probe.offsets) {
        let p = cx.exp_map(&scale(vi))?;
        for (tj, vj) in probe.weights.iter().zip(&probe.offsets) {
            let q = cy.exp_map(&scale(vj))?;
            acc += ti * tj * basis.spectral_kernel(&p, &q);
        }
    }
    Ok(acc.abs())
}

/// `E_{X,Y} |Cov_a(N^X, N^Y)|` with the covariance taken exactly from the
/// spectral projector. Torus (`d ≤ 2`): `X − Y` is uniform, so the double
/// integral is a single trapezoid rule over an FFT grid of the kernel. Sphere:
/// Monte Carlo over `xy_draws` pairs.
pub fn decorrelation_stat<R: Rng + ?Sized>(
    basis: &Arc<SpectralBasis>,
    probe: &CFProbe,
    xy_draws: usize,
    rng: &mut R,
) -> Result<f64> {
    if probe.weights.iter().all(|t| *t == 0.0) {
        return Ok(0.0);
    }
    match basis.manifold {
        ManifoldSpec::Torus { dim } if dim <= 2 => {
            let kern = torus_kernel_sample(basis)?;
            let lam = basis.lambda;
            let mk = basis.torus_modes().map(|t| t.max_k as usize).unwrap_or(0);
            let n = torus_grid_side(xy_draws, dim, mk);
            let mut total = vec![0.0; n.pow(dim as u32)];
            for (ti, vi) in probe.weights.iter().zip(&probe.offsets) {
                for (tj, vj) in probe.weights.iter().zip(&probe.offsets) {
                    let shift = [
                        (vi[0] - vj[0]) / lam,
                        if dim == 2 { (vi[1] - vj[1]) / lam } else { 0.0 },
                    ];
                    let g = kern.torus_grid(n, shift, [0, 0])?;
                    for (a, b) in total.iter_mut().zip(&g) {
                        *a += ti * tj * b;
                    }
                }
            }
            let abs: Vec<f64> = total.iter().map(|v| v.abs()).collect();
            Ok(mean(&abs))
        }
        _ => {
            let pairs: Vec<(Point, Point)> = (0..xy_draws)
                .map(|_| (uniform_point(basis.manifold, rng), uniform_point(basis.manifold, rng)))
                .collect();
            let vals: Vec<f64> = pairs
                .par_iter()
                .map(|(x, y)| decorrelation_at(basis, probe, *x, *y))
                .collect::<Result<_>>()?;
            Ok(mean(&vals))
        }
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let se = if xs.len() > 1 { std_dev(xs) / (xs.len() as f64).sqrt() } else { f64::NAN };
        Self { value: mean(xs), se }
    }
}

/// `|E_X e^{iN_λ} − limit|` for each of `coeff_replicas` independent draws,
/// replica `r` seeded by `(seed, r)`. `E_X` uses `x_draws` nodes.
pub fn cf_deviations(
    basis: &Arc<SpectralBasis>,
    probe: &CFProbe,
    spec: KernelSpec,
    coeff_replicas: usize,
    x_draws: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let target = limit_cf(probe, spec);
    (0..coeff_replicas)
        .into_par_iter()
        .map(|r| {
            let s = substream(seed, &[tag("cf-replica"), r as u64]).random::<u64>();
            let sample = sample_wave(basis.clone(), s);
            let mut rng = substream(s, &[tag("x-draws")]);
            Ok((empirical_cf(&sample, probe, x_draws, &mut rng)? - target).norm())
        })
        .collect()
}

/// `Δ^(q)_λ = E_a |E_X e^{iN_λ} − limit|^{2q}`, `q ∈ {1, 2}`, by Monte Carlo over
/// at least 50 coefficient draws.
pub fn delta_q(
    basis: &Arc<SpectralBasis>,
    probe: &CFProbe,
    spec: KernelSpec,
    q: u32,
    coeff_replicas: usize,
    x_draws: usize,
    seed: u64,
) -> Result<Estimate> {
    if !(1..=2).contains(&q) {
        return Err(RrwError::Domain(format!("q = {q} not in {{1, 2}}")));
    }
    if coeff_replicas < 50 {
        return Err(RrwError::Domain("delta_q needs at least 50 coefficient replicas".into()));
    }
    if probe.weights.iter().all(|t| *t == 0.0) {
        return Ok(Estimate { value: 0.0, se: 0.0 });
    }
    let dev = cf_deviations(basis, probe, spec, coeff_replicas, x_draws, seed)?;
    let pw: Vec<f64> = dev.iter().map(|e| e.powi(2 * q as i32)).collect();
    Ok(Estimate::from_samples(&pw))
}

/// Both `Δ^(1)` and `Δ^(2)` from one set of replicas.
pub fn delta_pair(
    basis: &Arc<SpectralBasis>,
    probe: &CFProbe,
    spec: KernelSpec,
    coeff_replicas: usize,
    x_draws: usize,
    seed: u64,
) -> Result<(Estimate, Estimate)> {
    if coeff_replicas < 50 {
        return Err(RrwError::Domain("delta_q needs at least 50 coefficient replicas".into()));
    }
    let dev = cf_deviations(basis, probe, spec, coeff_replicas, x_draws, seed)?;
    let d1: Vec<f64> = dev.iter().map(|e| e * e).collect();
    let d2: Vec<f64> = d1.iter().map(|e| e * e).collect();
    Ok((Estimate::from_samples(&d1), Estimate::from_samples(&d2)))
}

/// `E_X |g^X_λ(v)|^{−ν}` for `0 < ν < 1/(40 d)`. Values below `1e-300` are dropped.
pub fn negative_moment<R: Rng + ?Sized>(
    sample: &WaveSample,
    v: &[f64],
    nu: f64,
    x_draws: usize,
    rng: &mut R,
) -> Result<f64> {
    let d = sample.basis.dim();
    let limit = 1.0 / (40.0 * d as f64);
    if !(nu > 0.0 && nu < limit) {
        return Err(RrwError::Domain(format!("nu = {nu} outside (0, {limit})")));
    }
    let values = offset_values(sample, &[v.to_vec()], x_draws, rng)?;
    Ok(negative_moment_of(&values[0], nu))
}

/// `mean |x|^{−ν}` over the entries with `|x| ≥ 1e-300`.
pub fn negative_moment_of(xs: &[f64], nu: f64) -> f64 {
    let kept: Vec<f64> = xs.iter().filter(|x| x.abs() >= 1e-300).map(|x| x.abs().powf(-nu)).collect();
    mean(&kept)
}

/// `sup_t |F_n(t) − Φ(t)|` against the standard normal CDF.
pub fn kolmogorov_distance(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(RrwError::Domain("Kolmogorov distance of an empty sample".into()));
    }
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len() as f64;
    Ok(s.iter()
        .enumerate()
        .map(|(i, x)| {
            let f = normal_cdf(*x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max))
}

/// `E_X ∫_B |∂_α g^X_λ(v)|^{2p} dv` over the unit-volume ball `B`, derivatives
/// in rescaled chart coordinates (`|α| ≤ 2`).
///
/// Torus: by translation invariance the `v` integral factors out and the value
/// is `Vol(B) E_X |λ^{−|α|} ∂_α f_λ(X)|^{2p}`, computed on the FFT grid (`d ≤ 2`).
/// Sphere: `x_draws` uniform base points times a `ball_n × ball_n` midpoint rule
/// on `B`, with derivatives by central differences of step `1e-3`.
pub fn derivative_moment<R: Rng + ?Sized>(
    sample: &WaveSample,
    alpha: &[u32],
    p: u32,
    x_draws: usize,
    ball_n: usize,
    rng: &mut R,
) -> Result<f64> {
    let d = sample.basis.dim();
    if alpha.len() != d || alpha.iter().sum::<u32>() > 2 {
        return Err(RrwError::Domain("need a multi-index of length d with |alpha| <= 2".into()));
    }
    let order: u32 = alpha.iter().sum();
    let lam = sample.lambda();
    match sample.basis.manifold {
        ManifoldSpec::Torus { dim } if dim <= 2 => {
            let mk = sample.basis.torus_modes().map(|t| t.max_k as usize).unwrap_or(0);
            let n = torus_grid_side(x_draws, dim, mk);
            let deriv = [alpha[0], if dim == 2 { alpha[1] } else { 0 }];
            let g = sample.torus_grid(n, [0.0, 0.0], deriv)?;
            let scale = lam.powi(-(order as i32));
            let pw: Vec<f64> = g.iter().map(|x| (x * scale).abs().powi(2 * p as i32)).collect();
            Ok(mean(&pw))
        }
        ManifoldSpec::Sphere2 => {
            if ball_n == 0 {
                return Err(RrwError::Domain("ball grid needs ball_n >= 1".into()));
            }
            let delta = ball_radius(2);
            let h = 2.0 * delta / ball_n as f64;
            let nodes: Vec<[f64; 2]> = (0..ball_n * ball_n)
                .map(|k| [-delta + h * ((k % ball_n) as f64 + 0.5), -delta + h * ((k / ball_n) as f64 + 0.5)])
                .filter(|v| v[0].hypot(v[1]) <= delta)
                .collect();
            let xs: Vec<Point> = (0..x_draws).map(|_| uniform_point(sample.basis.manifold, rng)).collect();
            let eps = 1e-3;
            let per_x: Vec<f64> = xs
                .par_iter()
                .map(|x| {
                    let view = sample.rescaled(*x);
                    let mut acc = 0.0;
                    for v in &nodes {
                        let dv = directional(&|w: [f64; 2]| view.eval(&w), *v, alpha, eps)?;
                        acc += dv.abs().powi(2 * p as i32);
                    }
                    Ok(acc * h * h)
                })
                .collect::<Result<_>>()?;
            Ok(mean(&per_x))
        }
        _ => Err(RrwError::Domain("derivative_moment supports torus d <= 2 and the sphere".into())),
    }
}

fn directional<F: Fn([f64; 2]) -> Result<f64>>(f: &F, v: [f64; 2], alpha: &[u32], h: f64) -> Result<f64> {
    let at = |dx: f64, dy: f64| f([v[0] + dx, v[1] + dy]);
    Ok(match (alpha[0], alpha[1]) {
        (0, 0) => at(0.0, 0.0)?,
        (1, 0) => (at(h, 0.0)? - at(-h, 0.0)?) / (2.0 * h),
        (0, 1) => (at(0.0, h)? - at(0.0, -h)?) / (2.0 * h),
        (2, 0) => (at(h, 0.0)? - 2.0 * at(0.0, 0.0)? + at(-h, 0.0)?) / (h * h),
        (0, 2) => (at(0.0, h)? - 2.0 * at(0.0, 0.0)? + at(0.0, -h)?) / (h * h),
        _ => (at(h, h)? - at(h, -h)? - at(-h, h)? + at(-h, -h)?) / (4.0 * h * h),
    })
}

/// Least-squares fit of `log error` against `log λ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn loglog_slope(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 4 {
        return Err(RrwError::Domain("a rate fit needs at least 4 points".into()));
    }
    if points.iter().any(|(l, e)| !(*l > 0.0) || !(*e > 0.0)) {
        return Err(RrwError::Domain("rate fit needs positive lambda and error values".into()));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(l, e)| (l.ln(), e.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(RrwError::Domain("rate fit needs distinct lambda values".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit { points: logs, slope, intercept: my - slope * mx, r2 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KendallTest {
    pub tau: f64,
    /// `P(S ≥ S_obs)` under the exact no-trend null (ties broken as discordant).
    pub p_increasing: f64,
}

impl KendallTest {
    /// True when an increasing trend is detected at level `alpha`.
    pub fn increasing_at(&self, alpha: f64) -> bool {
        self.p_increasing <= alpha
    }
}

/// One-sided Kendall trend test of `values` against their index, with the
/// exact permutation distribution of the inversion count.
pub fn kendall_trend(values: &[f64]) -> Result<KendallTest> {
    let n = values.len();
    if !(2..=60).contains(&n) {
        return Err(RrwError::Domain("Kendall test supports 2..=60 points".into()));
    }
    let mut concordant = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            if values[j] > values[i] {
                concordant += 1;
            }
        }
    }
    let pairs = n * (n - 1) / 2;
    // Mahonian numbers: permutations of n with k inversions.
    let mut counts = vec![1.0f64];
    for m in 2..=n {
        let mut next = vec![0.0; counts.len() + m - 1];
        for (k, c) in counts.iter().enumerate() {
            for j in 0..m {
                next[k + j] += c;
            }
        }
        counts = next;
    }
    let total: f64 = counts.iter().sum();
    // Concordant pairs of a permutation = pairs − inversions.
    let tail: f64 = counts.iter().enumerate().filter(|(inv, _)| pairs - inv >= concordant).map(|(_, c)| c).sum();
    let s = 2.0 * concordant as f64 - pairs as f64;
    Ok(KendallTest { tau: s / pairs as f64, p_increasing: tail / total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::enumerate_spectrum;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{E, TAU};

    fn lb(d: usize) -> KernelSpec {
        KernelSpec::large_band(d).unwrap()
    }

    fn torus2(n: f64) -> Arc<SpectralBasis> {
        Arc::new(enumerate_spectrum(ManifoldSpec::torus(2).unwrap(), TAU * n, Regime::LargeBand).unwrap())
    }

    #[test]
    fn eta_cases() {
        assert_abs_diff_eq!(eta(E, lb(1)).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(eta(123.0, lb(2)).unwrap(), 1.0);
        assert_eq!(eta(4.0, KernelSpec::monochromatic(2).unwrap()).unwrap(), 2.0);
        assert_eq!(eta(9.0, KernelSpec::monochromatic(3).unwrap()).unwrap(), 1.0);
        assert!(eta(0.5, lb(2)).is_err());
    }

    #[test]
    fn limit_cf_cases() {
        let one = CFProbe::single(2, 1.0);
        assert_abs_diff_eq!(limit_cf(&one, lb(2)).re, (-0.5f64).exp(), epsilon = 1e-15);
        let same = CFProbe::new(vec![vec![0.3, 0.1], vec![0.3, 0.1]], vec![1.0, -1.0]).unwrap();
        assert_abs_diff_eq!(limit_cf(&same, lb(2)).re, 1.0, epsilon = 1e-15);
        assert!(CFProbe::new(vec![], vec![]).is_err());
        assert!(CFProbe::new(vec![vec![0.0]], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn empirical_cf_trivial_cases() {
        let b = torus2(8.0);
        let s = sample_wave(b, 3);
        let mut rng = substream(0, &[]);
        let zero = CFProbe::single(2, 0.0);
        assert_eq!(empirical_cf(&s, &zero, 64, &mut rng).unwrap(), Complex64::new(1.0, 0.0));
        let p = CFProbe::new(vec![vec![0.0, 0.0], vec![1.0, 0.5]], vec![0.7, -1.3]).unwrap();
        let a = empirical_cf(&s, &p, 4096, &mut rng).unwrap();
        let b = empirical_cf(&s, &p.negated(), 4096, &mut rng).unwrap();
        assert!((a - b.conj()).norm() < 1e-15);
        assert!(a.norm() <= 1.0);
    }

    #[test]
    fn decorrelation_trivial_cases() {
        let b = torus2(6.0);
        let mut rng = substream(0, &[]);
        assert_eq!(decorrelation_stat(&b, &CFProbe::single(2, 0.0), 64, &mut rng).unwrap(), 0.0);
        let x = [0.2, 0.7, 0.0];
        assert_abs_diff_eq!(decorrelation_at(&b, &CFProbe::single(2, 1.0), x, x).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn kolmogorov_single_point() {
        assert_abs_diff_eq!(kolmogorov_distance(&[0.0]).unwrap(), 0.5, epsilon = 1e-15);
        assert!(kolmogorov_distance(&[]).is_err());
    }

    #[test]
    fn negative_moment_range() {
        let s = sample_wave(torus2(5.0), 1);
        let mut rng = substream(0, &[]);
        assert!(negative_moment(&s, &[0.0, 0.0], 0.0125, 1024, &mut rng).is_err());
        assert!(negative_moment(&s, &[0.0, 0.0], 0.0, 1024, &mut rng).is_err());
        let m = negative_moment(&s, &[0.0, 0.0], 1e-6, 1024, &mut rng).unwrap();
        assert_abs_diff_eq!(m, 1.0, epsilon = 1e-4);
        assert_eq!(negative_moment_of(&[0.0, 1.0], 0.01), 1.0);
    }

    #[test]
    fn derivative_moment_order_zero_is_coefficient_energy() {
        let s = sample_wave(torus2(7.0), 2);
        let mut rng = substream(0, &[]);
        let m = derivative_moment(&s, &[0, 0], 1, 4096, 0, &mut rng).unwrap();
        let energy = s.coeffs.iter().map(|a| a * a).sum::<f64>() / s.coeffs.len() as f64;
        assert_abs_diff_eq!(m, energy, epsilon = 1e-12);
    }

    #[test]
    fn slopes() {
        let exact: Vec<(f64, f64)> = [10.0, 20.0, 40.0, 80.0].iter().map(|l| (*l, 1.0 / l)).collect();
        let f = loglog_slope(&exact).unwrap();
        assert_abs_diff_eq!(f.slope, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.r2, 1.0, epsilon = 1e-12);
        let flat: Vec<(f64, f64)> = [10.0, 20.0, 40.0, 80.0].iter().map(|l| (*l, 0.3)).collect();
        assert_abs_diff_eq!(loglog_slope(&flat).unwrap().slope, 0.0, epsilon = 1e-12);
        assert!(loglog_slope(&exact[..3]).is_err());
        assert!(loglog_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0), (4.0, 1.0)]).is_err());
    }

    #[test]
    fn kendall_exact_null() {
        let up = kendall_trend(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(up.p_increasing, 1.0 / 24.0, epsilon = 1e-15);
        assert!(up.increasing_at(0.05));
        let down = kendall_trend(&[4.0, 3.0, 2.0, 1.0]).unwrap();
        assert_eq!(down.p_increasing, 1.0);
        assert_eq!(down.tau, -1.0);
        // One swap from sorted: 1 + 3 permutations have at most one inversion.
        let near = kendall_trend(&[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_abs_diff_eq!(near.p_increasing, 4.0 / 24.0, epsilon = 1e-15);
    }
}
