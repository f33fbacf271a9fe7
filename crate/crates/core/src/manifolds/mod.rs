//! Manifolds with explicit spectra: flat tori `T^d` (`d ≤ 3`) and the round
//! 2-sphere, both normalized to total volume 1.

pub mod sphere;
pub mod torus;

use crate::error::{Result, RrwError};
use crate::kernels::{unit_ball_volume, KernelSpec, Regime};
use crate::rng::uniform;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sphere::SphereModes;
use std::f64::consts::{PI, TAU};
use torus::TorusModes;

/// A point: torus coordinates in `[0,1)^d` (unused entries zero) or a
/// position in `R³` on the sphere of radius `R`.
pub type Point = [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ManifoldSpec {
    Torus { dim: usize },
    Sphere2,
}

impl ManifoldSpec {
    pub fn torus(dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(RrwError::InvalidSpec(format!(
                "torus dimension {dim} not in 1..=3"
            )));
        }
        Ok(ManifoldSpec::Torus { dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            ManifoldSpec::Torus { dim } => *dim,
            ManifoldSpec::Sphere2 => 2,
        }
    }

    /// Largest tangent-vector norm accepted by [`exp_map`].
    pub fn chart_guard(&self) -> f64 {
        match self {
            ManifoldSpec::Torus { .. } => 0.5,
            ManifoldSpec::Sphere2 => PI * sphere::radius() - 1e-9,
        }
    }

    pub fn name(&self) -> String {
        match self {
            ManifoldSpec::Torus { dim } => format!("torus{dim}"),
            ManifoldSpec::Sphere2 => "sphere2".into(),
        }
    }
}

impl std::str::FromStr for ManifoldSpec {
    type Err = RrwError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "torus1" => ManifoldSpec::torus(1),
            "torus2" | "torus" => ManifoldSpec::torus(2),
            "torus3" => ManifoldSpec::torus(3),
            "sphere2" | "sphere" => Ok(ManifoldSpec::Sphere2),
            other => Err(RrwError::Config(format!("unknown manifold `{other}`"))),
        }
    }
}

impl std::fmt::Display for ManifoldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

/// `Φ_x = exp_x ∘ I_x`: a base point with an orthonormal tangent frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartMap {
    pub manifold: ManifoldSpec,
    pub base: Point,
    /// Ambient images of the Euclidean basis vectors (sphere) or the identity (torus).
    pub frame: [[f64; 3]; 3],
}

pub fn chart_at(m: ManifoldSpec, x: Point) -> ChartMap {
    let frame = match m {
        ManifoldSpec::Torus { .. } => [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        ManifoldSpec::Sphere2 => {
            let f = sphere::frame(&x);
            [f[0], f[1], [0.0; 3]]
        }
    };
    ChartMap {
        manifold: m,
        base: x,
        frame,
    }
}

impl ChartMap {
    /// `Φ_x(v)`; errors beyond the injectivity guard.
    pub fn exp_map(&self, v: &[f64]) -> Result<Point> {
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        let guard = self.manifold.chart_guard();
        if norm > guard {
            return Err(RrwError::ChartGuard { norm, guard });
        }
        Ok(self.exp_unchecked(v))
    }

    pub(crate) fn exp_unchecked(&self, v: &[f64]) -> Point {
        let x = self.base;
        match self.manifold {
            ManifoldSpec::Torus { dim } => {
                let mut p = [0.0; 3];
                for c in 0..dim {
                    p[c] = torus::wrap(x[c] + v[c]);
                }
                p
            }
            ManifoldSpec::Sphere2 => {
                let r = sphere::radius();
                let w: [f64; 3] =
                    std::array::from_fn(|k| v[0] * self.frame[0][k] + v[1] * self.frame[1][k]);
                let rho = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
                if rho == 0.0 {
                    return x;
                }
                let (s, c) = (rho / r).sin_cos();
                std::array::from_fn(|k| c * x[k] + r * s * w[k] / rho)
            }
        }
    }

    /// Components of an ambient tangent vector in this chart's frame.
    pub fn frame_components(&self, g: &[f64; 3]) -> [f64; 3] {
        match self.manifold {
            ManifoldSpec::Torus { .. } => *g,
            ManifoldSpec::Sphere2 => {
                let dot = |a: &[f64; 3]| a[0] * g[0] + a[1] * g[1] + a[2] * g[2];
                [dot(&self.frame[0]), dot(&self.frame[1]), 0.0]
            }
        }
    }
}

pub fn geodesic_distance(m: ManifoldSpec, x: &Point, y: &Point) -> f64 {
    match m {
        ManifoldSpec::Torus { dim } => torus::distance(dim, x, y),
        ManifoldSpec::Sphere2 => sphere::distance(x, y),
    }
}

/// A point distributed exactly according to the normalized volume measure.
pub fn uniform_point<R: Rng + ?Sized>(m: ManifoldSpec, rng: &mut R) -> Point {
    match m {
        ManifoldSpec::Torus { dim } => {
            let mut p = [0.0; 3];
            for c in p.iter_mut().take(dim) {
                *c = uniform(rng);
            }
            p
        }
        ManifoldSpec::Sphere2 => {
            let z = 2.0 * uniform(rng) - 1.0;
            let phi = TAU * uniform(rng);
            let s = (1.0 - z * z).max(0.0).sqrt();
            let r = sphere::radius();
            [r * s * phi.cos(), r * s * phi.sin(), r * z]
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Modes {
    Torus(TorusModes),
    Sphere(SphereModes),
}

/// Eigenpairs of a manifold selected by a frequency cut or band.
#[derive(Clone, Debug)]
pub struct SpectralBasis {
    pub manifold: ManifoldSpec,
    pub regime: KernelSpec,
    /// The `λ` the basis was built for.
    pub lambda: f64,
    pub(crate) modes: Modes,
}

/// Enumerates the spectrum. Large band: all modes with `λ_n ≤ λ` (closed
/// cut, whole eigenspaces). Monochromatic (sphere only): the single degree `l`
/// whose frequency `√(4π l(l+1))` is nearest to `λ`.
pub fn enumerate_spectrum(m: ManifoldSpec, lambda: f64, regime: Regime) -> Result<SpectralBasis> {
    if !(lambda > 0.0) {
        return Err(RrwError::Domain(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let spec = KernelSpec::new(m.dim(), regime)?;
    let modes = match (m, regime) {
        (ManifoldSpec::Torus { dim }, Regime::LargeBand) => {
            let t = TorusModes::new(dim, lambda / TAU);
            if t.half.is_empty() {
                return Err(RrwError::EmptySpectrum(lambda));
            }
            Modes::Torus(t)
        }
        (ManifoldSpec::Torus { .. }, Regime::Monochromatic) => {
            return Err(RrwError::InvalidSpec(
                "monochromatic bands are only realized on the sphere".into(),
            ))
        }
        (ManifoldSpec::Sphere2, Regime::LargeBand) => {
            let mut degrees = Vec::new();
            let mut l = 0;
            while sphere::degree_frequency(l) <= lambda * (1.0 + 1e-12) {
                degrees.push(l);
                l += 1;
            }
            if degrees.len() < 2 {
                return Err(RrwError::EmptySpectrum(lambda));
            }
            Modes::Sphere(SphereModes::new(degrees))
        }
        (ManifoldSpec::Sphere2, Regime::Monochromatic) => {
            Modes::Sphere(SphereModes::new(vec![nearest_sphere_degree(lambda)]))
        }
    };
    Ok(SpectralBasis {
        manifold: m,
        regime: spec,
        lambda,
        modes,
    })
}

/// Degree `l ≥ 1` minimizing `|√(4π l(l+1)) − λ|`.
pub fn nearest_sphere_degree(lambda: f64) -> usize {
    let guess = ((0.25 + lambda * lambda / (4.0 * PI)).sqrt() - 0.5).max(1.0);
    let lo = guess.floor().max(1.0) as usize;
    let hi = lo + 1;
    if (sphere::degree_frequency(lo) - lambda).abs()
        <= (sphere::degree_frequency(hi) - lambda).abs()
    {
        lo
    } else {
        hi
    }
}

impl SpectralBasis {
    /// `K(λ)` (large band) or `k(λ)` (monochromatic).
    pub fn count(&self) -> usize {
        match &self.modes {
            Modes::Torus(t) => t.count(),
            Modes::Sphere(s) => s.count(),
        }
    }

    pub fn dim(&self) -> usize {
        self.manifold.dim()
    }

    pub fn torus_modes(&self) -> Option<&TorusModes> {
        match &self.modes {
            Modes::Torus(t) => Some(t),
            Modes::Sphere(_) => None,
        }
    }

    pub fn sphere_modes(&self) -> Option<&SphereModes> {
        match &self.modes {
            Modes::Sphere(s) => Some(s),
            Modes::Torus(_) => None,
        }
    }

    /// Frequency `λ_n` of mode `n`.
    pub fn frequency(&self, n: usize) -> f64 {
        match &self.modes {
            Modes::Torus(t) => t.frequency(n),
            Modes::Sphere(s) => s.frequency(n),
        }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.count()).map(|n| self.frequency(n)).collect()
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n >= self.count() {
            return Err(RrwError::ModeIndex {
                index: n,
                count: self.count(),
            });
        }
        Ok(())
    }

    /// `φ_n(x)`, normalized in `L²(μ)`.
    pub fn eval_mode(&self, n: usize, x: &Point) -> Result<f64> {
        self.check_index(n)?;
        Ok(match &self.modes {
            Modes::Torus(t) => t.eval_mode(n, x),
            Modes::Sphere(s) => s.eval_mode(n, x),
        })
    }

    /// Gradient of `φ_n` at `x` in the frame of `chart` (first `d` entries used).
    pub fn eval_mode_gradient(&self, n: usize, x: &Point, chart: &ChartMap) -> Result<[f64; 3]> {
        self.check_index(n)?;
        match &self.modes {
            Modes::Torus(t) => Ok(chart.frame_components(&t.eval_mode_gradient(n, x))),
            Modes::Sphere(s) => Ok(chart.frame_components(&s.mode_gradient_ambient(n, x)?)),
        }
    }

    /// `Σ_n a_n φ_n(x)` (no normalization).
    pub fn combine(&self, coeffs: &[f64], x: &Point) -> f64 {
        match &self.modes {
            Modes::Torus(t) => t.combine(coeffs, x),
            Modes::Sphere(s) => s.combine(coeffs, x),
        }
    }

    /// Gradient of `Σ_n a_n φ_n` at `x` in the frame of `chart`.
    pub fn combine_gradient(
        &self,
        coeffs: &[f64],
        x: &Point,
        chart: &ChartMap,
    ) -> Result<[f64; 3]> {
        match &self.modes {
            Modes::Torus(t) => Ok(chart.frame_components(&t.combine_gradient(coeffs, x))),
            Modes::Sphere(s) => Ok(chart.frame_components(&s.combine_gradient_ambient(coeffs, x)?)),
        }
    }

    /// `K_λ(x, y) / K(λ)`: the exact covariance of the normalized ensemble.
    pub fn spectral_kernel(&self, x: &Point, y: &Point) -> f64 {
        let raw = match &self.modes {
            Modes::Torus(t) => t.projector(x, y),
            Modes::Sphere(s) => s.projector(x, y),
        };
        raw / self.count() as f64
    }

    /// `K(λ) (2π)^d / (σ_d λ^d)`.
    pub fn weyl_ratio(&self) -> f64 {
        weyl_ratio(self.dim(), self.lambda, self.count())
    }
}

pub fn weyl_ratio(dim: usize, lambda: f64, count: usize) -> f64 {
    count as f64 * TAU.powi(dim as i32) / (unit_ball_volume(dim) * lambda.powi(dim as i32))
}

/// Sup over pairs `(u, v)` of an `n × n` offset grid on `[-radius, radius]^2`
/// (restricted to `‖u‖, ‖v‖ ≤ radius`) of
/// `|K_λ(Φ_x(u/λ), Φ_x(v/λ))/K(λ) − K_∞(‖u − v‖)|`. Two-dimensional manifolds only.
pub fn local_weyl_sup_error(basis: &SpectralBasis, x: Point, n: usize, radius: f64) -> Result<f64> {
    if basis.dim() != 2 {
        return Err(RrwError::Domain(
            "local Weyl grid check is implemented for d = 2".into(),
        ));
    }
    let chart = chart_at(basis.manifold, x);
    let lam = basis.lambda;
    let mut offsets = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let u = [
                -radius + 2.0 * radius * i as f64 / (n - 1) as f64,
                -radius + 2.0 * radius * j as f64 / (n - 1) as f64,
            ];
            if u[0].hypot(u[1]) <= radius + 1e-12 {
                offsets.push(u);
            }
        }
    }
    let pts: Vec<Point> = offsets
        .iter()
        .map(|u| chart.exp_map(&[u[0] / lam, u[1] / lam]))
        .collect::<Result<_>>()?;
    use rayon::prelude::*;
    let sup = (0..offsets.len())
        .into_par_iter()
        .map(|a| {
            let mut m: f64 = 0.0;
            for b in a..offsets.len() {
                let r = (offsets[a][0] - offsets[b][0]).hypot(offsets[a][1] - offsets[b][1]);
                let err = (basis.spectral_kernel(&pts[a], &pts[b]) - basis.regime.eval(r)).abs();
                m = m.max(err);
            }
            m
        })
        .reduce(|| 0.0, f64::max);
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::special::legendre;
    use approx::assert_abs_diff_eq;

    #[test]
    fn counts() {
        let t1 = enumerate_spectrum(ManifoldSpec::Torus { dim: 1 }, TAU * 7.0, Regime::LargeBand).unwrap();
        assert_eq!(t1.count(), 15);
        // Gauss circle: lattice points in the closed disk of radius 5.
        let t2 = enumerate_spectrum(ManifoldSpec::Torus { dim: 2 }, TAU * 5.0, Regime::LargeBand).unwrap();
        assert_eq!(t2.count(), 81);
        let s = enumerate_spectrum(ManifoldSpec::Sphere2, sphere::degree_frequency(9), Regime::LargeBand).unwrap();
        assert_eq!(s.count(), 100);
        let m = enumerate_spectrum(ManifoldSpec::Sphere2, sphere::degree_frequency(9) + 0.1, Regime::Monochromatic).unwrap();
        assert_eq!(m.count(), 19);
        assert!(enumerate_spectrum(ManifoldSpec::Torus { dim: 2 }, 1.0, Regime::LargeBand).is_err());
    }

    #[test]
    fn frequencies_sorted_and_nested() {
        let b = enumerate_spectrum(ManifoldSpec::Torus { dim: 2 }, TAU * 6.0, Regime::LargeBand).unwrap();
        let f = b.frequencies();
        assert!(f.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        let small = enumerate_spectrum(ManifoldSpec::Torus { dim: 2 }, TAU * 3.0, Regime::LargeBand).unwrap();
        for n in 0..small.count() {
            assert_eq!(small.frequency(n), b.frequency(n));
        }
    }

    #[test]
    fn torus_modes_orthonormal_on_grid() {
        let b = enumerate_spectrum(ManifoldSpec::Torus { dim: 2 }, TAU * 2.0, Regime::LargeBand).unwrap();
        let n = 16;
        let pts: Vec<Point> = (0..n * n).map(|k| [(k % n) as f64 / n as f64, (k / n) as f64 / n as f64, 0.0]).collect();
        for i in 0..b.count() {
            for j in 0..b.count() {
                let g: f64 = pts.iter().map(|p| b.eval_mode(i, p).unwrap() * b.eval_mode(j, p).unwrap()).sum::<f64>() / pts.len() as f64;
                assert_abs_diff_eq!(g, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sphere_addition_theorem() {
        let l = 7;
        let b = enumerate_spectrum(ManifoldSpec::Sphere2, sphere::degree_frequency(l), Regime::Monochromatic).unwrap();
        let mut rng = substream(4, &[]);
        let r = sphere::radius();
        for _ in 0..20 {
            let x = uniform_point(ManifoldSpec::Sphere2, &mut rng);
            let y = uniform_point(ManifoldSpec::Sphere2, &mut rng);
            let cos_g = (x[0] * y[0] + x[1] * y[1] + x[2] * y[2]) / (r * r);
            assert_abs_diff_eq!(b.spectral_kernel(&x, &y), legendre(l, cos_g), epsilon = 1e-11);
        }
    }

    #[test]
    fn exp_map_preserves_distance() {
        let mut rng = substream(5, &[]);
        for m in [ManifoldSpec::Torus { dim: 2 }, ManifoldSpec::Sphere2] {
            for _ in 0..50 {
                let x = uniform_point(m, &mut rng);
                let c = chart_at(m, x);
                let v = [0.3 * sphere::radius(), -0.2 * sphere::radius()];
                let p = c.exp_map(&v).unwrap();
                assert_abs_diff_eq!(geodesic_distance(m, &x, &p), v[0].hypot(v[1]), epsilon = 1e-12);
            }
        }
        let c = chart_at(ManifoldSpec::Torus { dim: 2 }, [0.1, 0.2, 0.0]);
        assert!(matches!(c.exp_map(&[0.6, 0.0]), Err(RrwError::ChartGuard { .. })));
    }

    #[test]
    fn sphere_frame_is_orthonormal_and_tangent() {
        let mut rng = substream(6, &[]);
        for _ in 0..50 {
            let x = uniform_point(ManifoldSpec::Sphere2, &mut rng);
            let f = sphere::frame(&x);
            let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            assert_abs_diff_eq!(dot(&f[0], &f[0]), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(dot(&f[1], &f[1]), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(dot(&f[0], &f[1]), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(dot(&f[0], &x), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(dot(&x, &x).sqrt(), sphere::radius(), epsilon = 1e-12);
        }
    }

    #[test]
    fn nearest_degree_inverts_frequency() {
        for l in 1..200 {
            assert_eq!(nearest_sphere_degree(sphere::degree_frequency(l)), l);
        }
    }

    #[test]
    fn weyl_ratio_near_one() {
        let b = enumerate_spectrum(ManifoldSpec::Torus { dim: 2 }, TAU * 40.0, Regime::LargeBand).unwrap();
        assert!((b.weyl_ratio() - 1.0).abs() < 0.01);
        let s = enumerate_spectrum(ManifoldSpec::Sphere2, sphere::degree_frequency(40), Regime::LargeBand).unwrap();
        assert!((s.weyl_ratio() - 1.0).abs() < 0.1);
    }
}
