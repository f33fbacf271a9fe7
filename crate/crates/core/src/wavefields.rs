//! Random wave ensembles `f_λ = K^{-1/2} Σ a_n φ_n`, their rescaled chart views
//! `g_λ^x(v) = f_λ(Φ_x(v/λ))`, and spectral samplers for the Euclidean limit
//! fields.

use crate::error::{Result, RrwError};
use crate::kernels::{unit_ball_volume, KernelSpec, Regime};
use crate::manifolds::{chart_at, ChartMap, ManifoldSpec, Point, SpectralBasis};
use crate::rng::{normals, substream, tag, uniform};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::TAU;
use std::sync::Arc;

/// One Gaussian draw of the coefficients `a_n`.
///
/// Coefficients are read off a single normal stream in basis order, and bases
/// are sorted by frequency, so the same seed yields the same sequence `(a_n)`
/// for every `λ`.
#[derive(Clone, Debug)]
pub struct WaveSample {
    pub basis: Arc<SpectralBasis>,
    pub coeffs: Vec<f64>,
    pub seed: u64,
}

pub fn sample_wave(basis: Arc<SpectralBasis>, seed: u64) -> WaveSample {
    let mut rng = substream(seed, &[tag("wave-coefficients")]);
    let coeffs = normals(&mut rng, basis.count());
    WaveSample {
        basis,
        coeffs,
        seed,
    }
}

impl WaveSample {
    pub fn from_coeffs(basis: Arc<SpectralBasis>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.count() {
            return Err(RrwError::Domain(format!(
                "{} coefficients for a basis of {} modes",
                coeffs.len(),
                basis.count()
            )));
        }
        Ok(Self {
            basis,
            coeffs,
            seed: 0,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.basis.lambda
    }

    fn norm(&self) -> f64 {
        1.0 / (self.basis.count() as f64).sqrt()
    }

    pub fn eval_field(&self, x: &Point) -> f64 {
        self.norm() * self.basis.combine(&self.coeffs, x)
    }

    pub fn eval_field_gradient(&self, x: &Point, chart: &ChartMap) -> Result<[f64; 3]> {
        let g = self.basis.combine_gradient(&self.coeffs, x, chart)?;
        Ok(g.map(|c| c * self.norm()))
    }

    pub fn rescaled(&self, base: Point) -> RescaledFieldView<'_> {
        RescaledFieldView {
            sample: self,
            chart: chart_at(self.basis.manifold, base),
        }
    }

    /// Field values on the regular `n^d` grid `j/n + shift` of the torus
    /// fundamental domain (`d = 1, 2`), by inverse FFT of the Fourier coefficients.
    /// `deriv` applies `∂_1^{deriv[0]} ∂_2^{deriv[1]}`.
    pub fn torus_grid(&self, n: usize, shift: [f64; 2], deriv: [u32; 2]) -> Result<Vec<f64>> {
        let t = self
            .basis
            .torus_modes()
            .ok_or_else(|| RrwError::Domain("FFT grids need a torus basis".into()))?;
        if t.dim > 2 {
            return Err(RrwError::Domain("FFT grids support d <= 2".into()));
        }
        if n <= 2 * t.max_k as usize {
            return Err(RrwError::Domain(format!(
                "grid {n} aliases frequencies up to {}",
                t.max_k
            )));
        }
        let (c0, ck) = t.fourier(&self.coeffs);
        let norm = self.norm();
        let factor = |k: [i32; 3]| -> Complex64 {
            let mut z = Complex64::new(1.0, 0.0);
            for c in 0..2 {
                for _ in 0..deriv[c] {
                    z *= Complex64::new(0.0, TAU * k[c] as f64);
                }
            }
            let arg = TAU * (k[0] as f64 * shift[0] + k[1] as f64 * shift[1]);
            z * Complex64::from_polar(1.0, arg)
        };
        let rows = if t.dim == 1 { 1 } else { n };
        let mut a = vec![Complex64::new(0.0, 0.0); rows * n];
        let idx = |k: [i32; 3]| -> usize {
            let i0 = k[0].rem_euclid(n as i32) as usize;
            let i1 = if t.dim == 1 {
                0
            } else {
                k[1].rem_euclid(n as i32) as usize
            };
            i1 * n + i0
        };
        if deriv == [0, 0] {
            a[0] += c0;
        }
        for (k, c) in t.half.iter().zip(&ck) {
            let v = c * factor(*k);
            a[idx(*k)] += v;
            let km = [-k[0], -k[1], -k[2]];
            a[idx(km)] += v.conj();
        }
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_inverse(n);
        a.par_chunks_mut(n).for_each(|row| fft.process(row));
        if rows > 1 {
            let mut tr = transpose(&a, n);
            tr.par_chunks_mut(n).for_each(|col| fft.process(col));
            a = transpose(&tr, n);
        }
        Ok(a.into_iter().map(|z| z.re * norm).collect())
    }

    /// Values on the tensor grid `X + (xs_i, ys_j)/λ` of a 2-torus, computed
    /// separably: `O(K·n + n²·k_max)` instead of `O(K·n²)`. Row-major in `ys`.
    pub fn torus_patch(&self, base: Point, xs: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
        let t = self
            .basis
            .torus_modes()
            .ok_or_else(|| RrwError::Domain("tensor patches need a torus basis".into()))?;
        if t.dim != 2 {
            return Err(RrwError::Domain("tensor patches need d = 2".into()));
        }
        let lam = self.lambda();
        let mk = t.max_k as usize;
        let width = 2 * mk + 1;
        let (c0, ck) = t.fourier(&self.coeffs);
        // e^{2πi k y_j} for k in -mk..=mk.
        let table = |coords: &[f64], base: f64| -> Vec<Vec<Complex64>> {
            coords
                .iter()
                .map(|v| {
                    let y = base + v / lam;
                    (0..width)
                        .map(|i| Complex64::from_polar(1.0, TAU * (i as f64 - mk as f64) * y))
                        .collect()
                })
                .collect()
        };
        let ex = table(xs, base[0]);
        let ey = table(ys, base[1]);
        // g[k0][j] = Σ_{k1} c_{k0,k1} e^{2πi k1 y_j}, over the full lattice.
        let mut g = vec![Complex64::new(0.0, 0.0); width * ys.len()];
        let mut add = |k0: i32, k1: i32, c: Complex64| {
            let row = (k0 + mk as i32) as usize;
            let col = (k1 + mk as i32) as usize;
            for (j, e) in ey.iter().enumerate() {
                g[row * ys.len() + j] += c * e[col];
            }
        };
        add(0, 0, Complex64::new(c0, 0.0));
        for (k, c) in t.half.iter().zip(&ck) {
            add(k[0], k[1], *c);
            add(-k[0], -k[1], c.conj());
        }
        let norm = self.norm();
        let mut out = vec![0.0; xs.len() * ys.len()];
        out.par_chunks_mut(xs.len())
            .enumerate()
            .for_each(|(j, row)| {
                for (i, v) in row.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k0 in 0..width {
                        acc += ex[i][k0] * g[k0 * ys.len() + j];
                    }
                    *v = acc.re * norm;
                }
            });
        Ok(out)
    }

    /// Values of the rescaled field `g^x_λ` on the tensor grid `(xs_i, ys_j)`
    /// around `base`, row-major in `ys`. Uses the separable torus path when available.
    pub fn chart_patch(&self, base: Point, xs: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
        if matches!(self.basis.manifold, ManifoldSpec::Torus { dim: 2 }) {
            return self.torus_patch(base, xs, ys);
        }
        let view = self.rescaled(base);
        let mut out = vec![0.0; xs.len() * ys.len()];
        out.par_chunks_mut(xs.len())
            .enumerate()
            .try_for_each(|(j, row)| {
                for (i, v) in row.iter_mut().enumerate() {
                    *v = view.eval_unguarded(&[xs[i], ys[j]])?;
                }
                Ok::<(), RrwError>(())
            })?;
        Ok(out)
    }
}

fn transpose(a: &[Complex64], n: usize) -> Vec<Complex64> {
    let rows = a.len() / n;
    let mut t = vec![Complex64::new(0.0, 0.0); a.len()];
    for r in 0..rows {
        for c in 0..n {
            t[c * rows + r] = a[r * n + c];
        }
    }
    t
}

/// `v ↦ f_λ(Φ_x(v/λ))` at a fixed base point.
#[derive(Clone, Debug)]
pub struct RescaledFieldView<'a> {
    pub sample: &'a WaveSample,
    pub chart: ChartMap,
}

impl RescaledFieldView<'_> {
    /// `min(10 δ √d, 0.4 λ)` with `δ = σ_d^{-1/d}`, further capped by the chart's
    /// injectivity guard.
    pub fn domain_radius(&self) -> f64 {
        let d = self.sample.basis.dim();
        let lam = self.sample.lambda();
        let delta = ball_radius(d);
        (10.0 * delta * (d as f64).sqrt())
            .min(0.4 * lam)
            .min(lam * self.chart.manifold.chart_guard())
    }

    pub fn eval(&self, v: &[f64]) -> Result<f64> {
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        let guard = self.domain_radius();
        if norm > guard {
            return Err(RrwError::ChartGuard { norm, guard });
        }
        self.eval_unguarded(v)
    }

    fn eval_unguarded(&self, v: &[f64]) -> Result<f64> {
        let lam = self.sample.lambda();
        let w: Vec<f64> = v.iter().map(|c| c / lam).collect();
        let p = self.chart.exp_map(&w)?;
        Ok(self.sample.eval_field(&p))
    }

    /// Gradient of `g^x_λ` at the chart origin: `∇f_λ(x)/λ` in the chart frame.
    pub fn gradient_at_origin(&self) -> Result<[f64; 3]> {
        let g = self
            .sample
            .eval_field_gradient(&self.chart.base, &self.chart)?;
        Ok(g.map(|c| c / self.sample.lambda()))
    }
}

/// Radius `δ = σ_d^{-1/d}` of the unit-volume ball `B`.
pub fn ball_radius(d: usize) -> f64 {
    unit_ball_volume(d).powf(-1.0 / d as f64)
}

/// Random-phase spectral realization `g(v) = √(2/m) Σ_j cos(⟨ξ_j, v⟩ + θ_j)` of a
/// limit field. Frequencies are uniform on the unit ball (large band) or unit
/// sphere (monochromatic), so the covariance tends to `B_d` or `S_d` as `m → ∞`.
#[derive(Clone, Debug)]
pub struct LimitFieldSample {
    pub spec: KernelSpec,
    /// `m × d`, row-major.
    pub freqs: Vec<f64>,
    pub phases: Vec<f64>,
    pub seed: u64,
}

pub const DEFAULT_LIMIT_MODES: usize = 256;

pub fn sample_limit_field(spec: KernelSpec, m: usize, seed: u64) -> Result<LimitFieldSample> {
    let mut rng = substream(seed, &[tag("limit-field")]);
    sample_limit_field_with(spec, m, seed, &mut rng)
}

pub fn sample_limit_field_with<R: rand::Rng + ?Sized>(
    spec: KernelSpec,
    m: usize,
    seed: u64,
    rng: &mut R,
) -> Result<LimitFieldSample> {
    if m == 0 {
        return Err(RrwError::Domain("limit field needs m >= 1".into()));
    }
    let d = spec.dim();
    let mut freqs = Vec::with_capacity(m * d);
    let mut phases = Vec::with_capacity(m);
    for _ in 0..m {
        let dir = loop {
            let z = normals(rng, d);
            let n = z.iter().map(|c| c * c).sum::<f64>().sqrt();
            if n > 1e-300 {
                break z.into_iter().map(|c| c / n).collect::<Vec<_>>();
            }
        };
        let radius = match spec.regime() {
            Regime::LargeBand => uniform(rng).powf(1.0 / d as f64),
            Regime::Monochromatic => 1.0,
        };
        freqs.extend(dir.iter().map(|c| c * radius));
        phases.push(TAU * uniform(rng));
    }
    Ok(LimitFieldSample {
        spec,
        freqs,
        phases,
        seed,
    })
}

impl LimitFieldSample {
    pub fn modes(&self) -> usize {
        self.phases.len()
    }

    fn arg(&self, j: usize, v: &[f64]) -> f64 {
        let d = self.spec.dim();
        let xi = &self.freqs[j * d..(j + 1) * d];
        xi.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() + self.phases[j]
    }

    pub fn eval(&self, v: &[f64]) -> f64 {
        let amp = (2.0 / self.modes() as f64).sqrt();
        amp * (0..self.modes()).map(|j| self.arg(j, v).cos()).sum::<f64>()
    }

    pub fn gradient(&self, v: &[f64]) -> Vec<f64> {
        let d = self.spec.dim();
        let amp = (2.0 / self.modes() as f64).sqrt();
        let mut g = vec![0.0; d];
        for j in 0..self.modes() {
            let s = -amp * self.arg(j, v).sin();
            for (c, gc) in g.iter_mut().enumerate() {
                *gc += s * self.freqs[j * d + c];
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::enumerate_spectrum;
    use approx::assert_abs_diff_eq;

    fn torus2(n: f64) -> Arc<SpectralBasis> {
        Arc::new(
            enumerate_spectrum(ManifoldSpec::torus(2).unwrap(), TAU * n, Regime::LargeBand)
                .unwrap(),
        )
    }

    #[test]
    fn zero_and_single_coefficients() {
        let b = torus2(3.0);
        let k = b.count();
        let zero = WaveSample::from_coeffs(b.clone(), vec![0.0; k]).unwrap();
        assert_eq!(zero.eval_field(&[0.3, 0.7, 0.0]), 0.0);
        let mut c = vec![0.0; k];
        c[1] = 1.0;
        let one = WaveSample::from_coeffs(b.clone(), c).unwrap();
        let kv = b.torus_modes().unwrap().half[0];
        let x = [0.31, 0.77, 0.0];
        let expect = 2f64.sqrt() * (TAU * (kv[0] as f64 * x[0] + kv[1] as f64 * x[1])).cos()
            / (k as f64).sqrt();
        assert_abs_diff_eq!(one.eval_field(&x), expect, epsilon = 1e-13);
        assert!(WaveSample::from_coeffs(b, vec![0.0; k + 1]).is_err());
    }

    #[test]
    fn same_seed_same_draw() {
        let b = torus2(5.0);
        let a = sample_wave(b.clone(), 11);
        let c = sample_wave(b, 11);
        assert_eq!(a.coeffs, c.coeffs);
    }

    #[test]
    fn coefficient_prefix_is_shared_across_lambda() {
        let small = sample_wave(torus2(5.0), 3);
        let large = sample_wave(torus2(9.0), 3);
        assert_eq!(small.coeffs[..], large.coeffs[..small.coeffs.len()]);
    }

    #[test]
    fn fft_grid_matches_pointwise() {
        let w = sample_wave(torus2(6.0), 4);
        let n = 32;
        let shift = [0.013, 0.021];
        let grid = w.torus_grid(n, shift, [0, 0]).unwrap();
        let dx = w.torus_grid(n, shift, [1, 0]).unwrap();
        let chart = chart_at(w.basis.manifold, [0.0; 3]);
        for &(i, j) in &[(0, 0), (5, 17), (31, 2)] {
            let x = [
                i as f64 / n as f64 + shift[0],
                j as f64 / n as f64 + shift[1],
                0.0,
            ];
            assert_abs_diff_eq!(grid[j * n + i], w.eval_field(&x), epsilon = 1e-11);
            let g = w.eval_field_gradient(&x, &chart).unwrap();
            assert_abs_diff_eq!(dx[j * n + i], g[0], epsilon = 1e-9);
        }
        assert!(w.torus_grid(8, shift, [0, 0]).is_err());
    }

    #[test]
    fn tensor_patch_matches_pointwise() {
        let w = sample_wave(torus2(7.0), 9);
        let base = [0.91, 0.12, 0.0];
        let xs = [-1.0, 0.0, 0.5, 2.0];
        let ys = [-0.3, 1.7, 3.0];
        let p = w.torus_patch(base, &xs, &ys).unwrap();
        let view = w.rescaled(base);
        for (j, y) in ys.iter().enumerate() {
            for (i, x) in xs.iter().enumerate() {
                assert_abs_diff_eq!(
                    p[j * xs.len() + i],
                    view.eval(&[*x, *y]).unwrap(),
                    epsilon = 1e-11
                );
            }
        }
    }

    #[test]
    fn rescaled_view_contract() {
        let w = sample_wave(torus2(10.0), 1);
        let base = [0.4, 0.9, 0.0];
        let view = w.rescaled(base);
        assert_eq!(view.eval(&[0.0, 0.0]).unwrap(), w.eval_field(&base));
        let v = [1.3, -2.2];
        let lam = w.lambda();
        let p = [
            (base[0] + v[0] / lam).rem_euclid(1.0),
            (base[1] + v[1] / lam).rem_euclid(1.0),
            0.0,
        ];
        assert_abs_diff_eq!(view.eval(&v).unwrap(), w.eval_field(&p), epsilon = 1e-12);
        assert!(view.eval(&[100.0, 0.0]).is_err());
    }

    #[test]
    fn limit_field_basics() {
        let spec = KernelSpec::large_band(3).unwrap();
        let s = sample_limit_field(spec, 16, 5).unwrap();
        assert_eq!(s.freqs.len(), 48);
        for j in 0..16 {
            let n: f64 = s.freqs[3 * j..3 * j + 3]
                .iter()
                .map(|c| c * c)
                .sum::<f64>()
                .sqrt();
            assert!(n <= 1.0);
        }
        let mono = sample_limit_field(KernelSpec::monochromatic(2).unwrap(), 8, 5).unwrap();
        for j in 0..8 {
            let n = mono.freqs[2 * j].hypot(mono.freqs[2 * j + 1]);
            assert_abs_diff_eq!(n, 1.0, epsilon = 1e-14);
        }
        assert!(sample_limit_field(spec, 0, 1).is_err());
        // gradient vs central difference
        let v = [0.3, -1.2, 2.0];
        let g = s.gradient(&v);
        let h = 1e-6;
        for c in 0..3 {
            let mut a = v;
            let mut b = v;
            a[c] += h;
            b[c] -= h;
            assert_abs_diff_eq!(g[c], (s.eval(&a) - s.eval(&b)) / (2.0 * h), epsilon = 1e-6);
        }
    }
}
