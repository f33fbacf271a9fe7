//! Flat unit torus `R^d / Z^d`, `d = 1, 2, 3`.
//!
//! Real orthonormal eigenbasis: the constant mode, then for every lattice
//! vector `k` in the half-lattice (first nonzero coordinate positive) the pair
//! `√2 cos(2π k·x)`, `√2 sin(2π k·x)`, both with frequency `2π‖k‖`.

use super::Point;
use num_complex::Complex64;
use std::f64::consts::{SQRT_2, TAU};

#[derive(Clone, Debug)]
pub struct TorusModes {
    pub dim: usize,
    /// Half-lattice vectors, unused coordinates zero.
    pub half: Vec<[i32; 3]>,
    /// Largest `|k_c|` over all stored vectors.
    pub max_k: i32,
}

/// Closed-ball lattice enumeration `‖k‖ ≤ radius`; boundary ties included.
pub fn half_lattice(dim: usize, radius: f64) -> Vec<[i32; 3]> {
    // Relative slack keeps shells on the boundary when `λ/2π` rounds down.
    let r2 = radius * radius * (1.0 + 1e-12);
    let r = r2.sqrt().floor() as i32;
    let mut out = Vec::new();
    let range = |active: bool| if active { -r..=r } else { 0..=0 };
    for k0 in range(true) {
        for k1 in range(dim >= 2) {
            for k2 in range(dim >= 3) {
                let k = [k0, k1, k2];
                let n2 = (k0 * k0 + k1 * k1 + k2 * k2) as f64;
                if n2 == 0.0 || n2 > r2 {
                    continue;
                }
                let first = k.iter().copied().find(|&c| c != 0).unwrap();
                if first > 0 {
                    out.push(k);
                }
            }
        }
    }
    // Sort by frequency so that prefixes of the basis are nested.
    out.sort_by_key(|k| (k[0] * k[0] + k[1] * k[1] + k[2] * k[2], *k));
    out
}

impl TorusModes {
    pub fn new(dim: usize, radius: f64) -> Self {
        let half = half_lattice(dim, radius);
        let max_k = half
            .iter()
            .flat_map(|k| k.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0);
        Self { dim, half, max_k }
    }

    pub fn count(&self) -> usize {
        1 + 2 * self.half.len()
    }

    pub fn frequency(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let k = self.half[(n - 1) / 2];
        TAU * ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt()
    }

    /// Per-coordinate tables `e^{2πi j x_c}` for `j = 0..=max_k`.
    fn phase_tables(&self, x: &Point) -> [Vec<Complex64>; 3] {
        let mk = self.max_k as usize;
        let table = |xc: f64| -> Vec<Complex64> {
            (0..=mk)
                .map(|j| {
                    let (s, c) = (TAU * j as f64 * xc).sin_cos();
                    Complex64::new(c, s)
                })
                .collect()
        };
        [
            table(x[0]),
            if self.dim >= 2 {
                table(x[1])
            } else {
                vec![Complex64::new(1.0, 0.0); mk + 1]
            },
            if self.dim >= 3 {
                table(x[2])
            } else {
                vec![Complex64::new(1.0, 0.0); mk + 1]
            },
        ]
    }

    /// `e^{2πi k·x}` for every half-lattice vector.
    pub fn phases(&self, x: &Point) -> Vec<Complex64> {
        let t = self.phase_tables(x);
        self.half
            .iter()
            .map(|k| {
                let mut z = Complex64::new(1.0, 0.0);
                for c in 0..3 {
                    let e = t[c][k[c].unsigned_abs() as usize];
                    z *= if k[c] < 0 { e.conj() } else { e };
                }
                z
            })
            .collect()
    }

    pub fn eval_mode(&self, n: usize, x: &Point) -> f64 {
        if n == 0 {
            return 1.0;
        }
        let k = self.half[(n - 1) / 2];
        let arg = TAU * (k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2]);
        if n % 2 == 1 {
            SQRT_2 * arg.cos()
        } else {
            SQRT_2 * arg.sin()
        }
    }

    pub fn eval_mode_gradient(&self, n: usize, x: &Point) -> [f64; 3] {
        if n == 0 {
            return [0.0; 3];
        }
        let k = self.half[(n - 1) / 2];
        let arg = TAU * (k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2]);
        let amp = if n % 2 == 1 {
            -SQRT_2 * arg.sin()
        } else {
            SQRT_2 * arg.cos()
        };
        let mut g = [0.0; 3];
        for c in 0..self.dim {
            g[c] = amp * TAU * k[c] as f64;
        }
        g
    }

    /// `Σ_n a_n φ_n(x)` without the `1/√K` normalization.
    pub fn combine(&self, coeffs: &[f64], x: &Point) -> f64 {
        let ph = self.phases(x);
        let mut acc = coeffs[0];
        for (j, z) in ph.iter().enumerate() {
            acc += SQRT_2 * (coeffs[1 + 2 * j] * z.re + coeffs[2 + 2 * j] * z.im);
        }
        acc
    }

    /// Gradient of `Σ_n a_n φ_n` in the canonical frame.
    pub fn combine_gradient(&self, coeffs: &[f64], x: &Point) -> [f64; 3] {
        let ph = self.phases(x);
        let mut g = [0.0; 3];
        for (j, z) in ph.iter().enumerate() {
            let k = self.half[j];
            // d/dx of (a cos + b sin)(2πk·x) = 2πk (-a sin + b cos)
            let amp = SQRT_2 * (-coeffs[1 + 2 * j] * z.im + coeffs[2 + 2 * j] * z.re);
            for c in 0..self.dim {
                g[c] += amp * TAU * k[c] as f64;
            }
        }
        g
    }

    /// Complex Fourier coefficients `c_k` with `Σ_n a_n φ_n = Σ_k c_k e^{2πi k·x}`,
    /// listed for `k` in the half-lattice (the conjugate sits at `-k`), plus `c_0`.
    pub fn fourier(&self, coeffs: &[f64]) -> (f64, Vec<Complex64>) {
        let c = self
            .half
            .iter()
            .enumerate()
            .map(|(j, _)| Complex64::new(coeffs[1 + 2 * j], -coeffs[2 + 2 * j]) / SQRT_2)
            .collect();
        (coeffs[0], c)
    }

    /// Unnormalized projector kernel `K_λ(x, y) = Σ_n φ_n(x) φ_n(y)`.
    pub fn projector(&self, x: &Point, y: &Point) -> f64 {
        let mut diff = [0.0; 3];
        for c in 0..3 {
            diff[c] = x[c] - y[c];
        }
        let ph = self.phases(&diff);
        1.0 + 2.0 * ph.iter().map(|z| z.re).sum::<f64>()
    }
}

/// Distance on the unit torus: minimum over integer shifts.
pub fn distance(dim: usize, x: &Point, y: &Point) -> f64 {
    let mut s = 0.0;
    for c in 0..dim {
        let mut d = (x[c] - y[c]).rem_euclid(1.0);
        if d > 0.5 {
            d = 1.0 - d;
        }
        s += d * d;
    }
    s.sqrt()
}

pub fn wrap(x: f64) -> f64 {
    let w = x.rem_euclid(1.0);
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}
