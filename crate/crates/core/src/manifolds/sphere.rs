//! Round 2-sphere of radius `R = (4π)^{-1/2}` (unit area).
//!
//! Real spherical harmonics normalized in `L²` of the uniform probability
//! measure: `Y_l0 = P̃_l^0(cos θ)`, `Y_lm = √2 P̃_l^m(cos θ) cos(mφ)` and
//! `Y_l,-m = √2 P̃_l^m(cos θ) sin(mφ)` with
//! `P̃_l^m = √((2l+1)(l-m)!/(l+m)!) P_l^m`. The Laplace eigenvalue of degree
//! `l` is `l(l+1)/R² = 4π l(l+1)`.

use super::Point;
use crate::error::{Result, RrwError};
use std::f64::consts::{PI, SQRT_2};

pub fn radius() -> f64 {
    1.0 / (4.0 * PI).sqrt()
}

pub fn degree_frequency(l: usize) -> f64 {
    (4.0 * PI * (l * (l + 1)) as f64).sqrt()
}

#[derive(Clone, Debug)]
pub struct SphereModes {
    /// Included degrees, increasing.
    pub degrees: Vec<usize>,
    offsets: Vec<usize>,
    included: Vec<bool>,
    lmax: usize,
}

/// Polar coordinates of a point: `(cos θ, sin θ, φ)`.
fn polar(x: &Point) -> (f64, f64, f64) {
    let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let (ux, uy, uz) = (x[0] / n, x[1] / n, x[2] / n);
    let s = (ux * ux + uy * uy).sqrt();
    (uz.clamp(-1.0, 1.0), s, uy.atan2(ux))
}

impl SphereModes {
    pub fn new(degrees: Vec<usize>) -> Self {
        let lmax = *degrees.iter().max().unwrap_or(&0);
        let mut included = vec![false; lmax + 1];
        let mut offsets = Vec::with_capacity(degrees.len());
        let mut acc = 0;
        for &l in &degrees {
            included[l] = true;
            offsets.push(acc);
            acc += 2 * l + 1;
        }
        Self {
            degrees,
            offsets,
            included,
            lmax,
        }
    }

    pub fn count(&self) -> usize {
        self.degrees.iter().map(|l| 2 * l + 1).sum()
    }

    fn offset_of(&self, l: usize) -> usize {
        let i = self.degrees.binary_search(&l).expect("degree not in basis");
        self.offsets[i]
    }

    /// `(l, m)` of mode `n`; negative `m` stands for the sine harmonic.
    pub fn degree_order(&self, n: usize) -> (usize, i64) {
        let i = match self.offsets.binary_search(&n) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let l = self.degrees[i];
        (l, (n - self.offsets[i]) as i64 - l as i64)
    }

    pub fn frequency(&self, n: usize) -> f64 {
        degree_frequency(self.degree_order(n).0)
    }

    /// Runs the stable normalized associated-Legendre recurrence and calls
    /// `f(l, m, P̃_l^m, P̃_{l-1}^m)` for every included degree.
    fn sweep<F: FnMut(usize, usize, f64, f64)>(&self, x: f64, s: f64, mut f: F) {
        let mut pmm = 1.0;
        for m in 0..=self.lmax {
            if m > 0 {
                let mf = m as f64;
                pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
            }
            let mut p_prev = 0.0;
            let mut p = pmm;
            for l in m..=self.lmax {
                if l > m {
                    let lf = l as f64;
                    let mf = m as f64;
                    let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                    let b = (((lf - 1.0) * (lf - 1.0) - mf * mf)
                        / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                        .sqrt();
                    let next = a * (x * p - b * p_prev);
                    p_prev = p;
                    p = next;
                }
                if self.included[l] {
                    f(l, m, p, p_prev);
                }
            }
        }
    }

    /// All mode values at `x`.
    pub fn values(&self, x: &Point) -> Vec<f64> {
        let (c, s, phi) = polar(x);
        let mut out = vec![0.0; self.count()];
        self.sweep(c, s, |l, m, p, _| {
            let o = self.offset_of(l) + l;
            if m == 0 {
                out[o] = p;
            } else {
                let (sn, cs) = (m as f64 * phi).sin_cos();
                out[o + m] = SQRT_2 * p * cs;
                out[o - m] = SQRT_2 * p * sn;
            }
        });
        out
    }

    pub fn eval_mode(&self, n: usize, x: &Point) -> f64 {
        let (l, m) = self.degree_order(n);
        let (c, s, phi) = polar(x);
        let single = SphereModes::new(vec![l]);
        let mut val = 0.0;
        let ma = m.unsigned_abs() as usize;
        single.sweep(c, s, |_, mm, p, _| {
            if mm == ma {
                val = if m == 0 {
                    p
                } else if m > 0 {
                    SQRT_2 * p * (ma as f64 * phi).cos()
                } else {
                    SQRT_2 * p * (ma as f64 * phi).sin()
                };
            }
        });
        val
    }

    /// Gradients (as vectors in `R³`, tangent at `x`) of all modes, or of their
    /// combination with `coeffs` when given.
    fn gradients_ambient(&self, x: &Point, coeffs: Option<&[f64]>) -> Result<Vec<[f64; 3]>> {
        let (c, s, phi) = polar(x);
        if s < 1e-9 {
            return Err(RrwError::Pole);
        }
        let r = radius();
        let e_theta = [c * phi.cos(), c * phi.sin(), -s];
        let e_phi = [-phi.sin(), phi.cos(), 0.0];
        let n_out = if coeffs.is_some() { 1 } else { self.count() };
        let mut out = vec![[0.0; 3]; n_out];
        let mut push = |idx: usize, d_theta: f64, d_phi: f64| {
            let gt = d_theta / r;
            let gp = d_phi / (r * s);
            let v = [
                gt * e_theta[0] + gp * e_phi[0],
                gt * e_theta[1] + gp * e_phi[1],
                gt * e_theta[2] + gp * e_phi[2],
            ];
            match coeffs {
                Some(a) => {
                    for k in 0..3 {
                        out[0][k] += a[idx] * v[k];
                    }
                }
                None => out[idx] = v,
            }
        };
        self.sweep(c, s, |l, m, p, p_lm1| {
            let lf = l as f64;
            let mf = m as f64;
            let dp = (lf * c * p
                - ((2.0 * lf + 1.0) * (lf + mf) * (lf - mf) / (2.0 * lf - 1.0)).sqrt() * p_lm1)
                / s;
            let o = self.offset_of(l) + l;
            if m == 0 {
                push(o, dp, 0.0);
            } else {
                let (sn, cs) = (mf * phi).sin_cos();
                push(o + m, SQRT_2 * dp * cs, -SQRT_2 * mf * p * sn);
                push(o - m, SQRT_2 * dp * sn, SQRT_2 * mf * p * cs);
            }
        });
        Ok(out)
    }

    pub fn mode_gradient_ambient(&self, n: usize, x: &Point) -> Result<[f64; 3]> {
        Ok(self.gradients_ambient(x, None)?[n])
    }

    pub fn combine(&self, coeffs: &[f64], x: &Point) -> f64 {
        let (c, s, phi) = polar(x);
        let mut acc = 0.0;
        self.sweep(c, s, |l, m, p, _| {
            let o = self.offset_of(l) + l;
            if m == 0 {
                acc += coeffs[o] * p;
            } else {
                let (sn, cs) = (m as f64 * phi).sin_cos();
                acc += SQRT_2 * p * (coeffs[o + m] * cs + coeffs[o - m] * sn);
            }
        });
        acc
    }

    pub fn combine_gradient_ambient(&self, coeffs: &[f64], x: &Point) -> Result<[f64; 3]> {
        Ok(self.gradients_ambient(x, Some(coeffs))?[0])
    }

    pub fn projector(&self, x: &Point, y: &Point) -> f64 {
        let a = self.values(x);
        let b = self.values(y);
        a.iter().zip(&b).map(|(u, v)| u * v).sum()
    }
}

pub fn distance(x: &Point, y: &Point) -> f64 {
    let r = radius();
    let cross = [
        x[1] * y[2] - x[2] * y[1],
        x[2] * y[0] - x[0] * y[2],
        x[0] * y[1] - x[1] * y[0],
    ];
    let cn = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let dot = x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    r * cn.atan2(dot)
}

/// Orthonormal tangent frame at `x`: the image of `(e_x, e_y)` under the
/// rotation `I + [w]× + [w]×²/(1 + c)` taking the north pole to `x/R`.
pub fn frame(x: &Point) -> [[f64; 3]; 2] {
    let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let u = [x[0] / n, x[1] / n, x[2] / n];
    let c = u[2];
    if c < -1.0 + 1e-12 {
        // South pole: half-turn about the x axis.
        return [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0]];
    }
    // w = (0,0,1) × u
    let w = [-u[1], u[0], 0.0];
    let k = 1.0 / (1.0 + c);
    let rot = [
        [1.0 - k * w[1] * w[1], k * w[0] * w[1], w[1]],
        [k * w[0] * w[1], 1.0 - k * w[0] * w[0], -w[0]],
        [-w[1], w[0], 1.0 - k * (w[0] * w[0] + w[1] * w[1])],
    ];
    [
        [rot[0][0], rot[1][0], rot[2][0]],
        [rot[0][1], rot[1][1], rot[2][1]],
    ]
}
