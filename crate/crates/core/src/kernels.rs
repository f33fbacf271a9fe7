//! Universal limit kernels of the rescaled random waves.
//!
//! `B_d` is the Fourier transform of the normalized uniform measure on the unit
//! ball of `R^d` and is the covariance of the large-band limit field; `S_d` is
//! the same transform for the unit sphere and is the covariance of the
//! monochromatic limit field. Both are normalized Bessel functions:
//! `B_d = Λ_{d/2}` and `S_d = Λ_{d/2-1}` with `Λ_ν(r) = Γ(ν+1)(2/r)^ν J_ν(r)`.

use crate::error::{Result, RrwError};
use crate::special::{gamma, normalized_bessel};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub use crate::special::unit_ball_volume;

/// Largest dimension supported by the kernel evaluators.
pub const MAX_KERNEL_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// All frequencies up to `λ`.
    #[serde(alias = "lb")]
    LargeBand,
    /// A thin band (here: one eigenspace) around `λ`.
    #[serde(alias = "mono")]
    Monochromatic,
}

impl std::str::FromStr for Regime {
    type Err = RrwError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "largeband" | "large-band" | "lb" => Ok(Regime::LargeBand),
            "mono" | "monochromatic" => Ok(Regime::Monochromatic),
            other => Err(RrwError::Config(format!("unknown regime `{other}`"))),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::LargeBand => "largeband",
            Regime::Monochromatic => "mono",
        })
    }
}

/// Dimension and regime of a limit field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    dim: usize,
    regime: Regime,
}

impl KernelSpec {
    pub fn new(dim: usize, regime: Regime) -> Result<Self> {
        if dim == 0 || dim > MAX_KERNEL_DIM {
            return Err(RrwError::InvalidSpec(format!(
                "dimension {dim} outside 1..={MAX_KERNEL_DIM}"
            )));
        }
        if regime == Regime::Monochromatic && dim < 2 {
            return Err(RrwError::InvalidSpec(
                "the monochromatic regime needs d >= 2".into(),
            ));
        }
        Ok(Self { dim, regime })
    }

    pub fn large_band(dim: usize) -> Result<Self> {
        Self::new(dim, Regime::LargeBand)
    }

    pub fn monochromatic(dim: usize) -> Result<Self> {
        Self::new(dim, Regime::Monochromatic)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// Order `ν` of the normalized Bessel function giving this kernel.
    fn order(&self) -> f64 {
        match self.regime {
            Regime::LargeBand => self.dim as f64 / 2.0,
            Regime::Monochromatic => self.dim as f64 / 2.0 - 1.0,
        }
    }

    /// The limit covariance `B_d(r)` or `S_d(r)`.
    pub fn eval(&self, r: f64) -> f64 {
        match self.regime {
            Regime::LargeBand => eval_b_unchecked(self.dim, r),
            Regime::Monochromatic => normalized_bessel(self.order(), r),
        }
    }
}

fn eval_b_unchecked(d: usize, r: f64) -> f64 {
    let r = r.abs();
    match d {
        1 if r >= 1e-4 => r.sin() / r,
        1 => 1.0 - r * r / 6.0 + r.powi(4) / 120.0,
        _ => normalized_bessel(d as f64 / 2.0, r),
    }
}

/// `B_d(r)`, the large-band limit kernel. Total on `r ≥ 0`, equal to 1 at 0.
pub fn eval_b(d: usize, r: f64) -> Result<f64> {
    KernelSpec::large_band(d).map(|s| s.eval(r))
}

/// `S_d(r)`, the monochromatic limit kernel; `S_2 = J_0`, `S_3 = sin r / r`.
pub fn eval_s(d: usize, r: f64) -> Result<f64> {
    KernelSpec::monochromatic(d).map(|s| s.eval(r))
}

/// `-K''(0)` for the limit kernel: `1/(d+2)` (large band) or `1/d` (monochromatic).
///
/// This is the variance of each partial derivative of the unit-variance limit field.
pub fn kernel_second_derivative_at_zero(spec: KernelSpec) -> f64 {
    let d = spec.dim as f64;
    match spec.regime {
        Regime::LargeBand => 1.0 / (d + 2.0),
        Regime::Monochromatic => 1.0 / d,
    }
}

/// Smallest radius accepted by [`kernel_asymptotic`].
pub const ASYMPTOTIC_MIN_R: f64 = 10.0;

/// Leading oscillatory term of the kernel at infinity,
/// `C r^{-(ν+1/2)} cos(r - νπ/2 - π/4)` with `C = Γ(ν+1) 2^ν √(2/π)` taken from
/// the first term of the Hankel expansion of `J_ν`.
pub fn kernel_asymptotic(spec: KernelSpec, r: f64) -> Result<f64> {
    if !(r >= ASYMPTOTIC_MIN_R) {
        return Err(RrwError::Domain(format!(
            "asymptotic form needs r >= {ASYMPTOTIC_MIN_R}, got {r}"
        )));
    }
    let nu = spec.order();
    let c = gamma(nu + 1.0) * 2f64.powf(nu) * (2.0 / PI).sqrt();
    Ok(c * r.powf(-(nu + 0.5)) * (r - nu * PI / 2.0 - PI / 4.0).cos())
}

/// Expected nodal volume of the limit field in a unit-volume ball:
/// `(1/√π) (d+2)^{-1/2} Γ((d+1)/2) / Γ(d/2)` (large band), with `d` in place of
/// `d + 2` for the monochromatic field.
pub fn kac_rice_constant(spec: KernelSpec) -> f64 {
    let d = spec.dim as f64;
    let denom = match spec.regime {
        Regime::LargeBand => d + 2.0,
        Regime::Monochromatic => d,
    };
    gamma((d + 1.0) / 2.0) / gamma(d / 2.0) / (PI * denom).sqrt()
}

/// `E‖∇g_∞‖` for the unit-variance limit field, whose gradient has iid
/// `N(0, -K''(0))` components: `√(2 s) Γ((d+1)/2) / Γ(d/2)` with `s = -K''(0)`.
pub fn expected_gradient_norm(spec: KernelSpec) -> f64 {
    let d = spec.dim as f64;
    let s = kernel_second_derivative_at_zero(spec);
    (2.0 * s).sqrt() * gamma((d + 1.0) / 2.0) / gamma(d / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ball_volumes() {
        assert_abs_diff_eq!(unit_ball_volume(1), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(unit_ball_volume(2), PI, epsilon = 1e-14);
        // Γ(5/2) = 3√π/4 from libm's independent tgamma.
        let oracle = PI.powf(1.5) / libm::tgamma(2.5);
        assert_abs_diff_eq!(unit_ball_volume(3), oracle, epsilon = 1e-13);
        assert_abs_diff_eq!(unit_ball_volume(3), 4.0 * PI / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn kernels_at_zero_and_closed_forms() {
        for d in 1..=MAX_KERNEL_DIM {
            assert_eq!(eval_b(d, 0.0).unwrap(), 1.0);
        }
        for d in 2..=MAX_KERNEL_DIM {
            assert_eq!(eval_s(d, 0.0).unwrap(), 1.0);
        }
        assert_abs_diff_eq!(eval_b(1, PI).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eval_b(3, PI).unwrap(), 3.0 / (PI * PI), epsilon = 1e-13);
        assert_abs_diff_eq!(eval_s(3, PI / 2.0).unwrap(), 2.0 / PI, epsilon = 1e-13);
        assert_abs_diff_eq!(
            eval_s(2, 2.404_825_557_695_773).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        for &r in &[0.5f64, 3.0, 12.0, 17.0, 40.0] {
            let d3 = 3.0 * (r.sin() - r * r.cos()) / r.powi(3);
            assert_abs_diff_eq!(eval_b(3, r).unwrap(), d3, epsilon = 1e-12);
        }
    }

    #[test]
    fn monochromatic_rejects_dimension_one() {
        assert!(eval_s(1, 1.0).is_err());
        assert!(KernelSpec::monochromatic(1).is_err());
        assert!(KernelSpec::large_band(0).is_err());
    }

    #[test]
    fn sphere_kernel_is_shifted_ball_kernel() {
        for d in 3..=5 {
            for k in 0..100 {
                let r = 0.37 * k as f64;
                let s = eval_s(d, r).unwrap();
                let b = eval_b(d - 2, r).unwrap();
                assert!((s - b).abs() <= 1e-12, "d={d} r={r}");
            }
        }
    }

    #[test]
    fn second_derivative_values() {
        let lb2 = KernelSpec::large_band(2).unwrap();
        let mono2 = KernelSpec::monochromatic(2).unwrap();
        assert_eq!(kernel_second_derivative_at_zero(lb2), 0.25);
        assert_eq!(kernel_second_derivative_at_zero(mono2), 0.5);
        // Finite-difference oracle on B_3 at the origin.
        let spec = KernelSpec::large_band(3).unwrap();
        for h in [1e-3, 1e-4, 1e-5] {
            let fd = -(2.0 * eval_b(3, h).unwrap() - 2.0) / (h * h);
            assert!((fd - 0.2).abs() < 1e-5, "h={h} fd={fd}");
        }
        assert_abs_diff_eq!(kernel_second_derivative_at_zero(spec), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn asymptotic_form() {
        let lb1 = KernelSpec::large_band(1).unwrap();
        for &r in &[10.0, 13.3, 50.0] {
            assert_abs_diff_eq!(
                kernel_asymptotic(lb1, r).unwrap(),
                r.sin() / r,
                epsilon = 1e-15
            );
        }
        let lb2 = KernelSpec::large_band(2).unwrap();
        for &r in &[10.0f64, 20.0, 40.0] {
            let err = (kernel_asymptotic(lb2, r).unwrap() - eval_b(2, r).unwrap()).abs();
            assert!(err <= 5.0 * r.powf(-2.5), "r={r} err={err}");
        }
        let m2 = KernelSpec::monochromatic(2).unwrap();
        let err = (kernel_asymptotic(m2, 50.0).unwrap() - eval_s(2, 50.0).unwrap()).abs();
        assert!(err < 1e-3);
        assert!(kernel_asymptotic(lb2, 9.99).is_err());
    }

    #[test]
    fn kac_rice_values() {
        let c1 = kac_rice_constant(KernelSpec::large_band(1).unwrap());
        assert_abs_diff_eq!(c1, 1.0 / (PI * 3f64.sqrt()), epsilon = 1e-14);
        assert_abs_diff_eq!(c1, 0.183_776_2, epsilon = 1e-7);
        assert_abs_diff_eq!(
            kac_rice_constant(KernelSpec::large_band(2).unwrap()),
            0.25,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            kac_rice_constant(KernelSpec::monochromatic(2).unwrap()),
            1.0 / (2.0 * 2f64.sqrt()),
            epsilon = 1e-14
        );
    }

    #[test]
    fn kac_rice_equals_gradient_norm_over_sqrt_2pi() {
        for d in 1..=6 {
            for regime in [Regime::LargeBand, Regime::Monochromatic] {
                let Ok(spec) = KernelSpec::new(d, regime) else {
                    continue;
                };
                let lhs = kac_rice_constant(spec);
                let rhs = expected_gradient_norm(spec) / (2.0 * PI).sqrt();
                assert!((lhs - rhs).abs() < 1e-12, "{spec:?}");
            }
        }
        let d2 = expected_gradient_norm(KernelSpec::large_band(2).unwrap());
        assert_abs_diff_eq!(d2, 0.5f64.sqrt() * PI.sqrt() / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn kernels_bounded_by_one() {
        for d in 1..=6 {
            for k in 0..2000 {
                let r = 0.025 * k as f64;
                assert!(eval_b(d, r).unwrap().abs() <= 1.0 + 1e-15);
                if d >= 2 {
                    assert!(eval_s(d, r).unwrap().abs() <= 1.0 + 1e-15);
                }
            }
        }
    }

    #[test]
    fn envelope_of_b2_decays() {
        // Maxima of |B_2| over successive periods of length 2π on [5, 100].
        let period = 2.0 * PI;
        let mut prev = f64::INFINITY;
        let mut start = 5.0;
        while start + period <= 100.0 {
            let mut m: f64 = 0.0;
            for i in 0..=400 {
                let r = start + period * i as f64 / 400.0;
                m = m.max(eval_b(2, r).unwrap().abs());
            }
            assert!(m <= prev + 1e-12, "envelope grew at r={start}");
            prev = m;
            start += period;
        }
    }
}
