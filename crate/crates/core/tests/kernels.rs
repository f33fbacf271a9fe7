use proptest::prelude::*;
use rrw_core::kernels::{
    eval_b, eval_s, expected_gradient_norm, kac_rice_constant, kernel_asymptotic, kernel_second_derivative_at_zero,
    unit_ball_volume, KernelSpec,
};
use rrw_core::special::gamma;
use std::f64::consts::{PI, SQRT_2};

/// Composite Simpson rule with `n` (even) intervals.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Fourier transform of the normalized uniform measure on the unit ball of
/// `R^d` at radius `r`, reduced to the polar angle against `x`.
fn ball_oracle(d: usize, r: f64) -> f64 {
    let w = |t: f64| t.sin().powi(d as i32);
    simpson(|t| (r * t.cos()).cos() * w(t), 0.0, PI, 20_000) / simpson(w, 0.0, PI, 20_000)
}

/// Same for the unit sphere `S^{d-1}`.
fn sphere_oracle(d: usize, r: f64) -> f64 {
    let w = |t: f64| t.sin().powi(d as i32 - 2);
    simpson(|t| (r * t.cos()).cos() * w(t), 0.0, PI, 20_000) / simpson(w, 0.0, PI, 20_000)
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[test]
fn ball_volumes() {
    assert!((unit_ball_volume(1) - 2.0).abs() < 1e-14);
    assert!((unit_ball_volume(2) - PI).abs() < 1e-14);
    // Γ(5/2) = 3√π/4 from the recurrence; independent of the crate's gamma.
    let gamma_5_2 = 0.75 * PI.sqrt();
    assert!((unit_ball_volume(3) - PI.powf(1.5) / gamma_5_2).abs() < 1e-12);
    assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-12);
}

#[test]
fn kernel_values_against_quadrature() {
    for d in 1..=6 {
        assert_eq!(eval_b(d, 0.0).unwrap(), 1.0);
    }
    assert!(eval_b(1, PI).unwrap().abs() < 1e-15);
    assert!((eval_b(3, PI).unwrap() - 3.0 / (PI * PI)).abs() < 1e-12);
    assert!((ball_oracle(3, PI) - 3.0 / (PI * PI)).abs() < 1e-9);
    assert_eq!(eval_s(2, 0.0).unwrap(), 1.0);
    assert!((eval_s(3, PI / 2.0).unwrap() - 2.0 / PI).abs() < 1e-12);
    assert!((sphere_oracle(3, PI / 2.0) - 2.0 / PI).abs() < 1e-9);
    // First zero of J_0, located on the circle-average oracle.
    let z = bisect(|r| sphere_oracle(2, r), 2.0, 3.0);
    assert!((z - 2.404825557695773).abs() < 1e-8);
    assert!(eval_s(2, z).unwrap().abs() < 1e-9);
    assert!(eval_s(1, 1.0).is_err());
}

#[test]
fn bessel_closed_forms_against_libm() {
    for i in 0..400 {
        let r = 0.05 + i as f64 * 0.2;
        assert!((eval_b(2, r).unwrap() - 2.0 * libm::j1(r) / r).abs() < 1e-10, "r = {r}");
        assert!((eval_s(2, r).unwrap() - libm::j0(r)).abs() < 1e-10, "r = {r}");
        let b3 = 3.0 * (r.sin() - r * r.cos()) / r.powi(3);
        assert!((eval_b(3, r).unwrap() - b3).abs() < 1e-10, "r = {r}");
    }
}

#[test]
fn ball_quadrature_oracle_up_to_dimension_six() {
    // Fixed pseudo-random radii in [0, 50].
    let mut state = 0x2545f4914f6cdd1du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for d in 1..=6 {
        for _ in 0..200 {
            let r = 50.0 * next();
            let err = (eval_b(d, r).unwrap() - ball_oracle(d, r)).abs();
            assert!(err <= 1e-8, "d = {d}, r = {r}, err = {err:e}");
        }
    }
    for d in 2..=3 {
        for _ in 0..200 {
            let r = 50.0 * next();
            let err = (eval_s(d, r).unwrap() - sphere_oracle(d, r)).abs();
            assert!(err <= 1e-8, "S d = {d}, r = {r}, err = {err:e}");
        }
    }
}

#[test]
fn second_derivatives_at_zero() {
    let lb2 = KernelSpec::large_band(2).unwrap();
    let mono2 = KernelSpec::monochromatic(2).unwrap();
    assert!((kernel_second_derivative_at_zero(lb2) - 0.25).abs() < 1e-15);
    assert!((kernel_second_derivative_at_zero(mono2) - 0.5).abs() < 1e-15);
    let lb3 = KernelSpec::large_band(3).unwrap();
    for h in [1e-3, 1e-4] {
        // -K''(0) = 2 (1 - K(h)) / h² + O(h²)
        let fd = 2.0 * (1.0 - eval_b(3, h).unwrap()) / (h * h);
        assert!((fd - kernel_second_derivative_at_zero(lb3)).abs() < 1e-5, "h = {h}: {fd}");
    }
    assert!((kernel_second_derivative_at_zero(lb3) - 0.2).abs() < 1e-15);
}

#[test]
fn asymptotic_forms() {
    let lb1 = KernelSpec::large_band(1).unwrap();
    let lb2 = KernelSpec::large_band(2).unwrap();
    let mono2 = KernelSpec::monochromatic(2).unwrap();
    for r in [10.0, 20.0, 40.0] {
        let err = (kernel_asymptotic(lb2, r).unwrap() - eval_b(2, r).unwrap()).abs();
        assert!(err <= 5.0 * r.powf(-2.5), "r = {r}: {err:e}");
        assert!((kernel_asymptotic(lb1, r).unwrap() - r.sin() / r).abs() < 1e-14);
    }
    assert!((kernel_asymptotic(mono2, 50.0).unwrap() - eval_s(2, 50.0).unwrap()).abs() < 1e-3);
    assert!(kernel_asymptotic(lb2, 9.99).is_err());
}

#[test]
fn kac_rice_constants() {
    let c1 = kac_rice_constant(KernelSpec::large_band(1).unwrap());
    assert!((c1 - 1.0 / (PI * 3f64.sqrt())).abs() < 1e-14);
    assert!((c1 - 0.1837762).abs() < 1e-7);
    assert!((kac_rice_constant(KernelSpec::large_band(2).unwrap()) - 0.25).abs() < 1e-14);
    assert!((kac_rice_constant(KernelSpec::monochromatic(2).unwrap()) - 1.0 / (2.0 * SQRT_2)).abs() < 1e-14);
}

#[test]
fn kac_rice_is_gradient_norm_over_root_two_pi() {
    for d in 1..=6 {
        let spec = KernelSpec::large_band(d).unwrap();
        let g = (2.0 / (d as f64 + 2.0)).sqrt() * libm::tgamma((d as f64 + 1.0) / 2.0) / libm::tgamma(d as f64 / 2.0);
        assert!((expected_gradient_norm(spec) - g).abs() < 1e-12);
        assert!((kac_rice_constant(spec) - g / (2.0 * PI).sqrt()).abs() < 1e-12);
    }
}

#[test]
fn gamma_at_half_integers() {
    for k in 1..20 {
        let x = k as f64 / 2.0;
        let rel = (gamma(x) - libm::tgamma(x)).abs() / libm::tgamma(x);
        assert!(rel < 1e-12, "x = {x}");
    }
}

#[test]
fn envelope_of_b2_decays() {
    let mut prev = f64::INFINITY;
    let mut start = 5.0;
    while start + 2.0 * PI <= 100.0 {
        let peak = (0..400)
            .map(|i| eval_b(2, start + 2.0 * PI * i as f64 / 400.0).unwrap().abs())
            .fold(0.0, f64::max);
        assert!(peak <= prev + 1e-12, "envelope grows at {start}");
        prev = peak;
        start += 2.0 * PI;
    }
}

proptest! {
    #[test]
    fn kernels_are_bounded_by_one(d in 1usize..=8, r in 0.0f64..200.0) {
        prop_assert!(eval_b(d, r).unwrap().abs() <= 1.0 + 1e-12);
        if d >= 2 {
            prop_assert!(eval_s(d, r).unwrap().abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn sphere_kernel_is_shifted_ball_kernel(d in 3usize..=5, r in 0.0f64..60.0) {
        prop_assert!((eval_s(d, r).unwrap() - eval_b(d - 2, r).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn kernels_are_continuous_at_zero(d in 1usize..=8, r in 0.0f64..1e-5) {
        prop_assert!((eval_b(d, r).unwrap() - 1.0).abs() <= r * r);
    }
}
