//! WebAssembly bindings behind `www/index.html`.
//!
//! Each export is a thin wrapper over a plain Rust function so the same code
//! paths are testable natively.

use rrw_core::kernels::{KernelSpec, Regime};
use rrw_core::manifolds::{enumerate_spectrum, ManifoldSpec};
use rrw_core::nodal::{count_zeros_1d, torus_nodal_soup};
use rrw_core::wavefields::sample_wave;
use rrw_core::Result;
use std::f64::consts::TAU;
use std::sync::Arc;
use wasm_bindgen::prelude::*;

/// Largest `n` (with `λ = 2πn`) the page accepts; keeps a frame under a second.
pub const MAX_WAVENUMBER: u32 = 64;

/// One random wave on the 2-torus, sampled on a square grid, with its nodal line.
#[wasm_bindgen]
pub struct FieldView {
    grid: usize,
    values: Vec<f32>,
    segments: Vec<f32>,
    length: f64,
    lambda: f64,
    modes: usize,
}

#[wasm_bindgen]
impl FieldView {
    #[wasm_bindgen(getter)]
    pub fn grid(&self) -> usize {
        self.grid
    }

    /// Row-major in `y`, `grid × grid`.
    pub fn values(&self) -> Vec<f32> {
        self.values.clone()
    }

    /// Flattened `[x0, y0, x1, y1, ...]` in unit-square coordinates.
    pub fn segments(&self) -> Vec<f32> {
        self.segments.clone()
    }

    /// Nodal length of the whole torus.
    #[wasm_bindgen(getter)]
    pub fn length(&self) -> f64 {
        self.length
    }

    #[wasm_bindgen(getter)]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Number of eigenfunctions in the band.
    #[wasm_bindgen(getter)]
    pub fn modes(&self) -> usize {
        self.modes
    }
}

pub fn torus_field(wavenumber: u32, seed: u64, grid: usize) -> Result<FieldView> {
    let n = wavenumber.clamp(1, MAX_WAVENUMBER) as f64;
    let basis = Arc::new(enumerate_spectrum(ManifoldSpec::Torus { dim: 2 }, TAU * n, Regime::LargeBand)?);
    let modes = basis.count();
    let sample = sample_wave(basis, seed);
    let grid = grid.max(2 * wavenumber as usize + 2);
    let values = sample.torus_grid(grid, [0.0, 0.0], [0, 0])?;
    let soup = torus_nodal_soup(&sample, grid)?;
    let segments = soup.segments.iter().flat_map(|s| [s[0][0], s[0][1], s[1][0], s[1][1]]).map(|v| v as f32).collect();
    Ok(FieldView {
        grid,
        values: values.iter().map(|v| *v as f32).collect(),
        segments,
        length: soup.length(),
        lambda: sample.lambda(),
        modes,
    })
}

/// Random wave on the 2-torus at `λ = 2π·wavenumber`.
#[wasm_bindgen]
pub fn field_view(wavenumber: u32, seed: u32, grid: usize) -> std::result::Result<FieldView, JsError> {
    torus_field(wavenumber, seed as u64, grid).map_err(|e| JsError::new(&e.to_string()))
}

pub fn kernel_values(dim: usize, monochromatic: bool, r_max: f64, points: usize) -> Result<Vec<f64>> {
    let regime = if monochromatic { Regime::Monochromatic } else { Regime::LargeBand };
    let spec = KernelSpec::new(dim, regime)?;
    let points = points.max(2);
    Ok((0..points).map(|i| spec.eval(r_max * i as f64 / (points - 1) as f64)).collect())
}

/// `B_d` or `S_d` on `points` equally spaced radii in `[0, r_max]`.
#[wasm_bindgen]
pub fn kernel_curve(dim: usize, monochromatic: bool, r_max: f64, points: usize) -> std::result::Result<Vec<f64>, JsError> {
    kernel_values(dim, monochromatic, r_max, points).map_err(|e| JsError::new(&e.to_string()))
}

/// `(zeros / λ, 1/(π√3))` per draw on the circle.
pub fn circle_zero_density(wavenumber: u32, draws: u32) -> Result<Vec<f64>> {
    let lam = TAU * wavenumber.max(1) as f64;
    let basis = Arc::new(enumerate_spectrum(ManifoldSpec::Torus { dim: 1 }, lam, Regime::LargeBand)?);
    (0..draws.max(1) as u64)
        .map(|s| {
            let sample = sample_wave(basis.clone(), s);
            let f = |x: f64| sample.eval_field(&[x, 0.0, 0.0]);
            let e = count_zeros_1d(&f, (0.0, 1.0), 8 * wavenumber.max(1) as usize, lam)?;
            Ok(e.value / lam)
        })
        .collect()
}

/// Zero counts per unit frequency of `draws` random waves on the circle.
#[wasm_bindgen]
pub fn zero_density(wavenumber: u32, draws: u32) -> std::result::Result<Vec<f64>, JsError> {
    circle_zero_density(wavenumber, draws).map_err(|e| JsError::new(&e.to_string()))
}
