//! Nodal sets: zero counts on intervals, marching-squares nodal lines, weighted
//! nodal integrals, the local-ball representation of nodal length, and the
//! Crofton-type vertex-line bound.

use crate::error::{Result, RrwError};
use crate::manifolds::{chart_at, geodesic_distance, ManifoldSpec, Point};
use crate::rng::uniform;
use crate::wavefields::{ball_radius, WaveSample};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Nodes that are exactly zero are nudged by this amount.
pub const ZERO_NUDGE: f64 = 1e-14;
/// Relative change under grid doubling below which an estimate is accepted.
pub const RESOLUTION_TOL: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum NodalDomain {
    Manifold,
    ChartBall { radius: f64 },
    Interval { a: f64, b: f64 },
    Box { side: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodalEstimate {
    pub value: f64,
    pub grid_n: usize,
    /// Value at half the accepted resolution.
    pub coarse_value: f64,
    pub refined: bool,
    pub lambda: f64,
    pub domain: NodalDomain,
}

pub type Segment = [[f64; 2]; 2];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SegmentSoup {
    pub segments: Vec<Segment>,
}

fn seg_len(s: &Segment) -> f64 {
    (s[1][0] - s[0][0]).hypot(s[1][1] - s[0][1])
}

impl SegmentSoup {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(seg_len).sum()
    }

    /// `Σ h(midpoint) · |segment|`.
    pub fn weighted_length<H: Fn([f64; 2]) -> f64>(&self, h: H) -> f64 {
        self.segments
            .iter()
            .map(|s| h([0.5 * (s[0][0] + s[1][0]), 0.5 * (s[0][1] + s[1][1])]) * seg_len(s))
            .sum()
    }

    pub fn clip_to_disk(&self, center: [f64; 2], radius: f64) -> SegmentSoup {
        SegmentSoup {
            segments: self
                .segments
                .iter()
                .filter_map(|s| clip_disk(s, center, radius))
                .collect(),
        }
    }

    pub fn clip_to_box(&self, lo: [f64; 2], hi: [f64; 2]) -> SegmentSoup {
        SegmentSoup {
            segments: self.segments.iter().filter_map(|s| clip_box(s, lo, hi)).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> SegmentSoup {
        SegmentSoup {
            segments: self
                .segments
                .iter()
                .map(|g| [[g[0][0] * s, g[0][1] * s], [g[1][0] * s, g[1][1] * s]])
                .collect(),
        }
    }
}

fn clip_disk(s: &Segment, c: [f64; 2], r: f64) -> Option<Segment> {
    let d = [s[1][0] - s[0][0], s[1][1] - s[0][1]];
    let f = [s[0][0] - c[0], s[0][1] - c[1]];
    let a = d[0] * d[0] + d[1] * d[1];
    if a == 0.0 {
        return None;
    }
    let b = f[0] * d[0] + f[1] * d[1];
    let cc = f[0] * f[0] + f[1] * f[1] - r * r;
    let disc = b * b - a * cc;
    if disc <= 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t0 = ((-b - sq) / a).max(0.0);
    let t1 = ((-b + sq) / a).min(1.0);
    if t1 <= t0 {
        return None;
    }
    let at = |t: f64| [s[0][0] + t * d[0], s[0][1] + t * d[1]];
    Some([at(t0), at(t1)])
}

fn clip_box(s: &Segment, lo: [f64; 2], hi: [f64; 2]) -> Option<Segment> {
    let d = [s[1][0] - s[0][0], s[1][1] - s[0][1]];
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for c in 0..2 {
        if d[c] == 0.0 {
            if s[0][c] < lo[c] || s[0][c] > hi[c] {
                return None;
            }
            continue;
        }
        let a = (lo[c] - s[0][c]) / d[c];
        let b = (hi[c] - s[0][c]) / d[c];
        t0 = t0.max(a.min(b));
        t1 = t1.min(a.max(b));
    }
    if t1 <= t0 {
        return None;
    }
    let at = |t: f64| [s[0][0] + t * d[0], s[0][1] + t * d[1]];
    Some([at(t0), at(t1)])
}

/// Doubles the resolution from `n0` until the measured value changes by less
/// than [`RESOLUTION_TOL`] (relative), returning `(fine, coarse, n_fine, extra)`.
pub fn refine_until_stable<T, F>(n0: usize, max_n: usize, mut measure: F) -> Result<(f64, f64, usize, T)>
where
    F: FnMut(usize) -> Result<(f64, T)>,
{
    let mut n = n0;
    let (mut coarse, _) = measure(n)?;
    loop {
        let m = 2 * n;
        let (fine, extra) = measure(m)?;
        let scale = fine.abs().max(coarse.abs());
        let rel = if scale == 0.0 { 0.0 } else { (fine - coarse).abs() / scale };
        if rel < RESOLUTION_TOL {
            return Ok((fine, coarse, m, extra));
        }
        if 2 * m > max_n {
            return Err(RrwError::Resolution { coarse, fine, rel_change: rel });
        }
        coarse = fine;
        n = m;
    }
}

/// Sign-change scan of `f` on `grid_n` cells of `[a, b]`, each bracket refined by
/// bisection to width `1e-12`. Returns the zero locations.
pub fn find_zeros_1d<F: Fn(f64) -> f64 + Sync>(f: &F, a: f64, b: f64, grid_n: usize) -> Vec<f64> {
    let h = (b - a) / grid_n as f64;
    let val = |x: f64| {
        let v = f(x);
        if v == 0.0 {
            ZERO_NUDGE
        } else {
            v
        }
    };
    let values: Vec<f64> = (0..=grid_n).into_par_iter().map(|i| val(a + h * i as f64)).collect();
    (0..grid_n)
        .into_par_iter()
        .filter(|&i| (values[i] > 0.0) != (values[i + 1] > 0.0))
        .map(|i| {
            let (mut lo, mut hi) = (a + h * i as f64, a + h * (i + 1) as f64);
            let mut flo = values[i];
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                let fm = val(mid);
                if (fm > 0.0) == (flo > 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if mid == lo && mid == hi {
                    break;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Number of zeros of `f` on `[a, b]`. `grid_n` must be at least `4 λ / 2π`;
/// the count is accepted once doubling the scan changes it by less than 1%.
pub fn count_zeros_1d<F: Fn(f64) -> f64 + Sync>(
    f: &F,
    interval: (f64, f64),
    grid_n: usize,
    lambda: f64,
) -> Result<NodalEstimate> {
    let (a, b) = interval;
    let min_n = (4.0 * lambda / std::f64::consts::TAU * (b - a)).ceil() as usize;
    if grid_n < min_n.max(1) {
        return Err(RrwError::Domain(format!("grid_n {grid_n} below 4 cells per wavelength ({min_n})")));
    }
    let (value, coarse_value, grid_n, _) = refine_until_stable(grid_n, grid_n << 6, |n| {
        Ok((find_zeros_1d(f, a, b, n).len() as f64, ()))
    })?;
    Ok(NodalEstimate {
        value,
        grid_n,
        coarse_value,
        refined: true,
        lambda,
        domain: NodalDomain::Interval { a, b },
    })
}

/// Regular grid of nodes: `nx × ny` values, row-major in `y`, spacing `h`.
/// Periodic grids wrap both axes, so they have `nx × ny` cells.
#[derive(Clone, Debug)]
pub struct GridField {
    pub nx: usize,
    pub ny: usize,
    pub origin: [f64; 2],
    pub h: f64,
    pub periodic: bool,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn sample<F: Fn([f64; 2]) -> f64 + Sync>(
        f: &F,
        n: usize,
        origin: [f64; 2],
        h: f64,
        periodic: bool,
    ) -> Self {
        let values = (0..n * n)
            .into_par_iter()
            .map(|k| f([origin[0] + h * (k % n) as f64, origin[1] + h * (k / n) as f64]))
            .collect();
        Self { nx: n, ny: n, origin, h, periodic, values }
    }

    fn node(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if self.periodic { (i % self.nx, j % self.ny) } else { (i, j) };
        let v = self.values[j * self.nx + i];
        if v == 0.0 {
            ZERO_NUDGE
        } else {
            v
        }
    }
}

/// Marching squares with linear interpolation on cell edges. Ambiguous saddle
/// cells are decided by the sign of `center(i, j)`, the field at the centre of
/// cell `(i, j)`.
pub fn marching_squares<C: Fn(usize, usize) -> f64 + Sync>(grid: &GridField, center: &C) -> SegmentSoup {
    let (cx, cy) = if grid.periodic { (grid.nx, grid.ny) } else { (grid.nx - 1, grid.ny - 1) };
    let h = grid.h;
    let segments: Vec<Segment> = (0..cy)
        .into_par_iter()
        .flat_map_iter(|j| {
            let mut out = Vec::new();
            for i in 0..cx {
                let c = [grid.node(i, j), grid.node(i + 1, j), grid.node(i + 1, j + 1), grid.node(i, j + 1)];
                let s = c.map(|v| v > 0.0);
                if s[0] == s[1] && s[1] == s[2] && s[2] == s[3] {
                    continue;
                }
                let x0 = grid.origin[0] + h * i as f64;
                let y0 = grid.origin[1] + h * j as f64;
                let edge = |e: usize| -> [f64; 2] {
                    match e {
                        0 => [x0 + h * c[0] / (c[0] - c[1]), y0],
                        1 => [x0 + h, y0 + h * c[1] / (c[1] - c[2])],
                        2 => [x0 + h * c[3] / (c[3] - c[2]), y0 + h],
                        _ => [x0, y0 + h * c[0] / (c[0] - c[3])],
                    }
                };
                let crossing = [s[0] != s[1], s[1] != s[2], s[3] != s[2], s[0] != s[3]];
                let edges: Vec<usize> = (0..4).filter(|&e| crossing[e]).collect();
                if edges.len() == 2 {
                    out.push([edge(edges[0]), edge(edges[1])]);
                } else {
                    let sc = center(i, j) > 0.0;
                    if sc == s[0] {
                        out.push([edge(0), edge(1)]);
                        out.push([edge(3), edge(2)]);
                    } else {
                        out.push([edge(0), edge(3)]);
                        out.push([edge(1), edge(2)]);
                    }
                }
            }
            out
        })
        .collect();
    SegmentSoup { segments }
}

/// Nodal line of a closed-form field on the 2-torus `[0, period)^2`,
/// sampled on an `n × n` grid.
pub fn nodal_soup_periodic<F: Fn([f64; 2]) -> f64 + Sync>(f: &F, n: usize, period: f64) -> SegmentSoup {
    let h = period / n as f64;
    let grid = GridField::sample(f, n, [0.0, 0.0], h, true);
    marching_squares(&grid, &|i, j| f([h * (i as f64 + 0.5), h * (j as f64 + 0.5)]))
}

/// Nodal length of a closed-form periodic field on `[0, period)^2`, with the
/// doubling rule applied from `n0`.
pub fn nodal_length_2d<F: Fn([f64; 2]) -> f64 + Sync>(
    f: &F,
    period: f64,
    n0: usize,
    max_n: usize,
    lambda: f64,
) -> Result<(NodalEstimate, SegmentSoup)> {
    let (value, coarse_value, grid_n, soup) = refine_until_stable(n0, max_n, |n| {
        let soup = nodal_soup_periodic(f, n, period);
        Ok((soup.length(), soup))
    })?;
    Ok((
        NodalEstimate { value, grid_n, coarse_value, refined: true, lambda, domain: NodalDomain::Manifold },
        soup,
    ))
}

/// Nodal line of a 2-torus wave sample over the whole fundamental domain, from
/// an FFT grid of `n × n` nodes.
pub fn torus_nodal_soup(sample: &WaveSample, n: usize) -> Result<SegmentSoup> {
    let values = sample.torus_grid(n, [0.0, 0.0], [0, 0])?;
    let h = 1.0 / n as f64;
    let grid = GridField { nx: n, ny: n, origin: [0.0, 0.0], h, periodic: true, values };
    Ok(marching_squares(&grid, &|i, j| {
        sample.eval_field(&[h * (i as f64 + 0.5), h * (j as f64 + 0.5), 0.0])
    }))
}

/// Nodal length `H¹({f_λ = 0})` of a 2-torus sample, doubling the FFT grid from
/// `n0` until stable.
pub fn torus_nodal_length(sample: &WaveSample, n0: usize, max_n: usize) -> Result<(NodalEstimate, SegmentSoup)> {
    if sample.basis.manifold != (ManifoldSpec::Torus { dim: 2 }) {
        return Err(RrwError::Domain("torus_nodal_length needs a 2-torus sample".into()));
    }
    let mk = sample.basis.torus_modes().map(|t| t.max_k as usize).unwrap_or(0);
    let n0 = n0.max(2 * mk + 2);
    let (value, coarse_value, grid_n, soup) = refine_until_stable(n0, max_n, |n| {
        let soup = torus_nodal_soup(sample, n)?;
        Ok((soup.length(), soup))
    })?;
    Ok((
        NodalEstimate {
            value,
            grid_n,
            coarse_value,
            refined: true,
            lambda: sample.lambda(),
            domain: NodalDomain::Manifold,
        },
        soup,
    ))
}

/// `(1/λ) ∫_{nodal set} h dH¹` by per-segment midpoint weights.
pub fn nodal_measure_integral<H: Fn([f64; 2]) -> f64>(soup: &SegmentSoup, h: H, lambda: f64) -> f64 {
    soup.weighted_length(h) / lambda
}

/// Nodal soup of the rescaled field `g^x_λ` on an `n × n` node grid covering
/// `[-half, half]^2`, in rescaled chart coordinates.
pub fn chart_patch_soup(sample: &WaveSample, base: Point, half: f64, n: usize) -> Result<SegmentSoup> {
    let h = 2.0 * half / (n - 1) as f64;
    let coords: Vec<f64> = (0..n).map(|i| -half + h * i as f64).collect();
    let values = sample.chart_patch(base, &coords, &coords)?;
    let grid = GridField { nx: n, ny: n, origin: [-half, -half], h, periodic: false, values };
    let view = sample.rescaled(base);
    let lam = sample.lambda();
    let chart = view.chart.clone();
    Ok(marching_squares(&grid, &|i, j| {
        let v = [coords[i] + 0.5 * h, coords[j] + 0.5 * h];
        chart
            .exp_map(&[v[0] / lam, v[1] / lam])
            .map(|p| sample.eval_field(&p))
            .unwrap_or(1.0)
    }))
}

/// Length of chart-coordinate segments measured in the rescaled metric `λ² g`
/// of the manifold: each segment is replaced by the geodesic chord between the
/// images of its endpoints.
pub fn metric_length(sample: &WaveSample, base: Point, soup: &SegmentSoup) -> f64 {
    let chart = chart_at(sample.basis.manifold, base);
    let lam = sample.lambda();
    soup.segments
        .iter()
        .map(|s| {
            let a = chart.exp_unchecked(&[s[0][0] / lam, s[0][1] / lam]);
            let b = chart.exp_unchecked(&[s[1][0] / lam, s[1][1] / lam]);
            lam * geodesic_distance(sample.basis.manifold, &a, &b)
        })
        .sum()
}

/// `Z_λ = H¹({g^x_λ = 0} ∩ B)` with `B` the unit-area disk of radius `δ`,
/// from an `n × n` patch grid; lengths are metric-weighted on the sphere.
pub fn patch_nodal_length(sample: &WaveSample, base: Point, n: usize) -> Result<f64> {
    let delta = ball_radius(2);
    let soup = chart_patch_soup(sample, base, delta, n)?.clip_to_disk([0.0, 0.0], delta);
    Ok(match sample.basis.manifold {
        ManifoldSpec::Sphere2 => metric_length(sample, base, &soup),
        _ => soup.length(),
    })
}

/// Mean of `Z_λ` over the given base points, with the doubling rule applied to
/// the mean.
pub fn mean_patch_nodal_length(sample: &WaveSample, bases: &[Point], n0: usize, max_n: usize) -> Result<NodalEstimate> {
    let (value, coarse_value, grid_n, _) = refine_until_stable(n0, max_n, |n| {
        let zs: Vec<f64> = bases
            .par_iter()
            .map(|b| patch_nodal_length(sample, *b, n))
            .collect::<Result<_>>()?;
        Ok((crate::rng::mean(&zs), ()))
    })?;
    Ok(NodalEstimate {
        value,
        grid_n,
        coarse_value,
        refined: true,
        lambda: sample.lambda(),
        domain: NodalDomain::ChartBall { radius: ball_radius(2) },
    })
}

/// Points `((k + 1/2)/n, {k φ})`, `φ` the golden-ratio conjugate: a rank-1
/// lattice-type rule for the uniform measure on the unit square.
pub fn golden_lattice(n: usize) -> Vec<[f64; 2]> {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    (0..n)
        .map(|k| [(k as f64 + 0.5) / n as f64, (k as f64 * phi).fract()])
        .collect()
}

/// `λ² E_X[H¹({f = 0} ∩ B(X, δ/λ))] / H¹({f = 0})` for a nodal soup on the unit
/// 2-torus, with `X` running over an `n_ball_samples`-point lattice rule.
/// The ball `B(X, δ/λ)` has area `1/λ²`, so the ratio is 1 for exact averaging.
pub fn local_global_check(soup: &SegmentSoup, lambda: f64, n_ball_samples: usize) -> Result<f64> {
    let total = soup.length();
    if total == 0.0 {
        return Err(RrwError::EmptyNodalSet);
    }
    if n_ball_samples == 0 {
        return Err(RrwError::Domain("need at least one ball sample".into()));
    }
    let r = ball_radius(2) / lambda;
    let longest = soup.segments.iter().map(seg_len).fold(0.0, f64::max);
    let reach = r + longest;
    let nb = ((1.0 / reach).floor() as usize).clamp(1, 2048);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); nb * nb];
    let cell = |v: f64| ((v.rem_euclid(1.0) * nb as f64) as usize).min(nb - 1);
    for (k, s) in soup.segments.iter().enumerate() {
        buckets[cell(s[0][1]) * nb + cell(s[0][0])].push(k);
    }
    let xs = golden_lattice(n_ball_samples);
    let lengths: Vec<f64> = xs
        .par_iter()
        .map(|x| {
            let (bi, bj) = (cell(x[0]) as i64, cell(x[1]) as i64);
            let mut acc = 0.0;
            let span = if nb < 3 { 0 } else { 1 };
            let mut seen = Vec::new();
            for dj in -span..=span {
                for di in -span..=span {
                    let b = ((bj + dj).rem_euclid(nb as i64) * nb as i64 + (bi + di).rem_euclid(nb as i64)) as usize;
                    if seen.contains(&b) {
                        continue;
                    }
                    seen.push(b);
                    for &k in &buckets[b] {
                        let s = soup.segments[k];
                        // Translate the segment to the periodic copy nearest to x.
                        let sh = [
                            (x[0] - s[0][0] + 0.5).floor(),
                            (x[1] - s[0][1] + 0.5).floor(),
                        ];
                        let t = [[s[0][0] + sh[0], s[0][1] + sh[1]], [s[1][0] + sh[0], s[1][1] + sh[1]]];
                        if let Some(c) = clip_disk(&t, *x, r) {
                            acc += seg_len(&c);
                        }
                    }
                }
            }
            acc
        })
        .collect();
    Ok(lambda * lambda * crate::rng::mean(&lengths) / total)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CroftonResult {
    pub best_count: usize,
    pub bound_ok: bool,
    pub nodal_length: f64,
    /// `c H¹(E ∩ D) / a`.
    pub required: f64,
    /// Vertex and far endpoint of the best line segment.
    pub best_segment: Option<Segment>,
}

fn proper_cross(p: &Segment, q: &Segment) -> bool {
    let orient = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let d1 = orient(q[0], q[1], p[0]);
    let d2 = orient(q[0], q[1], p[1]);
    let d3 = orient(p[0], p[1], q[0]);
    let d4 = orient(p[0], p[1], q[1]);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0
}

/// Crofton-type vertex-line bound in the square `D = origin + [0, a]^2`: for
/// `samples` uniform points `P` and each vertex `A_j`, counts crossings of the
/// soup with `(A_j P) ∩ D`, and checks `max ≥ c H¹(E ∩ D) / a` with `c = 1/8`.
pub fn crofton_lower_bound<R: Rng + ?Sized>(
    soup: &SegmentSoup,
    origin: [f64; 2],
    a: f64,
    samples: usize,
    rng: &mut R,
) -> CroftonResult {
    let c = 1.0 / 8.0;
    let hi = [origin[0] + a, origin[1] + a];
    let clipped = soup.clip_to_box(origin, hi);
    let length = clipped.length();
    let required = c * length / a;
    if length == 0.0 {
        return CroftonResult { best_count: 0, bound_ok: true, nodal_length: 0.0, required, best_segment: None };
    }
    let vertices = [origin, [hi[0], origin[1]], hi, [origin[0], hi[1]]];
    let mut best = 0;
    let mut best_segment = None;
    for _ in 0..samples {
        let p = [origin[0] + a * uniform(rng), origin[1] + a * uniform(rng)];
        for v in vertices {
            let d = [p[0] - v[0], p[1] - v[1]];
            // Largest t with v + t d inside D.
            let mut t = f64::INFINITY;
            for k in 0..2 {
                if d[k] > 0.0 {
                    t = t.min((hi[k] - v[k]) / d[k]);
                } else if d[k] < 0.0 {
                    t = t.min((origin[k] - v[k]) / d[k]);
                }
            }
            if !t.is_finite() {
                continue;
            }
            let line = [v, [v[0] + t * d[0], v[1] + t * d[1]]];
            let count = clipped.segments.iter().filter(|s| proper_cross(&line, s)).count();
            if count > best {
                best = count;
                best_segment = Some(line);
            }
        }
    }
    CroftonResult {
        best_count: best,
        bound_ok: best as f64 >= required,
        nodal_length: length,
        required,
        best_segment,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RolleCheck {
    pub holds: bool,
    /// `|g(vertex)|`.
    pub lhs: f64,
    /// `L^p / p! · sup_S |g_S^{(p)}|`.
    pub rhs: f64,
    pub zeros: usize,
}

/// Generalized Rolle bound at the vertex end of a segment. `g` is the
/// restriction of the field to the segment, parametrized by arclength on
/// `[0, length]` with the vertex at 0. Requires at least `p` zeros on the
/// segment; the `p`-th derivative sup is taken from finite differences on a
/// `grid_n` grid.
pub fn rolle_vertex_bound_check<F: Fn(f64) -> f64 + Sync>(g: &F, length: f64, p: usize, grid_n: usize) -> Result<RolleCheck> {
    if p == 0 || grid_n < 2 * p {
        return Err(RrwError::Domain("need p >= 1 and grid_n >= 2p".into()));
    }
    let zeros = find_zeros_1d(g, 0.0, length, grid_n).len();
    if zeros < p {
        return Err(RrwError::Vacuous(format!("{zeros} zeros on the segment, need {p}")));
    }
    let h = length / grid_n as f64;
    let vals: Vec<f64> = (0..=grid_n).map(|i| g(h * i as f64)).collect();
    let binom: Vec<f64> = (0..=p)
        .map(|k| (0..k).fold(1.0, |acc, j| acc * (p - j) as f64 / (j + 1) as f64))
        .collect();
    let mut sup: f64 = 0.0;
    for i in 0..=(grid_n - p) {
        let mut diff = 0.0;
        for (k, b) in binom.iter().enumerate() {
            let sign = if (p - k).is_multiple_of(2) { 1.0 } else { -1.0 };
            diff += sign * b * vals[i + k];
        }
        sup = sup.max((diff / h.powi(p as i32)).abs());
    }
    let fact: f64 = (1..=p).map(|k| k as f64).product();
    let lhs = g(0.0).abs();
    let rhs = length.powi(p as i32) / fact * sup;
    Ok(RolleCheck { holds: lhs <= rhs, lhs, rhs, zeros })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    #[test]
    fn zeros_of_cosine_on_circle() {
        for n in [1usize, 5, 40] {
            let f = |x: f64| (n as f64 * x).cos();
            let est = count_zeros_1d(&f, (0.0, TAU), 8 * n, n as f64).unwrap();
            assert_eq!(est.value, 2.0 * n as f64);
        }
        let one = |_: f64| 1.0;
        assert_eq!(count_zeros_1d(&one, (0.0, 1.0), 16, 1.0).unwrap().value, 0.0);
        let f = |x: f64| (10.0 * x).cos();
        assert!(count_zeros_1d(&f, (0.0, TAU), 4, 10.0).is_err());
    }

    #[test]
    fn bisection_locates_roots() {
        let f = |x: f64| x * x - 2.0;
        let z = find_zeros_1d(&f, 0.0, 3.0, 7);
        assert_eq!(z.len(), 1);
        assert_abs_diff_eq!(z[0], 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn closed_form_nodal_lengths() {
        let f = |x: [f64; 2]| (TAU * x[0]).sin();
        let (est, _) = nodal_length_2d(&f, 1.0, 256, 4096, TAU).unwrap();
        assert_abs_diff_eq!(est.value, 2.0, epsilon = 1e-3);
        let g = |x: [f64; 2]| (TAU * x[0]).cos() * (TAU * x[1]).cos();
        let (est, soup) = nodal_length_2d(&g, 1.0, 64, 4096, TAU).unwrap();
        assert_abs_diff_eq!(est.value, 4.0, epsilon = 1e-2);
        assert_abs_diff_eq!(nodal_measure_integral(&soup, |_| 1.0, 2.0), est.value / 2.0, epsilon = 1e-12);
        assert_eq!(nodal_measure_integral(&soup, |_| 0.0, 2.0), 0.0);
    }

    #[test]
    fn circle_length_and_scaling() {
        let f = |x: [f64; 2]| (x[0] - 0.5).hypot(x[1] - 0.5) - 0.3;
        let soup = nodal_soup_periodic(&f, 400, 1.0);
        assert_abs_diff_eq!(soup.length(), TAU * 0.3, epsilon = 1e-3);
        let s = 3.0;
        let g = |v: [f64; 2]| f([v[0] * s, v[1] * s]);
        let soup_g = nodal_soup_periodic(&g, 400, 1.0 / s);
        assert_abs_diff_eq!(soup_g.length(), soup.length() / s, epsilon = 1e-3);
    }

    #[test]
    fn segment_endpoints_lie_on_sign_changing_edges() {
        let f = |x: [f64; 2]| (TAU * x[0]).sin() + 0.7 * (TAU * 2.0 * x[1]).cos();
        let n = 64;
        let h = 1.0 / n as f64;
        let soup = nodal_soup_periodic(&f, n, 1.0);
        for s in &soup.segments {
            for p in s {
                let on_x = ((p[0] / h) - (p[0] / h).round()).abs() < 1e-9;
                let on_y = ((p[1] / h) - (p[1] / h).round()).abs() < 1e-9;
                assert!(on_x || on_y);
                assert!(f(*p).abs() < 0.05);
            }
        }
    }

    #[test]
    fn saddle_uses_cell_center() {
        // Corners +,-,+,- with a positive centre: the positive corners connect.
        let grid = GridField { nx: 2, ny: 2, origin: [0.0, 0.0], h: 1.0, periodic: false, values: vec![1.0, -1.0, -1.0, 1.0] };
        let pos = marching_squares(&grid, &|_, _| 1.0);
        let neg = marching_squares(&grid, &|_, _| -1.0);
        assert_eq!(pos.len(), 2);
        assert_eq!(neg.len(), 2);
        assert_ne!(pos, neg);
        // Each segment cuts off one corner.
        for s in &pos.segments {
            let mid = [0.5 * (s[0][0] + s[1][0]), 0.5 * (s[0][1] + s[1][1])];
            assert!((mid[0] - 0.5).abs() > 0.1 && (mid[1] - 0.5).abs() > 0.1);
        }
    }

    #[test]
    fn zero_node_is_nudged() {
        let grid = GridField { nx: 2, ny: 2, origin: [0.0, 0.0], h: 1.0, periodic: false, values: vec![0.0, -1.0, -1.0, -1.0] };
        assert_eq!(marching_squares(&grid, &|_, _| -1.0).len(), 1);
    }

    #[test]
    fn clipping() {
        let s: Segment = [[-2.0, 0.0], [2.0, 0.0]];
        let soup = SegmentSoup { segments: vec![s] };
        assert_abs_diff_eq!(soup.clip_to_disk([0.0, 0.5], 1.0).length(), 2.0 * 0.75f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(soup.clip_to_box([-1.0, -1.0], [0.5, 1.0]).length(), 1.5, epsilon = 1e-14);
        assert!(soup.clip_to_disk([0.0, 3.0], 1.0).is_empty());
    }

    #[test]
    fn local_global_on_vertical_lines() {
        let f = |x: [f64; 2]| (TAU * x[0]).sin();
        let soup = nodal_soup_periodic(&f, 512, 1.0);
        let lam = TAU * 20.0;
        let r1 = local_global_check(&soup, lam, 2000).unwrap();
        let r2 = local_global_check(&soup, lam, 4000).unwrap();
        assert!((r1 - 1.0).abs() < 0.03, "{r1}");
        assert!((r1 - r2).abs() < 0.03);
        assert!(matches!(local_global_check(&SegmentSoup::default(), lam, 10), Err(RrwError::EmptyNodalSet)));
    }

    #[test]
    fn crofton_single_line_and_empty() {
        let a = 2.0;
        let soup = SegmentSoup { segments: vec![[[0.0, 1.0], [2.0, 1.0]]] };
        let mut rng = substream(1, &[0]);
        let r = crofton_lower_bound(&soup, [0.0, 0.0], a, 16, &mut rng);
        assert_eq!(r.best_count, 1);
        assert!(r.bound_ok);
        let e = crofton_lower_bound(&SegmentSoup::default(), [0.0, 0.0], a, 16, &mut rng);
        assert_eq!((e.best_count, e.bound_ok), (0, true));
    }

    #[test]
    fn rolle_bounds() {
        // Three roots in [0, 1]; third derivative is the constant 6.
        let g = |s: f64| (s - 0.2) * (s - 0.5) * (s - 0.9);
        let r = rolle_vertex_bound_check(&g, 1.0, 3, 400).unwrap();
        assert!(r.holds);
        assert_abs_diff_eq!(r.rhs, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(r.lhs, 0.09, epsilon = 1e-12);
        let lin = |s: f64| 2.0 * s - 1.0;
        assert!(rolle_vertex_bound_check(&lin, 1.0, 1, 100).unwrap().holds);
        let c = |_: f64| 1.0;
        assert!(matches!(rolle_vertex_bound_check(&c, 1.0, 1, 100), Err(RrwError::Vacuous(_))));
    }
}
