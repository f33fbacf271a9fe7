//! Reproducible random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream keyed by the master
//! seed and a stream id derived from a tuple of task coordinates
//! (experiment tag, lambda index, replica index, ...). ChaCha is counter-based,
//! so distinct tuples give independent streams no matter which thread draws them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

pub type StreamRng = ChaCha8Rng;

/// SplitMix64 finalizer, used to fold task coordinates into a stream id.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream_id(coords: &[u64]) -> u64 {
    coords.iter().fold(0x5eed_u64, |acc, &c| mix(acc ^ mix(c)))
}

/// RNG for the substream `coords` of `master`.
pub fn substream(master: u64, coords: &[u64]) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream_id(coords));
    rng
}

/// Stable numeric tag for a string label (experiment id etc.).
pub fn tag(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Uniform on `[0, 1)` with 53 random bits.
pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normals by the Box–Muller transform, produced in pairs.
pub fn normal_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    // 1 - u lies in (0, 1], so the log is finite.
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (TAU * u2).sin_cos();
    (r * c, r * s)
}

/// `n` iid standard normals.
pub fn normals<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    while out.len() < n {
        let (a, b) = normal_pair(rng);
        out.push(a);
        out.push(b);
    }
    out.truncate(n);
    out
}

/// Sum with pairwise (tree) association, independent of how the input was produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    (pairwise_sum(&sq) / (xs.len() - 1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn substreams_replay_and_differ() {
        let a: Vec<u64> = (0..4)
            .map({
                let mut r = substream(7, &[1, 2, 3]);
                move |_| r.next_u64()
            })
            .collect();
        let b: Vec<u64> = (0..4)
            .map({
                let mut r = substream(7, &[1, 2, 3]);
                move |_| r.next_u64()
            })
            .collect();
        let c: Vec<u64> = (0..4)
            .map({
                let mut r = substream(7, &[1, 2, 4]);
                move |_| r.next_u64()
            })
            .collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn box_muller_moments() {
        let mut rng = substream(1, &[0]);
        let xs = normals(&mut rng, 200_000);
        let m = mean(&xs);
        let v = std_dev(&xs).powi(2);
        assert!(m.abs() < 4.0 / (200_000f64).sqrt());
        assert!((v - 1.0).abs() < 0.02);
    }
}
