//! Halton low-discrepancy sequences.

use alloc::vec::Vec;

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

/// The `index`-th Halton point in `[0,1)^dim` (dim <= 16).
pub fn halton_point(index: u64, dim: usize) -> Vec<f64> {
    (0..dim).map(|k| radical_inverse(index, PRIMES[k % PRIMES.len()])).collect()
}

/// `n` quasi-random points in the ball of given center and radius,
/// obtained by rejection from the Halton sequence on the enclosing cube.
pub fn ball_points(center: &[f64], radius: f64, n: usize) -> Vec<Vec<f64>> {
    let dim = center.len();
    let mut out = Vec::with_capacity(n);
    let mut i = 1u64;
    while out.len() < n {
        let u = halton_point(i, dim);
        i += 1;
        let v: Vec<f64> = u.iter().map(|c| 2.0 * c - 1.0).collect();
        if v.iter().map(|c| c * c).sum::<f64>() <= 1.0 {
            out.push(v.iter().zip(center).map(|(c, o)| o + radius * c).collect());
        }
    }
    out
}
