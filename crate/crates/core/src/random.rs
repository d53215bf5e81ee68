//! Seeded randomness. Every randomized routine takes a `&mut Rng` or a seed so
//! runs are reproducible bit for bit.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{norm, scaled, CMatrix, C64};

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian: independent N(0, 1/2) real and imaginary parts.
pub fn complex_gaussian(rng: &mut Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix(rng: &mut Rng, rows: usize, cols: usize) -> CMatrix {
    // Column-major fill order keeps the stream layout independent of storage.
    let mut m = CMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

pub fn gaussian_vector(rng: &mut Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}

/// Uniformly distributed unit vector in ℂⁿ.
pub fn unit_vector(rng: &mut Rng, n: usize) -> Vec<C64> {
    loop {
        let v = gaussian_vector(rng, n);
        let r = norm(&v);
        if r > 1e-12 {
            return scaled(C64::new(1.0 / r, 0.0), &v);
        }
    }
}

/// Uniform phase e^{iφ}.
pub fn unit_phase(rng: &mut Rng) -> C64 {
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    C64::from_polar(1.0, phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let a = gaussian_matrix(&mut seeded(11), 3, 2);
        let b = gaussian_matrix(&mut seeded(11), 3, 2);
        assert_eq!(a, b);
        assert_ne!(a, gaussian_matrix(&mut seeded(12), 3, 2));
    }

    #[test]
    fn unit_vectors_are_unit() {
        let mut rng = seeded(3);
        for n in 1..6 {
            assert!((norm(&unit_vector(&mut rng, n)) - 1.0).abs() < 1e-14);
        }
    }
}
