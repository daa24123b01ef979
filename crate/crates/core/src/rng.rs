//! Seeded random generation of vectors, operators and block matrices.
//!
//! Every randomized routine in the crate draws from a `ChaCha8Rng` created
//! here, so a `(seed, stream)` pair fully determines its output regardless of
//! how work is spread across threads.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::block::{HSeq, OpMatrix};
use crate::operator::{HVector, Operator};
use crate::C64;

/// Default seed used by the CLI and the verification battery.
pub const DEFAULT_SEED: u64 = 0xC0FFEE;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` derived from `seed` (splitmix64 mixing).
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    ChaCha8Rng::seed_from_u64(z)
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_dvector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<C64> {
    DVector::from_fn(n, |_, _| complex_normal(rng))
}

pub fn random_dmatrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    // filled column by column so the draw order is fixed
    DMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> HVector {
    HVector::from_dvector(random_dvector(rng, d))
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> HVector {
    loop {
        let v = random_dvector(rng, d);
        let n = v.norm();
        if n > 1e-12 {
            return HVector::from_dvector(v / C64::from(n));
        }
    }
}

pub fn random_operator<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Operator {
    Operator::from_matrix_unchecked(random_dmatrix(rng, d, d))
}

pub fn random_opmatrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, d: usize) -> OpMatrix {
    let blocks = (0..rows * cols).map(|_| random_operator(rng, d)).collect();
    OpMatrix::from_blocks(rows, cols, d, blocks).expect("consistent random shape")
}

pub fn random_hseq<R: Rng + ?Sized>(rng: &mut R, len: usize, d: usize) -> HSeq {
    HSeq::new((0..len).map(|_| random_vector(rng, d)).collect()).expect("consistent random shape")
}

/// Haar-distributed unitary (QR of a complex Ginibre matrix with phase fix).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DMatrix<C64> {
    let g = random_dmatrix(rng, d, d);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn uniform_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(0.0..std::f64::consts::TAU)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = random_dvector(&mut stream_rng(7, 3), 4);
        let b = random_dvector(&mut stream_rng(7, 3), 4);
        let c = random_dvector(&mut stream_rng(7, 4), 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let u = random_unitary(&mut seeded_rng(1), 4);
        let id = u.adjoint() * &u;
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - C64::new(e, 0.0)).norm() < 1e-12);
            }
        }
    }
}
