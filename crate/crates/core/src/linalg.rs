//! Dense complex kernels: top singular pair by block power iteration and a
//! one-sided Jacobi SVD used for singular value sums and as a cross-check.

use nalgebra::{DMatrix, DVector};

use crate::rng::{random_dvector, stream_rng};
use crate::C64;

/// Relative change of the Ritz value at which power iteration stops.
pub const POWER_TOL: f64 = 1e-12;
pub const POWER_MAX_ITER: usize = 100_000;
/// Seeded random columns added to the all-ones column of the iteration block.
pub const POWER_RESTARTS: usize = 3;
const RESTART_SEED: u64 = 0x0005_EED5_9EC7;

/// A linear map between coordinate spaces that can also apply its adjoint.
pub trait LinearMap {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &DVector<C64>) -> DVector<C64>;
    fn apply_adjoint(&self, y: &DVector<C64>) -> DVector<C64>;
}

impl LinearMap for DMatrix<C64> {
    fn nrows(&self) -> usize {
        self.nrows()
    }
    fn ncols(&self) -> usize {
        self.ncols()
    }
    fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        self * x
    }
    fn apply_adjoint(&self, y: &DVector<C64>) -> DVector<C64> {
        self.ad_mul(y)
    }
}

/// Largest singular value together with a unit right singular vector.
#[derive(Debug, Clone)]
pub struct TopSingular {
    pub value: f64,
    pub right: DVector<C64>,
}

/// Orthonormalizes the columns by two passes of modified Gram-Schmidt,
/// dropping columns that become numerically dependent.
fn orthonormalize(cols: Vec<DVector<C64>>) -> Vec<DVector<C64>> {
    let mut out: Vec<DVector<C64>> = Vec::with_capacity(cols.len());
    for mut c in cols {
        let scale = c.norm();
        for _ in 0..2 {
            for q in &out {
                let proj = q.dotc(&c);
                c.axpy(-proj, q, C64::new(1.0, 0.0));
            }
        }
        let n = c.norm();
        if n > 1e-10 * scale && n.is_finite() {
            out.push(c / C64::from(n));
        }
    }
    out
}

/// Rayleigh-Ritz on `span(basis)`: the largest eigenvalue of `V*A*AV` with
/// its unit vector in the span, plus the images `A v` for reuse.
fn ritz_top<M: LinearMap + ?Sized>(map: &M, basis: &[DVector<C64>]) -> (TopSingular, Vec<DVector<C64>>) {
    let images: Vec<DVector<C64>> = basis.iter().map(|v| map.apply(v)).collect();
    let k = basis.len();
    let gram = DMatrix::from_fn(k, k, |i, j| images[i].dotc(&images[j]));
    let eig = gram.symmetric_eigen();
    let (top, lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &l)| if l > acc.1 { (i, l) } else { acc });
    let u = eig.eigenvectors.column(top);
    let mut right = DVector::zeros(basis[0].len());
    for (i, v) in basis.iter().enumerate() {
        right.axpy(u[i], v, C64::new(1.0, 0.0));
    }
    let n = right.norm();
    right /= C64::from(n);
    (TopSingular { value: lambda.max(0.0), right }, images)
}

/// Top singular pair of `map` by block power iteration on `A*A`.
///
/// The block holds the normalized all-ones vector and [`POWER_RESTARTS`]
/// seeded random vectors. Each step applies `A*A` to every column,
/// re-orthonormalizes, and takes the Rayleigh-Ritz value on the span. The
/// Ritz value rises to `σ_1²` at a rate set by `σ_{b+1} / σ_1` for block
/// size `b`, so clustered top singular values do not stall it. Iteration
/// stops once the relative change of the Ritz value is at most
/// [`POWER_TOL`] and the geometric tail predicted from the last two changes
/// is also below it. The seeds depend only on the shape, so the result is
/// a pure function of the map.
pub fn top_singular<M: LinearMap + ?Sized>(map: &M) -> TopSingular {
    let n = map.ncols();
    if n == 0 || map.nrows() == 0 {
        return TopSingular { value: 0.0, right: DVector::zeros(n) };
    }
    let mut rng = stream_rng(RESTART_SEED, (map.nrows() as u64) << 32 | n as u64);
    let mut starts = vec![DVector::from_element(n, C64::new(1.0, 0.0))];
    starts.extend((0..POWER_RESTARTS).map(|_| random_dvector(&mut rng, n)));
    let mut basis = orthonormalize(starts);
    let mut best = TopSingular { value: 0.0, right: basis[0].clone() };
    let mut prev = f64::NEG_INFINITY;
    let mut prev_delta = f64::INFINITY;
    for _ in 0..POWER_MAX_ITER {
        let (ritz, images) = ritz_top(map, &basis);
        let rq = ritz.value;
        if rq >= best.value {
            best = ritz;
        }
        if rq == 0.0 || !rq.is_finite() {
            break;
        }
        let delta = (rq - prev).abs();
        if delta <= POWER_TOL * rq {
            let ratio = delta / prev_delta;
            if ratio.is_nan() || ratio >= 1.0 || delta * ratio / (1.0 - ratio) <= POWER_TOL * rq {
                break;
            }
        }
        prev = rq;
        prev_delta = delta;
        let next = orthonormalize(images.iter().map(|w| map.apply_adjoint(w)).collect());
        if next.is_empty() {
            break;
        }
        basis = next;
    }
    best.value = best.value.sqrt();
    best
}

/// Operator 2-norm (largest singular value) of `map`.
pub fn spectral_norm<M: LinearMap + ?Sized>(map: &M) -> f64 {
    top_singular(map).value
}

/// Singular values of `a` in descending order, by one-sided (Hestenes)
/// Jacobi rotations on the columns of `a` or of `a*`, whichever is narrower.
pub fn jacobi_singular_values(a: &DMatrix<C64>) -> Vec<f64> {
    let mut work = if a.ncols() > a.nrows() { a.adjoint() } else { a.clone() };
    let n = work.ncols();
    let m = work.nrows();
    if n == 0 || m == 0 {
        return Vec::new();
    }
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = C64::new(0.0, 0.0);
                for i in 0..m {
                    let ap = work[(i, p)];
                    let aq = work[(i, q)];
                    alpha += ap.norm_sqr();
                    beta += aq.norm_sqr();
                    gamma += ap.conj() * aq;
                }
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // rotate a_q by the phase of gamma so the 2x2 Gram block is real
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let ap = work[(i, p)];
                    let aq = work[(i, q)] * phase;
                    work[(i, p)] = ap * c - aq * s;
                    work[(i, q)] = ap * s + aq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n).map(|j| work.column(j).norm()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Largest singular value by Jacobi rotations. Used in quadrature loops over
/// many small matrices, where it is faster and more accurate than power
/// iteration; vectors (one row or column) short-circuit to the Euclidean norm.
pub fn dense_spectral_norm(a: &DMatrix<C64>) -> f64 {
    if a.ncols() == 1 || a.nrows() == 1 {
        return a.norm();
    }
    jacobi_singular_values(a).first().copied().unwrap_or(0.0)
}

/// Schatten-1 (trace) norm: the sum of singular values.
pub fn nuclear_norm(a: &DMatrix<C64>) -> f64 {
    jacobi_singular_values(a).iter().sum()
}

/// Stack matrices vertically; all must share the column count.
pub fn vstack(blocks: &[&DMatrix<C64>]) -> DMatrix<C64> {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(*b);
        r += b.nrows();
    }
    out
}
