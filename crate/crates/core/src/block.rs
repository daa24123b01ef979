//! Matrices of operators acting on truncations of ℓ²(H).
//!
//! An [`OpMatrix`] is an N×M grid of d×d blocks `T_kj`, indexed from 0 (the
//! block at `(k, j)` is the entry in row `k+1`, column `j+1` of the infinite
//! matrix it truncates). It acts on [`HSeq`]s of length M by
//! `A(x)_k = Σ_j T_kj x_j`.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, spectral_norm, top_singular};
use crate::operator::{rank_one, HVector, Operator};
use crate::rng::{random_dmatrix, random_opmatrix, random_unit_vector, stream_rng};
use crate::toeplitz::embed_scalar;
use crate::C64;

/// A finite sequence `(x_1, …, x_n)` of vectors of H.
#[derive(Debug, Clone, PartialEq)]
pub struct HSeq {
    dim: usize,
    items: Vec<HVector>,
}

impl HSeq {
    pub fn new(items: Vec<HVector>) -> Result<Self> {
        let dim = items.first().map(HVector::dim).ok_or(Error::Empty("sequence"))?;
        for x in &items {
            check_dim(dim, x.dim())?;
        }
        Ok(Self { dim, items })
    }

    pub fn zeros(len: usize, dim: usize) -> Self {
        Self { dim, items: vec![HVector::zeros(dim); len] }
    }

    /// `x e_j`: the vector `x` placed at position `j` of a length-`len` sequence.
    pub fn single(x: HVector, j: usize, len: usize) -> Self {
        let mut s = Self::zeros(len, x.dim());
        s.items[j] = x;
        s
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn items(&self) -> &[HVector] {
        &self.items
    }

    pub fn get(&self, j: usize) -> &HVector {
        &self.items[j]
    }

    pub fn norm(&self) -> f64 {
        self.items.iter().map(HVector::norm_squared).sum::<f64>().sqrt()
    }

    /// `<<x, y>> = Σ_j <x_j, y_j>`.
    pub fn inner(&self, other: &HSeq) -> Result<C64> {
        check_dim(self.len(), other.len())?;
        check_dim(self.dim, other.dim)?;
        self.items.iter().zip(&other.items).try_fold(C64::new(0.0, 0.0), |acc, (x, y)| Ok(acc + x.inner(y)?))
    }

    pub fn stacked(&self) -> DVector<C64> {
        DVector::from_iterator(self.len() * self.dim, self.items.iter().flat_map(|x| x.coords().iter().copied()))
    }

    pub fn from_stacked(v: &DVector<C64>, dim: usize) -> Self {
        let items = v
            .as_slice()
            .chunks(dim)
            .map(|c| HVector::from_dvector(DVector::from_column_slice(c)))
            .collect();
        Self { dim, items }
    }
}

/// A set of block positions used to mask a matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexMask {
    Row(usize),
    Col(usize),
    /// Positions `(k, k + l)`.
    Diagonal(i64),
    /// Positions with `j >= k`.
    UpperTriangle,
    /// Positions with `j <= k`.
    LowerTriangle,
    /// The leading `n × m` corner.
    Rectangle(usize, usize),
    Explicit(BTreeSet<(usize, usize)>),
}

impl IndexMask {
    pub fn contains(&self, k: usize, j: usize) -> bool {
        match self {
            IndexMask::Row(r) => k == *r,
            IndexMask::Col(c) => j == *c,
            IndexMask::Diagonal(l) => j as i64 - k as i64 == *l,
            IndexMask::UpperTriangle => j >= k,
            IndexMask::LowerTriangle => j <= k,
            IndexMask::Rectangle(n, m) => k < *n && j < *m,
            IndexMask::Explicit(set) => set.contains(&(k, j)),
        }
    }
}

/// Which side a multiplier acts from: `Right` means `B ∗ A`, `Left` means `A ∗ B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpMatrix {
    rows: usize,
    cols: usize,
    dim: usize,
    blocks: Vec<Operator>,
}

impl OpMatrix {
    /// Builds a matrix from row-major blocks.
    pub fn from_blocks(rows: usize, cols: usize, dim: usize, blocks: Vec<Operator>) -> Result<Self> {
        if rows == 0 || cols == 0 || dim == 0 {
            return Err(Error::Empty("matrix shape"));
        }
        check_dim(rows * cols, blocks.len())?;
        for b in &blocks {
            check_dim(dim, b.dim())?;
        }
        Ok(Self { rows, cols, dim, blocks })
    }

    pub fn from_fn(rows: usize, cols: usize, dim: usize, mut f: impl FnMut(usize, usize) -> Operator) -> Result<Self> {
        let mut blocks = Vec::with_capacity(rows * cols);
        for k in 0..rows {
            for j in 0..cols {
                blocks.push(f(k, j));
            }
        }
        Self::from_blocks(rows, cols, dim, blocks)
    }

    pub fn zeros(rows: usize, cols: usize, dim: usize) -> Self {
        Self { rows, cols, dim, blocks: vec![Operator::zeros(dim); rows * cols] }
    }

    /// Square matrix with identity blocks on the diagonal.
    pub fn block_identity(n: usize, dim: usize) -> Self {
        Self::from_fn(n, n, dim, |k, j| if k == j { Operator::identity(dim) } else { Operator::zeros(dim) })
            .expect("valid shape")
    }

    /// Every block equal to the identity.
    pub fn all_identity(rows: usize, cols: usize, dim: usize) -> Self {
        Self { rows, cols, dim, blocks: vec![Operator::identity(dim); rows * cols] }
    }

    /// Splits an `(rows·d) × (cols·d)` matrix into blocks.
    pub fn from_flat(rows: usize, cols: usize, dim: usize, flat: &DMatrix<C64>) -> Result<Self> {
        if flat.nrows() != rows * dim || flat.ncols() != cols * dim {
            return Err(Error::ShapeMismatch(format!(
                "flat matrix is {}x{}, expected {}x{}",
                flat.nrows(),
                flat.ncols(),
                rows * dim,
                cols * dim
            )));
        }
        Self::from_fn(rows, cols, dim, |k, j| {
            Operator::from_matrix_unchecked(flat.view((k * dim, j * dim), (dim, dim)).into_owned())
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block(&self, k: usize, j: usize) -> &Operator {
        &self.blocks[k * self.cols + j]
    }

    pub fn blocks(&self) -> &[Operator] {
        &self.blocks
    }

    pub fn row(&self, k: usize) -> Vec<Operator> {
        (0..self.cols).map(|j| self.block(k, j).clone()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<Operator> {
        (0..self.rows).map(|k| self.block(k, j).clone()).collect()
    }

    pub fn flatten(&self) -> DMatrix<C64> {
        let d = self.dim;
        let mut m = DMatrix::zeros(self.rows * d, self.cols * d);
        for k in 0..self.rows {
            for j in 0..self.cols {
                m.view_mut((k * d, j * d), (d, d)).copy_from(self.block(k, j).matrix());
            }
        }
        m
    }

    pub fn apply(&self, x: &HSeq) -> Result<HSeq> {
        check_dim(self.cols, x.len())?;
        check_dim(self.dim, x.dim())?;
        let items = (0..self.rows)
            .map(|k| {
                let mut acc = HVector::zeros(self.dim);
                for j in 0..self.cols {
                    acc.add_assign_scaled(&self.block(k, j).apply(x.get(j))?, C64::new(1.0, 0.0));
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(HSeq { dim: self.dim, items })
    }

    /// Operator norm on ℓ²(H) at this truncation.
    pub fn opnorm(&self) -> f64 {
        spectral_norm(&self.flatten())
    }

    /// The Schur product `self ∗ other = (T_kj S_kj)`.
    pub fn schur_product(&self, other: &OpMatrix) -> Result<OpMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "schur product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        check_dim(self.dim, other.dim)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(t, s)| t.compose(s)).collect::<Result<Vec<_>>>()?;
        Ok(Self { rows: self.rows, cols: self.cols, dim: self.dim, blocks })
    }

    /// The adjoint matrix with blocks `S_kj = T_jk*`.
    pub fn adjoint_matrix(&self) -> OpMatrix {
        Self::from_fn(self.cols, self.rows, self.dim, |k, j| self.block(j, k).adjoint()).expect("valid shape")
    }

    /// Keeps the blocks at positions in `mask` and zeroes the rest.
    pub fn project(&self, mask: &IndexMask) -> OpMatrix {
        Self::from_fn(self.rows, self.cols, self.dim, |k, j| {
            if mask.contains(k, j) {
                self.block(k, j).clone()
            } else {
                Operator::zeros(self.dim)
            }
        })
        .expect("valid shape")
    }

    /// `sup_{‖x‖=1} (Σ_{k,j} ‖T_kj x‖²)^{1/2}`.
    pub fn sot_norm_matrix(&self) -> f64 {
        sot_norm_seq(&self.blocks).expect("matrix blocks share a dimension")
    }

    /// `(Σ_{k,j} ‖T_kj‖²)^{1/2}`, the norm of ℓ²(ℕ², B(H)).
    pub fn l2_block_norm(&self) -> f64 {
        self.blocks.iter().map(|t| t.spectral_norm().powi(2)).sum::<f64>().sqrt()
    }

    /// `(Σ_j ‖C_j‖²_SOT)^{1/2}` over the columns.
    pub fn column_sot_l2(&self) -> f64 {
        (0..self.cols)
            .map(|j| sot_norm_seq(&self.column(j)).expect("nonempty").powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `(Σ_k ‖R_k*‖²_SOT)^{1/2}` over the rows with adjointed entries.
    pub fn adjoint_row_sot_l2(&self) -> f64 {
        (0..self.rows)
            .map(|k| sot_norm_seq(&adjoint_seq(&self.row(k))).expect("nonempty").powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_block_norm(&self) -> f64 {
        self.blocks.iter().map(Operator::spectral_norm).fold(0.0, f64::max)
    }

    /// `Σ_k Σ_j ‖T_kj x_j‖²`.
    pub fn double_sum(&self, x: &HSeq) -> Result<f64> {
        check_dim(self.cols, x.len())?;
        let mut total = 0.0;
        for k in 0..self.rows {
            for j in 0..self.cols {
                total += self.block(k, j).apply(x.get(j))?.norm_squared();
            }
        }
        Ok(total)
    }

    /// Truncation lower bound for the left or right Schur multiplier norm.
    ///
    /// Takes the largest ratio `‖B∗A‖/‖B‖` (right) or `‖A∗B‖/‖B‖` (left) over:
    /// every single-block matrix with a block `ẽ_a⊗e_b`, every matrix with all
    /// blocks equal to `ẽ_a⊗e_b`, `budget` scalar matrices embedded through a
    /// random unit vector, `budget` Gaussian block matrices, and `budget`
    /// random-perturbation refinement steps from the best Gaussian sample.
    pub fn multiplier_norm_lb(&self, side: Side, budget: usize, seed: u64) -> f64 {
        let (n, m, d) = (self.rows, self.cols, self.dim);
        let ratio = |b: &OpMatrix| -> f64 {
            let bn = b.opnorm();
            if bn == 0.0 {
                return 0.0;
            }
            let prod = match side {
                Side::Right => b.schur_product(self),
                Side::Left => self.schur_product(b),
            }
            .expect("same shape");
            prod.opnorm() / bn
        };
        let mut best = 0.0f64;

        let patterns: Vec<Operator> = (0..d)
            .flat_map(|a| (0..d).map(move |b| (a, b)))
            .map(|(a, b)| rank_one(&HVector::basis(d, a), &HVector::basis(d, b)).expect("same dim"))
            .collect();
        // single-block samples: the product has one nonzero block
        for k in 0..n {
            for j in 0..m {
                let t = self.block(k, j);
                for e in &patterns {
                    let prod = match side {
                        Side::Right => e.compose(t),
                        Side::Left => t.compose(e),
                    }
                    .expect("same dim");
                    best = best.max(prod.spectral_norm());
                }
            }
        }
        for e in &patterns {
            best = best.max(ratio(&OpMatrix { rows: n, cols: m, dim: d, blocks: vec![e.clone(); n * m] }));
        }

        let mut rng = stream_rng(seed, 0x4D55_4C54);
        for _ in 0..budget {
            let scalar = random_dmatrix(&mut rng, n, m);
            let z0 = random_unit_vector(&mut rng, d);
            best = best.max(ratio(&embed_scalar(&scalar, &z0)));
        }
        let mut champion: Option<(f64, OpMatrix)> = None;
        for _ in 0..budget {
            let b = random_opmatrix(&mut rng, n, m, d);
            let r = ratio(&b);
            if champion.as_ref().is_none_or(|(c, _)| r > *c) {
                champion = Some((r, b));
            }
        }
        if let Some((mut r_best, mut b_best)) = champion {
            let mut step = 0.5;
            for _ in 0..budget {
                let noise = random_opmatrix(&mut rng, n, m, d).flatten();
                let scale = step * b_best.flatten().norm() / noise.norm().max(f64::MIN_POSITIVE);
                let cand = OpMatrix::from_flat(n, m, d, &(b_best.flatten() + noise * C64::from(scale))).expect("shape");
                let r = ratio(&cand);
                if r > r_best {
                    r_best = r;
                    b_best = cand;
                } else {
                    step *= 0.9;
                }
            }
            best = best.max(r_best);
        }
        best
    }
}

pub(crate) fn adjoint_seq(seq: &[Operator]) -> Vec<Operator> {
    seq.iter().map(Operator::adjoint).collect()
}

fn common_dim(seq: &[Operator]) -> Result<usize> {
    let d = seq.first().map(Operator::dim).ok_or(Error::Empty("operator sequence"))?;
    for t in seq {
        check_dim(d, t.dim())?;
    }
    Ok(d)
}

fn stacked(seq: &[Operator]) -> DMatrix<C64> {
    let mats: Vec<&DMatrix<C64>> = seq.iter().map(Operator::matrix).collect();
    linalg::vstack(&mats)
}

/// `sup_{‖x‖=1} (Σ_n ‖T_n x‖²)^{1/2}`, computed exactly as the spectral norm
/// of the vertically stacked matrix `[T_1; T_2; …]`.
pub fn sot_norm_seq(seq: &[Operator]) -> Result<f64> {
    common_dim(seq)?;
    Ok(spectral_norm(&stacked(seq)))
}

/// Lower bound for `sup_{‖x‖=‖y‖=1} (Σ_n |<T_n x, y>|²)^{1/2}`.
///
/// Alternating maximization: for fixed `y` the best `x` is the top right
/// singular vector of the matrix with rows `y* T_n`; for fixed `x` the best
/// `y` is the top right singular vector of the matrix with rows `(T_n x)*`.
/// The first start is the maximizer of the stacked (SOT) problem, followed
/// by `restarts` seeded random unit vectors.
pub fn weak_l2_norm(seq: &[Operator], restarts: usize) -> Result<f64> {
    let d = common_dim(seq)?;
    let count = seq.len();
    let objective_y = |y: &DVector<C64>| -> DMatrix<C64> {
        // rows y* T_n
        let mut m = DMatrix::zeros(count, d);
        for (n, t) in seq.iter().enumerate() {
            let row = t.matrix().ad_mul(y).adjoint();
            m.row_mut(n).copy_from(&row);
        }
        m
    };
    let objective_x = |x: &DVector<C64>| -> DMatrix<C64> {
        let mut m = DMatrix::zeros(count, d);
        for (n, t) in seq.iter().enumerate() {
            let row = (t.matrix() * x).adjoint();
            m.row_mut(n).copy_from(&row);
        }
        m
    };
    let climb = |mut x: DVector<C64>| -> f64 {
        let mut value = 0.0f64;
        for _ in 0..10_000 {
            let y = top_singular(&objective_x(&x));
            if y.value == 0.0 {
                return value;
            }
            let next = top_singular(&objective_y(&y.right));
            let improved = next.value > value * (1.0 + 1e-14);
            value = value.max(next.value);
            if !improved {
                break;
            }
            x = next.right;
        }
        value
    };

    let mut best = climb(top_singular(&stacked(seq)).right);
    let mut rng = stream_rng(crate::rng::DEFAULT_SEED, 0x5745_414B);
    for _ in 0..restarts {
        let y0 = random_unit_vector(&mut rng, d);
        let x0 = top_singular(&objective_y(y0.coords())).right;
        best = best.max(climb(x0));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_hseq, random_operator, random_vector, seeded_rng};

    #[test]
    fn single_block_action() {
        let mut rng = seeded_rng(1);
        let t = random_operator(&mut rng, 2);
        let mut a = OpMatrix::zeros(3, 4, 2);
        a.blocks[4 + 2] = t.clone();
        let x = random_vector(&mut rng, 2);
        let out = a.apply(&HSeq::single(x.clone(), 2, 4)).unwrap();
        let expected = HSeq::single(t.apply(&x).unwrap(), 1, 3);
        assert!((out.stacked() - expected.stacked()).norm() < 1e-14);
    }

    #[test]
    fn block_identity_acts_as_identity() {
        let mut rng = seeded_rng(2);
        let x = random_hseq(&mut rng, 5, 3);
        let out = OpMatrix::block_identity(5, 3).apply(&x).unwrap();
        assert_eq!(out, x);
    }

    #[test]
    fn apply_matches_flattened_matvec() {
        let mut rng = seeded_rng(3);
        let a = random_opmatrix(&mut rng, 4, 4, 2);
        let x = random_hseq(&mut rng, 4, 2);
        let direct = a.apply(&x).unwrap().stacked();
        let flat = a.flatten() * x.stacked();
        assert!((direct - flat).norm() < 1e-13);
    }

    #[test]
    fn apply_rejects_wrong_length() {
        let a = OpMatrix::zeros(2, 3, 2);
        assert!(a.apply(&HSeq::zeros(2, 2)).is_err());
        assert!(a.schur_product(&OpMatrix::zeros(3, 2, 2)).is_err());
    }

    #[test]
    fn flatten_roundtrip() {
        let mut rng = seeded_rng(4);
        let a = random_opmatrix(&mut rng, 3, 2, 3);
        assert_eq!(OpMatrix::from_flat(3, 2, 3, &a.flatten()).unwrap(), a);
    }

    #[test]
    fn block_diagonal_norm_is_max_block_norm() {
        let mut rng = seeded_rng(5);
        let blocks: Vec<Operator> = (0..4).map(|_| random_operator(&mut rng, 2)).collect();
        let a = OpMatrix::from_fn(4, 4, 2, |k, j| if k == j { blocks[k].clone() } else { Operator::zeros(2) }).unwrap();
        let expected = blocks.iter().map(Operator::spectral_norm).fold(0.0, f64::max);
        assert!((a.opnorm() - expected).abs() < 1e-10);
    }

    #[test]
    fn scalar_shift_has_unit_norm() {
        for n in 1..10 {
            let one = Operator::scalar(C64::new(1.0, 0.0));
            // symbol e^{it}: entries μ̂(j-k) nonzero only for j - k = -1
            let a = OpMatrix::from_fn(n, n, 1, |k, j| if k == j + 1 { one.clone() } else { Operator::zeros(1) }).unwrap();
            let expected = if n == 1 { 0.0 } else { 1.0 };
            assert!((a.opnorm() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn schur_with_identity_blocks_and_scalar_case() {
        let mut rng = seeded_rng(6);
        let a = random_opmatrix(&mut rng, 3, 3, 2);
        assert_eq!(a.schur_product(&OpMatrix::all_identity(3, 3, 2)).unwrap(), a);
        let s = random_opmatrix(&mut rng, 3, 3, 1);
        let t = random_opmatrix(&mut rng, 3, 3, 1);
        let p = s.schur_product(&t).unwrap();
        for k in 0..3 {
            for j in 0..3 {
                let e = s.block(k, j).entry(0, 0) * t.block(k, j).entry(0, 0);
                assert!((p.block(k, j).entry(0, 0) - e).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn schur_product_is_not_commutative() {
        let mut rng = seeded_rng(7);
        let a = random_opmatrix(&mut rng, 2, 2, 2);
        let b = random_opmatrix(&mut rng, 2, 2, 2);
        assert_ne!(a.schur_product(&b).unwrap(), b.schur_product(&a).unwrap());
    }

    #[test]
    fn adjoint_matrix_properties() {
        let mut rng = seeded_rng(8);
        let a = random_opmatrix(&mut rng, 3, 4, 2);
        let adj = a.adjoint_matrix();
        assert_eq!(adj.rows(), 4);
        assert_eq!(adj.adjoint_matrix(), a);
        assert!((adj.opnorm() - a.opnorm()).abs() < 1e-10);
        for j in 0..4 {
            let row = adj.row(j);
            let col = a.column(j);
            for k in 0..3 {
                assert_eq!(row[k], col[k].adjoint());
            }
        }
    }

    #[test]
    fn projections_match_closed_forms() {
        let mut rng = seeded_rng(9);
        let a = random_opmatrix(&mut rng, 4, 5, 2);
        for l in -3..=4i64 {
            let expected = (0..4)
                .filter_map(|k| {
                    let j = k as i64 + l;
                    (0..5).contains(&j).then(|| a.block(k, j as usize).spectral_norm())
                })
                .fold(0.0, f64::max);
            assert!((a.project(&IndexMask::Diagonal(l)).opnorm() - expected).abs() < 1e-9);
        }
        for j in 0..5 {
            let col = sot_norm_seq(&a.column(j)).unwrap();
            assert!((a.project(&IndexMask::Col(j)).opnorm() - col).abs() < 1e-9);
        }
        for k in 0..4 {
            let row = sot_norm_seq(&adjoint_seq(&a.row(k))).unwrap();
            assert!((a.project(&IndexMask::Row(k)).opnorm() - row).abs() < 1e-9);
        }
    }

    #[test]
    fn rectangle_norms_are_monotone() {
        let mut rng = seeded_rng(10);
        let a = random_opmatrix(&mut rng, 5, 5, 2);
        let mut prev = 0.0;
        for n in 1..=5 {
            let v = a.project(&IndexMask::Rectangle(n, n)).opnorm();
            assert!(v >= prev - 1e-10);
            assert!(v <= a.opnorm() + 1e-10);
            prev = v;
        }
        assert!((prev - a.opnorm()).abs() < 1e-10);
    }

    #[test]
    fn masks_resolve_expected_positions() {
        assert!(IndexMask::UpperTriangle.contains(1, 3));
        assert!(!IndexMask::UpperTriangle.contains(3, 1));
        assert!(IndexMask::LowerTriangle.contains(2, 2));
        assert!(IndexMask::Diagonal(-1).contains(2, 1));
        let set: BTreeSet<_> = [(0, 1)].into_iter().collect();
        assert!(IndexMask::Explicit(set).contains(0, 1));
    }

    #[test]
    fn sot_norm_of_rank_one_family() {
        let mut rng = seeded_rng(11);
        let d = 4;
        let x = random_vector(&mut rng, d);
        let seq: Vec<Operator> = (0..d).map(|n| rank_one(&HVector::basis(d, n), &x).unwrap()).collect();
        assert!((sot_norm_seq(&seq).unwrap() - x.norm()).abs() < 1e-12);
        assert!((weak_l2_norm(&seq, 4).unwrap() - x.norm()).abs() < 1e-9);
    }

    #[test]
    fn sot_norm_dominates_sampled_sup() {
        let mut rng = seeded_rng(12);
        let seq: Vec<Operator> = (0..3).map(|_| random_operator(&mut rng, 3)).collect();
        let exact = sot_norm_seq(&seq).unwrap();
        let mut best = 0.0f64;
        for _ in 0..10_000 {
            let x = random_unit_vector(&mut rng, 3);
            let v: f64 = seq.iter().map(|t| t.apply(&x).unwrap().norm_squared()).sum::<f64>().sqrt();
            assert!(v <= exact + 1e-12);
            best = best.max(v);
        }
        assert!(best >= 0.98 * exact);
    }

    #[test]
    fn weak_norm_of_single_operator_is_spectral() {
        let mut rng = seeded_rng(13);
        let t = random_operator(&mut rng, 4);
        let w = weak_l2_norm(std::slice::from_ref(&t), 0).unwrap();
        assert!((w - t.spectral_norm()).abs() < 1e-9);
    }

    #[test]
    fn weak_norm_bounded_by_sot_and_monotone_in_restarts() {
        let mut rng = seeded_rng(14);
        let seq: Vec<Operator> = (0..4).map(|_| random_operator(&mut rng, 3)).collect();
        let sot = sot_norm_seq(&seq).unwrap();
        let mut prev = 0.0;
        for r in [0, 2, 8] {
            let w = weak_l2_norm(&seq, r).unwrap();
            assert!(w <= sot + 1e-10);
            assert!(w >= prev);
            prev = w;
        }
    }

    #[test]
    fn weak_norm_of_diagonal_family_matches_basis_search() {
        let mut rng = seeded_rng(15);
        let d = 3;
        let seq: Vec<Operator> = (0..4)
            .map(|_| {
                let diag = DVector::from_fn(d, |_, _| crate::rng::complex_normal(&mut rng));
                Operator::from_matrix(DMatrix::from_diagonal(&diag)).unwrap()
            })
            .collect();
        // commuting diagonal family: the sup sits on a basis vector
        let oracle = (0..d)
            .map(|i| seq.iter().map(|t| t.entry(i, i).norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        assert!((weak_l2_norm(&seq, 8).unwrap() - oracle).abs() < 1e-9);
    }

    #[test]
    fn multiplier_lb_of_identity_blocks_is_one() {
        let a = OpMatrix::all_identity(3, 3, 2);
        let lb = a.multiplier_norm_lb(Side::Right, 8, 1);
        assert!((lb - 1.0).abs() < 1e-9);
        let mut rng = seeded_rng(16);
        let b = random_opmatrix(&mut rng, 3, 3, 2);
        assert!((b.schur_product(&a).unwrap().opnorm() - b.opnorm()).abs() < 1e-12);
    }

    #[test]
    fn multiplier_lb_of_identity_diagonal_is_one() {
        let d = 2;
        let a = OpMatrix::from_fn(4, 4, d, |k, j| if j == k + 1 { Operator::identity(d) } else { Operator::zeros(d) }).unwrap();
        for side in [Side::Left, Side::Right] {
            let lb = a.multiplier_norm_lb(side, 8, 2);
            assert!((lb - 1.0).abs() < 1e-9, "{side:?}: {lb}");
        }
        // B ∗ A is the diagonal projection of B
        let mut rng = seeded_rng(17);
        let b = random_opmatrix(&mut rng, 4, 4, d);
        assert_eq!(b.schur_product(&a).unwrap(), b.project(&IndexMask::Diagonal(1)));
    }

    #[test]
    fn multiplier_lb_is_deterministic() {
        let mut rng = seeded_rng(18);
        let a = random_opmatrix(&mut rng, 3, 3, 2);
        assert_eq!(a.multiplier_norm_lb(Side::Left, 6, 9), a.multiplier_norm_lb(Side::Left, 6, 9));
    }
}
