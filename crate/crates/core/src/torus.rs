//! Trigonometric polynomials on the circle and the 2-torus with scalar,
//! vector, operator or tensor coefficients, plus uniform-grid quadrature.
//!
//! `φ_k(t) = e^{ikt}`. Polynomial integrands are integrated on exact grids;
//! norm integrands (which are not polynomials) on oversampled grids.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use crate::block::{HSeq, OpMatrix};
use crate::error::{check_dim, Error, Result};
use crate::operator::{HVector, Operator, TensorElement};
use crate::C64;

/// Oversampling factor for grids that integrate norms of polynomials.
pub const OVERSAMPLE: usize = 8;

pub fn phi(k: i64, t: f64) -> C64 {
    C64::from_polar(1.0, k as f64 * t)
}

/// Values that can serve as Fourier coefficients.
pub trait Coefficient: Clone {
    fn zero(dim: usize) -> Self;
    /// `self += c · other`.
    fn axpy(&mut self, c: C64, other: &Self);
}

impl Coefficient for C64 {
    fn zero(_dim: usize) -> Self {
        C64::new(0.0, 0.0)
    }
    fn axpy(&mut self, c: C64, other: &Self) {
        *self += c * other;
    }
}

impl Coefficient for HVector {
    fn zero(dim: usize) -> Self {
        HVector::zeros(dim)
    }
    fn axpy(&mut self, c: C64, other: &Self) {
        self.add_assign_scaled(other, c);
    }
}

impl Coefficient for Operator {
    fn zero(dim: usize) -> Self {
        Operator::zeros(dim)
    }
    fn axpy(&mut self, c: C64, other: &Self) {
        self.add_assign_scaled(other, c);
    }
}

impl Coefficient for TensorElement {
    fn zero(dim: usize) -> Self {
        TensorElement::zero(dim)
    }
    fn axpy(&mut self, c: C64, other: &Self) {
        for (x, y) in other.scale(c).terms() {
            self.push(x.clone(), y.clone()).expect("tensor dimensions agree");
        }
    }
}

/// Finitely supported `k ↦ c_k`, evaluated as `Σ_k c_k e^{ikt}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly<V> {
    dim: usize,
    coeffs: BTreeMap<i64, V>,
}

impl<V: Coefficient> TrigPoly<V> {
    pub fn new(dim: usize) -> Self {
        Self { dim, coeffs: BTreeMap::new() }
    }

    pub fn from_coeffs(dim: usize, coeffs: impl IntoIterator<Item = (i64, V)>) -> Self {
        Self { dim, coeffs: coeffs.into_iter().collect() }
    }

    pub fn monomial(dim: usize, k: i64, v: V) -> Self {
        Self::from_coeffs(dim, [(k, v)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn set(&mut self, k: i64, v: V) {
        self.coeffs.insert(k, v);
    }

    pub fn coeff(&self, k: i64) -> Option<&V> {
        self.coeffs.get(&k)
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, V> {
        &self.coeffs
    }

    /// Smallest and largest frequency carried.
    pub fn degree_bounds(&self) -> Option<(i64, i64)> {
        Some((*self.coeffs.keys().next()?, *self.coeffs.keys().next_back()?))
    }

    /// Number of frequencies spanned, `max_k - min_k + 1` (0 when empty).
    pub fn width(&self) -> usize {
        self.degree_bounds().map_or(0, |(lo, hi)| (hi - lo + 1) as usize)
    }

    pub fn eval(&self, t: f64) -> V {
        let mut acc = V::zero(self.dim);
        for (k, c) in &self.coeffs {
            acc.axpy(phi(*k, t), c);
        }
        acc
    }

    pub fn map<W: Coefficient>(&self, dim: usize, f: impl Fn(i64, &V) -> W) -> TrigPoly<W> {
        TrigPoly { dim, coeffs: self.coeffs.iter().map(|(k, v)| (*k, f(*k, v))).collect() }
    }
}

/// Finitely supported `(a, b) ↦ c_{ab}`, evaluated as `Σ c_{ab} e^{ias} e^{ibt}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly2<V> {
    dim: usize,
    coeffs: BTreeMap<(i64, i64), V>,
}

impl<V: Coefficient> TrigPoly2<V> {
    pub fn new(dim: usize) -> Self {
        Self { dim, coeffs: BTreeMap::new() }
    }

    pub fn set(&mut self, a: i64, b: i64, v: V) {
        self.coeffs.insert((a, b), v);
    }

    pub fn coeff(&self, a: i64, b: i64) -> Option<&V> {
        self.coeffs.get(&(a, b))
    }

    pub fn coeffs(&self) -> &BTreeMap<(i64, i64), V> {
        &self.coeffs
    }

    pub fn eval(&self, s: f64, t: f64) -> V {
        let mut acc = V::zero(self.dim);
        for ((a, b), c) in &self.coeffs {
            acc.axpy(phi(*a, s) * phi(*b, t), c);
        }
        acc
    }
}

/// Uniform grid `t_g = 2πg/G` with weight `1/G` per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    size: usize,
}

impl Grid {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::GridTooSmall { size, required: 1 });
        }
        Ok(Self { size })
    }

    /// Smallest grid on which polynomials spanning `width` frequencies have
    /// exactly recoverable coefficients.
    pub fn exact_for_width(width: usize) -> Self {
        Self { size: width.max(1) }
    }

    pub fn oversampled(width: usize) -> Self {
        Self { size: (OVERSAMPLE * width).max(1) }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn node(&self, g: usize) -> f64 {
        TAU * g as f64 / self.size as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.size).map(|g| self.node(g))
    }

    pub fn require(&self, required: usize) -> Result<()> {
        if self.size < required {
            Err(Error::GridTooSmall { size: self.size, required })
        } else {
            Ok(())
        }
    }

    /// `∫ f dt/2π` by the rectangle rule, summed in node order.
    pub fn mean(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes().map(f).sum::<f64>() / self.size as f64
    }

    pub fn mean_complex(&self, f: impl Fn(f64) -> C64) -> C64 {
        self.nodes().map(f).sum::<C64>() / self.size as f64
    }
}

/// Fourier coefficients `f̂(k) = (1/G) Σ_g f(t_g) e^{-ikt_g}` for `lo ≤ k ≤ hi`.
pub fn dft_coefficients<V: Coefficient>(dim: usize, samples: &[V], lo: i64, hi: i64) -> Result<TrigPoly<V>> {
    let width = (hi - lo + 1).max(0) as usize;
    let grid = Grid::new(samples.len())?;
    grid.require(width)?;
    let inv = 1.0 / samples.len() as f64;
    let coeffs = (lo..=hi).map(|k| {
        let mut acc = V::zero(dim);
        for (g, v) in samples.iter().enumerate() {
            acc.axpy(phi(-k, grid.node(g)) * inv, v);
        }
        (k, acc)
    });
    Ok(TrigPoly::from_coeffs(dim, coeffs))
}

/// Bivariate coefficients from samples on a `G × G` grid, `samples[gs * G + gt]`.
pub fn dft2_coefficients<V: Coefficient>(
    dim: usize,
    samples: &[V],
    grid: Grid,
    (a_lo, a_hi): (i64, i64),
    (b_lo, b_hi): (i64, i64),
) -> Result<TrigPoly2<V>> {
    check_dim(grid.size() * grid.size(), samples.len())?;
    grid.require(((a_hi - a_lo + 1).max(b_hi - b_lo + 1)).max(0) as usize)?;
    let g2 = (grid.size() * grid.size()) as f64;
    let mut out = TrigPoly2::new(dim);
    for a in a_lo..=a_hi {
        for b in b_lo..=b_hi {
            let mut acc = V::zero(dim);
            for gs in 0..grid.size() {
                for gt in 0..grid.size() {
                    let w = phi(-a, grid.node(gs)) * phi(-b, grid.node(gt)) / g2;
                    acc.axpy(w, &samples[gs * grid.size() + gt]);
                }
            }
            out.set(a, b, acc);
        }
    }
    Ok(out)
}

/// `h_x(t) = Σ_j x_j φ_j(t)`, with the first item at frequency 1.
pub fn h_poly(x: &HSeq) -> TrigPoly<HVector> {
    TrigPoly::from_coeffs(x.dim(), x.items().iter().enumerate().map(|(j, v)| (j as i64 + 1, v.clone())))
}

/// `(∫ ‖p(t)‖² dt/2π)^{1/2}` on the grid `grid`.
pub fn l2_norm(p: &TrigPoly<HVector>, grid: Grid) -> f64 {
    grid.mean(|t| p.eval(t).norm_squared()).sqrt()
}

/// The symbol `A_{N,M}(s,t) = Σ_k Σ_j T_kj conj(φ_j(s)) φ_k(t)`: the block at
/// 0-based `(k, j)` sits at frequency `(-(j+1), k+1)`.
pub fn block_symbol(a: &OpMatrix) -> TrigPoly2<Operator> {
    let mut p = TrigPoly2::new(a.dim());
    for k in 0..a.rows() {
        for j in 0..a.cols() {
            let t = a.block(k, j);
            if !t.is_zero() {
                p.set(-(j as i64 + 1), k as i64 + 1, t.clone());
            }
        }
    }
    p
}

/// Partial values `(∫ ‖Σ_{n≤N} T_n φ_n(t)‖² dt/2π)^{1/2}` for `N = 1..len`.
///
/// The grid must have at least `8·len` nodes.
pub fn tilde_h2_seq(seq: &[Operator], grid: Grid) -> Result<Vec<f64>> {
    let d = seq.first().map(Operator::dim).ok_or(Error::Empty("operator sequence"))?;
    for t in seq {
        check_dim(d, t.dim())?;
    }
    grid.require(OVERSAMPLE * seq.len())?;
    let mut sums = vec![0.0; seq.len()];
    for t in grid.nodes() {
        let mut partial = Operator::zeros(d);
        for (n, op) in seq.iter().enumerate() {
            partial.axpy(phi(n as i64 + 1, t), op);
            sums[n] += partial.spectral_norm().powi(2);
        }
    }
    Ok(sums.into_iter().map(|s| (s / grid.size() as f64).sqrt()).collect())
}

/// `sup` over leading `n × m` corners of `(∬ ‖A_{n,m}(s,t)‖² ds/2π dt/2π)^{1/2}`.
///
/// The grid (used on both axes) must have at least `8·max(N, M)` nodes.
pub fn tilde_h2_matrix(a: &OpMatrix, grid: Grid) -> Result<f64> {
    grid.require(OVERSAMPLE * a.rows().max(a.cols()))?;
    let (rows, cols, d) = (a.rows(), a.cols(), a.dim());
    let mut sums = vec![0.0; rows * cols];
    for s in grid.nodes() {
        for t in grid.nodes() {
            let mut corner = vec![Operator::zeros(d); cols];
            for k in 0..rows {
                let mut row_prefix = Operator::zeros(d);
                let wt = phi(k as i64 + 1, t);
                for j in 0..cols {
                    row_prefix.axpy(phi(-(j as i64 + 1), s) * wt, a.block(k, j));
                    corner[j].axpy(C64::new(1.0, 0.0), &row_prefix);
                    sums[k * cols + j] += corner[j].spectral_norm().powi(2);
                }
            }
        }
    }
    let g2 = (grid.size() * grid.size()) as f64;
    Ok(sums.into_iter().map(|s| (s / g2).sqrt()).fold(0.0, f64::max))
}

/// `B_A(h_x, h_y) = ∬ J(A_{N,M}(s,t))(h_x(s) ⊗ h_y(t)) ds/2π dt/2π` on the
/// exact grid with `N + M + 1` nodes per axis.
pub fn bilinear_ba(a: &OpMatrix, x: &HSeq, y: &HSeq) -> Result<C64> {
    check_dim(a.cols(), x.len())?;
    check_dim(a.rows(), y.len())?;
    check_dim(a.dim(), x.dim())?;
    check_dim(a.dim(), y.dim())?;
    let grid = Grid::exact_for_width(a.rows() + a.cols() + 1);
    let symbol = block_symbol(a);
    let hx = h_poly(x);
    let hy = h_poly(y);
    let hx_s: Vec<HVector> = grid.nodes().map(|s| hx.eval(s)).collect();
    let hy_t: Vec<HVector> = grid.nodes().map(|t| hy.eval(t)).collect();
    let mut total = C64::new(0.0, 0.0);
    for (gs, s) in grid.nodes().enumerate() {
        for (gt, t) in grid.nodes().enumerate() {
            let op = symbol.eval(s, t);
            total += crate::operator::pairing_j(&op, &hx_s[gs], &hy_t[gt])?;
        }
    }
    Ok(total / (grid.size() * grid.size()) as f64)
}

/// An L¹ quadrature value together with the grid it was computed on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureValue {
    pub value: f64,
    pub grid_size: usize,
}

/// `∫ ‖F(t)‖_{H⊗̂H} dt/2π` for a tensor field evaluable at the grid nodes.
pub fn l1_tensor_norm(field: impl Fn(f64) -> TensorElement, grid: Grid) -> QuadratureValue {
    QuadratureValue { value: grid.mean(|t| field(t).trace_norm()), grid_size: grid.size() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::rank_one;
    use crate::rng::{random_hseq, random_opmatrix, random_operator, random_vector, seeded_rng};

    #[test]
    fn exact_grid_integrates_to_constant_coefficient() {
        let mut rng = seeded_rng(1);
        let p = TrigPoly::from_coeffs(1, (-3..=4).map(|k| (k, crate::rng::complex_normal(&mut rng))));
        let grid = Grid::exact_for_width(p.width());
        let integral = grid.mean_complex(|t| p.eval(t));
        assert!((integral - p.coeff(0).copied().unwrap()).norm() < 1e-13);
    }

    #[test]
    fn dft_roundtrip_recovers_coefficients() {
        let mut rng = seeded_rng(2);
        let x = random_hseq(&mut rng, 5, 3);
        let h = h_poly(&x);
        let grid = Grid::exact_for_width(h.width());
        let samples: Vec<HVector> = grid.nodes().map(|t| h.eval(t)).collect();
        let back = dft_coefficients(3, &samples, 1, 5).unwrap();
        for j in 0..5 {
            let c = back.coeff(j as i64 + 1).unwrap();
            assert!((c.coords() - x.get(j).coords()).norm() < 1e-13);
        }
        assert!(dft_coefficients(3, &samples[..3], 1, 5).is_err());
    }

    #[test]
    fn h_poly_monomial_and_plancherel() {
        let mut rng = seeded_rng(3);
        let v = random_vector(&mut rng, 2);
        let h = h_poly(&HSeq::single(v.clone(), 0, 1));
        assert_eq!(h.coeffs().len(), 1);
        assert_eq!(h.coeff(1), Some(&v));
        for len in 1..8 {
            let x = random_hseq(&mut rng, len, 3);
            let n = l2_norm(&h_poly(&x), Grid::exact_for_width(2 * len + 1));
            assert!((n - x.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn block_symbol_monomial_and_origin() {
        let mut rng = seeded_rng(4);
        let a = random_opmatrix(&mut rng, 3, 2, 2);
        let p = block_symbol(&a);
        assert_eq!(p.coeff(-2, 3), Some(a.block(2, 1)));
        let at_zero = p.eval(0.0, 0.0);
        let mut sum = Operator::zeros(2);
        for t in a.blocks() {
            sum = sum.add(t).unwrap();
        }
        assert!((at_zero.matrix() - sum.matrix()).norm() < 1e-13);
    }

    #[test]
    fn block_symbol_dft_recovers_blocks() {
        let mut rng = seeded_rng(5);
        let a = random_opmatrix(&mut rng, 3, 3, 2);
        let p = block_symbol(&a);
        let grid = Grid::exact_for_width(7);
        let mut samples = Vec::new();
        for s in grid.nodes() {
            for t in grid.nodes() {
                samples.push(p.eval(s, t));
            }
        }
        let back = dft2_coefficients(2, &samples, grid, (-3, -1), (1, 3)).unwrap();
        for k in 0..3 {
            for j in 0..3 {
                let c = back.coeff(-(j as i64 + 1), k as i64 + 1).unwrap();
                assert!((c.matrix() - a.block(k, j).matrix()).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn tilde_h2_diagonal_rank_one_is_one() {
        let d = 5;
        let seq: Vec<Operator> = (0..d).map(|j| rank_one(&HVector::basis(d, j), &HVector::basis(d, j)).unwrap()).collect();
        let partials = tilde_h2_seq(&seq, Grid::oversampled(d)).unwrap();
        for p in partials {
            assert!((p - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn tilde_h2_row_rank_one_grows_like_sqrt_n() {
        let mut rng = seeded_rng(6);
        let d = 6;
        let x = random_vector(&mut rng, d);
        let seq: Vec<Operator> = (0..d).map(|n| rank_one(&HVector::basis(d, n), &x).unwrap()).collect();
        let partials = tilde_h2_seq(&seq, Grid::oversampled(d)).unwrap();
        for (n, p) in partials.iter().enumerate() {
            assert!((p - x.norm() * ((n + 1) as f64).sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn tilde_h2_single_term_and_grid_check() {
        let mut rng = seeded_rng(7);
        let t = random_operator(&mut rng, 3);
        let v = tilde_h2_seq(std::slice::from_ref(&t), Grid::oversampled(1)).unwrap();
        assert!((v[0] - t.spectral_norm()).abs() < 1e-12);
        assert!(matches!(
            tilde_h2_seq(&[t.clone(), t], Grid::new(10).unwrap()),
            Err(Error::GridTooSmall { .. })
        ));
    }

    #[test]
    fn tilde_h2_matrix_cases() {
        let mut rng = seeded_rng(8);
        let t = random_operator(&mut rng, 2);
        let single = OpMatrix::from_blocks(1, 1, 2, vec![t.clone()]).unwrap();
        assert!((tilde_h2_matrix(&single, Grid::oversampled(1)).unwrap() - t.spectral_norm()).abs() < 1e-12);

        let row = random_opmatrix(&mut rng, 1, 3, 2);
        let grid = Grid::oversampled(3);
        let seq_max = tilde_h2_seq(&row.row(0), grid).unwrap().into_iter().fold(0.0, f64::max);
        assert!((tilde_h2_matrix(&row, grid).unwrap() - seq_max).abs() < 1e-12);

        let a = random_opmatrix(&mut rng, 3, 3, 2);
        let h2 = tilde_h2_matrix(&a, grid).unwrap();
        assert!(h2 >= a.opnorm() - 1e-6);
        assert!(h2 >= a.sot_norm_matrix() - 1e-6);
        for k in 0..3 {
            let r = tilde_h2_seq(&a.row(k), grid).unwrap().into_iter().fold(0.0, f64::max);
            let c = tilde_h2_seq(&a.column(k), grid).unwrap().into_iter().fold(0.0, f64::max);
            assert!(r <= h2 + 1e-6 && c <= h2 + 1e-6);
        }
    }

    #[test]
    fn bilinear_form_matches_direct_evaluation() {
        let mut rng = seeded_rng(9);
        for _ in 0..10 {
            let a = random_opmatrix(&mut rng, 4, 4, 2);
            let x = random_hseq(&mut rng, 4, 2);
            let y = random_hseq(&mut rng, 4, 2);
            let direct = a.apply(&x).unwrap().inner(&y).unwrap();
            assert!((bilinear_ba(&a, &x, &y).unwrap() - direct).norm() < 1e-9);
        }
    }

    #[test]
    fn bilinear_form_single_block_and_zero() {
        let mut rng = seeded_rng(10);
        let t = random_operator(&mut rng, 2);
        let a = OpMatrix::from_fn(2, 3, 2, |k, j| if (k, j) == (1, 2) { t.clone() } else { Operator::zeros(2) }).unwrap();
        let x = random_hseq(&mut rng, 3, 2);
        let y = random_hseq(&mut rng, 2, 2);
        let expected = crate::operator::pairing_j(&t, x.get(2), y.get(1)).unwrap();
        assert!((bilinear_ba(&a, &x, &y).unwrap() - expected).norm() < 1e-12);
        assert_eq!(bilinear_ba(&a, &HSeq::zeros(3, 2), &y).unwrap().norm(), 0.0);
        assert!(bilinear_ba(&a, &y, &y).is_err());
    }

    #[test]
    fn l1_tensor_norm_of_unimodular_fields() {
        let mut rng = seeded_rng(11);
        let x = random_vector(&mut rng, 3);
        let y = random_vector(&mut rng, 3);
        let grid = Grid::new(16).unwrap();
        let constant = l1_tensor_norm(|_| TensorElement::elementary(x.clone(), y.clone()).unwrap(), grid);
        assert!((constant.value - x.norm() * y.norm()).abs() < 1e-12);
        assert_eq!(constant.grid_size, 16);
        let rotating = l1_tensor_norm(|t| TensorElement::elementary(x.scale(phi(1, t)), y.clone()).unwrap(), grid);
        assert!((rotating.value - x.norm() * y.norm()).abs() < 1e-12);
    }
}
