//! Toeplitz matrices of operator-valued measures and their action as Schur
//! multipliers.
//!
//! The Toeplitz matrix of `μ` has blocks `T_kj = μ̂(j - k)`. At `d = 1` and
//! `dμ = f dm` this is the classical `(f̂(k - j))_kj`.

use nalgebra::DMatrix;

use crate::block::{HSeq, OpMatrix};
use crate::error::{check_dim, Error, Result};
use crate::measure::{Density, Measure, OpMeasure, PoissonLadder};
use crate::operator::{pairing_j, rank_one, HVector, Operator, TensorElement};
use crate::torus::{l1_tensor_norm, phi, Grid, QuadratureValue, TrigPoly};
use crate::C64;

/// A measure together with the size of the Toeplitz truncation built from it.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzSpec {
    pub measure: OpMeasure,
    pub n: usize,
}

impl ToeplitzSpec {
    pub fn new(measure: OpMeasure, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::OutOfRange("Toeplitz truncation must be at least 1".into()));
        }
        Ok(Self { measure, n })
    }

    pub fn matrix(&self) -> OpMatrix {
        build_toeplitz(&self.measure, self.n).expect("n checked at construction")
    }

    /// `T_l = μ̂(l)` for `|l| < n`, indexed from `l = 1 - n`.
    pub fn coefficients(&self) -> Vec<Operator> {
        let n = self.n as i64;
        (1 - n..n).map(|l| self.measure.fourier(l)).collect()
    }
}

/// The `n × n` truncation `(μ̂(j - k))_kj`.
pub fn build_toeplitz(mu: &OpMeasure, n: usize) -> Result<OpMatrix> {
    if n == 0 {
        return Err(Error::OutOfRange("Toeplitz truncation must be at least 1".into()));
    }
    let ni = n as i64;
    let diagonals: Vec<Operator> = (1 - ni..ni).map(|l| mu.fourier(l)).collect();
    OpMatrix::from_fn(n, n, mu.dim(), |k, j| diagonals[(j as i64 - k as i64 + ni - 1) as usize].clone())
}

/// Operator norms of the Toeplitz truncations for each `n` in `ladder`.
/// Only densities are accepted: the norms stay bounded exactly for them.
pub fn toeplitz_norm_ladder(mu: &OpMeasure, ladder: &[usize]) -> Result<Vec<f64>> {
    if !matches!(mu, Measure::Density { .. }) {
        return Err(Error::Unsupported("the Toeplitz norm ladder needs a density".into()));
    }
    ladder.iter().map(|&n| Ok(build_toeplitz(mu, n)?.opnorm())).collect()
}

/// Scalar compression `γ_kj = <T_kj x0, y0>`.
pub fn compress(a: &OpMatrix, x0: &HVector, y0: &HVector) -> Result<DMatrix<C64>> {
    check_dim(a.dim(), x0.dim())?;
    check_dim(a.dim(), y0.dim())?;
    let mut g = DMatrix::zeros(a.rows(), a.cols());
    for k in 0..a.rows() {
        for j in 0..a.cols() {
            g[(k, j)] = pairing_j(a.block(k, j), x0, y0)?;
        }
    }
    Ok(g)
}

/// `S_kj = β_kj (z0 ~⊗ z0)`, an isometric embedding of scalar matrices when `‖z0‖ = 1`.
pub fn embed_scalar(b: &DMatrix<C64>, z0: &HVector) -> OpMatrix {
    let p = rank_one(z0, z0).expect("same vector");
    OpMatrix::from_fn(b.nrows(), b.ncols(), z0.dim(), |k, j| p.scale(b[(k, j)])).expect("consistent shape")
}

fn check_action_shapes(mu: &OpMeasure, b: &OpMatrix, x: &HSeq, y: &HSeq) -> Result<()> {
    if b.rows() != b.cols() {
        return Err(Error::ShapeMismatch(format!("{}x{} is not square", b.rows(), b.cols())));
    }
    check_dim(b.cols(), x.len())?;
    check_dim(b.rows(), y.len())?;
    for d in [b.dim(), x.dim(), y.dim()] {
        check_dim(mu.dim(), d)?;
    }
    Ok(())
}

/// `G(u) = Σ_k (Σ_j S_kj x_j φ_j(u)) ⊗ y_k φ_k(u)`.
///
/// The second slot of a [`TensorElement`] is conjugate-linear, so storing
/// `y_k φ_k(u)` there realizes the bilinear tensor `y_k conj(φ_k(u))`.
fn action_field(b: &OpMatrix, x: &HSeq, y: &HSeq, u: f64) -> TensorElement {
    let d = b.dim();
    let mut g = TensorElement::zero(d);
    for k in 0..b.rows() {
        let mut left = HVector::zeros(d);
        for j in 0..b.cols() {
            let sx = b.block(k, j).apply(x.get(j)).expect("checked dim");
            left.add_assign_scaled(&sx, phi(j as i64 + 1, u));
        }
        g.push(left, y.get(k).scale(phi(k as i64 + 1, u))).expect("checked dim");
    }
    g
}

/// `Ψ_μ(G)` for the field `G` of [`action_field`]: equal to
/// `<(T_μ ∗ B)(x), y>` where `T_μ` is the Toeplitz matrix of `μ`.
///
/// Exact for atoms; for a polynomial density the integrand is a
/// trigonometric polynomial and is integrated on an exact grid; for sampled
/// densities the sample grid is used as a quadrature rule.
pub fn schur_action_rhs(mu: &OpMeasure, b: &OpMatrix, x: &HSeq, y: &HSeq) -> Result<C64> {
    check_action_shapes(mu, b, x, y)?;
    match mu {
        Measure::Discrete { atoms, .. } => atoms
            .iter()
            .try_fold(C64::new(0.0, 0.0), |acc, a| Ok(acc + action_field(b, x, y, a.t).pair_with(&a.weight)?)),
        Measure::Density { density: Density::Poly(f), .. } => {
            let grid = Grid::exact_for_width(f.width() + 2 * b.rows() + 1);
            integrate_action(grid, |_, t| f.eval(t), b, x, y)
        }
        Measure::Density { density: Density::Samples(s), .. } => {
            let grid = Grid::exact_for_width(s.len());
            integrate_action(grid, |g, _| s[g].clone(), b, x, y)
        }
        Measure::Lazy { .. } => Err(Error::Unsupported("the multiplier action needs atoms or a density".into())),
    }
}

fn integrate_action(grid: Grid, f: impl Fn(usize, f64) -> Operator, b: &OpMatrix, x: &HSeq, y: &HSeq) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for (g, t) in grid.nodes().enumerate() {
        acc += action_field(b, x, y, t).pair_with(&f(g, t))?;
    }
    Ok(acc / grid.size() as f64)
}

/// `Ψ_μ(Σ_k (Σ_j ν̂(j-k) x_j φ_j) ⊗ y_k conj(φ_k))` through Fourier
/// coefficients: the tensor polynomial has coefficient
/// `Σ_{j-k=m} ν̂(m) x_j ⊗ y_k` at frequency `m`, paired with `μ̂(m)`.
/// Equal to `<(T_μ ∗ T_ν)(x), y>`.
pub fn mult2_rhs(mu: &OpMeasure, nu: &OpMeasure, x: &HSeq, y: &HSeq) -> Result<C64> {
    check_dim(x.len(), y.len())?;
    let n = x.len() as i64;
    let d = mu.dim();
    for dd in [nu.dim(), x.dim(), y.dim()] {
        check_dim(d, dd)?;
    }
    let mut g: TrigPoly<TensorElement> = TrigPoly::new(d);
    for m in 1 - n..n {
        let c = nu.fourier(m);
        let mut u = TensorElement::zero(d);
        for k in 0..n {
            let j = k + m;
            if (0..n).contains(&j) {
                u.push(c.apply(x.get(j as usize))?, y.get(k as usize).clone())?;
            }
        }
        g.set(m, u);
    }
    mu.psi_pair(&g)
}

/// `|μ|`, which bounds both Schur multiplier norms of the Toeplitz matrix of `μ`.
pub fn multiplier_upper_bound(mu: &OpMeasure) -> Result<f64> {
    mu.variation()
}

/// The field `F_{x,y,A}(t) = Σ_k (Σ_j ν̂(j-k) x_j φ_j(t)) ⊗ y_k conj(φ_k(t))`.
#[derive(Debug, Clone)]
pub struct TensorField {
    /// `(Σ_j ν̂(j-k) x_j` placed at frequency `j`, `y_k)` for each row `k`.
    rows: Vec<(TrigPoly<HVector>, HVector)>,
    dim: usize,
}

impl TensorField {
    pub fn eval(&self, t: f64) -> TensorElement {
        let mut out = TensorElement::zero(self.dim);
        for (k, (left, yk)) in self.rows.iter().enumerate() {
            out.push(left.eval(t), yk.scale(phi(k as i64 + 1, t))).expect("consistent dim");
        }
        out
    }

    /// Largest frequency present, which fixes the quadrature grid.
    pub fn reach(&self) -> usize {
        self.rows.len()
    }

    /// `∫ ‖F(t)‖_{H⊗̂H} dt/2π` on an oversampled grid.
    pub fn l1_norm(&self) -> QuadratureValue {
        l1_tensor_norm(|t| self.eval(t), Grid::oversampled(2 * self.reach() + 1))
    }
}

pub fn build_f(spec: &ToeplitzSpec, x: &HSeq, y: &HSeq) -> Result<TensorField> {
    check_dim(spec.n, x.len())?;
    check_dim(spec.n, y.len())?;
    let d = spec.measure.dim();
    check_dim(d, x.dim())?;
    check_dim(d, y.dim())?;
    let rows = (0..spec.n)
        .map(|k| {
            let left = TrigPoly::from_coeffs(
                d,
                (0..spec.n).map(|j| {
                    let c = spec.measure.fourier(j as i64 - k as i64);
                    (j as i64 + 1, c.apply(x.get(j)).expect("checked dim"))
                }),
            );
            (left, y.get(k).clone())
        })
        .collect();
    Ok(TensorField { rows, dim: d })
}

/// `sup_r ∫ ‖Σ_k μ̂(k)(x) r^{|k|} φ_k(t)‖ dt/2π` over `ladder`: the Poisson
/// criterion for `μ_x` to have bounded variation.
pub fn msot_membership(mu: &OpMeasure, x: &HVector, ladder: &[f64]) -> Result<PoissonLadder> {
    mu.mu_x(x)?.poisson_variation(ladder)
}
