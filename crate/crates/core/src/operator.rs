//! Operators on H = C^d, vectors of H, and finite tensors in H ⊗ H.
//!
//! Inner products are linear in the first slot and conjugate-linear in the
//! second: `<x, y> = Σ x_i conj(y_i)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, LinearMap};
use crate::C64;

/// A vector of H = C^d.
#[derive(Debug, Clone, PartialEq)]
pub struct HVector(DVector<C64>);

impl HVector {
    pub fn new(coords: Vec<C64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Empty("vector coordinates"));
        }
        if coords.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(Self(DVector::from_vec(coords)))
    }

    pub(crate) fn from_dvector(v: DVector<C64>) -> Self {
        Self(v)
    }

    pub fn zeros(d: usize) -> Self {
        Self(DVector::zeros(d))
    }

    /// Basis vector e_i (0-based index).
    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = DVector::zeros(d);
        v[i] = C64::new(1.0, 0.0);
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.norm_squared()
    }

    /// `<self, other>`.
    pub fn inner(&self, other: &HVector) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(other.0.dotc(&self.0))
    }

    pub fn scale(&self, c: C64) -> HVector {
        Self(&self.0 * c)
    }

    pub fn add(&self, other: &HVector) -> Result<HVector> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self(&self.0 + &other.0))
    }

    pub(crate) fn add_assign_scaled(&mut self, other: &HVector, c: C64) {
        self.0.axpy(c, &other.0, C64::new(1.0, 0.0));
    }
}

/// A bounded operator on H = C^d, stored as a d×d complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl Operator {
    /// Builds a d×d operator from `d*d` row-major entries.
    pub fn new(d: usize, entries: &[C64]) -> Result<Self> {
        if d == 0 {
            return Err(Error::Empty("operator dimension"));
        }
        check_dim(d * d, entries.len())?;
        Self::from_matrix(DMatrix::from_row_slice(d, d, entries))
    }

    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::ShapeMismatch(format!("operator must be square, got {}x{}", m.nrows(), m.ncols())));
        }
        if m.nrows() == 0 {
            return Err(Error::Empty("operator dimension"));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("operator"));
        }
        Ok(Self(m))
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<C64>) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Self(m)
    }

    pub fn identity(d: usize) -> Self {
        Self(DMatrix::identity(d, d))
    }

    pub fn zeros(d: usize) -> Self {
        Self(DMatrix::zeros(d, d))
    }

    /// Scalar operator on C^1.
    pub fn scalar(c: C64) -> Self {
        Self(DMatrix::from_element(1, 1, c))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    /// Row-major entries.
    pub fn entries(&self) -> Vec<C64> {
        self.0.transpose().iter().copied().collect()
    }

    pub fn apply(&self, x: &HVector) -> Result<HVector> {
        check_dim(self.dim(), x.dim())?;
        Ok(HVector(&self.0 * &x.0))
    }

    /// The product `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self(&self.0 * &other.0))
    }

    pub fn adjoint(&self) -> Operator {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, c: C64) -> Operator {
        Self(&self.0 * c)
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self(&self.0 + &other.0))
    }

    pub(crate) fn add_assign_scaled(&mut self, other: &Operator, c: C64) {
        self.0.zip_apply(&other.0, |a, b| *a += b * c);
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| *z == C64::new(0.0, 0.0))
    }

    /// Largest singular value, by power iteration.
    pub fn spectral_norm(&self) -> f64 {
        linalg::spectral_norm(&self.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }
}

impl LinearMap for Operator {
    fn nrows(&self) -> usize {
        self.dim()
    }
    fn ncols(&self) -> usize {
        self.dim()
    }
    fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        &self.0 * x
    }
    fn apply_adjoint(&self, y: &DVector<C64>) -> DVector<C64> {
        self.0.ad_mul(y)
    }
}

/// The rank-one operator `z ↦ <z, x> y`; its matrix is `y x*`.
pub fn rank_one(x: &HVector, y: &HVector) -> Result<Operator> {
    check_dim(x.dim(), y.dim())?;
    Ok(Operator(&y.0 * x.0.adjoint()))
}

/// The duality pairing between B(H) and H ⊗ H on an elementary tensor:
/// `J(T)(x ⊗ y) = <T x, y>`.
pub fn pairing_j(t: &Operator, x: &HVector, y: &HVector) -> Result<C64> {
    t.apply(x)?.inner(y)
}

/// A finite sum `Σ x_i ⊗ y_i` in H ⊗ H.
///
/// Scalars act on the first slot, so `J(T)` is linear on tensors. The
/// second slot is the conjugate-linear one: `(c y)` in the second factor
/// contributes `conj(c)` to every pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorElement {
    dim: usize,
    terms: Vec<(HVector, HVector)>,
}

impl TensorElement {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn elementary(x: HVector, y: HVector) -> Result<Self> {
        let mut t = Self::zero(x.dim());
        t.push(x, y)?;
        Ok(t)
    }

    pub fn from_terms(terms: Vec<(HVector, HVector)>) -> Result<Self> {
        let dim = terms.first().map(|(x, _)| x.dim()).ok_or(Error::Empty("tensor terms"))?;
        let mut t = Self::zero(dim);
        for (x, y) in terms {
            t.push(x, y)?;
        }
        Ok(t)
    }

    pub fn push(&mut self, x: HVector, y: HVector) -> Result<()> {
        check_dim(self.dim, x.dim())?;
        check_dim(self.dim, y.dim())?;
        self.terms.push((x, y));
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(HVector, HVector)] {
        &self.terms
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|(x, y)| (x.scale(c), y.clone())).collect(),
        }
    }

    pub fn add(&self, other: &TensorElement) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { dim: self.dim, terms })
    }

    /// The matrix `Σ y_i x_i*` identifying the tensor with a trace-class operator.
    pub fn as_matrix(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (x, y) in &self.terms {
            m.ger(C64::new(1.0, 0.0), &y.0, &x.0.map(|z| z.conj()), C64::new(1.0, 0.0));
        }
        m
    }

    /// `Σ J(T)(x_i ⊗ y_i)`.
    pub fn pair_with(&self, t: &Operator) -> Result<C64> {
        check_dim(self.dim, t.dim())?;
        self.terms.iter().try_fold(C64::new(0.0, 0.0), |acc, (x, y)| Ok(acc + pairing_j(t, x, y)?))
    }

    /// Projective norm, computed as the trace norm of [`Self::as_matrix`].
    pub fn trace_norm(&self) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        linalg::nuclear_norm(&self.as_matrix())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_operator, random_vector, seeded_rng};

    fn approx(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn rank_one_of_basis_is_projection() {
        let e1 = HVector::basis(2, 0);
        let p = rank_one(&e1, &e1).unwrap();
        assert_eq!(p.entries(), vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
    }

    #[test]
    fn rank_one_action_and_entries() {
        let mut rng = seeded_rng(3);
        let x = random_vector(&mut rng, 3);
        let y = random_vector(&mut rng, 3);
        let t = rank_one(&x, &y).unwrap();
        let tx = t.apply(&x).unwrap();
        let expected = y.scale(C64::from(x.norm_squared()));
        assert!((tx.coords() - expected.coords()).norm() < 1e-12);
        for i in 0..3 {
            for j in 0..3 {
                assert!(approx(t.entry(i, j), x.coords()[j].conj() * y.coords()[i], 1e-14));
            }
        }
    }

    #[test]
    fn rank_one_norm_against_jacobi() {
        let mut rng = seeded_rng(4);
        let x = random_vector(&mut rng, 3);
        let y = random_vector(&mut rng, 3);
        let t = rank_one(&x, &y).unwrap();
        let oracle = linalg::jacobi_singular_values(t.matrix())[0];
        assert!((oracle - x.norm() * y.norm()).abs() < 1e-12);
        assert!((t.spectral_norm() - oracle).abs() < 1e-10 * oracle);
    }

    #[test]
    fn pairing_with_identity_and_rank_one() {
        let mut rng = seeded_rng(5);
        let (x, y, u, v) = (
            random_vector(&mut rng, 3),
            random_vector(&mut rng, 3),
            random_vector(&mut rng, 3),
            random_vector(&mut rng, 3),
        );
        let id = Operator::identity(3);
        assert!(approx(pairing_j(&id, &x, &y).unwrap(), x.inner(&y).unwrap(), 1e-14));
        let t = rank_one(&u, &v).unwrap();
        let expected = x.inner(&u).unwrap() * v.inner(&y).unwrap();
        assert!(approx(pairing_j(&t, &x, &y).unwrap(), expected, 1e-12));
    }

    #[test]
    fn pairing_three_way_identity() {
        let mut rng = seeded_rng(6);
        for _ in 0..100 {
            let t = random_operator(&mut rng, 3);
            let s = random_operator(&mut rng, 3);
            let x = random_vector(&mut rng, 3);
            let y = random_vector(&mut rng, 3);
            let lhs = pairing_j(&t.compose(&s).unwrap(), &x, &y).unwrap();
            let mid = pairing_j(&t, &s.apply(&x).unwrap(), &y).unwrap();
            let rhs = pairing_j(&s, &x, &t.adjoint().apply(&y).unwrap()).unwrap();
            assert!(approx(lhs, mid, 1e-12) && approx(lhs, rhs, 1e-12));
        }
    }

    #[test]
    fn composition_with_rank_one() {
        let mut rng = seeded_rng(7);
        let t = random_operator(&mut rng, 3);
        let x = random_vector(&mut rng, 3);
        let y = random_vector(&mut rng, 3);
        let r = rank_one(&x, &y).unwrap();
        let left = t.compose(&r).unwrap();
        let left_expected = rank_one(&x, &t.apply(&y).unwrap()).unwrap();
        assert!((left.matrix() - left_expected.matrix()).norm() < 1e-12);
        let right = r.compose(&t).unwrap();
        let right_expected = rank_one(&t.adjoint().apply(&x).unwrap(), &y).unwrap();
        assert!((right.matrix() - right_expected.matrix()).norm() < 1e-12);
    }

    #[test]
    fn adjoint_reverses_composition() {
        let mut rng = seeded_rng(8);
        for _ in 0..20 {
            let t = random_operator(&mut rng, 4);
            let s = random_operator(&mut rng, 4);
            let lhs = t.compose(&s).unwrap().adjoint();
            let rhs = s.adjoint().compose(&t.adjoint()).unwrap();
            assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-13);
            assert_eq!(t.adjoint().adjoint(), t);
        }
    }

    #[test]
    fn spectral_norm_trivial_cases() {
        assert!((Operator::identity(4).spectral_norm() - 1.0).abs() < 1e-14);
        let z = C64::new(0.0, 0.0);
        let nil = Operator::new(2, &[z, C64::new(2.0, 0.0), z, z]).unwrap();
        assert!((nil.spectral_norm() - 2.0).abs() < 1e-12);
        assert_eq!(Operator::zeros(3).spectral_norm(), 0.0);
    }

    #[test]
    fn trace_norm_trivial_cases() {
        let mut rng = seeded_rng(9);
        let x = random_vector(&mut rng, 3);
        let y = random_vector(&mut rng, 3);
        let single = TensorElement::elementary(x.clone(), y.clone()).unwrap();
        assert!((single.trace_norm() - x.norm() * y.norm()).abs() < 1e-12);
        let e1 = HVector::basis(3, 0);
        let e2 = HVector::basis(3, 1);
        let two = TensorElement::from_terms(vec![(e1.clone(), e1), (e2.clone(), e2)]).unwrap();
        assert!((two.trace_norm() - 2.0).abs() < 1e-14);
        // splitting x ⊗ y into two halves does not change the norm
        let half = x.scale(C64::new(0.5, 0.0));
        let split = TensorElement::from_terms(vec![(half.clone(), y.clone()), (half, y)]).unwrap();
        assert!((split.trace_norm() - single.trace_norm()).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let x = HVector::basis(2, 0);
        let y = HVector::basis(3, 0);
        assert!(matches!(rank_one(&x, &y), Err(Error::DimensionMismatch { .. })));
        assert!(Operator::identity(2).compose(&Operator::identity(3)).is_err());
        assert!(pairing_j(&Operator::identity(3), &x, &y).is_err());
        assert!(TensorElement::from_terms(vec![(x.clone(), x), (y.clone(), y)]).is_err());
    }

    #[test]
    fn non_finite_entries_rejected() {
        assert!(Operator::new(1, &[C64::new(f64::NAN, 0.0)]).is_err());
        assert!(HVector::new(vec![C64::new(0.0, f64::INFINITY)]).is_err());
    }
}
