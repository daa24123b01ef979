//! Operator-valued and H-valued measures on the circle.
//!
//! A measure is held in one of three shapes: finitely many atoms, a density
//! `dμ = f dm` (a trigonometric polynomial or samples on a uniform grid), or a
//! table of Fourier coefficients with explicit support. Only the first two
//! have set-function values; tables support coefficient-level operations.
//!
//! Coefficient conventions: for a measure `μ̂(k) = ∫ φ_k dμ` (no conjugation),
//! while for a function `f̂(k) = ∫ f conj(φ_k) dm`. Hence a density `f` has
//! `μ̂(k) = f̂(-k)`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Debug;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dense_spectral_norm, top_singular};
use crate::operator::{rank_one, HVector, Operator, TensorElement};
use crate::rng::{random_unit_vector, stream_rng, uniform_angle};
use crate::torus::{phi, Coefficient, Grid, TrigPoly};
use crate::C64;

/// Relative size of the neglected Poisson tail `r^K`.
pub const POISSON_TAIL: f64 = 1e-12;
/// Radii used by [`Measure::poisson_variation`] unless told otherwise.
pub const DEFAULT_R_LADDER: [f64; 4] = [0.5, 0.9, 0.99, 0.999];
/// Smallest grid used to integrate norms of smooth densities.
const MIN_NORM_GRID: usize = 64;

/// Values a measure can take: operators or vectors of H.
pub trait MeasureValue: Coefficient + Debug + PartialEq + Send + Sync {
    fn value_dim(&self) -> usize;
    fn value_norm(&self) -> f64;
    /// `d × d` for operators, `d × 1` for vectors.
    fn to_dmatrix(&self) -> DMatrix<C64>;
    fn from_dmatrix(m: DMatrix<C64>) -> Self;
}

impl MeasureValue for Operator {
    fn value_dim(&self) -> usize {
        self.dim()
    }
    fn value_norm(&self) -> f64 {
        self.spectral_norm()
    }
    fn to_dmatrix(&self) -> DMatrix<C64> {
        self.matrix().clone()
    }
    fn from_dmatrix(m: DMatrix<C64>) -> Self {
        Operator::from_matrix_unchecked(m)
    }
}

impl MeasureValue for HVector {
    fn value_dim(&self) -> usize {
        self.dim()
    }
    fn value_norm(&self) -> f64 {
        self.norm()
    }
    fn to_dmatrix(&self) -> DMatrix<C64> {
        DMatrix::from_column_slice(self.dim(), 1, self.coords().as_slice())
    }
    fn from_dmatrix(m: DMatrix<C64>) -> Self {
        HVector::from_dvector(m.column(0).into_owned())
    }
}

/// A point mass `weight · δ_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom<V> {
    pub t: f64,
    pub weight: V,
}

/// A density with respect to normalized Lebesgue measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Density<V> {
    /// `f(t) = Σ_k f̂(k) e^{ikt}`.
    Poly(TrigPoly<V>),
    /// `f(t_g)` at the nodes of the uniform grid with `samples.len()` nodes.
    Samples(Vec<V>),
}

/// Origin of a coefficient table, kept so literals round-trip.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LazyKind {
    /// `μ̂(k) = ẽ_k ⊗ e_k` for `1 ≤ k ≤ d`, zero otherwise.
    Spectral,
    Table,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Measure<V> {
    Discrete { dim: usize, atoms: Vec<Atom<V>> },
    Density { dim: usize, density: Density<V> },
    Lazy { dim: usize, kind: LazyKind, coeffs: BTreeMap<i64, V> },
}

pub type OpMeasure = Measure<Operator>;
pub type HMeasure = Measure<HVector>;

/// Bound on the norm of the extension `L¹(T) → E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VinfNorm {
    /// Maximum of `‖f(t)‖` for a density.
    Value(f64),
    /// `sup_k ‖μ̂(k)‖` for a coefficient table, a lower bound.
    LowerBound(f64),
    /// A measure with a nonzero atom is not absolutely continuous.
    Unbounded,
}

impl VinfNorm {
    pub fn value(&self) -> f64 {
        match self {
            VinfNorm::Value(v) | VinfNorm::LowerBound(v) => *v,
            VinfNorm::Unbounded => f64::INFINITY,
        }
    }
}

/// One rung of a Poisson ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonEntry {
    pub r: f64,
    /// Largest `|k|` kept in the series.
    pub cutoff: usize,
    pub grid_size: usize,
    pub l1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonLadder {
    pub entries: Vec<PoissonEntry>,
    pub sup: f64,
}

/// `K(r) = ceil(ln ε / ln r)`, the number of Poisson terms kept on each side.
pub fn poisson_cutoff(r: f64) -> Result<usize> {
    check_radius(r)?;
    Ok((POISSON_TAIL.ln() / r.ln()).ceil().max(1.0) as usize)
}

/// The Poisson kernel `(1 - r²) / (1 - 2r cos t + r²)`.
pub fn poisson_kernel(r: f64, t: f64) -> f64 {
    (1.0 - r * r) / (1.0 - 2.0 * r * t.cos() + r * r)
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("Poisson radius {r} must lie in (0, 1)")))
    }
}

fn check_values<V: MeasureValue>(dim: usize, values: impl IntoIterator<Item = V>) -> Result<()> {
    for v in values {
        check_dim(dim, v.value_dim())?;
    }
    Ok(())
}

impl<V: MeasureValue> Measure<V> {
    /// Atoms at distinct angles; angles are reduced to `[0, 2π)`.
    pub fn discrete(dim: usize, atoms: Vec<Atom<V>>) -> Result<Self> {
        let mut out = Vec::with_capacity(atoms.len());
        for a in atoms {
            check_dim(dim, a.weight.value_dim())?;
            if !a.t.is_finite() {
                return Err(Error::NonFinite("atom angle"));
            }
            let t = a.t.rem_euclid(TAU);
            if out.iter().any(|b: &Atom<V>| b.t == t) {
                return Err(Error::OutOfRange(format!("two atoms share the angle {t}")));
            }
            out.push(Atom { t, weight: a.weight });
        }
        Ok(Measure::Discrete { dim, atoms: out })
    }

    pub fn zero(dim: usize) -> Self {
        Measure::Discrete { dim, atoms: Vec::new() }
    }

    pub fn density_poly(f: TrigPoly<V>) -> Result<Self> {
        check_values(f.dim(), f.coeffs().values().cloned())?;
        Ok(Measure::Density { dim: f.dim(), density: Density::Poly(f) })
    }

    pub fn density_samples(dim: usize, samples: Vec<V>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("density samples"));
        }
        check_values(dim, samples.iter().cloned())?;
        Ok(Measure::Density { dim, density: Density::Samples(samples) })
    }

    pub fn lazy_table(dim: usize, coeffs: BTreeMap<i64, V>) -> Result<Self> {
        check_values(dim, coeffs.values().cloned())?;
        Ok(Measure::Lazy { dim, kind: LazyKind::Table, coeffs })
    }

    pub fn dim(&self) -> usize {
        match self {
            Measure::Discrete { dim, .. } | Measure::Density { dim, .. } | Measure::Lazy { dim, .. } => *dim,
        }
    }

    /// `μ̂(k) = ∫ φ_k dμ`.
    pub fn fourier(&self, k: i64) -> V {
        let d = self.dim();
        match self {
            Measure::Discrete { atoms, .. } => {
                let mut acc = V::zero(d);
                for a in atoms {
                    acc.axpy(phi(k, a.t), &a.weight);
                }
                acc
            }
            Measure::Density { density: Density::Poly(f), .. } => f.coeff(-k).cloned().unwrap_or_else(|| V::zero(d)),
            Measure::Density { density: Density::Samples(s), .. } => {
                let grid = Grid::exact_for_width(s.len());
                let mut acc = V::zero(d);
                for (g, v) in s.iter().enumerate() {
                    acc.axpy(phi(k, grid.node(g)) / s.len() as f64, v);
                }
                acc
            }
            Measure::Lazy { coeffs, .. } => coeffs.get(&k).cloned().unwrap_or_else(|| V::zero(d)),
        }
    }

    /// Frequencies outside which `μ̂` vanishes, when that range is finite.
    pub fn coefficient_support(&self) -> Option<(i64, i64)> {
        match self {
            Measure::Density { density: Density::Poly(f), .. } => f.degree_bounds().map(|(lo, hi)| (-hi, -lo)),
            Measure::Lazy { coeffs, .. } => Some((*coeffs.keys().next()?, *coeffs.keys().next_back()?)),
            _ => None,
        }
    }

    /// `f(t)` for a density given as a polynomial or on a grid containing `t`.
    fn density_at(&self, t: f64) -> Option<V> {
        match self {
            Measure::Density { density: Density::Poly(f), .. } => Some(f.eval(t)),
            _ => None,
        }
    }

    /// Point masses reproducing every set-function value of the measure on a
    /// quadrature grid: the atoms themselves, or `f(t_g)/G` at grid nodes.
    pub fn atomize(&self) -> Result<Vec<Atom<V>>> {
        match self {
            Measure::Discrete { atoms, .. } => Ok(atoms.clone()),
            Measure::Density { density: Density::Poly(f), .. } => {
                let grid = Grid::oversampled(f.width()).max_with(MIN_NORM_GRID);
                let w = 1.0 / grid.size() as f64;
                Ok(grid.nodes().map(|t| Atom { t, weight: scaled(&f.eval(t), w) }).collect())
            }
            Measure::Density { density: Density::Samples(s), .. } => {
                let grid = Grid::exact_for_width(s.len());
                let w = 1.0 / s.len() as f64;
                Ok(s.iter().enumerate().map(|(g, v)| Atom { t: grid.node(g), weight: scaled(v, w) }).collect())
            }
            Measure::Lazy { .. } => Err(lazy_has_no_values()),
        }
    }

    /// `|μ|(T)`: exact for atoms, oversampled quadrature of `‖f‖` for densities.
    pub fn variation(&self) -> Result<f64> {
        match self {
            Measure::Discrete { atoms, .. } => Ok(atoms.iter().map(|a| a.weight.value_norm()).sum()),
            Measure::Density { density: Density::Poly(f), .. } => {
                let grid = Grid::oversampled(f.width()).max_with(MIN_NORM_GRID);
                Ok(grid.mean(|t| dense_spectral_norm(&f.eval(t).to_dmatrix())))
            }
            Measure::Density { density: Density::Samples(s), .. } => {
                Ok(s.iter().map(|v| dense_spectral_norm(&v.to_dmatrix())).sum::<f64>() / s.len() as f64)
            }
            Measure::Lazy { .. } => Err(lazy_has_no_values()),
        }
    }

    /// Lower bound for the semivariation `sup ‖Σ ε_i μ(A_i)‖` over partitions
    /// and unimodular `ε_i`, searched over the atoms (densities are atomized).
    ///
    /// Starts from `ε ≡ 1` and `budget` seeded random phase patterns. Each
    /// step realigns `ε_i = conj(phase(u* W_i v))` with the top singular pair
    /// `(u, v)` of the current sum, which never decreases the norm.
    pub fn semivariation_lb(&self, budget: usize, seed: u64) -> Result<f64> {
        let atoms = self.atomize()?;
        let mats: Vec<DMatrix<C64>> = atoms.iter().map(|a| a.weight.to_dmatrix()).collect();
        if mats.is_empty() {
            return Ok(0.0);
        }
        let mut rng = stream_rng(seed, 0x5345_4D49);
        let mut starts = vec![vec![C64::new(1.0, 0.0); mats.len()]];
        for _ in 0..budget {
            starts.push((0..mats.len()).map(|_| C64::from_polar(1.0, uniform_angle(&mut rng))).collect());
        }
        let best = starts.into_iter().map(|eps| align_phases(&mats, eps)).fold(0.0, f64::max);
        Ok(best)
    }

    /// `sup_k ‖μ̂(k)‖`-type bound or the maximum of `‖f(t)‖`, see [`VinfNorm`].
    pub fn vinf_norm(&self) -> VinfNorm {
        match self {
            Measure::Discrete { atoms, .. } => {
                if atoms.iter().all(|a| a.weight.value_norm() == 0.0) {
                    VinfNorm::Value(0.0)
                } else {
                    VinfNorm::Unbounded
                }
            }
            Measure::Density { density: Density::Poly(f), .. } => VinfNorm::Value(poly_sup_norm(f)),
            Measure::Density { density: Density::Samples(s), .. } => {
                VinfNorm::Value(s.iter().map(|v| dense_spectral_norm(&v.to_dmatrix())).fold(0.0, f64::max))
            }
            Measure::Lazy { coeffs, .. } => {
                VinfNorm::LowerBound(coeffs.values().map(|v| dense_spectral_norm(&v.to_dmatrix())).fold(0.0, f64::max))
            }
        }
    }

    /// `T_μ(ψ) = Σ_k ψ̂(k) μ̂(k)`.
    pub fn integrate_poly(&self, psi: &TrigPoly<C64>) -> V {
        let mut acc = V::zero(self.dim());
        for (k, c) in psi.coeffs() {
            acc.axpy(*c, &self.fourier(*k));
        }
        acc
    }

    /// The coefficients `μ̂(k) r^{|k|}` of `P_r ∗ μ`, for `|k| ≤ K(r)` (or over
    /// the explicit support when it is finite).
    pub fn poisson_coefficients(&self, r: f64) -> Result<Vec<(i64, V)>> {
        let cutoff = poisson_cutoff(r)? as i64;
        let (lo, hi) = match self.coefficient_support() {
            Some((lo, hi)) => (lo.max(-cutoff), hi.min(cutoff)),
            None => (-cutoff, cutoff),
        };
        let support = self.coefficient_support();
        Ok((lo..=hi)
            .filter(|k| support.is_none() || self.has_coefficient(*k))
            .map(|k| (k, scaled(&self.fourier(k), r.powi(k.unsigned_abs() as i32))))
            .collect())
    }

    fn has_coefficient(&self, k: i64) -> bool {
        match self {
            Measure::Density { density: Density::Poly(f), .. } => f.coeff(-k).is_some(),
            Measure::Lazy { coeffs, .. } => coeffs.contains_key(&k),
            _ => true,
        }
    }

    /// `(P_r ∗ μ)(t) = Σ_k μ̂(k) r^{|k|} φ_k(t)`. Under the convention
    /// `μ̂(k) = ∫ φ_k dμ` this is `∫ P_r(t + s) dμ(s)`, the mirror image of
    /// the usual convolution; `L¹` norms are unaffected.
    pub fn poisson_mean(&self, r: f64, t: f64) -> Result<V> {
        let mut acc = V::zero(self.dim());
        for (k, c) in self.poisson_coefficients(r)? {
            acc.axpy(phi(k, t), &c);
        }
        Ok(acc)
    }

    /// `∫ ‖P_r ∗ μ(t)‖ dt/2π` on `grid`, evaluating the truncated series at all
    /// nodes with one inverse FFT per matrix entry.
    pub fn poisson_l1(&self, r: f64, grid: Grid) -> Result<f64> {
        let coeffs = self.poisson_coefficients(r)?;
        let width = coeffs.first().zip(coeffs.last()).map_or(0, |(a, b)| (b.0 - a.0 + 1) as usize);
        grid.require(width)?;
        let samples = evaluate_on_grid(self.dim(), &coeffs, grid);
        let norms: Vec<f64> = samples.par_iter().map(dense_spectral_norm).collect();
        Ok(norms.iter().sum::<f64>() / grid.size() as f64)
    }

    /// Default grid for [`Self::poisson_l1`]: `8·K` nodes, `K` the largest
    /// frequency kept, with a floor of 64.
    pub fn poisson_grid(&self, r: f64) -> Result<Grid> {
        let coeffs = self.poisson_coefficients(r)?;
        let reach = coeffs.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        Ok(Grid::oversampled(reach).max_with(MIN_NORM_GRID))
    }

    /// `sup_r ‖P_r ∗ μ‖_{L¹}` over `ladder`, each rung on its default grid.
    pub fn poisson_variation(&self, ladder: &[f64]) -> Result<PoissonLadder> {
        let mut entries = Vec::with_capacity(ladder.len());
        for &r in ladder {
            let grid = self.poisson_grid(r)?;
            let l1 = self.poisson_l1(r, grid)?;
            entries.push(PoissonEntry { r, cutoff: poisson_cutoff(r)?, grid_size: grid.size(), l1 });
        }
        let sup = entries.iter().map(|e| e.l1).fold(0.0, f64::max);
        Ok(PoissonLadder { entries, sup })
    }
}

impl Measure<Operator> {
    /// The spectral measure with `μ̂(k) = ẽ_k ⊗ e_k` for `1 ≤ k ≤ d`.
    pub fn spectral(d: usize) -> Self {
        let coeffs = (1..=d)
            .map(|k| {
                let e = HVector::basis(d, k - 1);
                (k as i64, rank_one(&e, &e).expect("same dim"))
            })
            .collect();
        Measure::Lazy { dim: d, kind: LazyKind::Spectral, coeffs }
    }

    /// `μ_x(A) = μ(A) x`.
    pub fn mu_x(&self, x: &HVector) -> Result<HMeasure> {
        check_dim(self.dim(), x.dim())?;
        let ap = |t: &Operator| t.apply(x).expect("checked dim");
        let d = self.dim();
        Ok(match self {
            Measure::Discrete { atoms, .. } => Measure::Discrete {
                dim: d,
                atoms: atoms.iter().map(|a| Atom { t: a.t, weight: ap(&a.weight) }).collect(),
            },
            Measure::Density { density: Density::Poly(f), .. } => {
                Measure::Density { dim: d, density: Density::Poly(f.map(d, |_, t| ap(t))) }
            }
            Measure::Density { density: Density::Samples(s), .. } => {
                Measure::Density { dim: d, density: Density::Samples(s.iter().map(ap).collect()) }
            }
            Measure::Lazy { coeffs, .. } => Measure::Lazy {
                dim: d,
                kind: LazyKind::Table,
                coeffs: coeffs.iter().map(|(k, t)| (*k, ap(t))).collect(),
            },
        })
    }

    /// `μ*(A) = μ(A)*`; its coefficients are `μ̂*(k) = μ̂(-k)*`.
    pub fn adjoint_measure(&self) -> Self {
        let d = self.dim();
        match self {
            Measure::Discrete { atoms, .. } => Measure::Discrete {
                dim: d,
                atoms: atoms.iter().map(|a| Atom { t: a.t, weight: a.weight.adjoint() }).collect(),
            },
            Measure::Density { density: Density::Poly(f), .. } => Measure::Density {
                dim: d,
                density: Density::Poly(TrigPoly::from_coeffs(d, f.coeffs().iter().map(|(k, t)| (-k, t.adjoint())))),
            },
            Measure::Density { density: Density::Samples(s), .. } => {
                Measure::Density { dim: d, density: Density::Samples(s.iter().map(Operator::adjoint).collect()) }
            }
            Measure::Lazy { coeffs, .. } => Measure::Lazy {
                dim: d,
                kind: LazyKind::Table,
                coeffs: coeffs.iter().map(|(k, t)| (-k, t.adjoint())).collect(),
            },
        }
    }

    /// Lower bound for `‖μ‖_SOT = sup_{‖x‖=1} |μ_x|(T)` with `|μ_x| = Σ_i ‖W_i x‖`
    /// over the (atomized) weights.
    ///
    /// Ascent `x ← g/‖g‖`, `g = Σ_i W_i* W_i x / ‖W_i x‖`, maximizes the
    /// linearization of the convex objective on the sphere and never
    /// decreases it. Starts: the top right singular vector of each of the 32
    /// heaviest atoms, then `budget` seeded random unit vectors.
    pub fn sot_norm_estimate(&self, budget: usize, seed: u64) -> Result<f64> {
        let atoms = self.atomize()?;
        let mats: Vec<&DMatrix<C64>> = atoms.iter().map(|a| a.weight.matrix()).collect();
        if mats.is_empty() {
            return Ok(0.0);
        }
        let d = self.dim();
        let objective = |x: &DVector<C64>| mats.iter().map(|w| (*w * x).norm()).sum::<f64>();
        let ascend = |mut x: DVector<C64>| -> f64 {
            let mut value = objective(&x);
            for _ in 0..2000 {
                let mut g = DVector::<C64>::zeros(d);
                for w in &mats {
                    let wx = *w * &x;
                    let n = wx.norm();
                    if n > 0.0 {
                        g += w.ad_mul(&wx) / C64::from(n);
                    }
                }
                let gn = g.norm();
                if gn == 0.0 {
                    break;
                }
                let next = g / C64::from(gn);
                let v = objective(&next);
                if v <= value * (1.0 + 1e-15) {
                    value = value.max(v);
                    break;
                }
                value = v;
                x = next;
            }
            value
        };
        let mut order: Vec<usize> = (0..mats.len()).collect();
        let norms: Vec<f64> = mats.iter().map(|w| dense_spectral_norm(w)).collect();
        order.sort_by(|a, b| norms[*b].total_cmp(&norms[*a]));
        let mut starts: Vec<DVector<C64>> =
            order.iter().take(32).filter(|i| norms[**i] > 0.0).map(|i| top_singular(mats[*i]).right).collect();
        let mut rng = stream_rng(seed, 0x534F_5421);
        for _ in 0..budget {
            starts.push(random_unit_vector(&mut rng, d).coords().clone());
        }
        Ok(starts.into_par_iter().map(ascend).collect::<Vec<f64>>().into_iter().fold(0.0, f64::max))
    }

    /// `Ψ_μ(G) = Σ_k J(μ̂(k))(Ĝ(k))` for a tensor polynomial `G`.
    pub fn psi_pair(&self, g: &TrigPoly<TensorElement>) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        for (k, u) in g.coeffs() {
            acc += u.pair_with(&self.fourier(*k))?;
        }
        Ok(acc)
    }

    /// `Φ_μ(g) = Σ_k μ̂(k)(ĝ(k))` for a vector polynomial `g`.
    pub fn phi_apply(&self, g: &TrigPoly<HVector>) -> Result<HVector> {
        let mut acc = HVector::zeros(self.dim());
        for (k, x) in g.coeffs() {
            acc = acc.add(&self.fourier(*k).apply(x)?)?;
        }
        Ok(acc)
    }

    /// `f(t)` for a polynomial density; `None` for other shapes.
    pub fn density_value(&self, t: f64) -> Option<Operator> {
        self.density_at(t)
    }
}

fn lazy_has_no_values() -> Error {
    Error::Unsupported("a coefficient table has no set-function values; use poisson_variation".into())
}

fn scaled<V: MeasureValue>(v: &V, c: f64) -> V {
    let mut out = V::zero(v.value_dim());
    out.axpy(C64::new(c, 0.0), v);
    out
}

/// Runs the phase realignment from `eps` and returns the norm reached.
fn align_phases(mats: &[DMatrix<C64>], mut eps: Vec<C64>) -> f64 {
    let sum = |eps: &[C64]| {
        let mut s = DMatrix::zeros(mats[0].nrows(), mats[0].ncols());
        for (m, e) in mats.iter().zip(eps) {
            s += m * *e;
        }
        s
    };
    let mut value = 0.0f64;
    for _ in 0..500 {
        let s = sum(&eps);
        let top = top_singular(&s);
        if top.value <= value * (1.0 + 1e-14) {
            value = value.max(top.value);
            break;
        }
        value = top.value;
        let sv = &s * &top.right;
        let u = sv.clone() / C64::from(sv.norm());
        for (m, e) in mats.iter().zip(eps.iter_mut()) {
            let c = u.dotc(&(m * &top.right));
            if c.norm() > 0.0 {
                *e = c.conj() / c.norm();
            }
        }
    }
    value
}

/// Values of `Σ_k c_k φ_k` at all grid nodes, one inverse FFT per entry.
fn evaluate_on_grid<V: MeasureValue>(dim: usize, coeffs: &[(i64, V)], grid: Grid) -> Vec<DMatrix<C64>> {
    let g = grid.size();
    let shape = coeffs.first().map_or((dim, dim), |(_, c)| {
        let m = c.to_dmatrix();
        (m.nrows(), m.ncols())
    });
    let mats: Vec<(i64, DMatrix<C64>)> = coeffs.iter().map(|(k, c)| (*k, c.to_dmatrix())).collect();
    let fft = FftPlanner::new().plan_fft_inverse(g);
    let mut out = vec![DMatrix::zeros(shape.0, shape.1); g];
    for p in 0..shape.0 {
        for q in 0..shape.1 {
            let mut buf = vec![C64::new(0.0, 0.0); g];
            for (k, m) in &mats {
                buf[k.rem_euclid(g as i64) as usize] += m[(p, q)];
            }
            fft.process(&mut buf);
            for (node, v) in out.iter_mut().zip(buf) {
                node[(p, q)] = v;
            }
        }
    }
    out
}

/// `max_t ‖f(t)‖`: grid search followed by golden-section refinement around
/// the best nodes.
fn poly_sup_norm<V: MeasureValue>(f: &TrigPoly<V>) -> f64 {
    let norm_at = |t: f64| dense_spectral_norm(&f.eval(t).to_dmatrix());
    let grid = Grid::oversampled(4 * f.width()).max_with(256);
    let values: Vec<f64> = grid.nodes().map(norm_at).collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|a, b| values[*b].total_cmp(&values[*a]));
    let h = TAU / grid.size() as f64;
    let mut best = values[order[0]];
    for &g in order.iter().take(4) {
        let (mut a, mut b) = (grid.node(g) - h, grid.node(g) + h);
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - ratio * (b - a);
        let mut d = a + ratio * (b - a);
        let (mut fc, mut fd) = (norm_at(c), norm_at(d));
        for _ in 0..80 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - ratio * (b - a);
                fc = norm_at(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + ratio * (b - a);
                fd = norm_at(d);
            }
        }
        best = best.max(fc).max(fd);
    }
    best
}

trait GridExt {
    fn max_with(self, floor: usize) -> Grid;
}

impl GridExt for Grid {
    fn max_with(self, floor: usize) -> Grid {
        Grid::exact_for_width(self.size().max(floor))
    }
}
