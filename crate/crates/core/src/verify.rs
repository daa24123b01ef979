//! The verification battery: twelve numbered criteria, each a seeded family
//! of checks with a fixed tolerance.
//!
//! Instances are generated from independent streams `(seed, criterion,
//! index)`, so results do not depend on how rayon schedules them. Reports
//! contain no timings and print floats with 17 significant digits.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::block::{sot_norm_seq, IndexMask};
use crate::error::{Error, Result};
use crate::gallery::{run_example, GalleryParams};
use crate::linalg::{jacobi_singular_values, spectral_norm};
use crate::measure::{Atom, Measure, OpMeasure, DEFAULT_R_LADDER};
use crate::operator::{Operator, TensorElement};
use crate::rng::{random_dmatrix, random_hseq, random_opmatrix, random_operator, random_unit_vector, random_unitary, random_vector, stream_rng};
use crate::toeplitz::{build_f, build_toeplitz, msot_membership, mult2_rhs, schur_action_rhs, toeplitz_norm_ladder, ToeplitzSpec};
use crate::torus::{bilinear_ba, TrigPoly};
use crate::C64;

pub const CRITERIA: [u8; 12] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12];

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub checked: usize,
    pub failures: usize,
    /// Largest error (for equalities) or largest `lhs - rhs` (for inequalities).
    pub worst: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Copy)]
struct Tally {
    checked: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn new() -> Self {
        Self { checked: 0, failures: 0, worst: f64::NEG_INFINITY }
    }

    /// Records a check whose measured quantity is `value` and must be `≤ limit`.
    fn at_most(&mut self, value: f64, limit: f64) {
        self.checked += 1;
        self.worst = self.worst.max(value);
        if value.is_nan() || value > limit {
            self.failures += 1;
        }
    }

    fn merge(mut self, other: Tally) -> Self {
        self.checked += other.checked;
        self.failures += other.failures;
        self.worst = self.worst.max(other.worst);
        self
    }

    fn result(self, id: u8, name: &'static str, detail: String) -> CriterionResult {
        CriterionResult { id, name, pass: self.failures == 0 && self.checked > 0, checked: self.checked, failures: self.failures, worst: self.worst, detail }
    }
}

fn instances<T: Send>(seed: u64, criterion: u8, count: usize, f: impl Fn(&mut ChaCha8Rng, usize) -> T + Sync) -> Vec<T> {
    (0..count)
        .into_par_iter()
        .map(|i| f(&mut stream_rng(seed, ((criterion as u64) << 32) | i as u64), i))
        .collect()
}

fn tally_all(ts: Vec<Tally>) -> Tally {
    ts.into_iter().fold(Tally::new(), Tally::merge)
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn criterion_name(id: u8) -> Option<&'static str> {
    Some(match id {
        1 => "schur_submultiplicativity",
        2 => "double_sum_inequality",
        3 => "projection_norms",
        4 => "bilinear_identity",
        5 => "gallery_closed_forms",
        6 => "poisson_variation",
        7 => "toeplitz_characterization",
        8 => "multiplier_action_identities",
        9 => "multiplier_bound",
        10 => "msot_surrogate",
        11 => "oracle_agreement",
        12 => "determinism",
        _ => return None,
    })
}

/// Runs one criterion. Criterion 12 reruns 1 to 11 twice and compares the
/// rendered reports byte for byte.
pub fn run_criterion(id: u8, seed: u64) -> Result<CriterionResult> {
    match id {
        1 => Ok(c1_schur(seed)),
        2 => Ok(c2_double_sum(seed)),
        3 => Ok(c3_projections(seed)),
        4 => Ok(c4_bilinear(seed)),
        5 => c5_gallery(seed),
        6 => c6_poisson(seed),
        7 => c7_toeplitz(),
        8 => c8_action(seed),
        9 => c9_bound(seed),
        10 => c10_msot(seed),
        11 => Ok(c11_oracles(seed)),
        12 => c12_determinism(seed),
        other => Err(Error::UnknownName(format!("criterion {other}"))),
    }
}

pub fn run_suite(ids: &[u8], seed: u64) -> Result<Vec<CriterionResult>> {
    ids.iter().map(|&id| run_criterion(id, seed)).collect()
}

/// Parses `all`, a number, or a comma-separated list of numbers.
pub fn parse_suite(selector: &str) -> Result<Vec<u8>> {
    if selector.trim() == "all" {
        return Ok(CRITERIA.to_vec());
    }
    selector
        .split(',')
        .map(|s| {
            let id: u8 = s.trim().parse().map_err(|_| Error::UnknownName(format!("suite {s:?}")))?;
            criterion_name(id).map(|_| id).ok_or_else(|| Error::UnknownName(format!("suite {s:?}")))
        })
        .collect()
}

pub fn render_report(results: &[CriterionResult]) -> String {
    let mut out = String::new();
    for r in results {
        let _ = writeln!(
            out,
            "criterion {:>2} {} {} checked={} failures={} worst={} {}",
            r.id,
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.checked,
            r.failures,
            sci(r.worst),
            r.detail
        );
    }
    out
}

const DIMS: [usize; 3] = [1, 2, 3];
const SIZES: [usize; 3] = [2, 4, 8];

fn c1_schur(seed: u64) -> CriterionResult {
    let ts = instances(seed, 1, 200, |rng, i| {
        let d = DIMS[i % 3];
        let n = SIZES[(i / 3) % 3];
        let a = random_opmatrix(rng, n, n, d);
        let b = random_opmatrix(rng, n, n, d);
        let bound = a.opnorm() * b.opnorm();
        let mut t = Tally::new();
        t.at_most(a.schur_product(&b).expect("same shape").opnorm() - bound, 1e-8);
        t.at_most(b.schur_product(&a).expect("same shape").opnorm() - bound, 1e-8);
        t
    });
    tally_all(ts).result(1, "schur_submultiplicativity", "pairs=200 orders=2 slack=1e-8".into())
}

fn c2_double_sum(seed: u64) -> CriterionResult {
    let ts = instances(seed, 2, 200, |rng, _| {
        let n = rng.random_range(1..=6);
        let m = rng.random_range(1..=6);
        let d = rng.random_range(1..=3);
        let a = random_opmatrix(rng, n, m, d);
        let x = random_hseq(rng, m, d);
        let mut t = Tally::new();
        let lhs = a.double_sum(&x).expect("same shape");
        t.at_most(lhs - a.opnorm().powi(2) * x.norm().powi(2), 1e-8);
        t
    });
    tally_all(ts).result(2, "double_sum_inequality", "instances=200 slack=1e-8".into())
}

fn c3_projections(seed: u64) -> CriterionResult {
    let ts = instances(seed, 3, 100, |rng, _| {
        let n = rng.random_range(2..=5);
        let m = rng.random_range(2..=5);
        let d = rng.random_range(1..=3);
        let a = random_opmatrix(rng, n, m, d);
        let mut t = Tally::new();
        for k in 0..n {
            let adj: Vec<Operator> = a.row(k).iter().map(Operator::adjoint).collect();
            let err = (a.project(&IndexMask::Row(k)).opnorm() - sot_norm_seq(&adj).expect("nonempty")).abs();
            t.at_most(err, 1e-9);
        }
        for j in 0..m {
            let err = (a.project(&IndexMask::Col(j)).opnorm() - sot_norm_seq(&a.column(j)).expect("nonempty")).abs();
            t.at_most(err, 1e-9);
        }
        for l in -(n as i64 - 1)..m as i64 {
            let sup = (0..n)
                .filter_map(|k| {
                    let j = k as i64 + l;
                    (0..m as i64).contains(&j).then(|| a.block(k, j as usize).spectral_norm())
                })
                .fold(0.0, f64::max);
            t.at_most((a.project(&IndexMask::Diagonal(l)).opnorm() - sup).abs(), 1e-9);
        }
        t
    });
    tally_all(ts).result(3, "projection_norms", "instances=100 tol=1e-9 row=sot(adjoint row) column=sot(column) diagonal=sup".into())
}

fn c4_bilinear(seed: u64) -> CriterionResult {
    let ts = instances(seed, 4, 100, |rng, _| {
        let a = random_opmatrix(rng, 4, 4, 2);
        let x = random_hseq(rng, 4, 2);
        let y = random_hseq(rng, 4, 2);
        let direct = a.apply(&x).expect("shape").inner(&y).expect("shape");
        let mut t = Tally::new();
        t.at_most((bilinear_ba(&a, &x, &y).expect("shape") - direct).norm(), 1e-9);
        t
    });
    tally_all(ts).result(4, "bilinear_identity", "instances=100 N=M=4 d=2 tol=1e-9".into())
}

fn c5_gallery(seed: u64) -> Result<CriterionResult> {
    let mut t = Tally::new();
    let mut detail = String::new();
    for name in ["diag_rank_one", "row_rank_one", "harmonic_multiplication", "no_rn_measure"] {
        let params = GalleryParams { seed, ..GalleryParams::defaults(name)? };
        let report = run_example(name, &params)?;
        for m in &report.metrics {
            let err = (m.computed - m.expected).abs();
            let scaled = if m.relative { err / m.expected.abs() } else { err };
            t.at_most(scaled - m.tol, 0.0);
            if m.name == "sup_norm" {
                let _ = write!(detail, "harmonic_sup={} target={} ", sci(m.computed), sci(m.expected));
            }
        }
    }
    detail.push_str("examples=diag_rank_one,row_rank_one,harmonic_multiplication,no_rn_measure");
    Ok(t.result(5, "gallery_closed_forms", detail))
}

/// A discrete measure with `atoms ≤ 4` atoms on a jittered lattice, so the
/// atoms stay at least a quarter turn / atoms apart.
pub fn separated_measure(rng: &mut ChaCha8Rng, atoms: usize, d: usize) -> Result<OpMeasure> {
    let offset = rng.random_range(0.0..TAU);
    let spacing = TAU / atoms as f64;
    let list = (0..atoms)
        .map(|i| {
            let jitter = rng.random_range(-0.25..0.25) * spacing;
            Atom { t: offset + i as f64 * spacing + jitter, weight: random_operator(rng, d) }
        })
        .collect();
    Measure::discrete(d, list)
}

fn c6_poisson(seed: u64) -> Result<CriterionResult> {
    let ts: Vec<Result<(Tally, f64)>> = instances(seed, 6, 20, |rng, i| {
        let mu = separated_measure(rng, 1 + i % 4, 1 + (i / 4) % 3)?;
        let var = mu.variation()?;
        let ladder = mu.poisson_variation(&DEFAULT_R_LADDER)?;
        let rel = (var - ladder.sup).abs() / var;
        let mut t = Tally::new();
        t.at_most(rel, 0.01);
        // the Poisson means never exceed the variation beyond quadrature error
        t.at_most(ladder.sup - var, 1e-9 * var);
        Ok((t, rel))
    });
    let mut total = Tally::new();
    let mut worst_rel: f64 = 0.0;
    for r in ts {
        let (t, rel) = r?;
        total = total.merge(t);
        worst_rel = worst_rel.max(rel);
    }
    Ok(total.result(6, "poisson_variation", format!("measures=20 r=0.999 grid=8K worst_relative_gap={}", sci(worst_rel))))
}

fn c7_toeplitz() -> Result<CriterionResult> {
    let ladder = [1, 2, 4, 8, 16, 32, 64];
    let mut t = Tally::new();
    let one = |c: f64| Operator::scalar(C64::new(c, 0.0));
    let cos2 = Measure::density_poly(TrigPoly::from_coeffs(1, [(-1, one(1.0)), (1, one(1.0))]))?;
    let vals = toeplitz_norm_ladder(&cos2, &ladder)?;
    for (n, v) in ladder.iter().zip(&vals) {
        t.at_most((v - 2.0 * (PI / (*n as f64 + 1.0)).cos()).abs(), 1e-9);
    }
    let at64 = vals[vals.len() - 1];
    t.at_most((2.0 - at64) / 2.0, 0.05);

    let mut diag_plus = DMatrix::zeros(2, 2);
    diag_plus[(0, 0)] = C64::new(1.0, 0.0);
    diag_plus[(1, 1)] = C64::new(1.0, 0.0);
    let mut diag_minus = DMatrix::zeros(2, 2);
    diag_minus[(1, 1)] = C64::new(1.0, 0.0);
    let block = Measure::density_poly(TrigPoly::from_coeffs(
        2,
        [(-1, Operator::from_matrix(diag_minus)?), (1, Operator::from_matrix(diag_plus)?)],
    ))?;
    let mut rng = stream_rng(0x7E0F, 7);
    let random = Measure::density_poly(TrigPoly::from_coeffs(2, (-2..=2).map(|k| (k, random_operator(&mut rng, 2)))))?;
    let mut detail = format!("cos_ladder_at_64={} ", sci(at64));
    for (label, mu) in [("cos", &cos2), ("block", &block), ("random", &random)] {
        let vinf = mu.vinf_norm().value();
        let vals = toeplitz_norm_ladder(mu, &ladder)?;
        for w in vals.windows(2) {
            t.at_most(w[0] - w[1], 1e-10);
        }
        for v in &vals {
            t.at_most(v - vinf, 1e-8);
        }
        let _ = write!(detail, "{label}_vinf={} {label}_at_64={} ", sci(vinf), sci(vals[vals.len() - 1]));
    }
    detail.push_str("ladder=1,2,4,8,16,32,64");
    Ok(t.result(7, "toeplitz_characterization", detail))
}

fn c8_action(seed: u64) -> Result<CriterionResult> {
    let ts: Vec<Result<Tally>> = instances(seed, 8, 50, |rng, i| {
        let n = 1 + i % 6;
        let d = 1 + (i / 6) % 3;
        let mu = separated_measure(rng, 1 + i % 3, d)?;
        let nu = separated_measure(rng, 1 + (i + 1) % 3, d)?;
        let b = random_opmatrix(rng, n, n, d);
        let x = random_hseq(rng, n, d);
        let y = random_hseq(rng, n, d);
        let a = build_toeplitz(&mu, n)?;
        let mut t = Tally::new();
        let direct = a.schur_product(&b)?.apply(&x)?.inner(&y)?;
        t.at_most((schur_action_rhs(&mu, &b, &x, &y)? - direct).norm(), 1e-9);
        let direct2 = a.schur_product(&build_toeplitz(&nu, n)?)?.apply(&x)?.inner(&y)?;
        t.at_most((mult2_rhs(&mu, &nu, &x, &y)? - direct2).norm(), 1e-9);
        Ok(t)
    });
    let t = tally_all(ts.into_iter().collect::<Result<Vec<_>>>()?);
    Ok(t.result(8, "multiplier_action_identities", "instances=50 identities=2 tol=1e-9".into()))
}

fn c9_bound(seed: u64) -> Result<CriterionResult> {
    let ts: Vec<Result<Tally>> = instances(seed, 9, 20, |rng, i| {
        let d = 1 + i % 3;
        let n = 4;
        let mu = separated_measure(rng, 1 + i % 4, d)?;
        let var = mu.variation()?;
        let a = build_toeplitz(&mu, n)?;
        let mut t = Tally::new();
        for _ in 0..100 {
            let b = random_opmatrix(rng, n, n, d);
            let bound = var * b.opnorm();
            t.at_most(a.schur_product(&b)?.opnorm() - bound, 1e-8);
            t.at_most(b.schur_product(&a)?.opnorm() - bound, 1e-8);
        }
        let spec = ToeplitzSpec::new(mu, n)?;
        for _ in 0..5 {
            let x = random_hseq(rng, n, d);
            let y = random_hseq(rng, n, d);
            let l1 = build_f(&spec, &x, &y)?.l1_norm().value;
            t.at_most(l1 - var * x.norm() * y.norm(), 1e-6);
        }
        Ok(t)
    });
    let t = tally_all(ts.into_iter().collect::<Result<Vec<_>>>()?);
    Ok(t.result(9, "multiplier_bound", "measures=20 matrices_per_measure=100 N=4 fields_per_measure=5".into()))
}

fn c10_msot(seed: u64) -> Result<CriterionResult> {
    let d = 4;
    let mu = OpMeasure::spectral(d);
    let mut t = Tally::new();
    let mut detail = String::new();
    for i in 0..5u64 {
        let x = random_unit_vector(&mut stream_rng(seed, (10 << 32) | i), d);
        let ladder = msot_membership(&mu, &x, &DEFAULT_R_LADDER)?;
        for e in &ladder.entries {
            let closed: f64 = (0..d).map(|k| x.coords()[k].norm_sqr() * e.r.powi(2 * (k as i32 + 1))).sum::<f64>().sqrt();
            t.at_most((e.l1 - closed).abs(), 1e-6);
        }
        // 1 - r^{2k} ≤ 2k(1 - r) bounds the distance of the top rung to ‖x‖
        let r_max = DEFAULT_R_LADDER[DEFAULT_R_LADDER.len() - 1];
        t.at_most(x.norm() - ladder.sup, 2.0 * d as f64 * (1.0 - r_max) * x.norm());
        if i == 0 {
            let _ = write!(detail, "first_sup={} ", sci(ladder.sup));
        }
    }
    detail.push_str("d=4 vectors=5 ladder=0.5,0.9,0.99,0.999");
    Ok(t.result(10, "msot_surrogate", detail))
}

/// Largest `|Σ J(T)(x_i ⊗ y_i)|` over `evals` unitaries, all of norm one:
/// Haar samples first, then a (1+1) evolution strategy from the best one.
/// Moves are Cayley transforms of random Hermitian matrices, so every
/// candidate stays unitary; the step follows the one-fifth success rule.
pub fn duality_sample_max(u: &TensorElement, evals: usize, rng: &mut ChaCha8Rng) -> f64 {
    let d = u.dim();
    let value = |m: &DMatrix<C64>| u.pair_with(&Operator::from_matrix(m.clone()).expect("finite")).expect("same dim").norm();
    let haar = evals / 5;
    let mut best = (f64::NEG_INFINITY, DMatrix::identity(d, d));
    for _ in 0..haar {
        let q = random_unitary(rng, d);
        let v = value(&q);
        if v > best.0 {
            best = (v, q);
        }
    }
    let eye = DMatrix::<C64>::identity(d, d);
    let mut step: f64 = 0.3;
    for _ in haar..evals {
        let g = random_dmatrix(rng, d, d);
        let h = (&g + g.adjoint()) * C64::new(0.0, 0.5 * step);
        let Some(inv) = (&eye - &h).try_inverse() else { continue };
        let cand = inv * (&eye + &h) * &best.1;
        let v = value(&cand);
        if v > best.0 {
            best = (v, cand);
            step = (step * (1.0f64 / 3.0).exp()).min(1.0);
        } else {
            step = (step * (-1.0f64 / 12.0).exp()).max(1e-8);
        }
    }
    best.0
}

fn c11_oracles(seed: u64) -> CriterionResult {
    let norms = instances(seed, 11, 1000, |rng, i| {
        let d = 1 + i % 8;
        let m = random_dmatrix(rng, d, d);
        let jac = jacobi_singular_values(&m)[0];
        let mut t = Tally::new();
        t.at_most((spectral_norm(&m) - jac).abs() / jac, 1e-9);
        t
    });
    let duality = instances(seed, 111, 100, |rng, _| {
        let terms = (0..4).map(|_| (random_vector(rng, 3), random_vector(rng, 3))).collect();
        let u = TensorElement::from_terms(terms).expect("same dim");
        let tn = u.trace_norm();
        let sampled = duality_sample_max(&u, 10_000, rng);
        let mut t = Tally::new();
        t.at_most(sampled - tn, 1e-9);
        t.at_most((tn - sampled) / tn, 0.02);
        let triangle: f64 = u.terms().iter().map(|(x, y)| x.norm() * y.norm()).sum();
        t.at_most(tn - triangle, 1e-9);
        t
    });
    tally_all(norms)
        .merge(tally_all(duality))
        .result(11, "oracle_agreement", "matrices=1000 d<=8 rel_tol=1e-9 tensors=100 samples=10000 within=2%".into())
}

fn c12_determinism(seed: u64) -> Result<CriterionResult> {
    let ids: Vec<u8> = (1..=11).collect();
    let first = render_report(&run_suite(&ids, seed)?);
    let second = render_report(&run_suite(&ids, seed)?);
    let mut t = Tally::new();
    let differing = first.lines().zip(second.lines()).filter(|(a, b)| a != b).count() + first.len().abs_diff(second.len()).min(1);
    t.at_most(differing as f64, 0.0);
    Ok(t.result(12, "determinism", format!("runs=2 report_bytes={} identical={}", first.len(), first == second)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_selector() {
        assert_eq!(parse_suite("all").unwrap().len(), 12);
        assert_eq!(parse_suite("3, 5").unwrap(), vec![3, 5]);
        assert!(matches!(parse_suite("13"), Err(Error::UnknownName(_))));
        assert!(matches!(parse_suite("abc"), Err(Error::UnknownName(_))));
    }

    #[test]
    fn cheap_criteria_pass_and_render_stably() {
        let results = run_suite(&[4, 10], 7).unwrap();
        assert!(results.iter().all(|r| r.pass), "{}", render_report(&results));
        assert_eq!(render_report(&results), render_report(&run_suite(&[4, 10], 7).unwrap()));
    }

    #[test]
    fn failures_are_counted() {
        let mut t = Tally::new();
        t.at_most(1.0, 0.5);
        t.at_most(f64::NAN, 0.5);
        t.at_most(0.1, 0.5);
        assert_eq!((t.checked, t.failures), (3, 2));
        assert!(!t.result(1, "x", String::new()).pass);
    }
}
