//! JSON literals for operators, block matrices, measures and Toeplitz specs.
//!
//! Complex numbers are `[re, im]` pairs and operators are flat row-major
//! lists of `d²` pairs. Floats are written in shortest round-trip form, so
//! parsing a written literal reproduces every bit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::block::{HSeq, OpMatrix};
use crate::error::{Error, Result};
use crate::measure::{Atom, Density, LazyKind, Measure, OpMeasure};
use crate::operator::{HVector, Operator};
use crate::toeplitz::ToeplitzSpec;
use crate::torus::TrigPoly;
use crate::C64;

type Pairs = Vec<[f64; 2]>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpMatrixJson {
    rows: usize,
    cols: usize,
    dim: usize,
    blocks: Vec<Vec<Pairs>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomJson {
    t: f64,
    #[serde(rename = "W")]
    w: Pairs,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum MeasureJson {
    Discrete {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<usize>,
        atoms: Vec<AtomJson>,
    },
    Density {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coeffs: Option<BTreeMap<String, Pairs>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<Vec<Pairs>>,
    },
    Lazy {
        kind: String,
        d: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coeffs: Option<BTreeMap<String, Pairs>>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ToeplitzJson {
    measure: MeasureJson,
    #[serde(rename = "N")]
    n: usize,
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

fn pairs_of(values: impl IntoIterator<Item = C64>) -> Pairs {
    values.into_iter().map(|c| [c.re, c.im]).collect()
}

fn complex_of(p: &Pairs) -> Vec<C64> {
    p.iter().map(|[re, im]| C64::new(*re, *im)).collect()
}

fn operator_pairs(t: &Operator) -> Pairs {
    pairs_of(t.entries())
}

fn operator_from_pairs(p: &Pairs, expected_dim: Option<usize>) -> Result<Operator> {
    let d = (p.len() as f64).sqrt().round() as usize;
    if d == 0 || d * d != p.len() {
        return Err(Error::Parse(format!("an operator needs d² entries, found {}", p.len())));
    }
    if let Some(e) = expected_dim {
        crate::error::check_dim(e, d)?;
    }
    Operator::new(d, &complex_of(p))
}

pub fn operator_to_json(t: &Operator) -> String {
    serde_json::to_string(&operator_pairs(t)).expect("plain data serializes")
}

pub fn operator_from_json(s: &str) -> Result<Operator> {
    operator_from_pairs(&serde_json::from_str(s).map_err(parse_err)?, None)
}

pub fn hvector_to_json(x: &HVector) -> String {
    serde_json::to_string(&pairs_of(x.coords().iter().copied())).expect("plain data serializes")
}

pub fn hvector_from_json(s: &str) -> Result<HVector> {
    let p: Pairs = serde_json::from_str(s).map_err(parse_err)?;
    HVector::new(complex_of(&p))
}

/// A sequence as a list of vectors.
pub fn hseq_to_json(x: &HSeq) -> String {
    let items: Vec<Pairs> = x.items().iter().map(|v| pairs_of(v.coords().iter().copied())).collect();
    serde_json::to_string(&items).expect("plain data serializes")
}

pub fn hseq_from_json(s: &str) -> Result<HSeq> {
    let items: Vec<Pairs> = serde_json::from_str(s).map_err(parse_err)?;
    HSeq::new(items.iter().map(|p| HVector::new(complex_of(p))).collect::<Result<_>>()?)
}

pub fn opmatrix_to_json(a: &OpMatrix) -> String {
    let blocks = (0..a.rows()).map(|k| a.row(k).iter().map(operator_pairs).collect()).collect();
    let j = OpMatrixJson { rows: a.rows(), cols: a.cols(), dim: a.dim(), blocks };
    serde_json::to_string(&j).expect("plain data serializes")
}

pub fn opmatrix_from_json(s: &str) -> Result<OpMatrix> {
    let j: OpMatrixJson = serde_json::from_str(s).map_err(parse_err)?;
    if j.blocks.len() != j.rows || j.blocks.iter().any(|r| r.len() != j.cols) {
        return Err(Error::Parse(format!("blocks do not form a {}x{} grid", j.rows, j.cols)));
    }
    let blocks = j.blocks.iter().flatten().map(|p| operator_from_pairs(p, Some(j.dim))).collect::<Result<Vec<_>>>()?;
    OpMatrix::from_blocks(j.rows, j.cols, j.dim, blocks)
}

fn coeff_map(coeffs: &BTreeMap<i64, Operator>) -> BTreeMap<String, Pairs> {
    coeffs.iter().map(|(k, t)| (k.to_string(), operator_pairs(t))).collect()
}

fn coeffs_from_map(m: &BTreeMap<String, Pairs>, dim: Option<usize>) -> Result<BTreeMap<i64, Operator>> {
    m.iter()
        .map(|(k, p)| {
            let k: i64 = k.parse().map_err(|_| Error::Parse(format!("coefficient key {k:?} is not an integer")))?;
            Ok((k, operator_from_pairs(p, dim)?))
        })
        .collect()
}

fn measure_json(mu: &OpMeasure) -> MeasureJson {
    match mu {
        Measure::Discrete { dim, atoms } => MeasureJson::Discrete {
            d: Some(*dim),
            atoms: atoms.iter().map(|a| AtomJson { t: a.t, w: operator_pairs(&a.weight) }).collect(),
        },
        Measure::Density { dim, density: Density::Poly(f) } => {
            let coeffs = f.coeffs().clone();
            MeasureJson::Density { d: Some(*dim), coeffs: Some(coeff_map(&coeffs)), samples: None }
        }
        Measure::Density { dim, density: Density::Samples(s) } => {
            MeasureJson::Density { d: Some(*dim), coeffs: None, samples: Some(s.iter().map(operator_pairs).collect()) }
        }
        Measure::Lazy { dim, kind: LazyKind::Spectral, .. } => MeasureJson::Lazy { kind: "spectral".into(), d: *dim, coeffs: None },
        Measure::Lazy { dim, kind: LazyKind::Table, coeffs } => {
            MeasureJson::Lazy { kind: "table".into(), d: *dim, coeffs: Some(coeff_map(coeffs)) }
        }
    }
}

fn measure_from(j: MeasureJson) -> Result<OpMeasure> {
    match j {
        MeasureJson::Discrete { d, atoms } => {
            let atoms = atoms
                .iter()
                .map(|a| Ok(Atom { t: a.t, weight: operator_from_pairs(&a.w, d)? }))
                .collect::<Result<Vec<_>>>()?;
            let dim = d.or_else(|| atoms.first().map(|a| a.weight.dim())).ok_or(Error::Parse("a measure without atoms needs \"d\"".into()))?;
            Measure::discrete(dim, atoms)
        }
        MeasureJson::Density { d, coeffs: Some(c), samples: None } => {
            let coeffs = coeffs_from_map(&c, d)?;
            let dim = d.or_else(|| coeffs.values().next().map(Operator::dim)).ok_or(Error::Parse("an empty density needs \"d\"".into()))?;
            Measure::density_poly(TrigPoly::from_coeffs(dim, coeffs))
        }
        MeasureJson::Density { d, coeffs: None, samples: Some(s) } => {
            let samples = s.iter().map(|p| operator_from_pairs(p, d)).collect::<Result<Vec<_>>>()?;
            let dim = d.or_else(|| samples.first().map(Operator::dim)).ok_or(Error::Empty("density samples"))?;
            Measure::density_samples(dim, samples)
        }
        MeasureJson::Density { .. } => Err(Error::Parse("a density needs exactly one of \"coeffs\" and \"samples\"".into())),
        MeasureJson::Lazy { kind, d, coeffs } => match (kind.as_str(), coeffs) {
            ("spectral", None) if d > 0 => Ok(OpMeasure::spectral(d)),
            ("table", Some(c)) => Measure::lazy_table(d, coeffs_from_map(&c, Some(d))?),
            (k, _) => Err(Error::Parse(format!("unsupported lazy measure kind {k:?}"))),
        },
    }
}

pub fn measure_to_json(mu: &OpMeasure) -> String {
    serde_json::to_string(&measure_json(mu)).expect("plain data serializes")
}

pub fn measure_from_json(s: &str) -> Result<OpMeasure> {
    measure_from(serde_json::from_str(s).map_err(parse_err)?)
}

pub fn toeplitz_spec_to_json(spec: &ToeplitzSpec) -> String {
    serde_json::to_string(&ToeplitzJson { measure: measure_json(&spec.measure), n: spec.n }).expect("plain data serializes")
}

pub fn toeplitz_spec_from_json(s: &str) -> Result<ToeplitzSpec> {
    let j: ToeplitzJson = serde_json::from_str(s).map_err(parse_err)?;
    ToeplitzSpec::new(measure_from(j.measure)?, j.n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_opmatrix, random_operator, seeded_rng};

    #[test]
    fn literal_shapes() {
        let mu = measure_from_json(r#"{"type":"discrete","atoms":[{"t":0.5,"W":[[1,0],[0,0],[0,0],[2,-1]]}]}"#).unwrap();
        assert_eq!(mu.dim(), 2);
        let f = measure_from_json(r#"{"type":"density","coeffs":{"-1":[[1,0]]}}"#).unwrap();
        assert_eq!(f.fourier(1).entry(0, 0), C64::new(1.0, 0.0));
        let s = measure_from_json(r#"{"type":"lazy","kind":"spectral","d":3}"#).unwrap();
        assert_eq!(s, OpMeasure::spectral(3));
        let spec = toeplitz_spec_from_json(r#"{"measure":{"type":"lazy","kind":"spectral","d":2},"N":4}"#).unwrap();
        assert_eq!(spec.n, 4);
    }

    #[test]
    fn malformed_literals_are_rejected() {
        for bad in [
            "{",
            r#"{"type":"discrete","atoms":[{"t":0.5,"W":[[1,0],[0,0],[0,0]]}]}"#,
            r#"{"type":"density"}"#,
            r#"{"type":"lazy","kind":"mystery","d":2}"#,
            r#"{"type":"density","coeffs":{"x":[[1,0]]}}"#,
            r#"{"type":"discrete","atoms":[]}"#,
        ] {
            assert!(measure_from_json(bad).is_err(), "{bad}");
        }
        assert!(opmatrix_from_json(r#"{"rows":2,"cols":1,"dim":1,"blocks":[[[[1,0]]]]}"#).is_err());
        assert!(opmatrix_from_json(r#"{"rows":1,"cols":1,"dim":2,"blocks":[[[[1,0]]]]}"#).is_err());
    }

    #[test]
    fn roundtrips() {
        let mut rng = seeded_rng(1);
        let a = random_opmatrix(&mut rng, 2, 3, 2);
        assert_eq!(opmatrix_from_json(&opmatrix_to_json(&a)).unwrap(), a);
        let t = random_operator(&mut rng, 3);
        assert_eq!(operator_from_json(&operator_to_json(&t)).unwrap(), t);
        let spec = OpMeasure::spectral(4);
        assert_eq!(measure_from_json(&measure_to_json(&spec)).unwrap(), spec);
        let table = spec.adjoint_measure();
        assert_eq!(measure_from_json(&measure_to_json(&table)).unwrap(), table);
        let zero = OpMeasure::zero(3);
        assert_eq!(measure_from_json(&measure_to_json(&zero)).unwrap(), zero);
    }
}
