//! JSON descriptors for the external interfaces. Rationals travel as "p/q"
//! strings so no precision is ever lost; field elements are coefficient
//! arrays in the generator power basis.

use num_bigint::BigInt;
use serde_json::{json, Map, Value};
use std::str::FromStr;

use crate::hodge::{EStructure, PeriodDatum};
use crate::linalg::Mat;
use crate::quadspace::{EAction, QForm, QuadSpace};
use crate::scalars::gauss::GaussExt;
use crate::scalars::poly::{Poly, Rat};
use crate::scalars::{EtaleAlgebra, EtaleElement, FieldElement, NumberField, RealEmbedding};

#[derive(Debug, Clone)]
pub struct JsonError(pub String);

impl std::fmt::Display for JsonError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "input error: {}", self.0)
    }
}

impl std::error::Error for JsonError {}

fn err<T>(msg: impl Into<String>) -> Result<T, JsonError> {
    Err(JsonError(msg.into()))
}

// ---------------------------------------------------------------------------
// Rationals
// ---------------------------------------------------------------------------

pub fn rat_to_json(r: &Rat) -> Value {
    if r.denom() == &BigInt::from(1) {
        Value::String(r.numer().to_string())
    } else {
        Value::String(format!("{}/{}", r.numer(), r.denom()))
    }
}

pub fn rat_from_json(v: &Value) -> Result<Rat, JsonError> {
    let Some(s) = v.as_str() else {
        if let Some(i) = v.as_i64() {
            return Ok(Rat::from_integer(i.into()));
        }
        return err("rational must be a \"p/q\" string");
    };
    let parts: Vec<&str> = s.split('/').collect();
    match parts.len() {
        1 => {
            let n = BigInt::from_str(parts[0].trim()).map_err(|e| JsonError(e.to_string()))?;
            Ok(Rat::from_integer(n))
        }
        2 => {
            let n = BigInt::from_str(parts[0].trim()).map_err(|e| JsonError(e.to_string()))?;
            let d = BigInt::from_str(parts[1].trim()).map_err(|e| JsonError(e.to_string()))?;
            if d == BigInt::from(0) {
                return err("zero denominator");
            }
            Ok(Rat::new(n, d))
        }
        _ => err("malformed rational"),
    }
}

pub fn rat_vec_to_json(v: &[Rat]) -> Value {
    Value::Array(v.iter().map(rat_to_json).collect())
}

pub fn rat_vec_from_json(v: &Value) -> Result<Vec<Rat>, JsonError> {
    let Some(arr) = v.as_array() else {
        return err("expected an array of rationals");
    };
    arr.iter().map(rat_from_json).collect()
}

pub fn rat_matrix_to_json(m: &Mat<Rat>) -> Value {
    Value::Array(
        (0..m.rows)
            .map(|r| rat_vec_to_json(m.row(r)))
            .collect(),
    )
}

pub fn rat_matrix_from_json(v: &Value) -> Result<Mat<Rat>, JsonError> {
    let Some(arr) = v.as_array() else {
        return err("expected a matrix (array of rows)");
    };
    let rows: Result<Vec<Vec<Rat>>, JsonError> = arr.iter().map(rat_vec_from_json).collect();
    let rows = rows?;
    if rows.is_empty() {
        return err("empty matrix");
    }
    let c = rows[0].len();
    if rows.iter().any(|r| r.len() != c) {
        return err("ragged matrix");
    }
    Ok(Mat::from_rows(rows))
}

// ---------------------------------------------------------------------------
// Fields and etale algebras
// ---------------------------------------------------------------------------

pub fn field_to_json(f: &NumberField) -> Value {
    json!({
        "generator": f.name(),
        "min_poly": rat_vec_to_json(&f.min_poly().coeffs),
    })
}

pub fn field_from_json(v: &Value) -> Result<NumberField, JsonError> {
    let name = v
        .get("generator")
        .and_then(|x| x.as_str())
        .unwrap_or("a");
    let poly = v
        .get("min_poly")
        .ok_or_else(|| JsonError("field needs min_poly".into()))?;
    let coeffs = rat_vec_from_json(poly)?;
    NumberField::new(name, Poly::new(coeffs)).map_err(|e| JsonError(e.to_string()))
}

pub fn etale_to_json(e: &EtaleAlgebra) -> Value {
    json!({
        "factors": e.factors().iter().map(field_to_json).collect::<Vec<_>>(),
    })
}

pub fn etale_from_json(v: &Value) -> Result<EtaleAlgebra, JsonError> {
    let Some(factors) = v.get("factors").and_then(|x| x.as_array()) else {
        return err("etale algebra needs a factors array");
    };
    if factors.is_empty() {
        return err("etale algebra needs at least one factor");
    }
    let fs: Result<Vec<NumberField>, JsonError> = factors.iter().map(field_from_json).collect();
    Ok(EtaleAlgebra::new(fs?))
}

pub fn element_to_json(x: &EtaleElement) -> Value {
    Value::Array(
        x.parts()
            .iter()
            .map(|p| rat_vec_to_json(p.coeffs()))
            .collect(),
    )
}

pub fn element_from_json(e: &EtaleAlgebra, v: &Value) -> Result<EtaleElement, JsonError> {
    let Some(arr) = v.as_array() else {
        return err("element must be an array of per-factor coefficient arrays");
    };
    if arr.len() != e.factors().len() {
        return err("element has the wrong number of factors");
    }
    let mut parts = vec![];
    for (f, part) in e.factors().iter().zip(arr) {
        let coeffs = rat_vec_from_json(part)?;
        if coeffs.len() != f.degree() {
            return err("coefficient array length must equal the factor degree");
        }
        parts.push(f.element(coeffs));
    }
    Ok(e.from_parts(parts))
}

pub fn field_element_to_json(x: &FieldElement) -> Value {
    rat_vec_to_json(x.coeffs())
}

pub fn field_element_from_json(f: &NumberField, v: &Value) -> Result<FieldElement, JsonError> {
    let coeffs = rat_vec_from_json(v)?;
    if coeffs.len() != f.degree() {
        return err("coefficient array length must equal the field degree");
    }
    Ok(f.element(coeffs))
}

// ---------------------------------------------------------------------------
// Quadratic spaces and rational forms
// ---------------------------------------------------------------------------

pub fn quadspace_to_json(s: &QuadSpace) -> Value {
    let kind = match s.kind() {
        crate::quadspace::FormKind::Symmetric => "symmetric",
        crate::quadspace::FormKind::Hermitian => "hermitian",
    };
    let gram: Vec<Value> = (0..s.rank())
        .map(|r| {
            Value::Array(
                (0..s.rank())
                    .map(|c| element_to_json(s.gram().at(r, c)))
                    .collect(),
            )
        })
        .collect();
    json!({
        "base": etale_to_json(s.base()),
        "rank": s.rank(),
        "kind": kind,
        "gram": gram,
    })
}

pub fn quadspace_from_json(v: &Value) -> Result<QuadSpace, JsonError> {
    let base = etale_from_json(
        v.get("base").ok_or_else(|| JsonError("space needs base".into()))?,
    )?;
    let rank = v
        .get("rank")
        .and_then(|x| x.as_u64())
        .ok_or_else(|| JsonError("space needs rank".into()))? as usize;
    let kind = v.get("kind").and_then(|x| x.as_str()).unwrap_or("symmetric");
    let Some(rows) = v.get("gram").and_then(|x| x.as_array()) else {
        return err("space needs a gram matrix");
    };
    if rows.len() != rank {
        return err("gram matrix size must equal the rank");
    }
    let mut gram = Mat::filled(rank, rank, base.zero());
    for (r, row) in rows.iter().enumerate() {
        let Some(cells) = row.as_array() else {
            return err("gram row must be an array");
        };
        if cells.len() != rank {
            return err("ragged gram matrix");
        }
        for (c, cell) in cells.iter().enumerate() {
            gram[(r, c)] = element_from_json(&base, cell)?;
        }
    }
    match kind {
        "symmetric" => QuadSpace::symmetric(base, gram).map_err(|e| JsonError(e.to_string())),
        "hermitian" => QuadSpace::hermitian(base, gram).map_err(|e| JsonError(e.to_string())),
        other => err(format!("unknown form kind {:?}", other)),
    }
}

pub fn qform_to_json(f: &QForm) -> Value {
    let mut obj = Map::new();
    obj.insert("dim".into(), json!(f.dim));
    obj.insert("gram".into(), rat_matrix_to_json(&f.gram));
    if let Some(a) = &f.e_action {
        obj.insert(
            "e_action".into(),
            json!({
                "algebra": etale_to_json(&a.algebra),
                "matrices": a.matrices.iter().map(rat_matrix_to_json).collect::<Vec<_>>(),
            }),
        );
    }
    Value::Object(obj)
}

pub fn qform_from_json(v: &Value) -> Result<QForm, JsonError> {
    let gram = rat_matrix_from_json(
        v.get("gram").ok_or_else(|| JsonError("form needs gram".into()))?,
    )?;
    let dim = gram.rows;
    let e_action = match v.get("e_action") {
        None | Some(Value::Null) => None,
        Some(a) => {
            let algebra = etale_from_json(
                a.get("algebra")
                    .ok_or_else(|| JsonError("action needs algebra".into()))?,
            )?;
            let Some(mats) = a.get("matrices").and_then(|x| x.as_array()) else {
                return err("action needs matrices");
            };
            let matrices: Result<Vec<Mat<Rat>>, JsonError> =
                mats.iter().map(rat_matrix_from_json).collect();
            let matrices = matrices?;
            if matrices.len() != algebra.total_degree() {
                return err("one action matrix per Q-basis element required");
            }
            Some(EAction { algebra, matrices })
        }
    };
    Ok(QForm { dim, gram, e_action })
}

// ---------------------------------------------------------------------------
// Period data
// ---------------------------------------------------------------------------

pub fn period_to_json(p: &PeriodDatum) -> Value {
    let mut obj = Map::new();
    obj.insert("form".into(), rat_matrix_to_json(&p.form));
    obj.insert("coeff_field".into(), field_to_json(&p.coeff_field));
    let (lo, hi) = p.embedding.interval();
    obj.insert(
        "embedding".into(),
        Value::Array(vec![rat_to_json(&lo), rat_to_json(&hi)]),
    );
    obj.insert(
        "x".into(),
        Value::Array(p.x.iter().map(field_element_to_json).collect()),
    );
    obj.insert(
        "y".into(),
        Value::Array(p.y.iter().map(field_element_to_json).collect()),
    );
    if let Some(es) = &p.e_structure {
        obj.insert(
            "e_action".into(),
            json!({
                "field": field_to_json(&es.field),
                "gen_action": rat_matrix_to_json(&es.gen_action),
                "sigma0_re": field_element_to_json(&es.sigma0_image.re),
                "sigma0_im": field_element_to_json(&es.sigma0_image.im),
            }),
        );
    }
    Value::Object(obj)
}

pub fn period_from_json(v: &Value) -> Result<PeriodDatum, JsonError> {
    let form = rat_matrix_from_json(
        v.get("form").ok_or_else(|| JsonError("period needs form".into()))?,
    )?;
    let coeff_field = field_from_json(
        v.get("coeff_field")
            .ok_or_else(|| JsonError("period needs coeff_field".into()))?,
    )?;
    let Some(emb) = v.get("embedding").and_then(|x| x.as_array()) else {
        return err("period needs an embedding interval");
    };
    if emb.len() != 2 {
        return err("embedding interval must be [lo, hi]");
    }
    let lo = rat_from_json(&emb[0])?;
    let hi = rat_from_json(&emb[1])?;
    let embedding = RealEmbedding::new(coeff_field.clone(), lo, hi)
        .map_err(|e| JsonError(e.to_string()))?;
    let parse_vec = |key: &str| -> Result<Vec<FieldElement>, JsonError> {
        let Some(arr) = v.get(key).and_then(|x| x.as_array()) else {
            return err(format!("period needs {}", key));
        };
        arr.iter()
            .map(|x| field_element_from_json(&coeff_field, x))
            .collect()
    };
    let x = parse_vec("x")?;
    let y = parse_vec("y")?;
    let e_structure = match v.get("e_action") {
        None | Some(Value::Null) => None,
        Some(a) => {
            let field = field_from_json(
                a.get("field").ok_or_else(|| JsonError("action needs field".into()))?,
            )?;
            let gen_action = rat_matrix_from_json(
                a.get("gen_action")
                    .ok_or_else(|| JsonError("action needs gen_action".into()))?,
            )?;
            let re = field_element_from_json(
                &coeff_field,
                a.get("sigma0_re")
                    .ok_or_else(|| JsonError("action needs sigma0_re".into()))?,
            )?;
            let im = field_element_from_json(
                &coeff_field,
                a.get("sigma0_im")
                    .ok_or_else(|| JsonError("action needs sigma0_im".into()))?,
            )?;
            Some(EStructure {
                field,
                gen_action,
                sigma0_image: GaussExt::new(re, im),
            })
        }
    };
    Ok(PeriodDatum {
        form,
        coeff_field,
        embedding,
        x,
        y,
        e_structure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::poly::rat;

    #[test]
    fn rational_roundtrip() {
        for r in [rat(5), Rat::new(22.into(), 7.into()), rat(-3)] {
            let j = rat_to_json(&r);
            assert_eq!(rat_from_json(&j).unwrap(), r);
        }
        assert!(rat_from_json(&Value::String("1/0".into())).is_err());
    }

    #[test]
    fn quadspace_roundtrip() {
        let f = NumberField::quadratic("s2", 2);
        let s = QuadSpace::diagonal(f.clone(), vec![f.one(), f.gen()]).unwrap();
        let j = quadspace_to_json(&s);
        let s2 = quadspace_from_json(&j).unwrap();
        assert_eq!(s2.gram(), s.gram());
        assert_eq!(s2.rank(), 2);
    }

    #[test]
    fn period_roundtrip() {
        let q = NumberField::rational();
        let emb = q.real_embeddings().remove(0);
        let p = PeriodDatum {
            form: Mat::from_rows(vec![
                vec![rat(1), rat(0), rat(0)],
                vec![rat(0), rat(1), rat(0)],
                vec![rat(0), rat(0), rat(-1)],
            ]),
            coeff_field: q.clone(),
            embedding: emb,
            x: vec![q.one(), q.zero(), q.zero()],
            y: vec![q.zero(), q.one(), q.zero()],
            e_structure: None,
        };
        let j = period_to_json(&p);
        let p2 = period_from_json(&j).unwrap();
        assert_eq!(p2.form, p.form);
        assert_eq!(p2.x, p.x);
        p2.hodge_decomposition().unwrap();
    }

    #[test]
    fn malformed_inputs_error() {
        assert!(quadspace_from_json(&json!({"rank": 2})).is_err());
        assert!(field_from_json(&json!({"generator": "a", "min_poly": ["-1", "0", "1"]})).is_err());
    }
}
