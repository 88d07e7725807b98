//! JSON documents. Rationals travel as text "p/q" or "p"; integer JSON numbers
//! are accepted on input for convenience. Output serialization always uses text.
//!
//! fan-document:      {"dim": n, "rays": [["p/q", ...], ...], "max_cones": [[i, ...], ...]}
//! polytope-document: {"dim": n, "vertices": [[...], ...]}
//! plf-document:      {"ray_values": [...]}, one value per fan ray in table order

use super::{cone_over_vertices, Fan, Plf};
use crate::linalg::{parse_q, Q};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::One;
use serde_json::Value;

pub fn rational_from_value(v: &Value) -> Result<Q> {
    match v {
        Value::String(s) => {
            parse_q(s).ok_or_else(|| Error::Parse(format!("bad rational literal {s:?}")))
        }
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Q::new(BigInt::from(i), BigInt::one()))
            } else {
                Err(Error::Parse(format!("non-integer number {n}; write rationals as \"p/q\"")))
            }
        }
        other => Err(Error::Parse(format!("expected rational, found {other}"))),
    }
}

fn vector_from_value(v: &Value) -> Result<Vec<Q>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("expected coordinate array, found {v}")))?
        .iter()
        .map(rational_from_value)
        .collect()
}

fn usize_from_value(v: &Value) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::Parse(format!("expected nonnegative index, found {v}")))
}

fn parse_root(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))
}

fn field<'a>(obj: &'a Value, name: &str) -> Result<&'a Value> {
    obj.get(name).ok_or_else(|| Error::Parse(format!("missing field {name:?}")))
}

/// Parse a fan-document and build the validated fan.
pub fn parse_fan(text: &str) -> Result<Fan> {
    let root = parse_root(text)?;
    let dim = usize_from_value(field(&root, "dim")?)?;
    let rays: Vec<Vec<Q>> = field(&root, "rays")?
        .as_array()
        .ok_or_else(|| Error::Parse("\"rays\" must be an array".into()))?
        .iter()
        .map(vector_from_value)
        .collect::<Result<_>>()?;
    let max_cones: Vec<Vec<usize>> = field(&root, "max_cones")?
        .as_array()
        .ok_or_else(|| Error::Parse("\"max_cones\" must be an array".into()))?
        .iter()
        .map(|c| {
            c.as_array()
                .ok_or_else(|| Error::Parse("each cone must be an array of ray indices".into()))?
                .iter()
                .map(usize_from_value)
                .collect()
        })
        .collect::<Result<_>>()?;
    Fan::from_max_cones(dim, rays, max_cones)
}

/// Parse a polytope-document into its vertex list.
pub fn parse_polytope_vertices(text: &str) -> Result<(usize, Vec<Vec<Q>>)> {
    let root = parse_root(text)?;
    let dim = usize_from_value(field(&root, "dim")?)?;
    let vertices: Vec<Vec<Q>> = field(&root, "vertices")?
        .as_array()
        .ok_or_else(|| Error::Parse("\"vertices\" must be an array".into()))?
        .iter()
        .map(vector_from_value)
        .collect::<Result<_>>()?;
    Ok((dim, vertices))
}

/// Parse a polytope-document and return the fan of the cone over it.
pub fn cone_over_polytope(text: &str) -> Result<Fan> {
    let (dim, vertices) = parse_polytope_vertices(text)?;
    cone_over_vertices(dim, &vertices)
}

/// Kinds a CLI input document can have, detected by shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DocKind {
    Fan,
    Polytope,
    Lattice,
}

pub fn classify(text: &str) -> Result<DocKind> {
    let root = parse_root(text)?;
    if root.get("max_cones").is_some() {
        Ok(DocKind::Fan)
    } else if root.get("vertices").is_some() {
        Ok(DocKind::Polytope)
    } else if root.get("faces").is_some() {
        Ok(DocKind::Lattice)
    } else {
        Err(Error::Parse(
            "document is neither a fan (max_cones), polytope (vertices) nor lattice (faces)".into(),
        ))
    }
}

/// Parse a plf-document against a fan: one value per ray, table order.
pub fn parse_plf(text: &str, fan: &Fan) -> Result<Plf> {
    let root = parse_root(text)?;
    let values: Vec<Q> = field(&root, "ray_values")?
        .as_array()
        .ok_or_else(|| Error::Parse("\"ray_values\" must be an array".into()))?
        .iter()
        .map(rational_from_value)
        .collect::<Result<_>>()?;
    if values.len() != fan.rays.len() {
        return Err(Error::Parse(format!(
            "plf lists {} values for a fan with {} rays",
            values.len(),
            fan.rays.len()
        )));
    }
    Ok(Plf { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{q, qr};

    #[test]
    fn parses_line_fan_document() {
        let f = parse_fan(r#"{"dim":1,"rays":[["1"],["-1"]],"max_cones":[[0],[1]]}"#).unwrap();
        assert_eq!(f.cones.len(), 3);
        assert!(f.is_complete());
    }

    #[test]
    fn accepts_integers_and_fractions() {
        let f = parse_fan(
            r#"{"dim":2,"rays":[[1,0],["1/2","1/2"],[-1,0],[0,-1]],
                "max_cones":[[0,1],[1,2],[2,3],[3,0]]}"#,
        )
        .unwrap();
        // (1/2, 1/2) normalizes to (1, 1).
        assert_eq!(f.rays[1], vec![q(1), q(1)]);
        assert_eq!(rational_from_value(&serde_json::json!("-3/4")).unwrap(), qr(-3, 4));
        assert!(rational_from_value(&serde_json::json!(1.5)).is_err());
        assert!(rational_from_value(&serde_json::json!("1/0")).is_err());
    }

    #[test]
    fn rejects_malformed_documents() {
        assert!(matches!(parse_fan("not json"), Err(Error::Parse(_))));
        assert!(matches!(parse_fan(r#"{"dim":1}"#), Err(Error::Parse(_))));
        assert!(matches!(
            parse_fan(r#"{"dim":1,"rays":[["1"]],"max_cones":[[7]]}"#),
            Err(Error::BadRay(_))
        ));
    }

    #[test]
    fn polytope_round_trip() {
        let doc = r#"{"dim":2,"vertices":[[1,1],[-1,1],[-1,-1],[1,-1]]}"#;
        let f = cone_over_polytope(doc).unwrap();
        assert_eq!(f.cones.len(), 10);
        assert_eq!(classify(doc).unwrap(), DocKind::Polytope);
        assert_eq!(
            classify(r#"{"dim":1,"rays":[["1"]],"max_cones":[[0]]}"#).unwrap(),
            DocKind::Fan
        );
        assert_eq!(classify(r#"{"faces":[],"order":[]}"#).unwrap(), DocKind::Lattice);
    }

    #[test]
    fn plf_document() {
        let f = parse_fan(r#"{"dim":1,"rays":[["1"],["-1"]],"max_cones":[[0],[1]]}"#).unwrap();
        let l = parse_plf(r#"{"ray_values":["0","1"]}"#, &f).unwrap();
        assert_eq!(l.values, vec![q(0), q(1)]);
        assert!(parse_plf(r#"{"ray_values":["0"]}"#, &f).is_err());
    }
}
