//! The aggregated invariant suite behind the `check` command: one row per
//! verified property, a combined verdict, and JSON / plain-text renderings.

use crate::cellular::acyclicity_report;
use crate::fan::Fan;
use crate::ihlib::{duality_check, global_local_check, ih, ip_quotient_check};
use crate::minimal::verify_minimal;
use crate::poly::Poly;
use crate::Result;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::fmt;

#[derive(Clone, Debug)]
pub struct CheckRow {
    pub name: &'static str,
    pub pass: bool,
    pub witness: Option<String>,
}

fn row(name: &'static str, pass: bool, witness: Option<String>) -> CheckRow {
    CheckRow { name, pass, witness: if pass { None } else { witness } }
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub ih: Poly,
    pub rows: Vec<CheckRow>,
}

impl CheckReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ih": self.ih.to_json(),
            "checks": self
                .rows
                .iter()
                .map(|r| json!({"name": r.name, "pass": r.pass, "witness": r.witness}))
                .collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            match (&r.pass, &r.witness) {
                (true, _) => writeln!(f, "PASS {}", r.name)?,
                (false, Some(w)) => writeln!(f, "FAIL {} ({w})", r.name)?,
                (false, None) => writeln!(f, "FAIL {}", r.name)?,
            }
        }
        write!(f, "ih = {}", self.ih)
    }
}

/// Runs every invariant the fan supports: category membership and minimality
/// of the constructed sheaf, evenness/nonnegativity/normalization of ih, the
/// quotient identity at every cone of dimension at least two, and on complete
/// fans also cellular acyclicity with free H⁰, the global-local sum, and the
/// duality palindrome.
pub fn full_check(fan: &Fan, cap: Option<i64>) -> Result<CheckReport> {
    let ihr = ih(fan, cap)?;
    let sheaf = &ihr.minimal.sheaf;
    let mut rows = Vec::new();

    let cone_witness = |w: Option<(usize, i64)>| {
        w.map(|(c, d)| format!("cone {} degree {d}", fan.rayset_label(c)))
    };

    let fl = sheaf.is_flabby()?;
    rows.push(row("flabby", fl.flabby, cone_witness(fl.witness)));
    let lf = sheaf.is_locally_free()?;
    rows.push(row("locally-free", lf.locally_free, cone_witness(lf.witness)));
    let min = verify_minimal(sheaf, fan.origin())?;
    rows.push(row(
        "minimal",
        min.minimal,
        min.failure.map(|x| format!("{} at cone {}", x.check, fan.rayset_label(x.cone))),
    ));
    rows.push(row(
        "ih-normalized",
        ihr.ih.coeff(0) == 1 && ihr.ih.coeffs_nonnegative() && ihr.ih.even_exponents_only(),
        Some(format!("ih = {}", ihr.ih)),
    ));

    if fan.is_complete() {
        let ac = acyclicity_report(sheaf)?;
        rows.push(row(
            "cellular-acyclic",
            ac.witness.is_none_or(|(i, _)| i == 0),
            ac.witness.map(|(i, d)| format!("H^{i} nonzero in degree {d}")),
        ));
        rows.push(row(
            "h0-free",
            ac.witness.is_none_or(|(i, _)| i != 0),
            ac.witness.map(|(_, d)| format!("relation in degree {d}")),
        ));
        rows.push(row(
            "h0-matches-ih",
            ac.witness.is_none() && ac.free_gens.to_poly() == ihr.ih,
            Some(format!("free generators {}", ac.free_gens)),
        ));
        let gl = global_local_check(fan)?;
        rows.push(row(
            "global-local",
            gl.pass,
            Some(format!("ih = {}, local sum = {}", gl.lhs, gl.rhs)),
        ));
    }

    let du = duality_check(fan)?;
    rows.push(row("duality", du.pass, du.witness));

    let mut quotient_results: Vec<(usize, Result<bool>)> = fan
        .cones
        .par_iter()
        .filter(|c| c.dim >= 2)
        .map(|c| (c.id, ip_quotient_check(fan, c.id).map(|r| r.pass)))
        .collect();
    quotient_results.sort_by_key(|x| x.0);
    let mut q_pass = true;
    let mut q_witness = None;
    for (id, res) in quotient_results {
        if !res? && q_pass {
            q_pass = false;
            q_witness = Some(format!("cone {}", fan.rayset_label(id)));
        }
    }
    rows.push(row("ip-quotient", q_pass, q_witness));

    Ok(CheckReport { ih: ihr.ih, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::fixtures::*;

    #[test]
    fn complete_fans_pass_everything() {
        for fan in [line_fan(), quadrant_fan(), cube_face_fan()] {
            let r = full_check(&fan, None).unwrap();
            assert!(r.pass(), "{r}");
        }
        let r = full_check(&quadrant_fan(), None).unwrap();
        assert_eq!(r.ih, Poly::from_dense(&[1, 0, 2, 0, 1]));
        assert!(r.rows.iter().any(|x| x.name == "global-local"));
        let text = r.to_string();
        assert!(text.starts_with("PASS flabby\n"));
        assert!(text.ends_with("ih = 1 + 2q^2 + q^4"));
    }

    #[test]
    fn incomplete_fans_skip_completeness_rows() {
        let fan = cone_over_mgon(4);
        let r = full_check(&fan, None).unwrap();
        assert!(r.pass(), "{r}");
        assert!(r.rows.iter().all(|x| x.name != "global-local"));
        assert!(r.rows.iter().any(|x| x.name == "ip-quotient"));
    }

    #[test]
    fn json_shape() {
        let r = full_check(&line_fan(), None).unwrap();
        let v = r.to_json();
        assert_eq!(v["ih"]["0"], 1);
        assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    }
}
