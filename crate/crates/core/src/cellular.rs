//! Cellular complex of a sheaf: C^i collects the stalks of codimension-i cones,
//! the differential is the signed sum of restriction maps to facets. Degreewise
//! cohomology over ℚ; for flabby locally free sheaves on complete fans the
//! complex is acyclic and H⁰ is free.

use crate::fan::Fan;
use crate::graded::{GradedMap, GradedModule};
use crate::linalg::QMat;
use crate::poly::{GradedDims, Poly};
use crate::sheaf::Sheaf;
use crate::{Error, Result};
use serde_json::{json, Value};
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct CellComplex<'a> {
    pub fan: &'a Fan,
    pub cap: i64,
    /// summands[i] = ids of cones of dimension n−i, ascending.
    pub summands: Vec<Vec<usize>>,
    pub comps: Vec<GradedModule>,
    /// diffs[i] : C^i → C^{i+1}.
    pub diffs: Vec<GradedMap>,
}

/// Assembles C•(F) and verifies d∘d = 0 degreewise.
pub fn cellular_complex<'a>(sheaf: &Sheaf<'a>) -> Result<CellComplex<'a>> {
    let fan = sheaf.fan;
    let n = fan.n;
    let mut summands: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for c in &fan.cones {
        summands[n - c.dim].push(c.id);
    }
    let comps: Vec<GradedModule> = summands
        .iter()
        .map(|ids| {
            if ids.is_empty() {
                GradedModule::zero(fan.n, sheaf.cap)
            } else {
                let parts: Vec<&GradedModule> = ids.iter().map(|&i| sheaf.stalk(i)).collect();
                GradedModule::direct_sum(&parts)
            }
        })
        .collect();

    let mut diffs: Vec<GradedMap> = Vec::new();
    for i in 0..n {
        let mut map = GradedMap::zero();
        let mut degrees = comps[i].degrees();
        degrees.extend(comps[i + 1].degrees());
        degrees.sort_unstable();
        degrees.dedup();
        for d in degrees {
            let row_offs = offsets(&summands[i + 1], |t| sheaf.stalk(t).dim(d));
            let col_offs = offsets(&summands[i], |s| sheaf.stalk(s).dim(d));
            let mut m = QMat::zeros(*row_offs.last().unwrap(), *col_offs.last().unwrap());
            if m.rows == 0 || m.cols == 0 {
                continue;
            }
            for (bj, &s) in summands[i].iter().enumerate() {
                for (bi, &t) in summands[i + 1].iter().enumerate() {
                    if !fan.covers(t, s) {
                        continue;
                    }
                    let sign = fan.incidence_sign(t, s)?;
                    let block = sheaf.res_at(t, s, d).scale(&crate::linalg::q(sign as i64));
                    paste(&mut m, &block, row_offs[bi], col_offs[bj]);
                }
            }
            map.insert(d, m);
        }
        diffs.push(map);
    }

    let complex = CellComplex { fan, cap: sheaf.cap, summands, comps, diffs };
    for i in 0..n.saturating_sub(1) {
        for d in complex.comps[i].degrees() {
            let a = complex.diff_at(i, d);
            let b = complex.diff_at(i + 1, d);
            if !b.mul(&a).is_zero() {
                return Err(Error::SignInconsistency(format!(
                    "d∘d ≠ 0 between steps {i} and {} in degree {d}",
                    i + 2
                )));
            }
        }
    }
    Ok(complex)
}

impl<'a> CellComplex<'a> {
    /// d^i in degree d, zeros materialized.
    pub fn diff_at(&self, i: usize, d: i64) -> QMat {
        let rows = self.comps[i + 1].dim(d);
        let cols = self.comps[i].dim(d);
        self.diffs[i].at(d, rows, cols)
    }
}

/// Degreewise cohomology dimensions, indexed 0..=n.
pub fn complex_cohomology(c: &CellComplex<'_>) -> Vec<GradedDims> {
    let n = c.comps.len() - 1;
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut h = GradedDims::new();
        for d in c.comps[i].degrees() {
            let dim = c.comps[i].dim(d);
            let rank_out = if i < n { c.diff_at(i, d).rank() } else { 0 };
            let rank_in = if i > 0 { c.diff_at(i - 1, d).rank() } else { 0 };
            let v = dim - rank_out - rank_in;
            if v > 0 {
                h.add(d, v);
            }
        }
        out.push(h);
    }
    out
}

/// Kernel of d⁰ with the A-action inherited from C⁰.
pub fn h0_module(c: &CellComplex<'_>) -> GradedModule {
    let n = c.comps.len() - 1;
    let c0 = &c.comps[0];
    let mut basis: BTreeMap<i64, QMat> = BTreeMap::new();
    let mut dims: BTreeMap<i64, usize> = BTreeMap::new();
    for d in c0.degrees() {
        let k = if n == 0 { QMat::identity(c0.dim(d)) } else { c.diff_at(0, d).kernel() };
        if k.cols > 0 {
            dims.insert(d, k.cols);
        }
        basis.insert(d, k);
    }
    let mut acts: BTreeMap<i64, Vec<QMat>> = BTreeMap::new();
    for (&d, k) in &basis {
        if k.cols == 0 {
            continue;
        }
        let k2 = basis.get(&(d + 2)).cloned().unwrap_or_else(|| QMat::zeros(c0.dim(d + 2), 0));
        let mats: Vec<QMat> = (0..c0.n_forms)
            .map(|form| {
                let big = c0.act(form, d).mul(k);
                k2.solve(&big).expect("action preserves the kernel")
            })
            .collect();
        acts.insert(d, mats);
    }
    GradedModule::from_parts(c0.n_forms, c.cap, dims, acts)
}

#[derive(Clone, Debug)]
pub struct AcyclicityReport {
    pub acyclic: bool,
    pub h0_hilbert: Poly,
    pub free_gens: GradedDims,
    /// (complex step, degree) of the first violation; step 0 flags a freeness
    /// failure of H⁰.
    pub witness: Option<(usize, i64)>,
}

impl AcyclicityReport {
    pub fn pass(&self) -> bool {
        self.acyclic
    }

    pub fn to_json(&self) -> Value {
        json!({
            "acyclic": self.acyclic,
            "H0_hilbert": self.h0_hilbert.to_json(),
            "free_gens": self.free_gens.to_json(),
            "witness": match self.witness {
                None => Value::Null,
                Some((i, d)) => json!({"step": i, "degree": d}),
            },
        })
    }
}

/// Full check on a complete fan: H^i = 0 for i ≠ 0 up to cap, H⁰ matches the
/// sections module degreewise, and H⁰ is cap-certified free over the ambient
/// polynomial ring.
pub fn acyclicity_report(sheaf: &Sheaf<'_>) -> Result<AcyclicityReport> {
    if !sheaf.fan.is_complete() {
        return Err(Error::CheckFailed {
            check: "fan-completeness".into(),
            witness: "acyclicity requires a complete fan".into(),
        });
    }
    let lf = sheaf.is_locally_free()?;
    let fl = sheaf.is_flabby()?;
    if !lf.locally_free || !fl.flabby {
        return Err(Error::NotInCategory(format!(
            "locally free: {}, flabby: {}",
            lf.locally_free, fl.flabby
        )));
    }
    let c = cellular_complex(sheaf)?;
    let h = complex_cohomology(&c);
    let h0 = h0_module(&c);

    let secs = sheaf.sections_over(&sheaf.fan.all_ids());
    for d in h0.degrees() {
        assert_eq!(h0.dim(d), secs.module.dim(d), "H⁰ matches sections in degree {d}");
    }
    for d in secs.module.degrees() {
        assert_eq!(h0.dim(d), secs.module.dim(d), "H⁰ matches sections in degree {d}");
    }

    let mut witness = None;
    for (i, hi) in h.iter().enumerate().skip(1) {
        if let Some((d, _)) = hi.iter().next() {
            witness = Some((i, d));
            break;
        }
    }
    let mut free_gens = GradedDims::new();
    if witness.is_none() {
        match crate::graded::check_free(&h0, sheaf.fan.n)? {
            crate::graded::FreeCheck::Free(g) => free_gens = g,
            crate::graded::FreeCheck::NotFree { degree, .. } => {
                witness = Some((0, degree));
            }
        }
    }
    Ok(AcyclicityReport {
        acyclic: witness.is_none(),
        h0_hilbert: h0.hilbert(),
        free_gens,
        witness,
    })
}

fn offsets<F: Fn(usize) -> usize>(ids: &[usize], dim: F) -> Vec<usize> {
    let mut v = vec![0usize];
    for &i in ids {
        v.push(v.last().unwrap() + dim(i));
    }
    v
}

fn paste(m: &mut QMat, block: &QMat, r0: usize, c0: usize) {
    for r in 0..block.rows {
        for c in 0..block.cols {
            m.set(r0 + r, c0 + c, block.at(r, c).clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::fixtures::*;
    use crate::minimal::minimal_sheaf;

    fn total(h: &[GradedDims]) -> usize {
        h.iter().map(|g| g.total()).sum()
    }

    #[test]
    fn line_fan_structure_sheaf_shape_and_cohomology() {
        let fan = line_fan();
        let a = Sheaf::structure(&fan, 6);
        let c = cellular_complex(&a).unwrap();
        assert_eq!(c.summands[0].len(), 2);
        assert_eq!(c.summands[1], vec![fan.origin()]);
        let h = complex_cohomology(&c);
        // Conewise polynomials on the line: 1, 2, 2, 2 in degrees 0..=6.
        assert_eq!(h[0], GradedDims::from_pairs([(0, 1), (2, 2), (4, 2), (6, 2)]));
        assert!(h[1].total() == 0);
    }

    #[test]
    fn skyscraper_cohomology_sits_in_top_step() {
        for (fan, n) in [(line_fan(), 1usize), (quadrant_fan(), 2)] {
            let s = Sheaf::skyscraper_origin(&fan, 4);
            let c = cellular_complex(&s).unwrap();
            let h = complex_cohomology(&c);
            for (i, hi) in h.iter().enumerate() {
                if i == n {
                    assert_eq!(*hi, GradedDims::from_pairs([(0, 1)]));
                } else {
                    assert_eq!(hi.total(), 0);
                }
            }
        }
    }

    #[test]
    fn constant_sheaf_on_a_generated_fan_is_acyclic() {
        // Closed fans [σ] with σ ≠ o̲: the constant-sheaf complex vanishes.
        let quad =
            Fan::from_max_cones(2, vec![qv(&[1, 0]), qv(&[0, 1])], vec![vec![0, 1]]).unwrap();
        let ray = Fan::from_max_cones(2, vec![qv(&[1, 0])], vec![vec![0]]).unwrap();
        for fan in [quad, ray, cone_over_mgon(5)] {
            let s = Sheaf::constant(&fan, 2);
            let c = cellular_complex(&s).unwrap();
            assert_eq!(total(&complex_cohomology(&c)), 0);
        }
    }

    #[test]
    fn flabby_sheaf_on_generated_fan_concentrates_in_lowest_step() {
        // A 2-cone in ℝ³ with its faces: structure sheaf is flabby (simplicial),
        // cohomology sits in step n − d(σ) = 1 only.
        let fan =
            Fan::from_max_cones(3, vec![qv(&[1, 0, 0]), qv(&[0, 1, 0])], vec![vec![0, 1]]).unwrap();
        let a = Sheaf::structure(&fan, 4);
        let c = cellular_complex(&a).unwrap();
        let h = complex_cohomology(&c);
        assert_eq!(h[0].total(), 0);
        assert!(h[1].total() > 0);
        assert_eq!(h[2].total(), 0);
        assert_eq!(h[3].total(), 0);
    }

    #[test]
    fn boundary_fan_cohomology_is_shifted_sections() {
        // Open boundary of the quadrant cone inside [σ]: H^{n−d(σ)+1} = Γ(∂σ),
        // everything else zero.
        let fan = Fan::from_max_cones(2, vec![qv(&[1, 0]), qv(&[0, 1])], vec![vec![0, 1]]).unwrap();
        let sigma = fan.cone_by_rays(&[0, 1]).unwrap();
        let a = Sheaf::structure(&fan, 6);
        let boundary = fan.boundary(sigma).unwrap().ids;
        let restricted = a.open_restriction(&boundary);
        let c = cellular_complex(&restricted).unwrap();
        let h = complex_cohomology(&c);
        let secs = a.sections(&boundary);
        assert_eq!(h[0].total(), 0);
        for d in secs.module.degrees() {
            assert_eq!(h[1].get(d), secs.module.dim(d));
        }
        let sec_total: usize = secs.module.degrees().iter().map(|&d| secs.module.dim(d)).sum();
        assert_eq!(h[1].total(), sec_total);
        assert_eq!(h[2].total(), 0);
    }

    #[test]
    fn euler_characteristic_matches_cohomology() {
        let fan = cube_face_fan();
        let l = minimal_sheaf(&fan, fan.origin(), None).unwrap();
        let c = cellular_complex(&l.sheaf).unwrap();
        let h = complex_cohomology(&c);
        let mut degrees: Vec<i64> = c.comps.iter().flat_map(|m| m.degrees()).collect();
        degrees.sort_unstable();
        degrees.dedup();
        for d in degrees {
            let lhs: i64 = (0..c.comps.len())
                .map(|i| (if i % 2 == 0 { 1 } else { -1 }) * c.comps[i].dim(d) as i64)
                .sum();
            let rhs: i64 = h
                .iter()
                .enumerate()
                .map(|(i, hi)| (if i % 2 == 0 { 1 } else { -1 }) * hi.get(d) as i64)
                .sum();
            assert_eq!(lhs, rhs, "degree {d}");
        }
    }

    #[test]
    fn minimal_sheaf_reports_on_complete_fans() {
        // Global sections generate up to degree 2n, so the cap must clear that.
        let quad = quadrant_fan();
        let l = minimal_sheaf(&quad, quad.origin(), Some(6)).unwrap();
        let r = acyclicity_report(&l.sheaf).unwrap();
        assert!(r.acyclic);
        assert_eq!(r.free_gens, GradedDims::from_pairs([(0, 1), (2, 2), (4, 1)]));

        let cube = cube_face_fan();
        let l = minimal_sheaf(&cube, cube.origin(), Some(8)).unwrap();
        let r = acyclicity_report(&l.sheaf).unwrap();
        assert!(r.acyclic);
        assert_eq!(r.free_gens, GradedDims::from_pairs([(0, 1), (2, 5), (4, 5), (6, 1)]));
        assert!(r.witness.is_none());
        let js = r.to_json();
        assert_eq!(js["acyclic"], serde_json::json!(true));
        assert_eq!(js["witness"], serde_json::Value::Null);
    }

    #[test]
    fn preconditions_are_rejected_cleanly() {
        // Not flabby on the cube fan.
        let cube = cube_face_fan();
        let a = Sheaf::structure(&cube, 6);
        assert!(matches!(acyclicity_report(&a), Err(Error::NotInCategory(_))));
        // Not complete.
        let quad =
            Fan::from_max_cones(2, vec![qv(&[1, 0]), qv(&[0, 1])], vec![vec![0, 1]]).unwrap();
        let a = Sheaf::structure(&quad, 4);
        assert!(matches!(acyclicity_report(&a), Err(Error::CheckFailed { .. })));
    }
}
