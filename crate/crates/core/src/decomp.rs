//! Decomposition of flabby locally free sheaves into shifted minimal sheaves,
//! pushforward along fan subdivisions, the subdivision comparison report, and
//! the face inequality for local intersection cohomology.

use crate::fan::{subdivision_map, Fan, SubdivisionMap};
use crate::graded::GradedMap;
use crate::ihlib::{ih, ip};
use crate::minimal::{minimal_sheaf, required_cap, MinimalSheaf};
use crate::poly::{GradedDims, Poly};
use crate::sheaf::Sheaf;
use crate::{Error, Result};
use serde_json::{json, Value};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Summand {
    pub cone: usize,
    /// Even; the summand is the minimal sheaf based at `cone` shifted by it.
    pub shift: i64,
    pub mult: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Decomposition {
    pub summands: Vec<Summand>,
}

impl Decomposition {
    pub fn multiplicity(&self, cone: usize, shift: i64) -> usize {
        self.summands.iter().find(|s| s.cone == cone && s.shift == shift).map_or(0, |s| s.mult)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.summands
                .iter()
                .map(|s| json!({"cone": s.cone, "shift": s.shift, "mult": s.mult}))
                .collect(),
        )
    }
}

/// Unique decomposition of a flabby locally free sheaf into shifted minimal
/// sheaves. Multiplicities are solved per cone in increasing dimension; the
/// bookkeeping is triangular, so no choices are involved.
pub fn decompose(f: &Sheaf<'_>) -> Result<Decomposition> {
    let lf = f.is_locally_free()?;
    let fl = f.is_flabby()?;
    if !lf.locally_free || !fl.flabby {
        return Err(Error::NotInCategory(format!(
            "decomposition needs a flabby locally free sheaf (locally free: {}, flabby: {})",
            lf.locally_free, fl.flabby
        )));
    }
    let fan = f.fan;
    let mut v: BTreeMap<usize, GradedDims> = BTreeMap::new();
    let mut minimals: BTreeMap<usize, MinimalSheaf<'_>> = BTreeMap::new();
    for sigma in 0..fan.cones.len() {
        let mut remainder: BTreeMap<i64, i64> =
            lf.gens[&sigma].iter().map(|(d, k)| (d, k as i64)).collect();
        for (&tau, vt) in &v {
            if tau == sigma || !fan.le(tau, sigma) {
                continue;
            }
            let at_sigma = match minimals[&tau].gens.get(&sigma) {
                Some(g) => g,
                None => continue,
            };
            for (e, m) in vt.iter() {
                for (g, k) in at_sigma.iter() {
                    *remainder.entry(e + g).or_insert(0) -= (m * k) as i64;
                }
            }
        }
        if let Some((&d, &k)) = remainder.iter().find(|&(_, &k)| k < 0) {
            return Err(Error::NegativeMultiplicity(format!(
                "multiplicity {k} in degree {d} at cone {}; the input is not consistent with any direct sum of minimal sheaves",
                fan.rayset_label(sigma)
            )));
        }
        let leftover = GradedDims::from_pairs(remainder.iter().map(|(&d, &k)| (d, k as usize)));
        if !leftover.is_empty() {
            let cap = f.cap.max(required_cap(fan, sigma) + 2);
            minimals.insert(sigma, minimal_sheaf(fan, sigma, Some(cap))?);
            v.insert(sigma, leftover);
        }
    }

    // Reconstruction: the shifted summand Hilbert data must re-sum to every
    // stalk of the input, not just to the generator counts.
    for sigma in 0..fan.cones.len() {
        let mut expected = Poly::zero();
        for (&tau, vt) in &v {
            if !fan.le(tau, sigma) {
                continue;
            }
            let h = minimals[&tau].sheaf.stalk(sigma).hilbert();
            for (e, m) in vt.iter() {
                expected = expected.add(&h.mul(&Poly::monomial(e, m as i64)));
            }
        }
        if expected.truncate(f.cap) != f.stalk(sigma).hilbert() {
            return Err(Error::CheckFailed {
                check: "decomposition-reconstruction".into(),
                witness: format!("stalk Hilbert mismatch at cone {}", fan.rayset_label(sigma)),
            });
        }
    }

    let mut summands = Vec::new();
    for (&tau, vt) in &v {
        for (e, m) in vt.iter() {
            summands.push(Summand { cone: tau, shift: -e, mult: m });
        }
    }
    Ok(Decomposition { summands })
}

/// Direct image along a subdivision: the stalk over a coarse cone is the
/// sections of F over the preimage subfan, restrictions drop blocks.
pub fn pushforward<'a>(map: &SubdivisionMap, f: &Sheaf<'_>, coarse: &'a Fan) -> Result<Sheaf<'a>> {
    let fine = f.fan;
    assert_eq!(map.to_coarse.len(), fine.cones.len());
    let preimage = |sigma: usize| -> Vec<usize> {
        (0..fine.cones.len()).filter(|&t| coarse.le(map.to_coarse[t], sigma)).collect()
    };
    let secs: Vec<_> = (0..coarse.cones.len()).map(|s| f.sections(&preimage(s))).collect();
    let stalks: Vec<_> = secs.iter().map(|s| s.module.clone()).collect();
    let mut res = BTreeMap::new();
    for (t, s) in coarse.cover_pairs() {
        let mut gm = GradedMap::zero();
        let mut d = 0i64;
        while d <= f.cap {
            let m = secs[s].restrict_to(&secs[t], |i, dd| f.stalk(i).dim(dd), d);
            gm.insert(d, m);
            d += 2;
        }
        res.insert((t, s), gm);
    }
    let pushed = Sheaf::new(coarse, f.cap, stalks, res)?;

    // Exactness consequence: membership in the flabby locally free category is
    // preserved. Checked whenever the input qualifies.
    let lf = f.is_locally_free()?;
    let fl = f.is_flabby()?;
    if lf.locally_free && fl.flabby {
        let out_lf = pushed.is_locally_free()?;
        let out_fl = pushed.is_flabby()?;
        if !out_lf.locally_free || !out_fl.flabby {
            return Err(Error::CheckFailed {
                check: "pushforward-preserves-category".into(),
                witness: format!(
                    "locally free: {}, flabby: {}",
                    out_lf.locally_free, out_fl.flabby
                ),
            });
        }
    }
    Ok(pushed)
}

#[derive(Clone, Debug)]
pub struct SubdivisionReport {
    pub pass: bool,
    pub ih_fine: Poly,
    pub ih_coarse: Poly,
    pub base_multiplicity: usize,
    pub decomposition: Decomposition,
}

impl SubdivisionReport {
    pub fn to_json(&self) -> Value {
        json!({
            "pass": self.pass,
            "ih_fine": self.ih_fine.to_json(),
            "ih_coarse": self.ih_coarse.to_json(),
            "base_multiplicity": self.base_multiplicity,
            "decomposition": self.decomposition.to_json(),
        })
    }
}

/// Pushes the fine minimal sheaf forward, decomposes it, and compares the two
/// ih polynomials: the coarse one is a coefficientwise lower bound.
pub fn decomposition_theorem_report(fine: &Fan, coarse: &Fan) -> Result<SubdivisionReport> {
    let map = subdivision_map(fine, coarse)?;
    let cap = crate::ihlib::ih_default_cap(fine);
    let ih_fine = ih(fine, Some(cap))?;
    let ih_coarse = ih(coarse, Some(cap))?;
    let pushed = pushforward(&map, &ih_fine.minimal.sheaf, coarse)?;
    let dec = decompose(&pushed)?;
    let base_multiplicity = dec.multiplicity(coarse.origin(), 0);
    let pass = base_multiplicity >= 1 && ih_fine.ih.geq(&ih_coarse.ih);
    Ok(SubdivisionReport {
        pass,
        ih_fine: ih_fine.ih,
        ih_coarse: ih_coarse.ih,
        base_multiplicity,
        decomposition: dec,
    })
}

#[derive(Clone, Debug)]
pub struct KalaiReport {
    pub pass: bool,
    pub ip_sigma: Poly,
    pub ip_tau: Poly,
    pub ip_star: Poly,
    pub v_tau_matches: bool,
    pub decomposition: Decomposition,
}

impl KalaiReport {
    pub fn to_json(&self) -> Value {
        json!({
            "pass": self.pass,
            "ip_cone": self.ip_sigma.to_json(),
            "ip_face": self.ip_tau.to_json(),
            "ip_star": self.ip_star.to_json(),
            "face_multiplicity_matches": self.v_tau_matches,
            "decomposition": self.decomposition.to_json(),
        })
    }
}

/// On a fan generated by a single cone σ: ip(σ) ≥ ip(τ)·ip(Star(τ))
/// coefficientwise for every face τ, through decomposing the star restriction
/// of the minimal sheaf.
pub fn kalai_check(fan: &Fan, tau: usize) -> Result<KalaiReport> {
    if fan.max_cones().len() != 1 {
        return Err(Error::CheckFailed {
            check: "fan-generated-by-single-cone".into(),
            witness: format!("{} maximal cones", fan.max_cones().len()),
        });
    }
    let sigma = fan.max_cones()[0];
    fan.cone(tau)?;
    let cap = required_cap(fan, fan.origin()) + 2;
    let l = minimal_sheaf(fan, fan.origin(), Some(cap))?;
    let restricted = l.sheaf.star_restriction(tau)?;
    let dec = decompose(&restricted)?;

    let ip_tau = l.gens[&tau].to_poly();
    let v_tau = GradedDims::from_pairs(
        dec.summands.iter().filter(|s| s.cone == tau).map(|s| (-s.shift, s.mult)),
    );
    let v_tau_matches = v_tau.to_poly() == ip_tau;

    let l_tau = minimal_sheaf(fan, tau, Some(cap))?;
    let ip_star = l_tau.gens[&sigma].to_poly();
    let ip_sigma = ip(fan, sigma, None)?;
    let pass = v_tau_matches && ip_sigma.geq(&ip_tau.mul(&ip_star));
    Ok(KalaiReport { pass, ip_sigma, ip_tau, ip_star, v_tau_matches, decomposition: dec })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::fixtures::*;

    #[test]
    fn minimal_sheaves_are_indecomposable() {
        for fan in [quadrant_fan(), cube_face_fan()] {
            let l = minimal_sheaf(&fan, fan.origin(), None).unwrap();
            let dec = decompose(&l.sheaf).unwrap();
            assert_eq!(dec.summands, vec![Summand { cone: fan.origin(), shift: 0, mult: 1 }]);
        }
        // Based at a ray, with a nonzero shift.
        let fan = cube_face_fan();
        let ray = fan.cone_by_rays(&[3]).unwrap();
        let l = minimal_sheaf(&fan, ray, None).unwrap();
        let shifted = l.sheaf.shift(-2);
        let dec = decompose(&shifted).unwrap();
        assert_eq!(dec.summands, vec![Summand { cone: ray, shift: -2, mult: 1 }]);
    }

    #[test]
    fn structure_sheaf_of_a_simplicial_fan_is_the_minimal_sheaf() {
        let fan = threeray_fan();
        let a = Sheaf::structure(&fan, 6);
        let dec = decompose(&a).unwrap();
        assert_eq!(dec.summands, vec![Summand { cone: fan.origin(), shift: 0, mult: 1 }]);
    }

    #[test]
    fn non_category_inputs_are_rejected() {
        let fan = cube_face_fan();
        let a = Sheaf::structure(&fan, 6);
        assert!(matches!(decompose(&a), Err(Error::NotInCategory(_))));
    }

    #[test]
    fn diagonal_subdivision_pushforward() {
        let fine = quadrant_diag_fan();
        let coarse = quadrant_fan();
        let map = subdivision_map(&fine, &coarse).unwrap();
        let a = Sheaf::structure(&fine, 6);
        let pushed = pushforward(&map, &a, &coarse).unwrap();

        let sigma = coarse.cone_by_rays(&[0, 1]).unwrap();
        let lf = pushed.is_locally_free().unwrap();
        assert_eq!(lf.gens[&sigma], GradedDims::from_pairs([(0, 1), (2, 1)]));

        let dec = decompose(&pushed).unwrap();
        assert_eq!(
            dec.summands,
            vec![
                Summand { cone: coarse.origin(), shift: 0, mult: 1 },
                Summand { cone: sigma, shift: -2, mult: 1 },
            ]
        );

        // Global sections agree with the fine fan's.
        let fine_secs = a.sections_over(&fine.all_ids());
        let coarse_secs = pushed.sections_over(&coarse.all_ids());
        assert_eq!(fine_secs.module.hilbert(), coarse_secs.module.hilbert());
    }

    #[test]
    fn identity_subdivision_is_a_no_op() {
        let fan = quadrant_fan();
        let map = subdivision_map(&fan, &fan).unwrap();
        let l = minimal_sheaf(&fan, fan.origin(), None).unwrap();
        let pushed = pushforward(&map, &l.sheaf, &fan).unwrap();
        for id in 0..fan.cones.len() {
            assert_eq!(pushed.stalk(id).hilbert(), l.sheaf.stalk(id).hilbert());
        }
        let dec = decompose(&pushed).unwrap();
        assert_eq!(dec.summands, vec![Summand { cone: fan.origin(), shift: 0, mult: 1 }]);
    }

    #[test]
    fn subdivision_reports() {
        let r = decomposition_theorem_report(&quadrant_diag_fan(), &quadrant_fan()).unwrap();
        assert!(r.pass);
        assert_eq!(r.ih_fine, Poly::from_dense(&[1, 0, 3, 0, 1]));
        assert_eq!(r.ih_coarse, Poly::from_dense(&[1, 0, 2, 0, 1]));
        assert_eq!(r.base_multiplicity, 1);

        let r = decomposition_theorem_report(&cube_tri_fan(), &cube_face_fan()).unwrap();
        assert!(r.pass);
        assert_eq!(r.base_multiplicity, 1);
        assert!(r.ih_fine.geq(&Poly::from_dense(&[1, 0, 5, 0, 5, 0, 1])));
    }

    #[test]
    fn face_inequality_on_polygon_cones() {
        let sq = cone_over_mgon(4);
        let r = kalai_check(&sq, sq.origin()).unwrap();
        assert!(r.pass);
        assert_eq!(r.ip_sigma, r.ip_tau.mul(&r.ip_star));

        let ray = sq.cone_by_rays(&[0]).unwrap();
        let r = kalai_check(&sq, ray).unwrap();
        assert!(r.pass && r.v_tau_matches);
        assert_eq!(r.ip_star, Poly::one());

        let hex = cone_over_mgon(6);
        let ray = hex.cone_by_rays(&[0]).unwrap();
        let r = kalai_check(&hex, ray).unwrap();
        assert!(r.pass);
        assert_eq!(r.ip_sigma, Poly::from_dense(&[1, 0, 3]));

        assert!(matches!(kalai_check(&quadrant_fan(), 0), Err(Error::CheckFailed { .. })));
    }
}
