//! Minimal sheaves based at a cone τ, built by induction on dimension: the stalk
//! at τ is the polynomial ring on Span(τ); at every larger cone of Star(τ) the
//! stalk is free on the minimal generators of the boundary sections, with the
//! restriction sending each generator to a deterministically chosen lift. Off the
//! star everything is zero.

use crate::fan::Fan;
use crate::graded::{
    free_basis_layout, free_module_on_gens, monomials, polynomial_module, subst_matrix, GradedMap,
    GradedModule,
};
use crate::linalg::{QMat, Q};
use crate::poly::GradedDims;
use crate::sheaf::{Sections, Sheaf};
use crate::{Error, Result};
use std::collections::BTreeMap;

/// Generator representatives are unit vectors of the echelonized section basis,
/// scanned forward or backward. Both policies must produce the same generator
/// degrees and the same section invariants (uniqueness of the minimal sheaf).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftPolicy {
    Forward,
    Backward,
}

#[derive(Clone, Debug)]
pub struct MinimalSheaf<'a> {
    pub sheaf: Sheaf<'a>,
    pub base: usize,
    /// Stalk generator degrees per support cone.
    pub gens: BTreeMap<usize, GradedDims>,
    pub policy: LiftPolicy,
}

/// Smallest cap the construction accepts for this star, and the default slack.
pub fn required_cap(fan: &Fan, tau: usize) -> i64 {
    let star = fan.star(tau).expect("base cone exists");
    let maxdim = star.ids.iter().map(|&i| fan.dim_of(i)).max().unwrap_or(0) as i64;
    (2 * (maxdim - 1)).max(0)
}

pub fn default_cap(fan: &Fan, tau: usize) -> i64 {
    required_cap(fan, tau) + 2
}

pub fn minimal_sheaf<'a>(fan: &'a Fan, tau: usize, cap: Option<i64>) -> Result<MinimalSheaf<'a>> {
    minimal_sheaf_with_policy(fan, tau, cap, LiftPolicy::Forward)
}

pub fn minimal_sheaf_with_policy<'a>(
    fan: &'a Fan,
    tau: usize,
    cap: Option<i64>,
    policy: LiftPolicy,
) -> Result<MinimalSheaf<'a>> {
    fan.cone(tau)?;
    let needed = required_cap(fan, tau);
    let cap = cap.unwrap_or(needed + 2);
    if cap < needed {
        return Err(Error::CapTooSmall(format!(
            "cap {cap} below the construction bound {needed} for this star"
        )));
    }
    assert!(cap % 2 == 0 && cap >= 0, "cap must be even and nonnegative");

    let star = fan.star(tau)?.ids;
    let mut stalks: Vec<GradedModule> =
        fan.cones.iter().map(|_| GradedModule::zero(fan.n, cap)).collect();
    let mut res: BTreeMap<(usize, usize), GradedMap> = BTreeMap::new();
    let mut gens: BTreeMap<usize, GradedDims> = BTreeMap::new();

    stalks[tau] = polynomial_module(fan.dim_of(tau), &fan.span_restriction_rows(tau), cap);
    gens.insert(tau, GradedDims::from_pairs([(0, 1)]));

    // Cone ids ascend with dimension, so iterating the star in id order is the
    // induction on dimension; τ is its unique smallest element.
    for &rho in &star {
        if rho == tau {
            continue;
        }
        let boundary = fan.boundary(rho)?.ids;
        let partial = Sheaf::unchecked(fan, cap, stalks.clone(), res.clone());
        let secs = partial.sections(&boundary);
        let (bar, warn) = secs.module.minimal_generators();
        if warn {
            return Err(Error::CapTooSmall(format!(
                "boundary sections at cone {} have generators above cap-2 = {}",
                fan.rayset_label(rho),
                cap - 2
            )));
        }

        // Representatives: per degree, unit vectors of the section basis that
        // enlarge the span of the A⁺-image, scanned by policy.
        let mut gen_degrees: Vec<i64> = Vec::new();
        let mut lift_cols: Vec<(i64, usize)> = Vec::new();
        for (d, count) in bar.iter() {
            let w = secs.module.aplus_image(d);
            let dim = secs.module.dim(d);
            let order: Vec<usize> = match policy {
                LiftPolicy::Forward => (0..dim).collect(),
                LiftPolicy::Backward => (0..dim).rev().collect(),
            };
            let mut picked: Vec<usize> = Vec::new();
            let rank = w.rank();
            for i in order {
                if picked.len() == count {
                    break;
                }
                let mut cols: Vec<Vec<Q>> = (0..w.cols).map(|j| w.col(j)).collect();
                for &p in &picked {
                    cols.push(unit(dim, p));
                }
                cols.push(unit(dim, i));
                let r = QMat::from_cols(cols).rank();
                if r > rank + picked.len() {
                    picked.push(i);
                }
            }
            assert_eq!(picked.len(), count, "independent representatives exist");
            if policy == LiftPolicy::Backward {
                picked.reverse();
            }
            for p in picked {
                gen_degrees.push(d);
                lift_cols.push((d, p));
            }
        }

        let d_rho = fan.dim_of(rho);
        stalks[rho] =
            free_module_on_gens(d_rho, &fan.span_restriction_rows(rho), &gen_degrees, cap);
        gens.insert(rho, GradedDims::from_pairs(gen_degrees.iter().map(|&d| (d, 1))));

        // Restriction to each facet: generator j goes to its lift's component,
        // monomials act through substitution into the facet's coordinates.
        let facets: Vec<usize> = (0..fan.cones.len()).filter(|&t| fan.covers(t, rho)).collect();
        let b_rho = QMat::from_cols(fan.cone(rho)?.span_basis.clone());
        for &phi in &facets {
            if stalks[phi].is_zero() {
                continue;
            }
            let d_phi = fan.dim_of(phi);
            let b_phi = QMat::from_cols(fan.cone(phi)?.span_basis.clone());
            let s_mat = if d_phi == 0 {
                QMat::zeros(d_rho, 0)
            } else {
                b_rho.solve(&b_phi).expect("facet span inside cone span")
            };
            let s_rows: Vec<Vec<Q>> = (0..d_rho).map(|i| s_mat.row(i)).collect();
            let eta = fan.span_eta(phi);
            let lifts: Vec<(i64, Vec<Q>)> = lift_cols
                .iter()
                .map(|&(d, col)| {
                    let p = secs.project(|i, dd| partial.stalk(i).dim(dd), phi, d);
                    (d, p.col(col))
                })
                .collect();

            let mut map = GradedMap::zero();
            let mut deg = gen_degrees.first().copied().unwrap_or(0);
            while deg <= cap {
                let rows = stalks[phi].dim(deg);
                let cols = stalks[rho].dim(deg);
                if rows == 0 || cols == 0 {
                    deg += 2;
                    continue;
                }
                let layout = free_basis_layout(d_rho, &gen_degrees, deg);
                let mut m = QMat::zeros(rows, cols);
                let mut col = 0usize;
                for (j, &g) in gen_degrees.iter().enumerate() {
                    if layout[j] == 0 {
                        continue;
                    }
                    let k = ((deg - g) / 2) as usize;
                    let sub = subst_matrix(d_rho, d_phi, &s_rows, k);
                    let monos = monomials(d_rho, k);
                    debug_assert_eq!(layout[j], monos.len());
                    for mu in 0..monos.len() {
                        let coeffs = sub.col(mu);
                        let op = stalks[phi].action_of_homog(&eta, k, &coeffs, g);
                        let v = op.mul_vec(&lifts[j].1);
                        for (r, x) in v.into_iter().enumerate() {
                            m.set(r, col, x);
                        }
                        col += 1;
                    }
                }
                debug_assert_eq!(col, cols);
                map.insert(deg, m);
                deg += 2;
            }
            res.insert((phi, rho), map);
        }
    }

    let sheaf = Sheaf::new(fan, cap, stalks, res)?;
    Ok(MinimalSheaf { sheaf, base: tau, gens, policy })
}

fn unit(dim: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::from_integer(0.into()); dim];
    v[i] = Q::from_integer(1.into());
    v
}

/// Why a sheaf fails to be the minimal sheaf based at τ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalityOutcome {
    pub minimal: bool,
    pub failure: Option<MinimalityFailure>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalityFailure {
    pub check: &'static str,
    pub cone: usize,
    pub degree: Option<i64>,
}

/// Support inside Star(τ), local freeness, flabbiness, and bijectivity of the
/// reduced stalk-to-boundary-sections map at every ρ ∈ Star(τ) above τ.
pub fn verify_minimal(sheaf: &Sheaf<'_>, tau: usize) -> Result<MinimalityOutcome> {
    let fan = sheaf.fan;
    fan.cone(tau)?;
    for sigma in sheaf.support() {
        if !fan.le(tau, sigma) {
            return Ok(fail("support-inside-star", sigma, None));
        }
    }
    let lf = sheaf.is_locally_free()?;
    if !lf.locally_free {
        let (cone, degree) = lf.witness.unwrap();
        return Ok(fail("locally-free", cone, Some(degree)));
    }
    let fl = sheaf.is_flabby()?;
    if !fl.flabby {
        let (cone, degree) = fl.witness.unwrap();
        return Ok(fail("flabby", cone, Some(degree)));
    }
    for &rho in &fan.star(tau)?.ids {
        if rho == tau {
            continue;
        }
        let secs = sheaf.sections(&fan.boundary(rho)?.ids);
        if let Some(d) = bar_map_not_bijective(sheaf, rho, &secs) {
            return Ok(fail("reduced-boundary-map-bijective", rho, Some(d)));
        }
    }
    Ok(MinimalityOutcome { minimal: true, failure: None })
}

fn fail(check: &'static str, cone: usize, degree: Option<i64>) -> MinimalityOutcome {
    MinimalityOutcome { minimal: false, failure: Some(MinimalityFailure { check, cone, degree }) }
}

/// First degree where M̄_ρ → Γ(∂ρ)‾ fails to be bijective, if any.
fn bar_map_not_bijective(sheaf: &Sheaf<'_>, rho: usize, secs: &Sections) -> Option<i64> {
    let m = sheaf.stalk(rho);
    let g = &secs.module;
    let mut degrees: Vec<i64> = m.degrees();
    degrees.extend(g.degrees());
    degrees.sort_unstable();
    degrees.dedup();
    for d in degrees {
        let w_g = g.aplus_image(d);
        let w_m = m.aplus_image(d);
        let z = sheaf.stalk_into_sections(rho, secs, d);
        let bar_m = m.dim(d) - w_m.rank();
        let bar_g = g.dim(d) - w_g.rank();
        let image_bar = QMat::hstack(&[&z, &w_g]).rank() - w_g.rank();
        if !(image_bar == bar_m && bar_m == bar_g) {
            return Some(d);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::fixtures::*;
    use crate::sheaf::Sheaf;

    #[test]
    fn simplicial_fans_give_the_structure_sheaf() {
        for fan in [quadrant_fan(), threeray_fan(), orthant_fan()] {
            let l = minimal_sheaf(&fan, fan.origin(), None).unwrap();
            for id in 0..fan.cones.len() {
                assert_eq!(l.gens[&id], GradedDims::from_pairs([(0, 1)]));
            }
            let a = Sheaf::structure(&fan, l.sheaf.cap);
            for id in 0..fan.cones.len() {
                assert_eq!(l.sheaf.stalk(id).hilbert(), a.stalk(id).hilbert());
            }
            assert!(verify_minimal(&l.sheaf, fan.origin()).unwrap().minimal);
        }
    }

    #[test]
    fn cube_fan_needs_extra_generators_on_square_cones() {
        let fan = cube_face_fan();
        let l = minimal_sheaf(&fan, fan.origin(), None).unwrap();
        for c in &fan.cones {
            let expect = if c.dim == 3 {
                GradedDims::from_pairs([(0, 1), (2, 1)])
            } else {
                GradedDims::from_pairs([(0, 1)])
            };
            assert_eq!(l.gens[&c.id], expect, "cone {}", fan.rayset_label(c.id));
        }
        assert!(verify_minimal(&l.sheaf, fan.origin()).unwrap().minimal);
        // Degree-0 layer is the constant sheaf: dimension one everywhere.
        for id in 0..fan.cones.len() {
            assert_eq!(l.sheaf.stalk(id).dim(0), 1);
        }
    }

    #[test]
    fn based_at_a_maximal_cone() {
        let fan = quadrant_fan();
        let sigma = fan.max_cones()[0];
        let l = minimal_sheaf(&fan, sigma, None).unwrap();
        assert_eq!(l.sheaf.support(), vec![sigma]);
        assert!(verify_minimal(&l.sheaf, sigma).unwrap().minimal);
    }

    #[test]
    fn based_at_a_ray_of_the_cube_fan() {
        let fan = cube_face_fan();
        let ray = fan.cone_by_rays(&[7]).unwrap();
        let l = minimal_sheaf(&fan, ray, None).unwrap();
        let star = fan.star(ray).unwrap().ids;
        assert_eq!(l.sheaf.support(), star);
        assert!(verify_minimal(&l.sheaf, ray).unwrap().minimal);
        // Every stalk of the star is generated in degree 0 alone: the three
        // square cones over the corner are simplicial relative to the ray.
        for g in l.gens.values() {
            assert_eq!(g, &GradedDims::from_pairs([(0, 1)]));
        }
    }

    #[test]
    fn polygon_cones_reproduce_g_vectors() {
        // Generator degrees at the cone over an m-gon: one in degree 0 and
        // m-3 in degree 2.
        for m in [3usize, 4, 5, 6, 8] {
            let fan = cone_over_mgon(m);
            let l = minimal_sheaf(&fan, fan.origin(), None).unwrap();
            let top = fan.max_cones()[0];
            let expect = if m == 3 {
                GradedDims::from_pairs([(0, 1)])
            } else {
                GradedDims::from_pairs([(0, 1), (2, m - 3)])
            };
            assert_eq!(l.gens[&top], expect, "m = {m}");
        }
    }

    #[test]
    fn lift_policies_agree_on_generator_degrees() {
        let fan = cube_face_fan();
        let f = minimal_sheaf_with_policy(&fan, fan.origin(), None, LiftPolicy::Forward).unwrap();
        let b = minimal_sheaf_with_policy(&fan, fan.origin(), None, LiftPolicy::Backward).unwrap();
        assert_eq!(f.gens, b.gens);
        assert!(verify_minimal(&b.sheaf, fan.origin()).unwrap().minimal);
        for id in 0..fan.cones.len() {
            assert_eq!(f.sheaf.stalk(id).hilbert(), b.sheaf.stalk(id).hilbert());
        }
    }

    #[test]
    fn restriction_to_a_subfan_is_the_subfan_minimal_sheaf() {
        // Stalk data of L on the cube fan at a square cone matches the minimal
        // sheaf of the fan generated by that cone alone.
        let fan = cube_face_fan();
        let l = minimal_sheaf(&fan, fan.origin(), None).unwrap();
        let sigma = *fan.max_cones().first().unwrap();
        let rays: Vec<_> =
            fan.cone(sigma).unwrap().rays.iter().map(|&r| fan.rays[r].clone()).collect();
        let sub = Fan::from_max_cones(3, rays, vec![(0..4).collect()]).unwrap();
        let lu = minimal_sheaf(&sub, sub.origin(), None).unwrap();
        let top = sub.max_cones()[0];
        assert_eq!(lu.gens[&top], l.gens[&sigma]);
        assert_eq!(
            lu.sheaf.stalk(top).hilbert(),
            l.sheaf.stalk(sigma).hilbert().truncate(lu.sheaf.cap)
        );
    }

    #[test]
    fn generator_degrees_are_even_and_nonnegative() {
        for fan in [cube_face_fan(), cube_tri_fan(), cone_over_mgon(6)] {
            let l = minimal_sheaf(&fan, fan.origin(), None).unwrap();
            for g in l.gens.values() {
                for (d, _) in g.iter() {
                    assert!(d >= 0 && d % 2 == 0);
                }
            }
        }
    }

    #[test]
    fn cap_bound_is_enforced() {
        let fan = cube_face_fan();
        assert_eq!(required_cap(&fan, fan.origin()), 4);
        assert!(matches!(minimal_sheaf(&fan, fan.origin(), Some(2)), Err(Error::CapTooSmall(_))));
        assert!(minimal_sheaf(&fan, fan.origin(), Some(4)).is_ok());
    }

    #[test]
    fn non_minimal_sheaves_are_rejected() {
        // The structure sheaf on the cube fan is not minimal: not flabby.
        let fan = cube_face_fan();
        let a = Sheaf::structure(&fan, 6);
        let out = verify_minimal(&a, fan.origin()).unwrap();
        assert!(!out.minimal);
        assert_eq!(out.failure.unwrap().check, "flabby");

        // Support outside the star is rejected.
        let ray = fan.cone_by_rays(&[0]).unwrap();
        let l = minimal_sheaf(&fan, ray, None).unwrap();
        let out = verify_minimal(&l.sheaf, fan.cone_by_rays(&[1]).unwrap()).unwrap();
        assert!(!out.minimal);
        assert_eq!(out.failure.unwrap().check, "support-inside-star");

        // Dropping a stalk breaks the boundary condition.
        let quad = quadrant_fan();
        let lq = minimal_sheaf(&quad, quad.origin(), None).unwrap();
        let sigma = quad.max_cones()[0];
        let mut stalks: Vec<GradedModule> =
            (0..quad.cones.len()).map(|i| lq.sheaf.stalk(i).clone()).collect();
        stalks[sigma] = GradedModule::zero(quad.n, lq.sheaf.cap);
        let mutant = Sheaf::unchecked(&quad, lq.sheaf.cap, stalks, BTreeMap::new());
        let out = verify_minimal(&mutant, quad.origin()).unwrap();
        assert!(!out.minimal);
    }
}
