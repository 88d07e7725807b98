//! Intersection cohomology of fans. Global ih from sections of the minimal
//! sheaf, local ip from stalk generators, boundary ih through cone projection,
//! the quotient and global-local identities, duality palindromes, convexity of
//! conewise linear functions, and numeric Lefschetz rank tables.

use crate::fan::{boundary_projection, Fan, Plf};
use crate::linalg::{dot, sign, QMat};
use crate::minimal::{minimal_sheaf, MinimalSheaf};
use crate::poly::{GradedDims, Poly};
use crate::sheaf::{Sections, Sheaf};
use crate::{Error, Result};
use num_traits::Zero;
use serde_json::{json, Value};
use std::collections::BTreeMap;

/// Sections grow generators up to degree 2n on complete fans.
pub fn ih_default_cap(fan: &Fan) -> i64 {
    2 * fan.n as i64 + 2
}

#[derive(Clone, Debug)]
pub struct IHResult<'a> {
    pub minimal: MinimalSheaf<'a>,
    pub sections: Sections,
    pub gens: GradedDims,
    pub ih: Poly,
}

pub fn ih<'a>(fan: &'a Fan, cap: Option<i64>) -> Result<IHResult<'a>> {
    let cap = cap.unwrap_or_else(|| ih_default_cap(fan));
    let minimal = minimal_sheaf(fan, fan.origin(), Some(cap))?;
    let sections = minimal.sheaf.sections_over(&fan.all_ids());
    let (gens, warn) = sections.module.minimal_generators();
    if warn {
        return Err(Error::CapTooSmall(format!(
            "global section generators found above cap-2 = {}; raise the cap",
            cap - 2
        )));
    }
    let ih = gens.to_poly();
    assert_eq!(ih.coeff(0), 1, "constant coefficient of ih");
    assert!(ih.coeffs_nonnegative() && ih.even_exponents_only());
    Ok(IHResult { minimal, sections, gens, ih })
}

/// Stalk generator polynomials of the minimal sheaf, per cone.
pub fn ip_table(fan: &Fan, cap: Option<i64>) -> Result<BTreeMap<usize, Poly>> {
    let minimal = minimal_sheaf(fan, fan.origin(), cap)?;
    Ok(minimal.gens.iter().map(|(&id, g)| (id, g.to_poly())).collect())
}

pub fn ip(fan: &Fan, sigma: usize, cap: Option<i64>) -> Result<Poly> {
    fan.cone(sigma)?;
    Ok(ip_table(fan, cap)?.remove(&sigma).expect("cone present"))
}

/// ih of the projected boundary fan; 1 in dimensions 0 and 1.
pub fn ih_local(fan: &Fan, sigma: usize) -> Result<Poly> {
    if fan.dim_of(sigma) < 2 {
        fan.cone(sigma)?;
        return Ok(Poly::one());
    }
    let bp = boundary_projection(fan, sigma)?;
    Ok(ih(&bp.fan, None)?.ih)
}

/// Degreewise matrices of multiplication by a conewise linear function on a
/// sections module, keyed by source degree.
fn plf_action(sheaf: &Sheaf<'_>, secs: &Sections, l: &Plf) -> Result<BTreeMap<i64, QMat>> {
    let fan = sheaf.fan;
    let mut forms: BTreeMap<usize, Vec<crate::linalg::Q>> = BTreeMap::new();
    for &id in &secs.ids {
        forms.insert(id, l.linear_form_on(fan, id)?);
    }
    let mut out = BTreeMap::new();
    for d in secs.module.degrees() {
        let blocks: Vec<QMat> = secs
            .ids
            .iter()
            .map(|&id| {
                let st = sheaf.stalk(id);
                let mut m = QMat::zeros(st.dim(d + 2), st.dim(d));
                for (i, c) in forms[&id].iter().enumerate() {
                    if !c.is_zero() {
                        m = m.add(&st.act(i, d).scale(c));
                    }
                }
                m
            })
            .collect();
        let big = block_diag(&blocks);
        let k_d = secs.basis_at(d).cloned().unwrap_or_else(|| QMat::zeros(big.cols, 0));
        let k_d2 = secs.basis_at(d + 2).cloned().unwrap_or_else(|| QMat::zeros(big.rows, 0));
        let m = k_d2.solve(&big.mul(&k_d)).expect("multiplication preserves compatibility");
        out.insert(d, m);
    }
    Ok(out)
}

/// Rank of the map induced on bar quotients by m: Γ_src → Γ_tgt.
fn bar_rank(g: &crate::graded::GradedModule, m: &QMat, tgt: i64) -> usize {
    let w = g.aplus_image(tgt);
    QMat::hstack(&[m, &w]).rank() - w.rank()
}

fn bar_dim(g: &crate::graded::GradedModule, d: i64) -> usize {
    g.dim(d) - g.aplus_image(d).rank()
}

#[derive(Clone, Debug)]
pub struct QuotientReport {
    pub pass: bool,
    pub ih_boundary: Poly,
    pub quotient: Poly,
    pub ip: Poly,
    pub witness: Option<i64>,
}

impl QuotientReport {
    pub fn to_json(&self) -> Value {
        json!({
            "pass": self.pass,
            "ih_boundary": self.ih_boundary.to_json(),
            "quotient": self.quotient.to_json(),
            "ip": self.ip.to_json(),
            "witness": self.witness,
        })
    }
}

/// dim(IH(∂σ̄)/l·IH(∂σ̄)) per degree equals ip(σ), where l is the strictly
/// convex function produced by the boundary projection.
pub fn ip_quotient_check(fan: &Fan, sigma: usize) -> Result<QuotientReport> {
    let bp = boundary_projection(fan, sigma)?;
    let ihr = ih(&bp.fan, None)?;
    let mult = plf_action(&ihr.minimal.sheaf, &ihr.sections, &bp.l)?;
    let g = &ihr.sections.module;
    let mut quotient = GradedDims::new();
    for d in g.degrees() {
        let m = mult.get(&(d - 2)).cloned().unwrap_or_else(|| QMat::zeros(g.dim(d), 0));
        let v = bar_dim(g, d) - bar_rank(g, &m, d);
        quotient.add(d, v);
    }
    let ipp = ip(fan, sigma, None)?;
    let qp = quotient.to_poly();
    let witness = qp
        .terms()
        .map(|(e, _)| e)
        .chain(ipp.terms().map(|(e, _)| e))
        .find(|&e| qp.coeff(e) != ipp.coeff(e));
    Ok(QuotientReport {
        pass: witness.is_none(),
        ih_boundary: ihr.ih,
        quotient: qp,
        ip: ipp,
        witness,
    })
}

#[derive(Clone, Debug)]
pub struct GlobalLocalReport {
    pub pass: bool,
    pub lhs: Poly,
    pub rhs: Poly,
}

impl GlobalLocalReport {
    pub fn to_json(&self) -> Value {
        json!({"pass": self.pass, "ih": self.lhs.to_json(), "local_sum": self.rhs.to_json()})
    }
}

/// ih(Φ) = Σ_σ (q²−1)^{n−dim σ} ip(σ) on complete fans.
pub fn global_local_check(fan: &Fan) -> Result<GlobalLocalReport> {
    if !fan.is_complete() {
        return Err(Error::CheckFailed {
            check: "fan-completeness".into(),
            witness: "the global-local formula requires a complete fan".into(),
        });
    }
    let lhs = ih(fan, None)?.ih;
    let table = ip_table(fan, None)?;
    let q2m1 = Poly::from_coeffs([(2, 1), (0, -1)]);
    let mut rhs = Poly::zero();
    for c in &fan.cones {
        rhs = rhs.add(&q2m1.pow((fan.n - c.dim) as u32).mul(&table[&c.id]));
    }
    Ok(GlobalLocalReport { pass: lhs == rhs, lhs, rhs })
}

#[derive(Clone, Debug)]
pub struct DualityReport {
    pub pass: bool,
    /// Present on complete fans only.
    pub ih: Option<Poly>,
    pub witness: Option<String>,
}

impl DualityReport {
    pub fn to_json(&self) -> Value {
        json!({
            "pass": self.pass,
            "ih": self.ih.as_ref().map(|p| p.to_json()),
            "witness": self.witness,
        })
    }
}

/// Palindromicity of ih about n on complete fans, and for every cone the
/// costalk generators of the minimal sheaf against ip reversed by 2d(σ).
pub fn duality_check(fan: &Fan) -> Result<DualityReport> {
    let cap = ih_default_cap(fan);
    let minimal = minimal_sheaf(fan, fan.origin(), Some(cap))?;
    let mut witness = None;
    let mut ih_poly = None;
    if fan.is_complete() {
        let secs = minimal.sheaf.sections_over(&fan.all_ids());
        let (gens, warn) = secs.module.minimal_generators();
        if warn {
            return Err(Error::CapTooSmall("section generators above cap-2".into()));
        }
        let p = gens.to_poly();
        let top = 2 * fan.n as i64;
        if !(p.is_palindromic(top) && p.coeff(0) == 1 && p.coeff(top) == 1) {
            witness = Some(format!("ih = {p} is not a palindrome about degree {}", top / 2));
        }
        if !p.even_exponents_only() || !p.coeffs_nonnegative() {
            witness = Some(format!("ih = {p} has odd or negative coefficients"));
        }
        ih_poly = Some(p);
    }
    if witness.is_none() {
        for c in &fan.cones {
            let co = minimal.sheaf.costalk(c.id)?;
            let (cg, warn) = co.minimal_generators();
            if warn {
                return Err(Error::CapTooSmall(format!(
                    "costalk generators above cap-2 at cone {}",
                    fan.rayset_label(c.id)
                )));
            }
            let expect = GradedDims::from_pairs(
                minimal.gens[&c.id].iter().map(|(d, k)| (2 * c.dim as i64 - d, k)),
            );
            if cg != expect {
                witness = Some(format!(
                    "costalk generators {cg} at cone {} differ from reversed stalk generators {expect}",
                    fan.rayset_label(c.id)
                ));
                break;
            }
        }
    }
    Ok(DualityReport { pass: witness.is_none(), ih: ih_poly, witness })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convexity {
    StrictlyConvex,
    Convex,
    Neither,
}

/// Wall test: across every facet shared by two maximal cones, each side's
/// linear extension must under-estimate the function on the other side.
pub fn convexity(fan: &Fan, l: &Plf) -> Result<Convexity> {
    let maxdim = fan.max_dim();
    let mut strict = true;
    let mut convex = true;
    for c in &fan.cones {
        if c.dim + 1 != maxdim {
            continue;
        }
        let parents: Vec<usize> =
            fan.max_cones().iter().copied().filter(|&s| fan.covers(c.id, s)).collect();
        if parents.len() != 2 {
            continue;
        }
        for (a, b) in [(parents[0], parents[1]), (parents[1], parents[0])] {
            let fa = l.linear_form_on(fan, a)?;
            let fb = l.linear_form_on(fan, b)?;
            let diff: Vec<crate::linalg::Q> = fa.iter().zip(&fb).map(|(x, y)| x - y).collect();
            match sign(&dot(&diff, &fan.interior_point(b))) {
                s if s > 0 => convex = false,
                0 => strict = false,
                _ => {}
            }
        }
    }
    Ok(if !convex {
        Convexity::Neither
    } else if strict {
        Convexity::StrictlyConvex
    } else {
        Convexity::Convex
    })
}

#[derive(Clone, Debug)]
pub struct LefschetzRow {
    pub power: usize,
    pub source: i64,
    pub target: i64,
    pub src_dim: usize,
    pub tgt_dim: usize,
    pub rank: usize,
    pub bijective: bool,
}

#[derive(Clone, Debug)]
pub struct StepRow {
    pub source: i64,
    pub src_dim: usize,
    pub tgt_dim: usize,
    pub rank: usize,
    pub injective: bool,
    pub surjective: bool,
}

#[derive(Clone, Debug)]
pub struct LefschetzReport {
    pub ih: Poly,
    /// l^i : IH^(n−i) → IH^(n+i) for i = 1..=n.
    pub powers: Vec<LefschetzRow>,
    /// Single multiplications l : IH^(d) → IH^(d+2).
    pub steps: Vec<StepRow>,
    pub all_bijective: bool,
    /// Injectivity below the middle and surjectivity above it.
    pub monotone_ok: bool,
}

impl LefschetzReport {
    pub fn to_json(&self) -> Value {
        json!({
            "ih": self.ih.to_json(),
            "powers": self.powers.iter().map(|r| json!({
                "power": r.power, "source": r.source, "target": r.target,
                "src_dim": r.src_dim, "tgt_dim": r.tgt_dim,
                "rank": r.rank, "bijective": r.bijective,
            })).collect::<Vec<_>>(),
            "steps": self.steps.iter().map(|r| json!({
                "source": r.source, "src_dim": r.src_dim, "tgt_dim": r.tgt_dim,
                "rank": r.rank, "injective": r.injective, "surjective": r.surjective,
            })).collect::<Vec<_>>(),
            "all_bijective": self.all_bijective,
            "monotone_ok": self.monotone_ok,
        })
    }
}

/// Rank table of multiplication by a strictly convex conewise linear function
/// on IH. Reports, never asserts: bijectivity here is a conjecture checked on
/// rational input.
pub fn lefschetz_ranks(fan: &Fan, l: &Plf, cap: Option<i64>) -> Result<LefschetzReport> {
    if convexity(fan, l)? != Convexity::StrictlyConvex {
        return Err(Error::NotStrictlyConvex(
            "the conewise linear function is not strictly convex".into(),
        ));
    }
    let ihr = ih(fan, cap)?;
    let mult = plf_action(&ihr.minimal.sheaf, &ihr.sections, l)?;
    let g = &ihr.sections.module;
    let n = fan.n as i64;
    let mult_at = |d: i64| -> QMat {
        mult.get(&d).cloned().unwrap_or_else(|| QMat::zeros(g.dim(d + 2), g.dim(d)))
    };

    let mut powers = Vec::new();
    for i in 1..=fan.n {
        let (src, tgt) = (n - i as i64, n + i as i64);
        if src % 2 != 0 {
            continue;
        }
        let mut m = QMat::identity(g.dim(src));
        let mut d = src;
        while d < tgt {
            m = mult_at(d).mul(&m);
            d += 2;
        }
        let rank = bar_rank(g, &m, tgt);
        let (sd, td) = (bar_dim(g, src), bar_dim(g, tgt));
        powers.push(LefschetzRow {
            power: i,
            source: src,
            target: tgt,
            src_dim: sd,
            tgt_dim: td,
            rank,
            bijective: rank == sd && rank == td,
        });
    }

    let mut steps = Vec::new();
    let mut d = 0;
    while d + 2 <= 2 * n {
        let rank = bar_rank(g, &mult_at(d), d + 2);
        let (sd, td) = (bar_dim(g, d), bar_dim(g, d + 2));
        steps.push(StepRow {
            source: d,
            src_dim: sd,
            tgt_dim: td,
            rank,
            injective: rank == sd,
            surjective: rank == td,
        });
        d += 2;
    }

    let all_bijective = powers.iter().all(|r| r.bijective);
    let monotone_ok = steps
        .iter()
        .all(|s| (s.source > n - 1 || s.injective) && (s.source < n - 1 || s.surjective));
    Ok(LefschetzReport { ih: ihr.ih, powers, steps, all_bijective, monotone_ok })
}

fn block_diag(blocks: &[QMat]) -> QMat {
    let rows = blocks.iter().map(|b| b.rows).sum();
    let cols = blocks.iter().map(|b| b.cols).sum();
    let mut m = QMat::zeros(rows, cols);
    let (mut ro, mut co) = (0, 0);
    for b in blocks {
        for i in 0..b.rows {
            for j in 0..b.cols {
                m.set(ro + i, co + j, b.at(i, j).clone());
            }
        }
        ro += b.rows;
        co += b.cols;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::fixtures::*;
    use crate::linalg::q;

    #[test]
    fn ih_of_the_small_complete_fans() {
        assert_eq!(ih(&line_fan(), None).unwrap().ih, Poly::from_dense(&[1, 0, 1]));
        assert_eq!(ih(&quadrant_fan(), None).unwrap().ih, Poly::from_dense(&[1, 0, 2, 0, 1]));
        assert_eq!(ih(&threeray_fan(), None).unwrap().ih, Poly::from_dense(&[1, 0, 1, 0, 1]));
        assert_eq!(ih(&orthant_fan(), None).unwrap().ih, Poly::from_dense(&[1, 0, 3, 0, 3, 0, 1]));
    }

    #[test]
    fn ih_of_the_cube_fan_matches_its_h_vector() {
        let fan = cube_face_fan();
        assert_eq!(ih(&fan, None).unwrap().ih, Poly::from_dense(&[1, 0, 5, 0, 5, 0, 1]));
    }

    #[test]
    fn ip_of_simplicial_and_polygon_cones() {
        let cube = cube_face_fan();
        let table = ip_table(&cube, None).unwrap();
        for c in &cube.cones {
            let expect = if c.dim == 3 { Poly::from_dense(&[1, 0, 1]) } else { Poly::one() };
            assert_eq!(table[&c.id], expect);
        }
        let pent = cone_over_mgon(5);
        let top = pent.max_cones()[0];
        assert_eq!(ip(&pent, top, None).unwrap(), Poly::from_dense(&[1, 0, 2]));
        assert_eq!(ip(&pent, pent.origin(), None).unwrap(), Poly::one());
        let ray = pent.cone_by_rays(&[0]).unwrap();
        assert_eq!(ip(&pent, ray, None).unwrap(), Poly::one());
    }

    #[test]
    fn boundary_ih_of_cones() {
        let sq = cone_over_mgon(4);
        let top = sq.max_cones()[0];
        assert_eq!(ih_local(&sq, top).unwrap(), Poly::from_dense(&[1, 0, 2, 0, 1]));
        // Simplicial 3-cone: boundary projects to a three-ray complete fan.
        let orth = Fan::from_max_cones(
            3,
            vec![qv(&[1, 0, 0]), qv(&[0, 1, 0]), qv(&[0, 0, 1])],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        let top = orth.max_cones()[0];
        assert_eq!(ih_local(&orth, top).unwrap(), Poly::from_dense(&[1, 0, 1, 0, 1]));
        let ray = orth.cone_by_rays(&[0]).unwrap();
        assert_eq!(ih_local(&orth, ray).unwrap(), Poly::one());
    }

    #[test]
    fn quotient_identity_on_corpus_cones() {
        for (fan, expect_ip) in [
            (cone_over_mgon(4), Poly::from_dense(&[1, 0, 1])),
            (cone_over_mgon(5), Poly::from_dense(&[1, 0, 2])),
            (cone_over_mgon(3), Poly::one()),
        ] {
            let top = fan.max_cones()[0];
            let r = ip_quotient_check(&fan, top).unwrap();
            assert!(r.pass, "witness {:?}", r.witness);
            assert_eq!(r.ip, expect_ip);
            assert_eq!(r.quotient, expect_ip);
        }
        // 2-cones in the quadrant fan.
        let quad = quadrant_fan();
        let sigma = quad.cone_by_rays(&[0, 1]).unwrap();
        let r = ip_quotient_check(&quad, sigma).unwrap();
        assert!(r.pass);
        assert_eq!(r.ip, Poly::one());
        assert!(matches!(
            ip_quotient_check(&quad, quad.origin()),
            Err(Error::DimensionTooSmall(_))
        ));
    }

    #[test]
    fn global_local_identity() {
        for fan in [line_fan(), quadrant_fan(), threeray_fan(), cube_face_fan()] {
            let r = global_local_check(&fan).unwrap();
            assert!(r.pass, "lhs {} rhs {}", r.lhs, r.rhs);
        }
        // Hand expansion for the quadrant fan: (q²−1)² + 4(q²−1) + 4.
        let r = global_local_check(&quadrant_fan()).unwrap();
        assert_eq!(r.rhs, Poly::from_dense(&[1, 0, 2, 0, 1]));
        let single =
            Fan::from_max_cones(2, vec![qv(&[1, 0]), qv(&[0, 1])], vec![vec![0, 1]]).unwrap();
        assert!(matches!(global_local_check(&single), Err(Error::CheckFailed { .. })));
    }

    #[test]
    fn duality_on_complete_fans_and_costalks() {
        for fan in [line_fan(), quadrant_fan(), cube_face_fan(), mgon_fan(6)] {
            let r = duality_check(&fan).unwrap();
            assert!(r.pass, "witness {:?}", r.witness);
        }
        let r = duality_check(&cube_face_fan()).unwrap();
        assert_eq!(r.ih.unwrap(), Poly::from_dense(&[1, 0, 5, 0, 5, 0, 1]));
        // Costalk part alone on a non-complete fan.
        let sq = cone_over_mgon(4);
        let r = duality_check(&sq).unwrap();
        assert!(r.pass);
        assert!(r.ih.is_none());
    }

    #[test]
    fn convexity_classification() {
        let quad = quadrant_fan();
        let ones = Plf { values: vec![q(1), q(1), q(1), q(1)] };
        assert_eq!(convexity(&quad, &ones).unwrap(), Convexity::StrictlyConvex);
        let linear = Plf::from_linear(&quad, &[q(1), q(0)]);
        assert_eq!(convexity(&quad, &linear).unwrap(), Convexity::Convex);
        let neg = Plf { values: vec![q(-1), q(-1), q(-1), q(-1)] };
        assert_eq!(convexity(&quad, &neg).unwrap(), Convexity::Neither);
    }

    #[test]
    fn lefschetz_ranks_on_rational_corpus() {
        let quad = quadrant_fan();
        let ones = Plf { values: vec![q(1); 4] };
        let r = lefschetz_ranks(&quad, &ones, None).unwrap();
        assert!(r.all_bijective && r.monotone_ok);
        let top = r.powers.iter().find(|p| p.power == 2).unwrap();
        assert_eq!((top.rank, top.src_dim, top.tgt_dim), (1, 1, 1));

        let line = line_fan();
        let l = Plf { values: vec![q(1), q(1)] };
        let r = lefschetz_ranks(&line, &l, None).unwrap();
        assert!(r.all_bijective);
        assert_eq!(r.powers[0].rank, 1);

        let cube = cube_face_fan();
        let ones = Plf { values: vec![q(1); 8] };
        let r = lefschetz_ranks(&cube, &ones, None).unwrap();
        assert!(r.all_bijective && r.monotone_ok);
        let step = r.steps.iter().find(|s| s.source == 2).unwrap();
        assert_eq!(step.rank, 5);

        let not_convex = Plf::from_linear(&quad, &[q(1), q(0)]);
        assert!(matches!(
            lefschetz_ranks(&quad, &not_convex, None),
            Err(Error::NotStrictlyConvex(_))
        ));
    }

    #[test]
    fn lefschetz_ranks_ignore_global_linear_shifts() {
        let fan = mgon_fan(5);
        let ones = Plf { values: vec![q(1); 5] };
        let r1 = lefschetz_ranks(&fan, &ones, None).unwrap();
        let shift = Plf::from_linear(&fan, &[q(3), q(-2)]);
        let shifted =
            Plf { values: ones.values.iter().zip(&shift.values).map(|(a, b)| a + b).collect() };
        let r2 = lefschetz_ranks(&fan, &shifted, None).unwrap();
        assert_eq!(r1.powers.len(), r2.powers.len());
        for (a, b) in r1.powers.iter().zip(&r2.powers) {
            assert_eq!((a.rank, a.bijective), (b.rank, b.bijective));
        }
        assert!(r1.all_bijective && r2.all_bijective);
    }
}
