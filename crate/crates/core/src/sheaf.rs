//! Sheaves of graded modules on the fan poset. A sheaf stores one stalk per cone
//! and one restriction map per covering pair; general restrictions are composites,
//! and chain independence is validated at construction. Sections over a cone set
//! are the degreewise kernel of the covers-difference map, carrying the stalkwise
//! A-action.

use crate::fan::{Fan, Subposet};
use crate::graded::{
    check_free, polynomial_module, subst_matrix, FreeCheck, GradedMap, GradedModule,
};
use crate::linalg::QMat;
use crate::poly::GradedDims;
use crate::{Error, Result};
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct Sheaf<'a> {
    pub fan: &'a Fan,
    pub cap: i64,
    /// Indexed by cone id; zero stalks are materialized with dimension zero.
    pub stalks: Vec<GradedModule>,
    /// Restriction maps keyed by covering pair (τ, σ): stalk_σ → stalk_τ.
    res: BTreeMap<(usize, usize), GradedMap>,
}

/// Flabbiness outcome: on failure, the cone and degree where the boundary
/// sections are not reached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlabbyOutcome {
    pub flabby: bool,
    pub witness: Option<(usize, i64)>,
}

/// Local freeness outcome with per-cone generator degrees for the free stalks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocallyFreeOutcome {
    pub locally_free: bool,
    pub gens: BTreeMap<usize, GradedDims>,
    pub witness: Option<(usize, i64)>,
}

impl<'a> Sheaf<'a> {
    pub fn new(
        fan: &'a Fan,
        cap: i64,
        stalks: Vec<GradedModule>,
        res: BTreeMap<(usize, usize), GradedMap>,
    ) -> Result<Sheaf<'a>> {
        assert_eq!(stalks.len(), fan.cones.len());
        let sheaf = Sheaf { fan, cap, stalks, res };
        sheaf.validate()?;
        Ok(sheaf)
    }

    /// Zero sheaf.
    pub fn zero(fan: &'a Fan, cap: i64) -> Sheaf<'a> {
        let stalks = fan.cones.iter().map(|_| GradedModule::zero(fan.n, cap)).collect();
        Sheaf { fan, cap, stalks, res: BTreeMap::new() }
    }

    /// Assemble without validation; for staged internal construction only.
    pub(crate) fn unchecked(
        fan: &'a Fan,
        cap: i64,
        stalks: Vec<GradedModule>,
        res: BTreeMap<(usize, usize), GradedMap>,
    ) -> Sheaf<'a> {
        Sheaf { fan, cap, stalks, res }
    }

    /// Conewise polynomial functions: stalk at σ is the polynomial ring on
    /// Span(σ), restrictions restrict functions.
    pub fn structure(fan: &'a Fan, cap: i64) -> Sheaf<'a> {
        let stalks: Vec<GradedModule> = fan
            .cones
            .iter()
            .map(|c| polynomial_module(c.dim, &fan.span_restriction_rows(c.id), cap))
            .collect();
        let mut res = BTreeMap::new();
        for (t, s) in fan.cover_pairs() {
            let (ct, cs) = (&fan.cones[t], &fan.cones[s]);
            let b_sigma = QMat::from_cols(cs.span_basis.clone());
            let b_tau = QMat::from_cols(ct.span_basis.clone());
            let s_mat = if ct.dim == 0 {
                QMat::zeros(cs.dim, 0)
            } else {
                b_sigma.solve(&b_tau).expect("face span inside cone span")
            };
            let rows: Vec<Vec<crate::linalg::Q>> = (0..cs.dim).map(|i| s_mat.row(i)).collect();
            let mut map = GradedMap::zero();
            let mut d = 0i64;
            while d <= cap {
                map.insert(d, subst_matrix(cs.dim, ct.dim, &rows, (d / 2) as usize));
                d += 2;
            }
            res.insert((t, s), map);
        }
        let sheaf = Sheaf { fan, cap, stalks, res };
        debug_assert!(sheaf.validate().is_ok());
        sheaf
    }

    /// Constant sheaf ℚ in degree zero: rank-1 stalks, identity restrictions.
    pub fn constant(fan: &'a Fan, cap: i64) -> Sheaf<'a> {
        let mut dims = BTreeMap::new();
        dims.insert(0i64, 1usize);
        let stalks: Vec<GradedModule> = fan
            .cones
            .iter()
            .map(|_| GradedModule::from_parts(fan.n, cap, dims.clone(), BTreeMap::new()))
            .collect();
        let mut res = BTreeMap::new();
        for (t, s) in fan.cover_pairs() {
            let mut map = GradedMap::zero();
            map.insert(0, QMat::identity(1));
            res.insert((t, s), map);
        }
        Sheaf { fan, cap, stalks, res }
    }

    /// Extension by zero from an open subposet: stalks off the set become zero.
    pub fn open_restriction(&self, ids: &[usize]) -> Sheaf<'a> {
        debug_assert!(ids
            .iter()
            .all(|&s| (0..self.fan.cones.len()).all(|t| !self.fan.le(t, s) || ids.contains(&t))));
        let stalks: Vec<GradedModule> = (0..self.stalks.len())
            .map(|i| {
                if ids.contains(&i) {
                    self.stalks[i].clone()
                } else {
                    GradedModule::zero(self.fan.n, self.cap)
                }
            })
            .collect();
        let res = self
            .res
            .iter()
            .filter(|((t, s), _)| ids.contains(t) && ids.contains(s))
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        Sheaf { fan: self.fan, cap: self.cap, stalks, res }
    }

    /// Extension by zero of ℚ in degree zero at the origin.
    pub fn skyscraper_origin(fan: &'a Fan, cap: i64) -> Sheaf<'a> {
        let mut stalks: Vec<GradedModule> =
            fan.cones.iter().map(|_| GradedModule::zero(fan.n, cap)).collect();
        let mut dims = BTreeMap::new();
        dims.insert(0i64, 1usize);
        stalks[fan.origin()] = GradedModule::from_parts(fan.n, cap, dims, BTreeMap::new());
        Sheaf { fan, cap, stalks, res: BTreeMap::new() }
    }

    pub fn stalk(&self, id: usize) -> &GradedModule {
        &self.stalks[id]
    }

    /// Cones with nonzero stalk.
    pub fn support(&self) -> Vec<usize> {
        (0..self.stalks.len()).filter(|&i| !self.stalks[i].is_zero()).collect()
    }

    /// Restriction along a covering pair at one degree.
    pub fn res_at(&self, tau: usize, sigma: usize, d: i64) -> QMat {
        let (rt, cs) = (self.stalks[tau].dim(d), self.stalks[sigma].dim(d));
        match self.res.get(&(tau, sigma)) {
            Some(m) => m.at(d, rt, cs),
            None => QMat::zeros(rt, cs),
        }
    }

    /// Composite restriction stalk_σ → stalk_τ for τ ≤ σ; deterministic smallest-id
    /// chain, well defined by chain independence.
    pub fn restriction_at(&self, sigma: usize, tau: usize, d: i64) -> QMat {
        assert!(self.fan.le(tau, sigma));
        let mut cur = sigma;
        let mut m = QMat::identity(self.stalks[sigma].dim(d));
        while cur != tau {
            let step = (0..self.fan.cones.len())
                .find(|&r| self.fan.le(tau, r) && self.fan.covers(r, cur))
                .expect("cover chain exists inside the interval");
            m = self.res_at(step, cur, d).mul(&m);
            cur = step;
        }
        m
    }

    /// Stalk commutativity, intertwining of every cover map, and chain
    /// independence across all two-step intervals.
    pub fn validate(&self) -> Result<()> {
        for (id, m) in self.stalks.iter().enumerate() {
            assert_eq!(m.n_forms, self.fan.n);
            m.validate().map_err(|_| Error::CheckFailed {
                check: "stalk-action-commutativity".into(),
                witness: format!("cone {}", self.fan.rayset_label(id)),
            })?;
        }
        for (&(t, s), map) in &self.res {
            map.validate_intertwines(&self.stalks[s], &self.stalks[t]).map_err(|_| {
                Error::CheckFailed {
                    check: "restriction-intertwines-action".into(),
                    witness: format!(
                        "{} -> {}",
                        self.fan.rayset_label(s),
                        self.fan.rayset_label(t)
                    ),
                }
            })?;
        }
        let k = self.fan.cones.len();
        for s in 0..k {
            for t in 0..k {
                if !self.fan.lt(t, s) || self.fan.cones[s].dim != self.fan.cones[t].dim + 2 {
                    continue;
                }
                let middles: Vec<usize> =
                    (0..k).filter(|&r| self.fan.covers(t, r) && self.fan.covers(r, s)).collect();
                let mut d = 0i64;
                while d <= self.cap {
                    let composites: Vec<QMat> = middles
                        .iter()
                        .map(|&r| self.res_at(t, r, d).mul(&self.res_at(r, s, d)))
                        .collect();
                    if composites.windows(2).any(|w| w[0] != w[1]) {
                        return Err(Error::CheckFailed {
                            check: "restriction-chain-independence".into(),
                            witness: format!(
                                "{} -> {} at degree {d}",
                                self.fan.rayset_label(s),
                                self.fan.rayset_label(t)
                            ),
                        });
                    }
                    d += 2;
                }
            }
        }
        Ok(())
    }

    /// Sections over a set of cones: compatible stalk families.
    pub fn sections(&self, ids: &[usize]) -> Sections {
        let mut ids: Vec<usize> = ids.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let pairs: Vec<(usize, usize)> = self
            .fan
            .cover_pairs()
            .into_iter()
            .filter(|&(t, s)| ids.contains(&t) && ids.contains(&s))
            .collect();

        let mut degrees: Vec<i64> = Vec::new();
        for &i in &ids {
            degrees.extend(self.stalks[i].degrees());
        }
        degrees.sort_unstable();
        degrees.dedup();

        let mut basis: BTreeMap<i64, QMat> = BTreeMap::new();
        let mut dims: BTreeMap<i64, usize> = BTreeMap::new();
        for &d in &degrees {
            let offs = block_offsets(&ids, |i| self.stalks[i].dim(d));
            let total = *offs.last().unwrap();
            let mut rows: Vec<QMat> = Vec::new();
            for &(t, s) in &pairs {
                let r = self.res_at(t, s, d);
                if r.rows == 0 {
                    continue;
                }
                let mut row = QMat::zeros(r.rows, total);
                paste(&mut row, &r, 0, offs[pos(&ids, s)]);
                let neg = QMat::identity(r.rows).scale(&crate::linalg::q(-1));
                paste(&mut row, &neg, 0, offs[pos(&ids, t)]);
                rows.push(row);
            }
            let k = if rows.is_empty() {
                QMat::identity(total)
            } else {
                let refs: Vec<&QMat> = rows.iter().collect();
                QMat::vstack(&refs).kernel()
            };
            if k.cols > 0 {
                dims.insert(d, k.cols);
            }
            basis.insert(d, k);
        }

        let mut acts: BTreeMap<i64, Vec<QMat>> = BTreeMap::new();
        for &d in &degrees {
            if d + 2 > self.cap || *dims.get(&d).unwrap_or(&0) == 0 {
                continue;
            }
            let k_d = &basis[&d];
            let k_d2 = basis.get(&(d + 2)).cloned().unwrap_or_else(|| {
                QMat::zeros(block_total(&ids, |i| self.stalks[i].dim(d + 2)), 0)
            });
            let mats: Vec<QMat> = (0..self.fan.n)
                .map(|form| {
                    let blocks: Vec<QMat> =
                        ids.iter().map(|&i| self.stalks[i].act(form, d)).collect();
                    let big = block_diag(&blocks).mul(k_d);
                    k_d2.solve(&big).expect("action preserves compatibility")
                })
                .collect();
            acts.insert(d, mats);
        }
        let module = GradedModule::from_parts(self.fan.n, self.cap, dims, acts);
        Sections { ids, module, basis }
    }

    pub fn sections_over(&self, s: &Subposet) -> Sections {
        self.sections(&s.ids)
    }

    /// Matrix of the canonical map stalk_σ^(d) → Γ(S)^(d) for S a set of faces
    /// of σ: each stalk basis vector maps to its family of restrictions.
    pub fn stalk_into_sections(&self, sigma: usize, secs: &Sections, d: i64) -> QMat {
        let cols = self.stalks[sigma].dim(d);
        let offs = block_offsets(&secs.ids, |i| self.stalks[i].dim(d));
        let total = *offs.last().unwrap();
        let mut fam = QMat::zeros(total, cols);
        for (k, &t) in secs.ids.iter().enumerate() {
            debug_assert!(self.fan.le(t, sigma));
            let r = self.restriction_at(sigma, t, d);
            paste(&mut fam, &r, offs[k], 0);
        }
        let basis = match secs.basis.get(&d) {
            Some(b) => b,
            None => return QMat::zeros(0, cols),
        };
        basis.solve(&fam).expect("restriction family is compatible")
    }

    /// Flabbiness: for every cone, the stalk must reach every minimal generator
    /// of the boundary sections.
    pub fn is_flabby(&self) -> Result<FlabbyOutcome> {
        for sigma in 0..self.fan.cones.len() {
            let boundary = self.fan.boundary(sigma)?;
            if boundary.ids.is_empty() {
                continue;
            }
            let secs = self.sections(&boundary.ids);
            let (_, warn) = secs.module.minimal_generators();
            if warn {
                return Err(Error::CapTooSmall(format!(
                    "boundary sections at cone {} have generators above cap-2",
                    self.fan.rayset_label(sigma)
                )));
            }
            for &d in &secs.module.degrees() {
                let z = self.stalk_into_sections(sigma, &secs, d);
                let aplus = secs.module.aplus_image(d);
                let combined = QMat::hstack(&[&z, &aplus]);
                if combined.rank() != secs.module.dim(d) {
                    return Ok(FlabbyOutcome { flabby: false, witness: Some((sigma, d)) });
                }
            }
        }
        Ok(FlabbyOutcome { flabby: true, witness: None })
    }

    /// Cap-certified freeness of every stalk over its cone's polynomial ring.
    pub fn is_locally_free(&self) -> Result<LocallyFreeOutcome> {
        let mut gens = BTreeMap::new();
        for (id, stalk) in self.stalks.iter().enumerate() {
            match check_free(stalk, self.fan.cones[id].dim)? {
                FreeCheck::Free(g) => {
                    gens.insert(id, g);
                }
                FreeCheck::NotFree { degree, .. } => {
                    return Ok(LocallyFreeOutcome {
                        locally_free: false,
                        gens,
                        witness: Some((id, degree)),
                    });
                }
            }
        }
        Ok(LocallyFreeOutcome { locally_free: true, gens, witness: None })
    }

    /// Kernel of the restriction stalk_σ → Γ(∂σ): sections vanishing on the
    /// boundary, with the inherited action.
    pub fn costalk(&self, sigma: usize) -> Result<GradedModule> {
        self.fan.cone(sigma)?;
        let facets: Vec<usize> =
            (0..self.fan.cones.len()).filter(|&t| self.fan.covers(t, sigma)).collect();
        let stalk = &self.stalks[sigma];
        if facets.is_empty() {
            return Ok(stalk.clone());
        }
        let mut basis: BTreeMap<i64, QMat> = BTreeMap::new();
        let mut dims: BTreeMap<i64, usize> = BTreeMap::new();
        for &d in &stalk.degrees() {
            let rows: Vec<QMat> = facets.iter().map(|&t| self.res_at(t, sigma, d)).collect();
            let refs: Vec<&QMat> = rows.iter().collect();
            let k = QMat::vstack(&refs).kernel();
            if k.cols > 0 {
                dims.insert(d, k.cols);
            }
            basis.insert(d, k);
        }
        let mut acts: BTreeMap<i64, Vec<QMat>> = BTreeMap::new();
        for &d in &stalk.degrees() {
            if d + 2 > self.cap || *dims.get(&d).unwrap_or(&0) == 0 {
                continue;
            }
            let k_d = &basis[&d];
            let k_d2 =
                basis.get(&(d + 2)).cloned().unwrap_or_else(|| QMat::zeros(stalk.dim(d + 2), 0));
            let mats: Vec<QMat> = (0..self.fan.n)
                .map(|form| {
                    k_d2.solve(&stalk.act(form, d).mul(k_d))
                        .expect("action preserves boundary vanishing")
                })
                .collect();
            acts.insert(d, mats);
        }
        Ok(GradedModule::from_parts(self.fan.n, self.cap, dims, acts))
    }

    /// Stalks kept on Star(τ), zero elsewhere; the extension by zero of the
    /// restriction to the star.
    pub fn star_restriction(&self, tau: usize) -> Result<Sheaf<'a>> {
        self.fan.cone(tau)?;
        let stalks: Vec<GradedModule> = (0..self.fan.cones.len())
            .map(|i| {
                if self.fan.le(tau, i) {
                    self.stalks[i].clone()
                } else {
                    GradedModule::zero(self.fan.n, self.cap)
                }
            })
            .collect();
        let res: BTreeMap<(usize, usize), GradedMap> = self
            .res
            .iter()
            .filter(|&(&(t, s), _)| self.fan.le(tau, t) && self.fan.le(tau, s))
            .map(|(&k, v)| (k, v.clone()))
            .collect();
        Ok(Sheaf { fan: self.fan, cap: self.cap, stalks, res })
    }

    /// Degree shift F(t): F(t)^(k) = F^(k+t) stalkwise; the cap drops by t.
    pub fn shift(&self, t: i64) -> Sheaf<'a> {
        let stalks = self.stalks.iter().map(|m| m.shift(t)).collect();
        let res = self.res.iter().map(|(&k, map)| (k, map.shift(t))).collect();
        Sheaf { fan: self.fan, cap: self.cap - t, stalks, res }
    }

    /// Direct sum over the same fan.
    pub fn direct_sum(&self, other: &Sheaf<'a>) -> Sheaf<'a> {
        assert!(std::ptr::eq(self.fan, other.fan));
        assert_eq!(self.cap, other.cap);
        let stalks: Vec<GradedModule> = (0..self.fan.cones.len())
            .map(|i| GradedModule::direct_sum(&[&self.stalks[i], &other.stalks[i]]))
            .collect();
        let mut res = BTreeMap::new();
        for (t, s) in self.fan.cover_pairs() {
            let mut map = GradedMap::zero();
            let mut d = 0i64;
            let mut any = false;
            while d <= self.cap {
                let a = self.res_at(t, s, d);
                let b = other.res_at(t, s, d);
                let mut m = QMat::zeros(a.rows + b.rows, a.cols + b.cols);
                paste(&mut m, &a, 0, 0);
                paste(&mut m, &b, a.rows, a.cols);
                if !(m.rows == 0 || m.cols == 0) {
                    any = true;
                    map.insert(d, m);
                }
                d += 2;
            }
            if any {
                res.insert((t, s), map);
            }
        }
        Sheaf { fan: self.fan, cap: self.cap, stalks, res }
    }
}

/// Compatible stalk families over a cone set, with the basis expressing each
/// section inside the stalk direct sum (cones in ascending id order).
#[derive(Clone, Debug)]
pub struct Sections {
    pub ids: Vec<usize>,
    pub module: GradedModule,
    /// Per degree: kernel columns in block stalk coordinates.
    basis: BTreeMap<i64, QMat>,
}

impl Sections {
    /// Kernel basis at one degree (columns in block stalk coordinates).
    pub fn basis_at(&self, d: i64) -> Option<&QMat> {
        self.basis.get(&d)
    }

    /// Projection Γ^(d) → stalk_σ^(d).
    pub fn project(&self, stalk_dims: impl Fn(usize, i64) -> usize, cone: usize, d: i64) -> QMat {
        let offs = block_offsets(&self.ids, |i| stalk_dims(i, d));
        let k = pos(&self.ids, cone);
        let basis = match self.basis.get(&d) {
            Some(b) => b.clone(),
            None => QMat::zeros(*offs.last().unwrap(), 0),
        };
        let mut out = QMat::zeros(stalk_dims(cone, d), basis.cols);
        for i in 0..out.rows {
            for j in 0..out.cols {
                out.set(i, j, basis.at(offs[k] + i, j).clone());
            }
        }
        out
    }

    /// Restriction Γ(S)^(d) → Γ(S')^(d) for S' ⊆ S: drop the blocks outside S'
    /// and re-express in the S' section basis.
    pub fn restrict_to(
        &self,
        sub: &Sections,
        stalk_dims: impl Fn(usize, i64) -> usize,
        d: i64,
    ) -> QMat {
        let offs = block_offsets(&self.ids, |i| stalk_dims(i, d));
        let sub_offs = block_offsets(&sub.ids, |i| stalk_dims(i, d));
        let basis = match self.basis.get(&d) {
            Some(b) => b.clone(),
            None => QMat::zeros(*offs.last().unwrap(), 0),
        };
        let mut dropped = QMat::zeros(*sub_offs.last().unwrap(), basis.cols);
        for (k, &i) in sub.ids.iter().enumerate() {
            debug_assert!(self.ids.contains(&i));
            let src = offs[pos(&self.ids, i)];
            for r in 0..stalk_dims(i, d) {
                for c in 0..basis.cols {
                    dropped.set(sub_offs[k] + r, c, basis.at(src + r, c).clone());
                }
            }
        }
        let sub_basis = match sub.basis.get(&d) {
            Some(b) => b.clone(),
            None => QMat::zeros(*sub_offs.last().unwrap(), 0),
        };
        sub_basis.solve(&dropped).expect("restricted family stays compatible")
    }
}

fn pos(ids: &[usize], id: usize) -> usize {
    ids.iter().position(|&x| x == id).expect("cone inside section set")
}

fn block_offsets(ids: &[usize], dim: impl Fn(usize) -> usize) -> Vec<usize> {
    let mut offs = Vec::with_capacity(ids.len() + 1);
    let mut acc = 0;
    for &i in ids {
        offs.push(acc);
        acc += dim(i);
    }
    offs.push(acc);
    offs
}

fn block_total(ids: &[usize], dim: impl Fn(usize) -> usize) -> usize {
    ids.iter().map(|&i| dim(i)).sum()
}

fn paste(dst: &mut QMat, src: &QMat, row: usize, col: usize) {
    for i in 0..src.rows {
        for j in 0..src.cols {
            dst.set(row + i, col + j, src.at(i, j).clone());
        }
    }
}

fn block_diag(blocks: &[QMat]) -> QMat {
    let rows = blocks.iter().map(|b| b.rows).sum();
    let cols = blocks.iter().map(|b| b.cols).sum();
    let mut m = QMat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        paste(&mut m, b, r, c);
        r += b.rows;
        c += b.cols;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::fixtures::*;
    use crate::poly::Poly;

    #[test]
    fn structure_sheaf_stalk_dimensions() {
        let f = quadrant_fan();
        let a = Sheaf::structure(&f, 6);
        a.validate().unwrap();
        let origin = a.stalk(f.origin());
        assert_eq!(origin.hilbert(), Poly::from_dense(&[1]));
        let ray = f.cone_by_rays(&[0]).unwrap();
        assert_eq!(a.stalk(ray).hilbert(), Poly::from_dense(&[1, 0, 1, 0, 1, 0, 1]));
        let sigma = f.cone_by_rays(&[0, 1]).unwrap();
        assert_eq!(a.stalk(sigma).dim(4), 3);
    }

    #[test]
    fn sections_over_irreducible_open_match_stalk() {
        let f = cube_face_fan();
        let a = Sheaf::structure(&f, 6);
        for &sigma in f.max_cones() {
            let secs = a.sections(&f.closure(sigma).unwrap().ids);
            assert_eq!(secs.module.hilbert(), a.stalk(sigma).hilbert());
            for &d in &secs.module.degrees() {
                let p = secs.project(|i, dd| a.stalk(i).dim(dd), sigma, d);
                assert_eq!(p.rank(), secs.module.dim(d));
            }
        }
        assert!(a.sections(&[]).module.is_zero());
    }

    #[test]
    fn sections_over_quadrant_boundary() {
        let f = quadrant_fan();
        let a = Sheaf::structure(&f, 6);
        let sigma = f.cone_by_rays(&[0, 1]).unwrap();
        let secs = a.sections(&f.boundary(sigma).unwrap().ids);
        // Pairs of one-variable polynomials agreeing at the origin.
        assert_eq!(secs.module.hilbert(), Poly::from_dense(&[1, 0, 2, 0, 2, 0, 2]));
    }

    #[test]
    fn global_sections_of_quadrant_fan() {
        let f = quadrant_fan();
        let a = Sheaf::structure(&f, 4);
        let secs = a.sections(&f.all_ids().ids);
        // Conewise polynomials: 4 linear, 8 quadratic degrees of freedom.
        assert_eq!(secs.module.hilbert(), Poly::from_dense(&[1, 0, 4, 0, 8]));
    }

    #[test]
    fn structure_sheaf_flabby_on_simplicial_not_on_cube() {
        let f = quadrant_fan();
        let a = Sheaf::structure(&f, 6);
        assert_eq!(a.is_flabby().unwrap(), FlabbyOutcome { flabby: true, witness: None });

        let g = cube_face_fan();
        let b = Sheaf::structure(&g, 8);
        let out = b.is_flabby().unwrap();
        assert!(!out.flabby);
        let (sigma, d) = out.witness.unwrap();
        // Witness is a square cone: conewise linear on its boundary has dim 4,
        // linear functions on its span only 3.
        assert_eq!(g.dim_of(sigma), 3);
        assert_eq!(d, 2);
    }

    #[test]
    fn structure_sheaf_locally_free() {
        let f = cube_face_fan();
        let a = Sheaf::structure(&f, 6);
        let out = a.is_locally_free().unwrap();
        assert!(out.locally_free);
        for (_, g) in out.gens {
            assert_eq!(g, GradedDims::from_pairs([(0, 1)]));
        }
    }

    #[test]
    fn costalk_of_structure_sheaf() {
        let f = line_fan();
        let a = Sheaf::structure(&f, 6);
        let ray = f.cone_by_rays(&[0]).unwrap();
        let k = a.costalk(ray).unwrap();
        // Polynomials vanishing at the origin.
        assert_eq!(k.hilbert(), Poly::from_coeffs([(2, 1), (4, 1), (6, 1)]));
        assert_eq!(k.minimal_generators().0, GradedDims::from_pairs([(2, 1)]));
        let at_origin = a.costalk(f.origin()).unwrap();
        assert_eq!(at_origin.hilbert(), a.stalk(f.origin()).hilbert());
    }

    #[test]
    fn star_restriction_zeroes_off_star() {
        let f = quadrant_fan();
        let a = Sheaf::structure(&f, 4);
        let ray = f.cone_by_rays(&[0]).unwrap();
        let s = a.star_restriction(ray).unwrap();
        s.validate().unwrap();
        let star = f.star(ray).unwrap();
        for id in 0..f.cones.len() {
            if star.ids.contains(&id) {
                assert_eq!(s.stalk(id).hilbert(), a.stalk(id).hilbert());
            } else {
                assert!(s.stalk(id).is_zero());
            }
        }
        assert_eq!(s.support(), star.ids);
        // Restricting at the origin is the identity.
        let t = a.star_restriction(f.origin()).unwrap();
        assert_eq!(t.support(), (0..f.cones.len()).collect::<Vec<_>>());
    }

    #[test]
    fn skyscraper_is_locally_free_not_flabby() {
        let f = line_fan();
        let s = Sheaf::skyscraper_origin(&f, 4);
        s.validate().unwrap();
        assert!(s.is_locally_free().unwrap().locally_free);
        let out = s.is_flabby().unwrap();
        assert!(!out.flabby);
    }

    #[test]
    fn sections_add_over_direct_sums() {
        let f = threeray_fan();
        let a = Sheaf::structure(&f, 4);
        let two = a.direct_sum(&a);
        two.validate().unwrap();
        let s1 = a.sections(&f.all_ids().ids);
        let s2 = two.sections(&f.all_ids().ids);
        assert_eq!(s2.module.hilbert(), s1.module.hilbert().scale(2));
    }

    #[test]
    fn flabby_restrictions_are_surjective() {
        // Global sections of a flabby sheaf surject onto boundary sections.
        let f = threeray_fan();
        let a = Sheaf::structure(&f, 6);
        let all = a.sections(&f.all_ids().ids);
        let sigma = f.max_cones()[0];
        let sub = a.sections(&f.boundary(sigma).unwrap().ids);
        for &d in &sub.module.degrees() {
            let r = all.restrict_to(&sub, |i, dd| a.stalk(i).dim(dd), d);
            assert_eq!(r.rank(), sub.module.dim(d));
        }
    }
}
