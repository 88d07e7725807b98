//! Rational polyhedral fans as finite posets. A fan is stored as its full face
//! lattice: every cone carries its sorted ray-id set, an ordered span basis (the
//! orientation), ambient facet normals and span equations, so membership tests and
//! incidence signs are pure rational arithmetic. Construction validates the fan
//! axioms: cones are pointed, listed rays are extreme, and any two cones intersect
//! along a common face.

pub mod io;

use crate::linalg::{
    dot, greedy_extend, is_zero_vec, primitive, sign, vec_add, vec_scale, QMat, Q,
};
use crate::{Error, Result};
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug)]
pub struct Cone {
    pub id: usize,
    /// Sorted global ray ids; empty for the origin.
    pub rays: Vec<usize>,
    pub dim: usize,
    /// Ordered basis of Span(σ): greedy independent subset of the cone's primitive
    /// ray vectors sorted lexicographically. Fixes the orientation.
    pub span_basis: Vec<Vec<Q>>,
    /// Ambient facet normals, primitive: a·x ≥ 0 on σ, a·x = 0 on the facet.
    pub facet_normals: Vec<Vec<Q>>,
    /// Echelonized basis of Span(σ)^⊥: e·x = 0 on σ.
    pub span_equations: Vec<Vec<Q>>,
}

#[derive(Clone, Debug)]
pub struct Fan {
    pub n: usize,
    /// Primitive ray vectors in document order.
    pub rays: Vec<Vec<Q>>,
    /// All cones, sorted by (dim, ray-id list); index = cone id; id 0 is the origin.
    pub cones: Vec<Cone>,
    le: Vec<Vec<bool>>,
    max_ids: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubposetKind {
    Open,
    Closed,
    Arbitrary,
}

/// A set of cone ids with its topological kind: open sets are face-closed
/// downward (subfans), closed sets are star-closed upward.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subposet {
    pub ids: Vec<usize>,
    pub kind: SubposetKind,
}

/// Conewise linear function given by one value per fan ray.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plf {
    pub values: Vec<Q>,
}

impl Plf {
    pub fn from_linear(fan: &Fan, alpha: &[Q]) -> Plf {
        Plf { values: fan.rays.iter().map(|r| dot(alpha, r)).collect() }
    }

    /// The linear form agreeing with the values on this cone's rays (free
    /// coordinates zero when the cone is not full-dimensional). Errors when the
    /// values are not linear on the cone.
    pub fn linear_form_on(&self, fan: &Fan, cone: usize) -> Result<Vec<Q>> {
        let c = fan.cone(cone)?;
        let a = QMat::from_rows(c.rays.iter().map(|&r| fan.rays[r].clone()).collect());
        let b = QMat::from_cols(vec![c.rays.iter().map(|&r| self.values[r].clone()).collect()]);
        match a.solve(&b) {
            Some(x) => Ok(x.col(0)),
            None => Err(Error::Parse(format!(
                "ray values are not conewise linear on cone {}",
                fan.rayset_label(cone)
            ))),
        }
    }
}

struct ConeGeom {
    dim: usize,
    span_basis: Vec<Vec<Q>>,
    facet_normals: Vec<Vec<Q>>,
    span_equations: Vec<Vec<Q>>,
    /// All face ray-id sets, including the full set and the empty set.
    faces: Vec<Vec<usize>>,
}

/// Facet enumeration and face lattice of a single pointed cone, in coordinates of
/// its own span. `check_extreme` demands every listed ray be a one-dimensional face.
fn cone_geometry(
    ray_ids: &[usize],
    rays: &[Vec<Q>],
    n: usize,
    check_extreme: bool,
) -> Result<ConeGeom> {
    let gens: Vec<Vec<Q>> = ray_ids.iter().map(|&r| rays[r].clone()).collect();
    let mut sorted_gens = gens.clone();
    sorted_gens.sort();
    let picked = greedy_extend(&[], &sorted_gens);
    let span_basis: Vec<Vec<Q>> = picked.iter().map(|&i| sorted_gens[i].clone()).collect();
    let d = span_basis.len();

    let span_mat = QMat::from_rows(span_basis.clone());
    let span_equations: Vec<Vec<Q>> = {
        let k = if d == 0 { QMat::identity(n) } else { span_mat.kernel() };
        (0..k.cols).map(|j| k.col(j)).collect()
    };

    if d == 0 {
        return Ok(ConeGeom {
            dim: 0,
            span_basis,
            facet_normals: vec![],
            span_equations,
            faces: vec![vec![]],
        });
    }

    // Coordinates of each generator in the span basis.
    let b_cols = QMat::from_cols(span_basis.clone());
    let coords: Vec<Vec<Q>> = gens
        .iter()
        .map(|g| {
            let x = b_cols.solve(&QMat::from_cols(vec![g.clone()])).expect("generator in span");
            x.col(0)
        })
        .collect();

    // Supporting normals from (d-1)-subsets of generator coordinates; keep the
    // ones whose active set spans a hyperplane (true facets).
    let m = gens.len();
    let mut normals_span: BTreeSet<Vec<Q>> = BTreeSet::new();
    let mut stack: Vec<Vec<usize>> = vec![vec![]];
    while let Some(cur) = stack.pop() {
        if cur.len() == d - 1 {
            let mat = QMat::from_rows(cur.iter().map(|&i| coords[i].clone()).collect());
            let ker = if cur.is_empty() { QMat::identity(d) } else { mat.kernel() };
            if ker.cols != 1 {
                continue;
            }
            let a = primitive(&ker.col(0));
            let signs: Vec<i32> = coords.iter().map(|c| sign(&dot(&a, c))).collect();
            let cand = if signs.iter().all(|&s| s >= 0) {
                Some(a)
            } else if signs.iter().all(|&s| s <= 0) {
                Some(primitive(&vec_scale(&a, &crate::linalg::q(-1))))
            } else {
                None
            };
            if let Some(a) = cand {
                let active: Vec<Vec<Q>> =
                    coords.iter().filter(|c| dot(&a, c).is_zero()).cloned().collect();
                if QMat::from_rows(active).rank() == d - 1 {
                    normals_span.insert(a);
                }
            }
            continue;
        }
        let start = cur.last().map(|&x| x + 1).unwrap_or(0);
        for i in start..m {
            let mut next = cur.clone();
            next.push(i);
            stack.push(next);
        }
    }
    let normals_span: Vec<Vec<Q>> = normals_span.into_iter().collect();

    if QMat::from_rows(normals_span.clone()).rank() != d {
        return Err(Error::NotPointed(format!("cone on rays {:?} contains a line", ray_ids)));
    }

    // Face lattice: faces are intersections of facet active sets.
    let active_sets: Vec<Vec<usize>> = normals_span
        .iter()
        .map(|a| (0..m).filter(|&i| dot(a, &coords[i]).is_zero()).map(|i| ray_ids[i]).collect())
        .collect();
    let full: Vec<usize> = ray_ids.to_vec();
    let mut faces: BTreeSet<Vec<usize>> = BTreeSet::new();
    faces.insert(full.clone());
    let mut frontier = vec![full];
    while let Some(f) = frontier.pop() {
        for act in &active_sets {
            let inter: Vec<usize> = f.iter().filter(|r| act.contains(r)).copied().collect();
            if faces.insert(inter.clone()) {
                frontier.push(inter);
            }
        }
    }

    if check_extreme {
        for &r in ray_ids {
            if !faces.contains(&vec![r]) {
                return Err(Error::BadRay(format!(
                    "listed ray {r} is not an extreme ray of cone on rays {ray_ids:?}"
                )));
            }
        }
    }

    // Ambient lift of span-coordinate normals: a = B (BᵀB)^{-1} ā.
    let bt_b_inv = b_cols.transpose().mul(&b_cols).inverse().expect("basis gram invertible");
    let lift = b_cols.mul(&bt_b_inv);
    let facet_normals: Vec<Vec<Q>> =
        normals_span.iter().map(|a| primitive(&lift.mul_vec(a))).collect();

    Ok(ConeGeom {
        dim: d,
        span_basis,
        facet_normals,
        span_equations,
        faces: faces.into_iter().collect(),
    })
}

/// Generators of the intersection of cone(gens) with {eqs = 0, ineqs ≥ 0} by
/// successive double-description cuts. Output may repeat directions; callers only
/// evaluate linear forms on it.
fn dd_cut(gens: &[Vec<Q>], eqs: &[Vec<Q>], ineqs: &[Vec<Q>]) -> Vec<Vec<Q>> {
    fn cut(gens: Vec<Vec<Q>>, a: &[Q], equality: bool) -> Vec<Vec<Q>> {
        let mut pos = vec![];
        let mut zero = vec![];
        let mut neg = vec![];
        for g in gens {
            match sign(&dot(a, &g)) {
                1 => pos.push(g),
                0 => zero.push(g),
                _ => neg.push(g),
            }
        }
        let mut out = zero;
        for p in &pos {
            for ng in &neg {
                let c = vec_add(&vec_scale(ng, &dot(a, p)), &vec_scale(p, &-dot(a, ng)));
                if !is_zero_vec(&c) {
                    out.push(primitive(&c));
                }
            }
        }
        if !equality {
            out.extend(pos);
        }
        out.sort();
        out.dedup();
        out
    }
    let mut g: Vec<Vec<Q>> = gens.iter().map(|v| primitive(v)).collect();
    g.sort();
    g.dedup();
    for e in eqs {
        g = cut(g, e, true);
    }
    for a in ineqs {
        g = cut(g, a, false);
    }
    g
}

impl Fan {
    /// Build a fan from primitive-normalized rays and maximal cones, computing the
    /// full face lattice and validating the fan axioms.
    pub fn from_max_cones(
        n: usize,
        raw_rays: Vec<Vec<Q>>,
        max_cones: Vec<Vec<usize>>,
    ) -> Result<Fan> {
        let mut rays = Vec::with_capacity(raw_rays.len());
        for (i, r) in raw_rays.iter().enumerate() {
            if r.len() != n {
                return Err(Error::BadRay(format!("ray {i} has length {}, expected {n}", r.len())));
            }
            if is_zero_vec(r) {
                return Err(Error::BadRay(format!("ray {i} is the zero vector")));
            }
            rays.push(primitive(r));
        }
        for i in 0..rays.len() {
            for j in i + 1..rays.len() {
                if rays[i] == rays[j] {
                    return Err(Error::BadRay(format!("rays {i} and {j} have the same direction")));
                }
            }
        }

        let mut listed: Vec<Vec<usize>> = Vec::new();
        let mut used = vec![false; rays.len()];
        for (ci, c) in max_cones.iter().enumerate() {
            let mut ids = c.clone();
            ids.sort_unstable();
            ids.dedup();
            if ids.len() != c.len() {
                return Err(Error::BadRay(format!("cone {ci} repeats a ray index")));
            }
            for &r in &ids {
                if r >= rays.len() {
                    return Err(Error::BadRay(format!(
                        "cone {ci} references ray {r} out of range"
                    )));
                }
                used[r] = true;
            }
            listed.push(ids);
        }
        if let Some(r) = used.iter().position(|u| !u) {
            return Err(Error::BadRay(format!("ray {r} is not used by any cone")));
        }
        listed.sort();
        listed.dedup();

        // Geometry per distinct ray set, extremeness enforced on listed cones.
        let mut geoms: BTreeMap<Vec<usize>, ConeGeom> = BTreeMap::new();
        for c in &listed {
            if !geoms.contains_key(c) {
                let g = cone_geometry(c, &rays, n, true)?;
                geoms.insert(c.clone(), g);
            }
        }
        let mut all_faces: BTreeSet<Vec<usize>> = BTreeSet::new();
        all_faces.insert(vec![]);
        for c in &listed {
            for f in &geoms[c].faces {
                all_faces.insert(f.clone());
            }
        }
        let face_list: Vec<Vec<usize>> = all_faces.into_iter().collect();
        for f in &face_list {
            if !geoms.contains_key(f) {
                let g = cone_geometry(f, &rays, n, false)?;
                geoms.insert(f.clone(), g);
            }
        }

        // Pairwise intersection of listed maximal cones must be a common face.
        for i in 0..listed.len() {
            for j in i + 1..listed.len() {
                let (a, b) = (&listed[i], &listed[j]);
                let ga = &geoms[a];
                let gb = &geoms[b];
                let gens_a: Vec<Vec<Q>> = a.iter().map(|&r| rays[r].clone()).collect();
                let inter = dd_cut(&gens_a, &gb.span_equations, &gb.facet_normals);
                let min_face = |g: &ConeGeom, cone_rays: &[usize]| -> Vec<usize> {
                    let active: Vec<&Vec<Q>> = g
                        .facet_normals
                        .iter()
                        .filter(|nrm| inter.iter().all(|w| dot(nrm, w).is_zero()))
                        .collect();
                    cone_rays
                        .iter()
                        .filter(|&&r| active.iter().all(|nrm| dot(nrm, &rays[r]).is_zero()))
                        .copied()
                        .collect()
                };
                let fa = min_face(ga, a);
                let fb = min_face(gb, b);
                let ok = fa.iter().all(|r| b.contains(r)) && fb.iter().all(|r| a.contains(r));
                if !ok || fa != fb {
                    return Err(Error::NotAFan(format!(
                        "cones on rays {a:?} and {b:?} intersect off a common face"
                    )));
                }
            }
        }

        // Assemble sorted cone table; poset order is ray-set containment.
        let mut keyed: Vec<(usize, Vec<usize>)> =
            face_list.iter().map(|f| (geoms[f].dim, f.clone())).collect();
        keyed.sort();
        let cones: Vec<Cone> = keyed
            .into_iter()
            .enumerate()
            .map(|(id, (dim, f))| {
                let g = &geoms[&f];
                Cone {
                    id,
                    rays: f,
                    dim,
                    span_basis: g.span_basis.clone(),
                    facet_normals: g.facet_normals.clone(),
                    span_equations: g.span_equations.clone(),
                }
            })
            .collect();
        let k = cones.len();
        let mut le = vec![vec![false; k]; k];
        for i in 0..k {
            for j in 0..k {
                le[i][j] = cones[i].rays.iter().all(|r| cones[j].rays.contains(r));
            }
        }
        let max_ids: Vec<usize> = (0..k).filter(|&i| (0..k).all(|j| j == i || !le[i][j])).collect();

        Ok(Fan { n, rays, cones, le, max_ids })
    }

    pub fn cone(&self, id: usize) -> Result<&Cone> {
        self.cones.get(id).ok_or(Error::UnknownCone(id))
    }

    pub fn dim_of(&self, id: usize) -> usize {
        self.cones[id].dim
    }

    pub fn origin(&self) -> usize {
        debug_assert_eq!(self.cones[0].dim, 0);
        0
    }

    pub fn max_cones(&self) -> &[usize] {
        &self.max_ids
    }

    pub fn max_dim(&self) -> usize {
        self.max_ids.iter().map(|&i| self.cones[i].dim).max().unwrap_or(0)
    }

    pub fn le(&self, a: usize, b: usize) -> bool {
        self.le[a][b]
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.le[a][b]
    }

    /// τ is a facet of σ.
    pub fn covers(&self, tau: usize, sigma: usize) -> bool {
        self.lt(tau, sigma) && self.cones[sigma].dim == self.cones[tau].dim + 1
    }

    /// All covering pairs (τ, σ), ordered.
    pub fn cover_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = vec![];
        for s in 0..self.cones.len() {
            for t in 0..self.cones.len() {
                if self.covers(t, s) {
                    out.push((t, s));
                }
            }
        }
        out.sort();
        out
    }

    pub fn cone_by_rays(&self, rays: &[usize]) -> Option<usize> {
        let mut key = rays.to_vec();
        key.sort_unstable();
        self.cones.iter().position(|c| c.rays == key)
    }

    pub fn rayset_label(&self, id: usize) -> String {
        let c = &self.cones[id];
        if c.rays.is_empty() {
            "origin".into()
        } else {
            format!("{:?}", c.rays)
        }
    }

    /// Sum of the cone's primitive ray vectors; interior for every nonzero cone.
    pub fn interior_point(&self, id: usize) -> Vec<Q> {
        let mut x = vec![Q::zero(); self.n];
        for &r in &self.cones[id].rays {
            x = vec_add(&x, &self.rays[r]);
        }
        x
    }

    pub fn cone_contains(&self, id: usize, x: &[Q]) -> bool {
        let c = &self.cones[id];
        c.span_equations.iter().all(|e| dot(e, x).is_zero())
            && c.facet_normals.iter().all(|a| sign(&dot(a, x)) >= 0)
    }

    pub fn is_simplicial(&self) -> bool {
        self.cones.iter().all(|c| c.rays.len() == c.dim)
    }

    /// Complete: maximal cones full-dimensional, every wall shared by exactly two,
    /// dual graph connected. For a valid fan this forces support = ℚ^n.
    pub fn is_complete(&self) -> bool {
        if self.max_ids.iter().any(|&i| self.cones[i].dim != self.n) {
            return false;
        }
        let walls: Vec<usize> = (0..self.cones.len())
            .filter(|&i| self.n >= 1 && self.cones[i].dim == self.n - 1)
            .collect();
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &w in &walls {
            let parents: Vec<usize> =
                self.max_ids.iter().copied().filter(|&s| self.lt(w, s)).collect();
            if parents.len() != 2 {
                return false;
            }
            adj.entry(parents[0]).or_default().push(parents[1]);
            adj.entry(parents[1]).or_default().push(parents[0]);
        }
        // Dual-graph connectivity.
        if self.max_ids.is_empty() {
            return false;
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.max_ids[0]];
        while let Some(s) = stack.pop() {
            if seen.insert(s) {
                if let Some(next) = adj.get(&s) {
                    stack.extend(next.iter().copied());
                }
            }
        }
        seen.len() == self.max_ids.len()
    }

    /// Proper faces of σ; empty for the origin.
    pub fn boundary(&self, sigma: usize) -> Result<Subposet> {
        self.cone(sigma)?;
        let ids = (0..self.cones.len()).filter(|&t| self.lt(t, sigma)).collect();
        Ok(Subposet { ids, kind: SubposetKind::Open })
    }

    /// Cones having τ as a face, including τ.
    pub fn star(&self, tau: usize) -> Result<Subposet> {
        self.cone(tau)?;
        let ids = (0..self.cones.len()).filter(|&s| self.le(tau, s)).collect();
        Ok(Subposet { ids, kind: SubposetKind::Closed })
    }

    /// Downward closure of a seed set: the subfan it generates.
    pub fn generated(&self, seeds: &[usize]) -> Result<Subposet> {
        for &s in seeds {
            self.cone(s)?;
        }
        let ids = (0..self.cones.len()).filter(|&t| seeds.iter().any(|&s| self.le(t, s))).collect();
        Ok(Subposet { ids, kind: SubposetKind::Open })
    }

    /// σ together with all its faces.
    pub fn closure(&self, sigma: usize) -> Result<Subposet> {
        self.generated(&[sigma])
    }

    /// Cones of dimension at most k.
    pub fn skeleton(&self, k: usize) -> Subposet {
        let ids = (0..self.cones.len()).filter(|&i| self.cones[i].dim <= k).collect();
        Subposet { ids, kind: SubposetKind::Open }
    }

    pub fn all_ids(&self) -> Subposet {
        Subposet { ids: (0..self.cones.len()).collect(), kind: SubposetKind::Open }
    }

    /// Restrictions of the ambient coordinate forms to Span(σ): row i is the
    /// coefficient vector of x_i in the cone's span coordinates.
    pub fn span_restriction_rows(&self, id: usize) -> Vec<Vec<Q>> {
        let c = &self.cones[id];
        (0..self.n).map(|i| (0..c.dim).map(|j| c.span_basis[j][i].clone()).collect()).collect()
    }

    /// Expressions of the cone's intrinsic coordinate forms as combinations of
    /// ambient forms, via the pseudo-inverse (BᵀB)^{-1}Bᵀ of the span basis.
    pub fn span_eta(&self, id: usize) -> Vec<Vec<Q>> {
        let c = &self.cones[id];
        if c.dim == 0 {
            return vec![];
        }
        let b = QMat::from_cols(c.span_basis.clone());
        let p = b.transpose().mul(&b).inverse().expect("gram invertible").mul(&b.transpose());
        (0..c.dim).map(|j| p.row(j)).collect()
    }

    /// Orientation sign of a covering pair: the determinant expressing
    /// [basis(τ), w] in basis(σ), where w sums the primitive generators of the
    /// rays of σ outside τ.
    pub fn incidence_sign(&self, tau: usize, sigma: usize) -> Result<i32> {
        self.cone(tau)?;
        self.cone(sigma)?;
        if !self.covers(tau, sigma) {
            return Err(Error::NotCoveringPair(tau, sigma));
        }
        let (ct, cs) = (&self.cones[tau], &self.cones[sigma]);
        let mut w = vec![Q::zero(); self.n];
        for &r in &cs.rays {
            if !ct.rays.contains(&r) {
                w = vec_add(&w, &self.rays[r]);
            }
        }
        let mut cols = ct.span_basis.clone();
        cols.push(w);
        let b_sigma = QMat::from_cols(cs.span_basis.clone());
        let x = b_sigma.solve(&QMat::from_cols(cols)).expect("facet basis lies in span");
        let s = sign(&x.det());
        debug_assert!(s != 0);
        Ok(s)
    }
}

/// Assignment of each fine cone to the smallest coarse cone containing it.
#[derive(Clone, Debug)]
pub struct SubdivisionMap {
    pub to_coarse: Vec<usize>,
}

impl SubdivisionMap {
    pub fn preimage(&self, coarse_id: usize) -> Vec<usize> {
        (0..self.to_coarse.len()).filter(|&i| self.to_coarse[i] == coarse_id).collect()
    }
}

pub fn subdivision_map(fine: &Fan, coarse: &Fan) -> Result<SubdivisionMap> {
    if fine.n != coarse.n {
        return Err(Error::NotASubdivision(format!(
            "ambient dimensions differ: {} vs {}",
            fine.n, coarse.n
        )));
    }
    let mut to_coarse = Vec::with_capacity(fine.cones.len());
    for psi in &fine.cones {
        let gens: Vec<Vec<Q>> = psi.rays.iter().map(|&r| fine.rays[r].clone()).collect();
        let mut best: Option<usize> = None;
        for c in &coarse.cones {
            if gens.iter().all(|g| coarse.cone_contains(c.id, g)) {
                match best {
                    None => best = Some(c.id),
                    Some(b) => {
                        let bd = coarse.cones[b].dim;
                        if c.dim < bd {
                            best = Some(c.id);
                        } else if c.dim == bd && c.id != b {
                            return Err(Error::NotASubdivision(format!(
                                "cone {} has two minimal containing cones",
                                fine.rayset_label(psi.id)
                            )));
                        }
                    }
                }
            }
        }
        match best {
            Some(b) => to_coarse.push(b),
            None => {
                return Err(Error::NotASubdivision(format!(
                    "cone {} of the fine fan lies in no coarse cone",
                    fine.rayset_label(psi.id)
                )))
            }
        }
    }

    // Every coarse cone must be tiled by its same-dimensional preimages: interior
    // walls shared by two tiles, boundary walls by one, tiles connected.
    for c in &coarse.cones {
        let k = c.dim;
        if k == 0 {
            continue;
        }
        let tiles: Vec<usize> = (0..fine.cones.len())
            .filter(|&i| fine.cones[i].dim == k && to_coarse[i] == c.id)
            .collect();
        if tiles.is_empty() {
            return Err(Error::NotASubdivision(format!(
                "coarse cone {} has no covering cones",
                coarse.rayset_label(c.id)
            )));
        }
        let mut wall_parents: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &t in &tiles {
            for w in 0..fine.cones.len() {
                if fine.covers(w, t) {
                    wall_parents.entry(w).or_default().push(t);
                }
            }
        }
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (&w, parents) in &wall_parents {
            let interior = to_coarse[w] == c.id;
            let want = if interior { 2 } else { 1 };
            if parents.len() != want {
                return Err(Error::NotASubdivision(format!(
                    "wall {} of coarse cone {} lies in {} covering cones, expected {want}",
                    fine.rayset_label(w),
                    coarse.rayset_label(c.id),
                    parents.len()
                )));
            }
            if interior {
                adj.entry(parents[0]).or_default().push(parents[1]);
                adj.entry(parents[1]).or_default().push(parents[0]);
            }
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![tiles[0]];
        while let Some(t) = stack.pop() {
            if seen.insert(t) {
                if let Some(next) = adj.get(&t) {
                    stack.extend(next.iter().copied());
                }
            }
        }
        if seen.len() != tiles.len() {
            return Err(Error::NotASubdivision(format!(
                "covering of coarse cone {} is disconnected",
                coarse.rayset_label(c.id)
            )));
        }
    }
    Ok(SubdivisionMap { to_coarse })
}

/// The boundary of σ projected along an interior direction: a complete fan in
/// dimension d(σ)-1 together with the conewise linear function whose graph is ∂σ.
#[derive(Clone, Debug)]
pub struct BoundaryProjection {
    pub fan: Fan,
    pub l: Plf,
    /// Ambient splitting direction (primitive sum of σ's ray generators).
    pub direction: Vec<Q>,
    /// Proper faces of σ in the source fan → cone ids of the projected fan.
    pub cone_map: BTreeMap<usize, usize>,
}

pub fn boundary_projection(fan: &Fan, sigma: usize) -> Result<BoundaryProjection> {
    let c = fan.cone(sigma)?.clone();
    let d = c.dim;
    if d < 2 {
        return Err(Error::DimensionTooSmall(format!(
            "boundary projection needs dim ≥ 2, cone {} has dim {d}",
            fan.rayset_label(sigma)
        )));
    }
    let v = primitive(&fan.interior_point(sigma));

    // Basis [v, u_1..u_{d-1}] of Span(σ): u's are greedy picks from the orthogonal
    // projections of the standard basis vectors into the span.
    let b_cols = QMat::from_cols(c.span_basis.clone());
    let gram_inv = b_cols.transpose().mul(&b_cols).inverse().expect("gram invertible");
    let proj = b_cols.mul(&gram_inv).mul(&b_cols.transpose());
    let candidates: Vec<Vec<Q>> = (0..fan.n)
        .map(|i| {
            let mut e = vec![Q::zero(); fan.n];
            e[i] = Q::one();
            proj.mul_vec(&e)
        })
        .filter(|p| !is_zero_vec(p))
        .map(|p| primitive(&p))
        .collect();
    let picked = greedy_extend(std::slice::from_ref(&v), &candidates);
    let mut basis = vec![v.clone()];
    for &i in &picked {
        basis.push(candidates[i].clone());
    }
    assert_eq!(basis.len(), d, "interior direction plus projections span the cone");
    let m = QMat::from_cols(basis);

    // Project each ray: coordinates after the first give the image, the first is
    // the height defining l.
    let mut new_rays: Vec<Vec<Q>> = Vec::new();
    let mut values: Vec<Q> = Vec::new();
    let mut ray_image: BTreeMap<usize, usize> = BTreeMap::new();
    for &r in &c.rays {
        let coords = m.solve(&QMat::from_cols(vec![fan.rays[r].clone()])).expect("ray in span");
        let h = coords.at(0, 0).clone();
        let p: Vec<Q> = (1..d).map(|i| coords.at(i, 0).clone()).collect();
        assert!(!is_zero_vec(&p), "extreme ray cannot be parallel to the interior direction");
        let w = primitive(&p);
        let k = p.iter().position(|x| !x.is_zero()).unwrap();
        let mu = &p[k] / &w[k];
        debug_assert!(sign(&mu) > 0);
        let val = h / mu;
        let idx = new_rays.len();
        new_rays.push(w);
        values.push(val);
        ray_image.insert(r, idx);
    }

    let facets: Vec<&Cone> = fan.cones.iter().filter(|f| fan.covers(f.id, sigma)).collect();
    let new_max: Vec<Vec<usize>> =
        facets.iter().map(|f| f.rays.iter().map(|r| ray_image[r]).collect()).collect();
    let out = Fan::from_max_cones(d - 1, new_rays, new_max)?;
    assert!(out.is_complete(), "projected boundary of a pointed cone is complete");

    let mut cone_map = BTreeMap::new();
    for t in 0..fan.cones.len() {
        if fan.lt(t, sigma) {
            let imgs: Vec<usize> = fan.cones[t].rays.iter().map(|r| ray_image[r]).collect();
            let id = out.cone_by_rays(&imgs).expect("face image is a cone of the projection");
            cone_map.insert(t, id);
        }
    }
    Ok(BoundaryProjection { fan: out, l: Plf { values }, direction: v, cone_map })
}

/// The fan [σ] of the cone over a polytope embedded at height one.
pub fn cone_over_vertices(dim: usize, vertices: &[Vec<Q>]) -> Result<Fan> {
    let mut verts: Vec<Vec<Q>> = Vec::new();
    for v in vertices {
        if v.len() != dim {
            return Err(Error::DegeneratePolytope(format!(
                "vertex has length {}, expected {dim}",
                v.len()
            )));
        }
        if !verts.contains(v) {
            verts.push(v.clone());
        }
    }
    if verts.len() < dim + 1 {
        return Err(Error::DegeneratePolytope(format!(
            "{} distinct vertices cannot span dimension {dim}",
            verts.len()
        )));
    }
    let diffs: Vec<Vec<Q>> =
        verts[1..].iter().map(|v| v.iter().zip(&verts[0]).map(|(a, b)| a - b).collect()).collect();
    if QMat::from_rows(diffs).rank() != dim {
        return Err(Error::DegeneratePolytope(format!(
            "vertices span affine dimension below {dim}"
        )));
    }
    let rays: Vec<Vec<Q>> = verts
        .iter()
        .map(|v| {
            let mut r = v.clone();
            r.push(Q::one());
            r
        })
        .collect();
    let all: Vec<usize> = (0..rays.len()).collect();
    Fan::from_max_cones(dim + 1, rays, vec![all])
}
