//! The generalized g/h recursion on polytope face lattices, a
//! supporting-hyperplane face enumerator, and the comparison harness that
//! checks the sheaf-theoretic ih/ip of a cone against the combinatorial
//! h/g of its cross-section polytope.

use crate::fan::cone_over_vertices;
use crate::ihlib::{ih_local, ip};
use crate::linalg::{QMat, Q};
use crate::poly::Poly;
use crate::{Error, Result};
use num_traits::{One, Zero};
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};

/// Face poset of a polytope, graded by dimension, with the empty face at
/// dimension -1 and the polytope itself on top. Validated Eulerian: graded,
/// bounded, and every nontrivial interval has as many elements of even rank
/// as of odd rank.
pub struct FaceLattice {
    pub dims: Vec<i64>,
    le: Vec<Vec<bool>>,
}

impl FaceLattice {
    /// Build from per-face dimensions and any generating set of order
    /// relations (reflexive-transitive closure is taken here).
    pub fn from_faces(dims: Vec<i64>, relations: &[(usize, usize)]) -> Result<FaceLattice> {
        let n = dims.len();
        let mut le = vec![vec![false; n]; n];
        for (i, row) in le.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in relations {
            if a >= n || b >= n {
                return Err(Error::Parse(format!("order pair ({a},{b}) out of range")));
            }
            le[a][b] = true;
        }
        for k in 0..n {
            let via = le[k].clone();
            for row in le.iter_mut() {
                if row[k] {
                    for (j, &r) in via.iter().enumerate() {
                        if r {
                            row[j] = true;
                        }
                    }
                }
            }
        }
        let l = FaceLattice { dims, le };
        l.validate()?;
        Ok(l)
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn le(&self, a: usize, b: usize) -> bool {
        self.le[a][b]
    }

    pub fn bottom(&self) -> usize {
        self.dims.iter().position(|&d| d == -1).unwrap()
    }

    pub fn top(&self) -> usize {
        let max = *self.dims.iter().max().unwrap();
        self.dims.iter().position(|&d| d == max).unwrap()
    }

    /// Dimension of the top face.
    pub fn dim(&self) -> i64 {
        self.dims[self.top()]
    }

    pub fn count_by_dim(&self) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        for &d in &self.dims {
            *out.entry(d).or_insert(0) += 1;
        }
        out
    }

    fn validate(&self) -> Result<()> {
        let n = self.len();
        if n == 0 {
            return Err(Error::Parse("lattice has no faces".into()));
        }
        for a in 0..n {
            for b in 0..n {
                if self.le[a][b] && a != b && self.dims[a] >= self.dims[b] {
                    return Err(Error::Parse(format!(
                        "order violates grading: face {a} (dim {}) below face {b} (dim {})",
                        self.dims[a], self.dims[b]
                    )));
                }
            }
        }
        if self.dims.iter().filter(|&&d| d == -1).count() != 1 {
            return Err(Error::Parse("exactly one empty face of dimension -1 required".into()));
        }
        let max = *self.dims.iter().max().unwrap();
        if self.dims.iter().filter(|&&d| d == max).count() != 1 {
            return Err(Error::Parse("exactly one face of maximal dimension required".into()));
        }
        let (bot, top) = (self.bottom(), self.top());
        for i in 0..n {
            if !self.le[bot][i] || !self.le[i][top] {
                return Err(Error::Parse(format!(
                    "face {i} is not between the empty face and the top face"
                )));
            }
        }
        // Eulerian: covers step by one rank, and every interval of length >= 1
        // has equal counts of even-rank and odd-rank elements.
        for x in 0..n {
            for y in 0..n {
                if !self.le[x][y] || x == y {
                    continue;
                }
                let (mut even, mut odd) = (0usize, 0usize);
                for z in 0..n {
                    if self.le[x][z] && self.le[z][y] {
                        if (self.dims[z] - self.dims[x]) % 2 == 0 {
                            even += 1;
                        } else {
                            odd += 1;
                        }
                    }
                }
                if even + odd == 2 && self.dims[y] - self.dims[x] != 1 {
                    return Err(Error::Parse(format!(
                        "not graded: cover {x} < {y} jumps {} ranks",
                        self.dims[y] - self.dims[x]
                    )));
                }
                if even != odd {
                    return Err(Error::Parse(format!(
                        "interval [{x}, {y}] is not Eulerian ({even} even, {odd} odd)"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Parse a lattice-document: {"faces": [{"id": …, "dim": …}, …],
/// "order": [[a, b], …]} with a ≤ b meaning "a is a face of b".
pub fn parse_lattice(text: &str) -> Result<FaceLattice> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
    let faces = root
        .get("faces")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing \"faces\" array".into()))?;
    let mut index: BTreeMap<u64, usize> = BTreeMap::new();
    let mut dims = Vec::new();
    for f in faces {
        let id = f
            .get("id")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("each face needs a nonnegative integer \"id\"".into()))?;
        let dim = f
            .get("dim")
            .and_then(Value::as_i64)
            .ok_or_else(|| Error::Parse("each face needs an integer \"dim\"".into()))?;
        if index.insert(id, dims.len()).is_some() {
            return Err(Error::Parse(format!("duplicate face id {id}")));
        }
        dims.push(dim);
    }
    let order = root
        .get("order")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing \"order\" array".into()))?;
    let mut relations = Vec::new();
    for pair in order {
        let arr = pair
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Error::Parse("each order entry must be a pair [a, b]".into()))?;
        let mut ends = [0usize; 2];
        for (k, v) in arr.iter().enumerate() {
            let id =
                v.as_u64().ok_or_else(|| Error::Parse(format!("bad face id {v} in order pair")))?;
            ends[k] = *index
                .get(&id)
                .ok_or_else(|| Error::Parse(format!("order pair uses unknown face id {id}")))?;
        }
        relations.push((ends[0], ends[1]));
    }
    FaceLattice::from_faces(dims, &relations)
}

fn affine_rank(pts: &[Vec<Q>]) -> usize {
    match pts.split_first() {
        None | Some((_, [])) => 0,
        Some((base, rest)) => {
            let diffs: Vec<Vec<Q>> =
                rest.iter().map(|v| v.iter().zip(base).map(|(a, b)| a - b).collect()).collect();
            QMat::from_rows(diffs).rank()
        }
    }
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// Face lattice of conv(vertices) by brute force: every affinely independent
/// dim-subset spans a candidate hyperplane; supporting ones cut out faces,
/// and intersecting those downward closes the lattice.
pub fn face_lattice(dim: usize, vertices: &[Vec<Q>]) -> Result<FaceLattice> {
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
    if affine_rank(&verts) != dim {
        return Err(Error::DegeneratePolytope(format!(
            "vertices span affine dimension below {dim}"
        )));
    }
    if dim == 0 {
        return FaceLattice::from_faces(vec![-1, 0], &[(0, 1)]);
    }

    let m = verts.len();
    let mut face_sets: BTreeSet<Vec<usize>> = BTreeSet::new();
    face_sets.insert(Vec::new());
    face_sets.insert((0..m).collect());
    for subset in combinations(m, dim) {
        let rows: Vec<Vec<Q>> = subset
            .iter()
            .map(|&i| {
                let mut r = verts[i].clone();
                r.push(Q::one());
                r
            })
            .collect();
        let ker = QMat::from_rows(rows).kernel();
        if ker.cols != 1 {
            continue;
        }
        let normal = ker.col(0);
        let values: Vec<Q> = verts
            .iter()
            .map(|v| v.iter().zip(&normal).map(|(a, b)| a * b).sum::<Q>() + normal[dim].clone())
            .collect();
        let positive = values.iter().any(|s| *s > Q::zero());
        let negative = values.iter().any(|s| *s < Q::zero());
        if positive && negative {
            continue;
        }
        face_sets.insert((0..m).filter(|&i| values[i].is_zero()).collect());
    }
    loop {
        let snapshot: Vec<Vec<usize>> = face_sets.iter().cloned().collect();
        let before = face_sets.len();
        for (i, a) in snapshot.iter().enumerate() {
            let aset: BTreeSet<usize> = a.iter().copied().collect();
            for b in &snapshot[i + 1..] {
                face_sets.insert(b.iter().filter(|x| aset.contains(x)).copied().collect());
            }
        }
        if face_sets.len() == before {
            break;
        }
    }

    let mut graded: Vec<(i64, Vec<usize>)> = face_sets
        .into_iter()
        .map(|s| {
            let pts: Vec<Vec<Q>> = s.iter().map(|&i| verts[i].clone()).collect();
            let d = if s.is_empty() { -1 } else { affine_rank(&pts) as i64 };
            (d, s)
        })
        .collect();
    graded.sort();
    let dims: Vec<i64> = graded.iter().map(|f| f.0).collect();
    let mut relations = Vec::new();
    for (a, fa) in graded.iter().enumerate() {
        for (b, fb) in graded.iter().enumerate() {
            if a != b && fa.1.iter().all(|x| fb.1.contains(x)) {
                relations.push((a, b));
            }
        }
    }
    FaceLattice::from_faces(dims, &relations)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GHPair {
    pub h: Poly,
    pub g: Poly,
}

/// g and h of every face, indexed by face id. The recursion: g = h = 1 on the
/// empty face; h(Q)(t) = Σ over proper faces P of (t-1)^(d(Q)-d(P)-1) g(P)(t);
/// g keeps the differences h_j - h_(j-1) up to degree d(Q)/2.
pub fn gh_all(l: &FaceLattice) -> Vec<GHPair> {
    let n = l.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| l.dims[i]);
    let t_minus_1 = Poly::from_coeffs([(1, 1), (0, -1)]);
    let mut out: Vec<Option<GHPair>> = vec![None; n];
    for &f in &order {
        let d = l.dims[f];
        if d == -1 {
            out[f] = Some(GHPair { h: Poly::one(), g: Poly::one() });
            continue;
        }
        let mut h = Poly::zero();
        for (p, prior) in out.iter().enumerate() {
            if p != f && l.le(p, f) {
                let e = (d - l.dims[p] - 1) as u32;
                h = h.add(&t_minus_1.pow(e).mul(&prior.as_ref().unwrap().g));
            }
        }
        let mut g = Poly::zero();
        for j in 0..=d / 2 {
            g.add_term(j, h.coeff(j) - h.coeff(j - 1));
        }
        out[f] = Some(GHPair { h, g });
    }
    out.into_iter().map(Option::unwrap).collect()
}

/// g and h of the top face.
pub fn gh_vectors(l: &FaceLattice) -> GHPair {
    gh_all(l)[l.top()].clone()
}

#[derive(Clone, Debug)]
pub struct StanleyReport {
    pub pass: bool,
    pub h: Poly,
    pub g: Poly,
    pub ih: Poly,
    pub ip: Poly,
}

impl StanleyReport {
    pub fn to_json(&self) -> Value {
        json!({
            "pass": self.pass,
            "h": self.h.to_json(),
            "g": self.g.to_json(),
            "ih": self.ih.to_json(),
            "ip": self.ip.to_json(),
        })
    }
}

/// Runs both pipelines on one polytope: the sheaf side computes ih and ip of
/// the cone over it, the combinatorial side computes h and g of its face
/// lattice, and the report compares ih = h(q²), ip = g(q²).
pub fn compare_ih_h(dim: usize, vertices: &[Vec<Q>]) -> Result<StanleyReport> {
    let lattice = face_lattice(dim, vertices)?;
    let gh = gh_vectors(&lattice);
    let fan = cone_over_vertices(dim, vertices)?;
    let sigma = fan.max_cones()[0];
    let ih = ih_local(&fan, sigma)?;
    let ip = ip(&fan, sigma, None)?;
    let pass = ih == gh.h.stretch(2) && ip == gh.g.stretch(2);
    Ok(StanleyReport { pass, h: gh.h, g: gh.g, ih, ip })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::fixtures::*;
    use crate::linalg::q;

    fn simplex3() -> Vec<Vec<Q>> {
        vec![qv(&[0, 0, 0]), qv(&[1, 0, 0]), qv(&[0, 1, 0]), qv(&[0, 0, 1])]
    }

    fn cube_verts() -> Vec<Vec<Q>> {
        (0..8)
            .map(|i: i64| {
                qv(&[
                    if i & 4 != 0 { 1 } else { -1 },
                    if i & 2 != 0 { 1 } else { -1 },
                    if i & 1 != 0 { 1 } else { -1 },
                ])
            })
            .collect()
    }

    fn octahedron_verts() -> Vec<Vec<Q>> {
        vec![
            qv(&[1, 0, 0]),
            qv(&[-1, 0, 0]),
            qv(&[0, 1, 0]),
            qv(&[0, -1, 0]),
            qv(&[0, 0, 1]),
            qv(&[0, 0, -1]),
        ]
    }

    fn counts(l: &FaceLattice) -> Vec<(i64, usize)> {
        l.count_by_dim().into_iter().collect()
    }

    #[test]
    fn face_counts_of_corpus_polytopes() {
        let sq = face_lattice(2, &mgon_vertices(4)).unwrap();
        assert_eq!(counts(&sq), vec![(-1, 1), (0, 4), (1, 4), (2, 1)]);
        assert_eq!(sq.len(), 10);

        let cube = face_lattice(3, &cube_verts()).unwrap();
        assert_eq!(counts(&cube), vec![(-1, 1), (0, 8), (1, 12), (2, 6), (3, 1)]);
        assert_eq!(cube.len(), 28);

        // Boolean lattice of rank 4: each face is a vertex subset, intervals
        // from the bottom have 2^(d+1) elements.
        let s = face_lattice(3, &simplex3()).unwrap();
        assert_eq!(counts(&s), vec![(-1, 1), (0, 4), (1, 6), (2, 4), (3, 1)]);
        let bot = s.bottom();
        for f in 0..s.len() {
            let below = (0..s.len()).filter(|&z| s.le(z, f)).count();
            assert_eq!(below as i64, 1 << (s.dims[f] + 1), "interval below face {f}");
            assert!(s.le(bot, f));
        }
    }

    #[test]
    fn gh_of_polygons_cube_simplex() {
        for m in 3..=8 {
            let l = face_lattice(2, &mgon_vertices(m)).unwrap();
            let gh = gh_vectors(&l);
            assert_eq!(gh.h, Poly::from_dense(&[1, m as i64 - 2, 1]), "h of {m}-gon");
            assert_eq!(gh.g, Poly::from_dense(&[1, m as i64 - 3]), "g of {m}-gon");
        }
        let gh = gh_vectors(&face_lattice(3, &cube_verts()).unwrap());
        assert_eq!(gh.h, Poly::from_dense(&[1, 5, 5, 1]));
        assert_eq!(gh.g, Poly::from_dense(&[1, 4]));
        let gh = gh_vectors(&face_lattice(3, &simplex3()).unwrap());
        assert_eq!(gh.h, Poly::from_dense(&[1, 1, 1, 1]));
        assert_eq!(gh.g, Poly::one());
    }

    #[test]
    fn h_is_palindromic_and_g_cut_at_half_on_every_face() {
        for l in [
            face_lattice(3, &cube_verts()).unwrap(),
            face_lattice(3, &octahedron_verts()).unwrap(),
            face_lattice(2, &mgon_vertices(7)).unwrap(),
        ] {
            for (f, gh) in gh_all(&l).iter().enumerate() {
                let d = l.dims[f].max(0);
                assert!(gh.h.is_palindromic(d), "h of face {f}");
                assert_eq!(gh.g.coeff(0), 1);
                assert!(gh.g.max_exp().unwrap_or(0) <= d / 2);
            }
        }
    }

    #[test]
    fn simplicial_h_matches_the_f_vector_transform() {
        // On a simplicial d-polytope, h(t) = sum over face dims i of
        // f_(i-1) (t-1)^(d-i), counting the empty face once.
        let check = |dim: usize, verts: &[Vec<Q>]| {
            let l = face_lattice(dim, verts).unwrap();
            let t_minus_1 = Poly::from_coeffs([(1, 1), (0, -1)]);
            let mut expected = Poly::zero();
            for (&d, &count) in l.count_by_dim().iter() {
                if d == dim as i64 {
                    continue;
                }
                expected =
                    expected.add(&t_minus_1.pow((dim as i64 - d - 1) as u32).scale(count as i64));
            }
            assert_eq!(gh_vectors(&l).h, expected);
        };
        check(3, &octahedron_verts());
        check(3, &simplex3());
        for m in 3..=8 {
            check(2, &mgon_vertices(m));
        }
    }

    #[test]
    fn both_pipelines_agree_on_corpus_polytopes() {
        let r = compare_ih_h(2, &mgon_vertices(4)).unwrap();
        assert!(r.pass);
        assert_eq!(r.ih, Poly::from_dense(&[1, 0, 2, 0, 1]));
        assert_eq!(r.ip, Poly::from_dense(&[1, 0, 1]));

        let r = compare_ih_h(2, &mgon_vertices(3)).unwrap();
        assert!(r.pass);
        assert_eq!(r.ih, Poly::from_dense(&[1, 0, 1, 0, 1]));
        assert_eq!(r.ip, Poly::one());

        let r = compare_ih_h(3, &cube_verts()).unwrap();
        assert!(r.pass);
        assert_eq!(r.ih, Poly::from_dense(&[1, 0, 5, 0, 5, 0, 1]));
        assert_eq!(r.ip, Poly::from_dense(&[1, 0, 4]));
    }

    #[test]
    fn lattice_documents() {
        // The square's lattice, supplied without coordinates.
        let doc = r#"{
            "faces": [{"id":0,"dim":-1},{"id":1,"dim":0},{"id":2,"dim":0},
                      {"id":3,"dim":0},{"id":4,"dim":0},{"id":5,"dim":1},
                      {"id":6,"dim":1},{"id":7,"dim":1},{"id":8,"dim":1},
                      {"id":9,"dim":2}],
            "order": [[0,1],[0,2],[0,3],[0,4],
                      [1,5],[2,5],[2,6],[3,6],[3,7],[4,7],[4,8],[1,8],
                      [5,9],[6,9],[7,9],[8,9]]
        }"#;
        let l = parse_lattice(doc).unwrap();
        let gh = gh_vectors(&l);
        assert_eq!(gh.h, Poly::from_dense(&[1, 2, 1]));
        assert_eq!(gh.g, Poly::from_dense(&[1, 1]));

        assert!(matches!(parse_lattice("nope"), Err(Error::Parse(_))));
        assert!(matches!(parse_lattice(r#"{"faces":[]}"#), Err(Error::Parse(_))));
        assert!(matches!(
            parse_lattice(r#"{"faces":[{"id":0,"dim":-1}],"order":[[0,3]]}"#),
            Err(Error::Parse(_))
        ));
        // A vertex on a single edge: the interval below the edge is not Eulerian.
        let bad = r#"{
            "faces": [{"id":0,"dim":-1},{"id":1,"dim":0},{"id":2,"dim":1}],
            "order": [[0,1],[1,2]]
        }"#;
        assert!(matches!(parse_lattice(bad), Err(Error::Parse(_))));
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let collinear = vec![qv(&[0, 0]), qv(&[1, 1]), qv(&[2, 2])];
        assert!(matches!(face_lattice(2, &collinear), Err(Error::DegeneratePolytope(_))));
        assert!(matches!(face_lattice(2, &[qv(&[0, 0, 0])]), Err(Error::DegeneratePolytope(_))));
        // Repeated vertices collapse; a segment listed twice is still a segment.
        let seg = vec![qv(&[0]), qv(&[1]), qv(&[0])];
        let l = face_lattice(1, &seg).unwrap();
        assert_eq!(counts(&l), vec![(-1, 1), (0, 2), (1, 1)]);
        assert_eq!(gh_vectors(&l).h, Poly::from_dense(&[1, 1]));
        let _ = q(0);
    }
}
