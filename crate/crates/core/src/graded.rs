//! Graded modules over the polynomial algebra A = Sym(V*), represented degree by
//! degree up to an even cap. A linear form has degree 2, so a module is a family of
//! finite-dimensional Q-spaces M^(d) plus commuting action maps act_i: M^(d) ->
//! M^(d+2), one per ambient coordinate form. Hilbert series, Nakayama minimal
//! generators and cap-certified freeness all reduce to ranks of these matrices.
//!
//! The monomial calculus at the bottom of the file gives concrete models for
//! polynomial rings on subspaces: bases are monomials in intrinsic coordinates,
//! ordered lexicographically by exponent vector, so every constructed matrix is
//! reproducible.

use crate::linalg::{QMat, Q};
use crate::poly::{GradedDims, Poly};
use crate::{Error, Result};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// The ambient polynomial algebra A = Sym(V*): n coordinate forms, each of degree 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ambient {
    pub n: usize,
}

impl Ambient {
    pub const STEP: i64 = 2;

    /// Default even truncation bound 2n+2 for global computations.
    pub fn default_cap(&self) -> i64 {
        2 * self.n as i64 + 2
    }
}

/// Degree-indexed finite-dimensional Q-spaces with commuting action maps for the
/// n ambient coordinate forms. Only nonzero degrees are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedModule {
    pub n_forms: usize,
    pub cap: i64,
    dims: BTreeMap<i64, usize>,
    /// acts[&d][i]: matrix of act_i from degree d to degree d+2 (dim(d+2) x dim(d)).
    acts: BTreeMap<i64, Vec<QMat>>,
}

impl GradedModule {
    pub fn zero(n_forms: usize, cap: i64) -> Self {
        GradedModule { n_forms, cap, dims: BTreeMap::new(), acts: BTreeMap::new() }
    }

    /// Assemble from explicit data; degrees with dimension zero are dropped.
    pub fn from_parts(
        n_forms: usize,
        cap: i64,
        dims: BTreeMap<i64, usize>,
        acts: BTreeMap<i64, Vec<QMat>>,
    ) -> Self {
        let mut m = GradedModule { n_forms, cap, dims: BTreeMap::new(), acts: BTreeMap::new() };
        for (d, k) in dims {
            if k > 0 && d <= cap {
                m.dims.insert(d, k);
            }
        }
        for (d, mats) in acts {
            if m.dim(d) > 0 && d + 2 <= cap {
                debug_assert_eq!(mats.len(), n_forms);
                for a in &mats {
                    debug_assert_eq!(a.cols, m.dim(d));
                    debug_assert_eq!(a.rows, m.dim(d + 2));
                }
                m.acts.insert(d, mats);
            }
        }
        m
    }

    pub fn dim(&self, d: i64) -> usize {
        *self.dims.get(&d).unwrap_or(&0)
    }

    pub fn is_zero(&self) -> bool {
        self.dims.is_empty()
    }

    /// Degrees with nonzero dimension, ascending.
    pub fn degrees(&self) -> Vec<i64> {
        self.dims.keys().copied().collect()
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.dims.keys().next().copied()
    }

    /// Action matrix of form i from degree d, materializing zeros as needed.
    pub fn act(&self, i: usize, d: i64) -> QMat {
        match self.acts.get(&d) {
            Some(mats) => mats[i].clone(),
            None => QMat::zeros(self.dim(d + 2), self.dim(d)),
        }
    }

    /// All n action matrices out of degree d stacked side by side:
    /// [act_0 | act_1 | ...], a map ⊕_i M^(d) -> M^(d+2).
    pub fn acts_stacked(&self, d: i64) -> QMat {
        let mats: Vec<QMat> = (0..self.n_forms).map(|i| self.act(i, d)).collect();
        let refs: Vec<&QMat> = mats.iter().collect();
        QMat::hstack(&refs)
    }

    /// Matrix of the image of A^+ in degree d, i.e. all actions out of degree d-2.
    pub fn aplus_image(&self, d: i64) -> QMat {
        self.acts_stacked(d - 2)
    }

    /// Commutativity of the A-action: act_i . act_j = act_j . act_i on every degree.
    pub fn validate(&self) -> Result<()> {
        for &d in self.dims.keys() {
            if d + 4 > self.cap {
                continue;
            }
            for i in 0..self.n_forms {
                for j in i + 1..self.n_forms {
                    let ij = self.act(i, d + 2).mul(&self.act(j, d));
                    let ji = self.act(j, d + 2).mul(&self.act(i, d));
                    if ij != ji {
                        return Err(Error::CheckFailed {
                            check: "action-commutativity".into(),
                            witness: format!("forms {i},{j} at degree {d}"),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Nakayama minimal generators: per degree, dim of M^(d) / A^+ M^(d). The flag
    /// is set when nonzero generators occur in degrees (cap-2, cap], where
    /// truncation could hide relations against them.
    pub fn minimal_generators(&self) -> (GradedDims, bool) {
        let mut gens = GradedDims::new();
        let mut warn = false;
        for &d in self.dims.keys() {
            let total = self.dim(d);
            let im_rank = self.aplus_image(d).rank();
            let g = total - im_rank;
            if g > 0 {
                gens.add(d, g);
                if d > self.cap - 2 {
                    warn = true;
                }
            }
        }
        (gens, warn)
    }

    pub fn hilbert(&self) -> Poly {
        Poly::from_coeffs(self.dims.iter().map(|(&d, &k)| (d, k as i64)))
    }

    /// Relabel degrees: shift(M,t)^(k) = M^(k+t).
    pub fn shift(&self, t: i64) -> GradedModule {
        GradedModule {
            n_forms: self.n_forms,
            cap: self.cap - t,
            dims: self.dims.iter().map(|(&d, &k)| (d - t, k)).collect(),
            acts: self.acts.iter().map(|(&d, m)| (d - t, m.clone())).collect(),
        }
    }

    /// Direct sum; summand s occupies columns at `offset(s, d)..offset(s, d)+dims`.
    pub fn direct_sum(parts: &[&GradedModule]) -> GradedModule {
        assert!(!parts.is_empty());
        let n_forms = parts[0].n_forms;
        let cap = parts.iter().map(|p| p.cap).min().unwrap();
        let mut degrees: Vec<i64> = Vec::new();
        for p in parts {
            assert_eq!(p.n_forms, n_forms);
            degrees.extend(p.degrees());
        }
        degrees.sort_unstable();
        degrees.dedup();
        let mut dims = BTreeMap::new();
        let mut acts = BTreeMap::new();
        for &d in &degrees {
            if d > cap {
                continue;
            }
            let total: usize = parts.iter().map(|p| p.dim(d)).sum();
            if total > 0 {
                dims.insert(d, total);
            }
            if d + 2 <= cap {
                let mats: Vec<QMat> = (0..n_forms)
                    .map(|i| {
                        let blocks: Vec<QMat> = parts.iter().map(|p| p.act(i, d)).collect();
                        block_diag(&blocks)
                    })
                    .collect();
                acts.insert(d, mats);
            }
        }
        GradedModule::from_parts(n_forms, cap, dims, acts)
    }

    /// Column offset of summand `part` at degree d inside direct_sum(parts).
    pub fn sum_offset(parts: &[&GradedModule], part: usize, d: i64) -> usize {
        parts[..part].iter().map(|p| p.dim(d)).sum()
    }

    /// Operator of a homogeneous intrinsic polynomial on this module. `eta` gives,
    /// per intrinsic coordinate, its expression as a combination of the n ambient
    /// forms; `coeffs` is the polynomial in the monomial basis of `monomials(eta.len(), k)`.
    /// Returns the matrix M^(from) -> M^(from + 2k). Requires that ambient forms act
    /// through their intrinsic restrictions (true for every stalk built here).
    pub fn action_of_homog(&self, eta: &[Vec<Q>], k: usize, coeffs: &[Q], from: i64) -> QMat {
        let nvars = eta.len();
        let monos = monomials(nvars, k);
        assert_eq!(coeffs.len(), monos.len());
        let mut result = QMat::zeros(self.dim(from + 2 * k as i64), self.dim(from));
        for (mi, mu) in monos.iter().enumerate() {
            if coeffs[mi].is_zero() {
                continue;
            }
            let mut op = QMat::identity(self.dim(from));
            let mut deg = from;
            for (j, &e) in mu.iter().enumerate() {
                for _ in 0..e {
                    // mult by eta_j at current degree: sum_i eta[j][i] act_i.
                    let mut step = QMat::zeros(self.dim(deg + 2), self.dim(deg));
                    for (i, c) in eta[j].iter().enumerate() {
                        if !c.is_zero() {
                            step = step.add(&self.act(i, deg).scale(c));
                        }
                    }
                    op = step.mul(&op);
                    deg += 2;
                }
            }
            result = result.add(&op.scale(&coeffs[mi]));
        }
        result
    }
}

/// Per-degree matrices between two graded modules of equal cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedMap {
    mats: BTreeMap<i64, QMat>,
}

impl GradedMap {
    pub fn new(mats: BTreeMap<i64, QMat>) -> Self {
        GradedMap { mats }
    }

    pub fn zero() -> Self {
        GradedMap { mats: BTreeMap::new() }
    }

    pub fn at(&self, d: i64, tgt_dim: usize, src_dim: usize) -> QMat {
        match self.mats.get(&d) {
            Some(m) => {
                debug_assert_eq!((m.rows, m.cols), (tgt_dim, src_dim));
                m.clone()
            }
            None => QMat::zeros(tgt_dim, src_dim),
        }
    }

    pub fn insert(&mut self, d: i64, m: QMat) {
        if !(m.rows == 0 && m.cols == 0) {
            self.mats.insert(d, m);
        }
    }

    /// Relabel degrees to match shifted modules.
    pub fn shift(&self, t: i64) -> GradedMap {
        GradedMap { mats: self.mats.iter().map(|(&d, m)| (d - t, m.clone())).collect() }
    }

    /// Intertwining with the actions: tgt.act_i . f_d = f_{d+2} . src.act_i.
    pub fn validate_intertwines(&self, src: &GradedModule, tgt: &GradedModule) -> Result<()> {
        let cap = src.cap.min(tgt.cap);
        for &d in &src.degrees() {
            if d + 2 > cap {
                continue;
            }
            let f_d = self.at(d, tgt.dim(d), src.dim(d));
            let f_d2 = self.at(d + 2, tgt.dim(d + 2), src.dim(d + 2));
            for i in 0..src.n_forms {
                let lhs = tgt.act(i, d).mul(&f_d);
                let rhs = f_d2.mul(&src.act(i, d));
                if lhs != rhs {
                    return Err(Error::CheckFailed {
                        check: "map-intertwines-action".into(),
                        witness: format!("form {i} at degree {d}"),
                    });
                }
            }
        }
        Ok(())
    }
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

/// Outcome of the freeness certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FreeCheck {
    /// Cap-certified free with these generator degrees.
    Free(GradedDims),
    /// Hilbert mismatch against the free module on the minimal generators.
    NotFree { degree: i64, expected: i64, actual: i64 },
}

/// Certify freeness of M over a polynomial subalgebra of Krull dimension
/// `over_dim`, up to the cap: the minimal generators g must satisfy
/// hilbert(M) = (sum q^g) / (1-q^2)^over_dim coefficientwise. Since the minimal
/// generators always generate (graded Nakayama), equality of degreewise dimensions
/// makes the induced surjection from the free module bijective degree by degree.
pub fn check_free(m: &GradedModule, over_dim: usize) -> Result<FreeCheck> {
    let (gens, warn) = m.minimal_generators();
    if warn {
        return Err(Error::CapTooSmall(format!(
            "minimal generators found in degrees above cap-2 = {}; raise the cap",
            m.cap - 2
        )));
    }
    let expected = gens.to_poly().div_one_minus_q2_pow(over_dim, m.cap);
    let actual = m.hilbert();
    if expected == actual {
        return Ok(FreeCheck::Free(gens));
    }
    let exps: std::collections::BTreeSet<i64> =
        expected.terms().map(|t| t.0).chain(actual.terms().map(|t| t.0)).collect();
    let d = exps.into_iter().find(|&e| expected.coeff(e) != actual.coeff(e)).unwrap();
    Ok(FreeCheck::NotFree { degree: d, expected: expected.coeff(d), actual: actual.coeff(d) })
}

// ---------------------------------------------------------------------------
// Monomial calculus: concrete models of polynomial rings on subspaces.
// ---------------------------------------------------------------------------

/// Exponent vectors of the degree-k monomials in `nvars` variables, in descending
/// lexicographic order; the unique degree-0 monomial is the empty product.
pub fn monomials(nvars: usize, k: usize) -> Vec<Vec<u32>> {
    fn rec(nvars: usize, k: usize, out: &mut Vec<Vec<u32>>, prefix: &mut Vec<u32>) {
        if nvars == 0 {
            if k == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        if nvars == 1 {
            prefix.push(k as u32);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=k).rev() {
            prefix.push(e as u32);
            rec(nvars - 1, k - e, out, prefix);
            prefix.pop();
        }
    }
    if nvars == 0 {
        return if k == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    rec(nvars, k, &mut out, &mut Vec::new());
    out
}

pub fn mono_count(nvars: usize, k: usize) -> usize {
    if nvars == 0 {
        return if k == 0 { 1 } else { 0 };
    }
    // C(nvars-1+k, k)
    let mut num: usize = 1;
    let mut den: usize = 1;
    for i in 0..k {
        num *= nvars + i;
        den *= i + 1;
    }
    num / den
}

fn mono_index(monos: &[Vec<u32>], m: &[u32]) -> usize {
    monos.iter().position(|x| x == m).expect("monomial not in basis")
}

/// Matrix of multiplication by the linear form with coefficients `c`, from the
/// degree-k monomial basis to the degree-(k+1) basis.
pub fn mult_by_linear(nvars: usize, k: usize, c: &[Q]) -> QMat {
    assert_eq!(c.len(), nvars);
    let src = monomials(nvars, k);
    let tgt = monomials(nvars, k + 1);
    let mut m = QMat::zeros(tgt.len(), src.len());
    for (j, mu) in src.iter().enumerate() {
        for (v, coeff) in c.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            let mut up = mu.clone();
            up[v] += 1;
            let i = mono_index(&tgt, &up);
            let val = m.at(i, j) + coeff;
            m.set(i, j, val);
        }
    }
    m
}

/// Substitution y_j = sum_i S[j][i] z_i applied to degree-k monomials: matrix from
/// the monomial basis in `from_vars` y-variables to the one in `to_vars` z-variables.
pub fn subst_matrix(from_vars: usize, to_vars: usize, s: &[Vec<Q>], k: usize) -> QMat {
    assert_eq!(s.len(), from_vars);
    let src = monomials(from_vars, k);
    let mut m = QMat::zeros(mono_count(to_vars, k), src.len());
    for (j, mu) in src.iter().enumerate() {
        // Expand prod_j (linear)^{mu_j} in the z-monomial bases degree by degree.
        let mut vec: Vec<Q> = vec![Q::one()];
        let mut deg = 0;
        for (v, &e) in mu.iter().enumerate() {
            for _ in 0..e {
                vec = mult_by_linear(to_vars, deg, &s[v]).mul_vec(&vec);
                deg += 1;
            }
        }
        for (i, val) in vec.into_iter().enumerate() {
            m.set(i, j, val);
        }
    }
    m
}

/// The polynomial ring on a d-dimensional subspace as a graded module: basis of
/// degree 2k is `monomials(d, k)`; the i-th ambient form acts as multiplication by
/// its restriction, the linear form with coefficients `restricted[i]` (length d).
pub fn polynomial_module(d: usize, restricted: &[Vec<Q>], cap: i64) -> GradedModule {
    let n = restricted.len();
    let mut dims = BTreeMap::new();
    let mut acts = BTreeMap::new();
    let mut deg = 0i64;
    while deg <= cap {
        let k = (deg / 2) as usize;
        dims.insert(deg, mono_count(d, k));
        if deg + 2 <= cap {
            acts.insert(deg, (0..n).map(|i| mult_by_linear(d, k, &restricted[i])).collect());
        }
        deg += 2;
    }
    GradedModule::from_parts(n, cap, dims, acts)
}

/// Free module over the polynomial ring on a d-dimensional subspace with one
/// generator per entry of `gens` (even degrees, ascending). The degree-D slice has
/// basis {(gen j, monomial mu) : gens[j] + 2|mu| = D}, ordered by generator then
/// monomial.
pub fn free_module_on_gens(
    d: usize,
    restricted: &[Vec<Q>],
    gens: &[i64],
    cap: i64,
) -> GradedModule {
    let parts: Vec<GradedModule> =
        gens.iter().map(|&g| polynomial_module(d, restricted, cap - g).shift(-g)).collect();
    if parts.is_empty() {
        return GradedModule::zero(restricted.len(), cap);
    }
    let refs: Vec<&GradedModule> = parts.iter().collect();
    GradedModule::direct_sum(&refs)
}

/// Basis layout of `free_module_on_gens` at one degree: for each generator index,
/// the number of monomial basis vectors it contributes.
pub fn free_basis_layout(d: usize, gens: &[i64], degree: i64) -> Vec<usize> {
    gens.iter()
        .map(|&g| {
            let rel = degree - g;
            if rel < 0 || rel % 2 != 0 {
                0
            } else {
                mono_count(d, (rel / 2) as usize)
            }
        })
        .collect()
}
