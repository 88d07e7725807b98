//! Integer polynomials in one variable q (Laurent exponents allowed for shifts) and
//! finitely supported degree->dimension tables. These carry ih, ip, h, g and Hilbert
//! data; all arithmetic is exact and equality is coefficientwise.

use std::collections::BTreeMap;
use std::fmt;

/// Polynomial with integer coefficients indexed by the exponent of q.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Poly {
    coeffs: BTreeMap<i64, i64>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::monomial(0, 1)
    }

    pub fn monomial(exp: i64, coeff: i64) -> Self {
        let mut p = Poly::default();
        if coeff != 0 {
            p.coeffs.insert(exp, coeff);
        }
        p
    }

    pub fn from_coeffs<I: IntoIterator<Item = (i64, i64)>>(it: I) -> Self {
        let mut p = Poly::default();
        for (e, c) in it {
            p.add_term(e, c);
        }
        p
    }

    /// Dense constructor: coefficients of q^0, q^1, q^2, ...
    pub fn from_dense(coeffs: &[i64]) -> Self {
        Poly::from_coeffs(coeffs.iter().enumerate().map(|(i, &c)| (i as i64, c)))
    }

    pub fn add_term(&mut self, exp: i64, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let e = self.coeffs.entry(exp).or_insert(0);
        *e += coeff;
        if *e == 0 {
            self.coeffs.remove(&exp);
        }
    }

    pub fn coeff(&self, exp: i64) -> i64 {
        *self.coeffs.get(&exp).unwrap_or(&0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.coeffs.iter().map(|(&e, &c)| (e, c))
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        for (e, c) in other.terms() {
            p.add_term(e, c);
        }
        p
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        for (e, c) in other.terms() {
            p.add_term(e, -c);
        }
        p
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut p = Poly::default();
        for (e1, c1) in self.terms() {
            for (e2, c2) in other.terms() {
                p.add_term(e1 + e2, c1 * c2);
            }
        }
        p
    }

    pub fn scale(&self, k: i64) -> Poly {
        Poly::from_coeffs(self.terms().map(|(e, c)| (e, c * k)))
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut p = Poly::one();
        for _ in 0..n {
            p = p.mul(self);
        }
        p
    }

    /// Substitute q -> q^k (used for h(q^2) comparisons).
    pub fn stretch(&self, k: i64) -> Poly {
        Poly::from_coeffs(self.terms().map(|(e, c)| (e * k, c)))
    }

    /// Reversal j -> pivot - j of the exponents.
    pub fn reverse(&self, pivot: i64) -> Poly {
        Poly::from_coeffs(self.terms().map(|(e, c)| (pivot - e, c)))
    }

    /// Truncate to exponents <= cap.
    pub fn truncate(&self, cap: i64) -> Poly {
        Poly::from_coeffs(self.terms().filter(|&(e, _)| e <= cap))
    }

    /// Coefficientwise >= comparison.
    pub fn geq(&self, other: &Poly) -> bool {
        let exps: std::collections::BTreeSet<i64> =
            self.coeffs.keys().chain(other.coeffs.keys()).copied().collect();
        exps.iter().all(|&e| self.coeff(e) >= other.coeff(e))
    }

    pub fn is_palindromic(&self, pivot: i64) -> bool {
        *self == self.reverse(pivot)
    }

    pub fn coeffs_nonnegative(&self) -> bool {
        self.terms().all(|(_, c)| c >= 0)
    }

    pub fn even_exponents_only(&self) -> bool {
        self.terms().all(|(e, _)| e % 2 == 0)
    }

    /// Truncated expansion of self / (1-q^2)^k up to exponent cap.
    pub fn div_one_minus_q2_pow(&self, k: usize, cap: i64) -> Poly {
        let mut series = Poly::one();
        // (1-q^2)^{-1} = 1 + q^2 + q^4 + ...
        let mut geom = Poly::default();
        let mut e = 0;
        while e <= cap {
            geom.add_term(e, 1);
            e += 2;
        }
        for _ in 0..k {
            series = series.mul(&geom).truncate(cap);
        }
        self.mul(&series).truncate(cap)
    }

    /// JSON object {"exp": coeff, ...} with decimal string keys.
    pub fn to_json(&self) -> serde_json::Value {
        let mut m = serde_json::Map::new();
        for (e, c) in self.terms() {
            m.insert(e.to_string(), serde_json::Value::from(c));
        }
        serde_json::Value::Object(m)
    }
}

impl fmt::Display for Poly {
    /// Report rendering: "1 + 2q^2 + q^4"; zero renders as "0".
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms() {
            let mag = c.abs();
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
                first = false;
            } else if c < 0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match (e, mag) {
                (0, m) => write!(f, "{m}")?,
                (1, 1) => write!(f, "q")?,
                (1, m) => write!(f, "{m}q")?,
                (e, 1) => write!(f, "q^{e}")?,
                (e, m) => write!(f, "{m}q^{e}")?,
            }
        }
        Ok(())
    }
}

/// Finitely supported map degree -> positive dimension.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct GradedDims {
    dims: BTreeMap<i64, usize>,
}

impl GradedDims {
    pub fn new() -> Self {
        GradedDims::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (i64, usize)>>(it: I) -> Self {
        let mut g = GradedDims::new();
        for (d, k) in it {
            g.add(d, k);
        }
        g
    }

    pub fn add(&mut self, degree: i64, count: usize) {
        if count > 0 {
            *self.dims.entry(degree).or_insert(0) += count;
        }
    }

    pub fn get(&self, degree: i64) -> usize {
        *self.dims.get(&degree).unwrap_or(&0)
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, usize)> + '_ {
        self.dims.iter().map(|(&d, &k)| (d, k))
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.dims.keys().next_back().copied()
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.dims.keys().next().copied()
    }

    pub fn merge(&self, other: &GradedDims) -> GradedDims {
        let mut g = self.clone();
        for (d, k) in other.iter() {
            g.add(d, k);
        }
        g
    }

    /// Relabel degrees d -> d - t (gens of M(t) sit t lower ... M(t)_k = M_{k+t}).
    pub fn shift(&self, t: i64) -> GradedDims {
        GradedDims::from_pairs(self.iter().map(|(d, k)| (d - t, k)))
    }

    pub fn to_poly(&self) -> Poly {
        Poly::from_coeffs(self.iter().map(|(d, k)| (d, k as i64)))
    }

    pub fn to_json(&self) -> serde_json::Value {
        self.to_poly().to_json()
    }
}

impl fmt::Display for GradedDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (d, k)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{d}:{k}")?;
        }
        write!(f, "}}")
    }
}
