//! Exact linear algebra over arbitrary-precision rationals.
//!
//! Everything downstream (sections, minimal generators, cohomology, decompositions)
//! reduces to kernels, ranks and linear solves of matrices over Q. Bases returned
//! here are echelonized and depend only on the input matrix, so every computation in
//! the crate is reproducible bit-for-bit.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parse "p/q" or "p" text into a rational.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Q::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().ok()?;
            Some(Q::from_integer(n))
        }
    }
}

/// Render a rational as "p/q", or "p" when the denominator is one.
pub fn fmt_q(x: &Q) -> String {
    x.to_string()
}

/// Scale a nonzero rational vector to the primitive integer vector on the same ray:
/// clear denominators, divide by the gcd of the numerators, keep the sign as given.
pub fn primitive(v: &[Q]) -> Vec<Q> {
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return v.to_vec();
    }
    ints.into_iter().map(|x| Q::from_integer(x / &g)).collect()
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    debug_assert_eq!(a.len(), b.len());
    let mut s = Q::zero();
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

pub fn vec_add(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_scale(a: &[Q], c: &Q) -> Vec<Q> {
    a.iter().map(|x| x * c).collect()
}

pub fn is_zero_vec(a: &[Q]) -> bool {
    a.iter().all(|x| x.is_zero())
}

/// Dense row-major matrix over Q. Zero-sized dimensions are legal everywhere.
#[derive(Clone, PartialEq, Eq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Q>,
}

impl std::fmt::Debug for QMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "QMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.at(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMat { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Q::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        QMat { rows: r, cols: c, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(cols: Vec<Vec<Q>>) -> Self {
        QMat::from_rows(cols).transpose()
    }

    pub fn at(&self, i: usize, j: usize) -> &Q {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Q) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<Q> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<Q> {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> QMat {
        let mut t = QMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.at(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut m = QMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if !b.is_zero() {
                        let v = m.at(i, j) + a * b;
                        m.set(i, j, v);
                    }
                }
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| dot(&self.row(i), v)).collect()
    }

    pub fn add(&self, other: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        QMat { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        QMat { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: &Q) -> QMat {
        QMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * c).collect() }
    }

    /// Horizontal concatenation [A | B | ...]; all blocks must share the row count.
    pub fn hstack(blocks: &[&QMat]) -> QMat {
        let rows = blocks.first().map_or(0, |b| b.rows);
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = QMat::zeros(rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.rows, rows, "hstack row mismatch");
            for i in 0..rows {
                for j in 0..b.cols {
                    m.set(i, off + j, b.at(i, j).clone());
                }
            }
            off += b.cols;
        }
        m
    }

    pub fn vstack(blocks: &[&QMat]) -> QMat {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut m = QMat::zeros(rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.cols, cols, "vstack col mismatch");
            for i in 0..b.rows {
                for j in 0..cols {
                    m.set(off + i, j, b.at(i, j).clone());
                }
            }
            off += b.rows;
        }
        m
    }

    /// Reduced row echelon form; returns (rref, pivot column indices).
    pub fn rref(&self) -> (QMat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            // First nonzero entry in column c at or below row r.
            let piv = (r..m.rows).find(|&i| !m.at(i, c).is_zero());
            let Some(p) = piv else { continue };
            if p != r {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = m.at(r, c).recip();
            for j in c..m.cols {
                let v = m.at(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i != r && !m.at(i, c).is_zero() {
                    let f = m.at(i, c).clone();
                    for j in c..m.cols {
                        let v = m.at(i, j) - &f * m.at(r, j);
                        m.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Echelonized basis of the null space {x : Ax = 0}, returned as columns.
    pub fn kernel(&self) -> QMat {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut k = QMat::zeros(self.cols, free.len());
        for (idx, &fc) in free.iter().enumerate() {
            k.set(fc, idx, Q::one());
            for (pr, &pc) in pivots.iter().enumerate() {
                k.set(pc, idx, -r.at(pr, fc).clone());
            }
        }
        k
    }

    /// Solve A X = B for X; None if inconsistent. Free variables are set to zero,
    /// so the solution is deterministic.
    pub fn solve(&self, b: &QMat) -> Option<QMat> {
        assert_eq!(self.rows, b.rows, "solve: row mismatch");
        let aug = QMat::hstack(&[self, b]);
        let (r, pivots) = aug.rref();
        // Inconsistent iff some pivot falls in the B block.
        if pivots.iter().any(|&p| p >= self.cols) {
            return None;
        }
        let mut x = QMat::zeros(self.cols, b.cols);
        for (pr, &pc) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.set(pc, j, r.at(pr, self.cols + j).clone());
            }
        }
        Some(x)
    }

    pub fn solve_vec(&self, b: &[Q]) -> Option<Vec<Q>> {
        let bm = QMat::from_cols(vec![b.to_vec()]);
        self.solve(&bm).map(|x| x.col(0))
    }

    /// Square-matrix determinant by fraction-free-ish Gaussian elimination.
    pub fn det(&self) -> Q {
        assert_eq!(self.rows, self.cols, "det of non-square matrix");
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Q::one();
        for c in 0..n {
            let piv = (c..n).find(|&i| !m.at(i, c).is_zero());
            let Some(p) = piv else { return Q::zero() };
            if p != c {
                for j in 0..n {
                    m.data.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            det *= m.at(c, c);
            let inv = m.at(c, c).recip();
            for i in c + 1..n {
                if !m.at(i, c).is_zero() {
                    let f = m.at(i, c) * &inv;
                    for j in c..n {
                        let v = m.at(i, j) - &f * m.at(c, j);
                        m.set(i, j, v);
                    }
                }
            }
        }
        det
    }

    /// Inverse of a square invertible matrix.
    pub fn inverse(&self) -> Option<QMat> {
        assert_eq!(self.rows, self.cols);
        let x = self.solve(&QMat::identity(self.rows))?;
        if self.mul(&x) == QMat::identity(self.rows) {
            Some(x)
        } else {
            None
        }
    }

    /// Left inverse (P with P A = I) of a matrix with full column rank,
    /// via P = (A^T A)^{-1} A^T.
    pub fn left_inverse(&self) -> Option<QMat> {
        let t = self.transpose();
        let g = t.mul(self);
        let gi = g.inverse()?;
        Some(gi.mul(&t))
    }

    /// Echelonized basis of the row space, as rows of the returned matrix.
    pub fn row_space_basis(&self) -> QMat {
        let (r, pivots) = self.rref();
        let mut m = QMat::zeros(pivots.len(), self.cols);
        for i in 0..pivots.len() {
            for j in 0..self.cols {
                m.set(i, j, r.at(i, j).clone());
            }
        }
        m
    }
}

/// Greedy independent subset: walk `candidates` in order, keep those that enlarge
/// the span of `seed ∪ kept`. Returns indices of kept candidates.
pub fn greedy_extend(seed: &[Vec<Q>], candidates: &[Vec<Q>]) -> Vec<usize> {
    let dim =
        seed.first().map(|v| v.len()).or_else(|| candidates.first().map(|v| v.len())).unwrap_or(0);
    let mut rows: Vec<Vec<Q>> = seed.to_vec();
    let mut rank = if rows.is_empty() { 0 } else { QMat::from_rows(rows.clone()).rank() };
    let mut kept = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        assert_eq!(c.len(), dim);
        rows.push(c.clone());
        let r = QMat::from_rows(rows.clone()).rank();
        if r > rank {
            rank = r;
            kept.push(i);
        } else {
            rows.pop();
        }
    }
    kept
}

/// Sign of a rational: -1, 0, or 1.
pub fn sign(x: &Q) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}
