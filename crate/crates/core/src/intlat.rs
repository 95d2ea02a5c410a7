//! Integer lattice algorithms: Hermite normal form, saturated intersections
//! with rational subspaces, unimodular basis completion, volume forms, and the
//! alternating (skew) normal form of an integral antisymmetric matrix.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exterior::{ExteriorError, Multivector};
use crate::linalg::QMatrix;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("input vectors are linearly dependent")]
    Dependent,
    #[error("sublattice is not saturated (index {index}); no unimodular complement exists")]
    NotSaturated { index: BigInt },
    #[error("matrix is not antisymmetric")]
    NotAntisymmetric,
    #[error("matrix is not square")]
    NotSquare,
    #[error("ragged or empty matrix")]
    BadShape,
    #[error("vector length {len} does not match dimension {n}")]
    BadLength { len: usize, n: usize },
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
}

type Result<T> = std::result::Result<T, LatticeError>;

#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(ToString::to_string).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a `rows.len() × cols` matrix; `cols` fixes the width when there are no rows.
    pub fn from_rows_with_cols(rows: &[Vec<BigInt>], cols: usize) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().cloned().collect(),
        }
    }

    pub fn from_rows(rows: &[Vec<BigInt>]) -> Self {
        Self::from_rows_with_cols(rows, rows.first().map_or(0, Vec::len))
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        Self::from_rows(
            &rows
                .iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect::<Vec<_>>(),
        )
    }

    /// Accepts a rational matrix only when every entry is integral.
    pub fn from_qmatrix(m: &QMatrix) -> Option<Self> {
        let rows = m
            .to_rows()
            .iter()
            .map(|r| r.iter().map(rational::to_integer).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()?;
        Some(Self::from_rows_with_cols(&rows, m.cols()))
    }

    pub fn to_qmatrix(&self) -> QMatrix {
        let mut q = QMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                q[(r, c)] = Rational::from_integer(self[(r, c)].clone());
            }
        }
        q
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * &other[(k, j)];
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (i..self.cols).all(|j| self[(i, j)] == -&self[(j, i)]))
    }

    /// Fraction-free (Bareiss) determinant.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[(k, k)].is_zero() {
                let Some(p) = (k + 1..n).find(|&r| !m[(r, k)].is_zero()) else {
                    return BigInt::zero();
                };
                m.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)]) / &prev;
                    m[(i, j)] = v;
                }
            }
            prev = m[(k, k)].clone();
        }
        sign * &m[(n - 1, n - 1)]
    }

    pub fn is_unimodular(&self) -> bool {
        self.rows == self.cols && self.det().abs().is_one()
    }

    /// Inverse of a unimodular matrix.
    pub fn unimodular_inverse(&self) -> Option<IntMatrix> {
        if !self.is_unimodular() {
            return None;
        }
        Self::from_qmatrix(&self.to_qmatrix().inverse()?)
    }

    /// Submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> IntMatrix {
        let mut m = Self::zeros(rows.len(), cols.len());
        for (a, &r) in rows.iter().enumerate() {
            for (b, &c) in cols.iter().enumerate() {
                m[(a, b)] = self[(r, c)].clone();
            }
        }
        m
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// `row[dst] += c · row[src]`.
    fn add_row_multiple(&mut self, dst: usize, src: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = &self[(src, j)] * c;
            self[(dst, j)] += v;
        }
    }

    /// `col[dst] += c · col[src]`.
    fn add_col_multiple(&mut self, dst: usize, src: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = &self[(i, src)] * c;
            self[(i, dst)] += v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -&self[(r, j)];
            self[(r, j)] = v;
        }
    }

    /// Replaces rows `i`, `j` by `(x·ri + y·rj, u·ri + v·rj)`.
    fn combine_rows(&mut self, i: usize, j: usize, [x, y, u, v]: [&BigInt; 4]) {
        for c in 0..self.cols {
            let (a, b) = (self[(i, c)].clone(), self[(j, c)].clone());
            self[(i, c)] = x * &a + y * &b;
            self[(j, c)] = u * &a + v * &b;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (r, c): (usize, usize)) -> &BigInt {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut BigInt {
        &mut self.data[r * self.cols + c]
    }
}

/// Row Hermite normal form `H = U·A` with `U` unimodular.
///
/// Pivots are positive, entries above each pivot lie in `[0, pivot)`, and zero
/// rows come last.
pub fn hnf(a: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let mut h = a.clone();
    let mut u = IntMatrix::identity(a.rows());
    let mut prow = 0;
    for c in 0..h.cols() {
        if prow == h.rows() {
            break;
        }
        for r in prow + 1..h.rows() {
            if h[(r, c)].is_zero() {
                continue;
            }
            let (p, q) = (h[(prow, c)].clone(), h[(r, c)].clone());
            let e = p.extended_gcd(&q);
            let (pg, qg) = (&p / &e.gcd, &q / &e.gcd);
            let coeffs = [&e.x, &e.y, &-qg, &pg];
            h.combine_rows(prow, r, coeffs);
            u.combine_rows(prow, r, coeffs);
        }
        if h[(prow, c)].is_zero() {
            continue;
        }
        if h[(prow, c)].is_negative() {
            h.negate_row(prow);
            u.negate_row(prow);
        }
        let piv = h[(prow, c)].clone();
        for r in 0..prow {
            let k = -h[(r, c)].div_floor(&piv);
            h.add_row_multiple(r, prow, &k);
            u.add_row_multiple(r, prow, &k);
        }
        prow += 1;
    }
    (h, u)
}

fn integral_rows(rows: &[Vec<Rational>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|r| {
            let l = rational::lcm_of_denominators(r);
            r.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect()
        })
        .collect()
}

/// Integral basis (in Hermite normal form) of the saturated lattice `ℤⁿ ∩ W`.
pub fn lattice_intersect(n: usize, subspace_basis: &[Vec<Rational>]) -> Result<IntMatrix> {
    if let Some(bad) = subspace_basis.iter().find(|v| v.len() != n) {
        return Err(LatticeError::BadLength { len: bad.len(), n });
    }
    if subspace_basis.is_empty() {
        return Ok(IntMatrix::zeros(0, n));
    }
    let w = QMatrix::from_rows(subspace_basis);
    if w.rank() < subspace_basis.len() {
        return Err(LatticeError::Dependent);
    }
    // Integral equations cutting out W, then their integer kernel.
    let equations = IntMatrix::from_rows_with_cols(&integral_rows(&w.kernel()), n);
    let (h, u) = hnf(&equations.transpose());
    let kernel_rows: Vec<Vec<BigInt>> = (0..n)
        .filter(|&r| h.row(r).iter().all(Zero::is_zero))
        .map(|r| u.row(r).to_vec())
        .collect();
    let (basis, _) = hnf(&IntMatrix::from_rows_with_cols(&kernel_rows, n));
    Ok(basis)
}

/// Rows completing a saturated sublattice basis to a basis of ℤⁿ.
pub fn unimodular_complement(basis: &IntMatrix) -> Result<IntMatrix> {
    let (k, n) = (basis.rows(), basis.cols());
    if k == 0 {
        return Ok(IntMatrix::identity(n));
    }
    let (h, u) = hnf(&basis.transpose());
    let top = h.select(&(0..k).collect::<Vec<_>>(), &(0..k).collect::<Vec<_>>());
    let index = top.det().abs();
    if index.is_zero() {
        return Err(LatticeError::Dependent);
    }
    if !index.is_one() {
        return Err(LatticeError::NotSaturated { index });
    }
    let full = u
        .unimodular_inverse()
        .expect("HNF transform is unimodular")
        .transpose();
    Ok(full.select(&(k..n).collect::<Vec<_>>(), &(0..n).collect::<Vec<_>>()))
}

/// `b_1 ∧ … ∧ b_k` for the rows of `basis`.
pub fn volume_form(basis: &IntMatrix) -> Result<Multivector> {
    let n = basis.cols();
    let mut alpha = Multivector::one(n);
    for r in 0..basis.rows() {
        let v: Vec<Rational> = basis.row(r).iter().cloned().map(Rational::from_integer).collect();
        alpha = alpha.wedge(&Multivector::vector(&v))?;
    }
    if alpha.is_zero() {
        return Err(LatticeError::Dependent);
    }
    Ok(alpha)
}

/// `Uᵀ A U = diag([[0, d_1], [−d_1, 0]], …, [[0, d_m], [−d_m, 0]], 0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkewNormalForm {
    pub u: IntMatrix,
    pub divisors: Vec<BigInt>,
    pub rank: usize,
}

impl SkewNormalForm {
    /// `q_i = d_i / d_{i−1}` with `d_0 = 1`.
    pub fn q_factors(&self) -> Vec<BigInt> {
        let mut prev = BigInt::one();
        self.divisors
            .iter()
            .map(|d| {
                let q = d / &prev;
                prev = d.clone();
                q
            })
            .collect()
    }

    /// The block-diagonal normal form itself.
    pub fn block_form(&self) -> IntMatrix {
        let n = self.u.rows();
        let mut m = IntMatrix::zeros(n, n);
        for (i, d) in self.divisors.iter().enumerate() {
            m[(2 * i, 2 * i + 1)] = d.clone();
            m[(2 * i + 1, 2 * i)] = -d;
        }
        m
    }
}

/// Congruence state: `m = Uᵀ A U` with the basis vectors as the columns of `u`.
struct Congruence {
    m: IntMatrix,
    u: IntMatrix,
}

impl Congruence {
    fn swap(&mut self, i: usize, j: usize) {
        self.u.swap_cols(i, j);
        self.m.swap_rows(i, j);
        self.m.swap_cols(i, j);
    }

    /// `b_i ← b_i + c·b_j`.
    fn add(&mut self, i: usize, j: usize, c: &BigInt) {
        self.u.add_col_multiple(i, j, c);
        self.m.add_row_multiple(i, j, c);
        self.m.add_col_multiple(i, j, c);
    }

    fn smallest_entry(&self, s: usize) -> Option<(usize, usize)> {
        let n = self.m.rows();
        let mut best: Option<(usize, usize)> = None;
        for i in s..n {
            for j in i + 1..n {
                let v = &self.m[(i, j)];
                if v.is_zero() {
                    continue;
                }
                if best.is_none_or(|(a, b)| v.abs() < self.m[(a, b)].abs()) {
                    best = Some((i, j));
                }
            }
        }
        best
    }
}

/// Alternating normal form by symplectic Smith reduction.
pub fn skew_normal_form(a: &IntMatrix) -> Result<SkewNormalForm> {
    if a.rows() != a.cols() {
        return Err(LatticeError::NotSquare);
    }
    if !a.is_antisymmetric() {
        return Err(LatticeError::NotAntisymmetric);
    }
    let n = a.rows();
    let mut st = Congruence {
        m: a.clone(),
        u: IntMatrix::identity(n),
    };
    let mut divisors = Vec::new();
    let mut s = 0;
    while s + 1 < n {
        let Some(_) = st.smallest_entry(s) else { break };
        'pivot: loop {
            let (i, j) = st.smallest_entry(s).expect("nonzero block");
            st.swap(s, i);
            st.swap(s + 1, if j == s { i } else { j });
            if st.m[(s, s + 1)].is_negative() {
                st.swap(s, s + 1);
            }
            let d = st.m[(s, s + 1)].clone();
            let mut clean = true;
            for l in s + 2..n {
                let q = st.m[(s, l)].div_floor(&d);
                st.add(l, s + 1, &-q);
                let q = st.m[(s + 1, l)].div_floor(&d);
                st.add(l, s, &q);
                clean &= st.m[(s, l)].is_zero() && st.m[(s + 1, l)].is_zero();
            }
            if !clean {
                continue 'pivot;
            }
            for i in s + 2..n {
                if (s + 2..n).any(|j| !st.m[(i, j)].is_multiple_of(&d)) {
                    st.add(s, i, &BigInt::one());
                    continue 'pivot;
                }
            }
            divisors.push(d);
            break;
        }
        s += 2;
    }
    let rank = 2 * divisors.len();
    Ok(SkewNormalForm {
        u: st.u,
        divisors,
        rank,
    })
}

/// Nonzero elementary divisors by plain Smith reduction (row and column operations).
pub fn smith_divisors(a: &IntMatrix) -> Vec<BigInt> {
    let mut m = a.clone();
    let (rows, cols) = (m.rows(), m.cols());
    let mut out = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !m[(i, j)].is_zero()
                    && best.is_none_or(|(a, b)| m[(i, j)].abs() < m[(a, b)].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((i, j)) = best else { break };
        m.swap_rows(t, i);
        m.swap_cols(t, j);
        let p = m[(t, t)].clone();
        let mut clean = true;
        for r in t + 1..rows {
            let q = m[(r, t)].div_floor(&p);
            m.add_row_multiple(r, t, &-q);
            clean &= m[(r, t)].is_zero();
        }
        for c in t + 1..cols {
            let q = m[(t, c)].div_floor(&p);
            m.add_col_multiple(c, t, &-q);
            clean &= m[(t, c)].is_zero();
        }
        if !clean {
            continue;
        }
        if let Some(r) = (t + 1..rows).find(|&r| (t + 1..cols).any(|c| !m[(r, c)].is_multiple_of(&p))) {
            m.add_row_multiple(t, r, &BigInt::one());
            continue;
        }
        out.push(p.abs());
        t += 1;
    }
    out
}
