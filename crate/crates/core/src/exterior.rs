//! Exact exterior algebra Λ(V) over the rationals.
//!
//! A [`Multivector`] lives in Λ(V) for `V = ℚⁿ` with the lattice basis
//! `e_1, …, e_n`; the same type also represents elements of Λ(V*) when it is
//! used as the left argument of [`pair`]. Basis blades are index subsets,
//! stored as bitmasks and written 1-based in every external form.
//!
//! Contraction conventions: `ι(e*_k)` is the odd left derivation with
//! `ι(e*_k)(e_k ∧ e_S) = e_S`, and for a two-form
//! `ι(e*_k ∧ e*_l) := ι(e*_l) ∘ ι(e*_k)`, so that
//! `ι(e*_k ∧ e*_l)(e_k ∧ e_l) = 1` for `k < l`. With these choices
//! `ι(b)(v ∧ w) = b(v, w)`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::QMatrix;
use crate::rational::{self, format_rational, Rational};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 30;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExteriorError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("dimension {0} is outside 1..={MAX_DIM}")]
    BadDimension(usize),
    #[error("index {index} outside 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("indices {0:?} are not strictly increasing")]
    UnsortedIndices(Vec<usize>),
    #[error("expected a homogeneous element of grade {expected}")]
    NotHomogeneous { expected: usize },
    #[error("grade mismatch in pairing: {left} vs {right}")]
    GradeMismatch { left: usize, right: usize },
    #[error("matrix is not antisymmetric")]
    NotAntisymmetric,
    #[error("coordinate vector has length {len}, expected {n}")]
    BadLength { len: usize, n: usize },
    #[error(transparent)]
    Parse(#[from] rational::ParseRationalError),
}

type Result<T> = std::result::Result<T, ExteriorError>;

fn check_dim(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(ExteriorError::DimensionMismatch { left, right })
    }
}

/// A basis blade `e_S`, bit `i` set iff index `i + 1` belongs to `S`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Blade(u32);

impl Blade {
    pub const SCALAR: Blade = Blade(0);

    pub fn from_bits(bits: u32) -> Self {
        Blade(bits)
    }

    /// Builds a blade from strictly increasing 1-based indices.
    pub fn from_indices(indices: &[usize], n: usize) -> Result<Self> {
        let mut bits = 0u32;
        let mut last = 0usize;
        for &i in indices {
            if i == 0 || i > n {
                return Err(ExteriorError::IndexOutOfRange { index: i, n });
            }
            if i <= last {
                return Err(ExteriorError::UnsortedIndices(indices.to_vec()));
            }
            last = i;
            bits |= 1 << (i - 1);
        }
        Ok(Blade(bits))
    }

    /// The top blade `e_1 ∧ … ∧ e_k`.
    pub fn first(k: usize) -> Self {
        Blade(if k == 0 { 0 } else { u32::MAX >> (32 - k) })
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn grade(self) -> usize {
        self.0.count_ones() as usize
    }

    /// 1-based indices in increasing order.
    pub fn indices(self) -> Vec<usize> {
        (0..32).filter(|b| self.0 & (1 << b) != 0).map(|b| b + 1).collect()
    }

    /// Whether 0-based position `i` belongs to the blade.
    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    fn without(self, i: usize) -> Blade {
        Blade(self.0 & !(1 << i))
    }

    /// Number of elements of the blade strictly below 0-based position `i`.
    fn count_below(self, i: usize) -> u32 {
        (self.0 & ((1u32 << i) - 1)).count_ones()
    }
}

impl Ord for Blade {
    /// Grade first, then lexicographic order of the sorted index lists.
    fn cmp(&self, other: &Self) -> Ordering {
        self.grade().cmp(&other.grade()).then_with(|| {
            let diff = self.0 ^ other.0;
            if diff == 0 {
                Ordering::Equal
            } else if self.0 & (diff & diff.wrapping_neg()) != 0 {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        })
    }
}

impl PartialOrd for Blade {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Blade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return write!(f, "1");
        }
        let idx: Vec<String> = self.indices().iter().map(ToString::to_string).collect();
        write!(f, "e{}", idx.join("."))
    }
}

/// Sign of `e_a ∧ e_b` relative to the sorted blade, or `None` if they overlap.
fn wedge_sign(a: Blade, b: Blade) -> Option<bool> {
    if a.0 & b.0 != 0 {
        return None;
    }
    // Count inversions: pairs (i in a, j in b) with i > j.
    let mut inversions = 0u32;
    let mut rest = b.0;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        inversions += (a.0 >> (j + 1)).count_ones();
    }
    Some(inversions % 2 == 1)
}

/// `ι(e*_i) e_S = (-1)^{#{s ∈ S : s < i}} e_{S∖i}`; `None` if `i ∉ S`.
fn contract_blade(i: usize, s: Blade) -> Option<(bool, Blade)> {
    s.contains(i)
        .then(|| (s.count_below(i) % 2 == 1, s.without(i)))
}

/// Element of Λ(V) with exact rational coefficients, stored sparsely.
#[derive(Clone, PartialEq, Eq)]
pub struct Multivector {
    n: usize,
    terms: BTreeMap<Blade, Rational>,
}

/// One record of the external multivector form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub indices: Vec<usize>,
    #[serde(with = "rational::serde_rational")]
    pub coeff: Rational,
}

impl Multivector {
    pub fn zero(n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n) || n == 0, "unsupported dimension {n}");
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(n: usize, c: Rational) -> Self {
        let mut m = Self::zero(n);
        m.add_term(Blade::SCALAR, c);
        m
    }

    pub fn one(n: usize) -> Self {
        Self::scalar(n, Rational::one())
    }

    pub fn blade(n: usize, blade: Blade, c: Rational) -> Self {
        let mut m = Self::zero(n);
        m.add_term(blade, c);
        m
    }

    /// `c · e_{indices}` from 1-based increasing indices.
    pub fn basis(n: usize, indices: &[usize], c: Rational) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(ExteriorError::BadDimension(n));
        }
        Ok(Self::blade(n, Blade::from_indices(indices, n)?, c))
    }

    /// Grade-1 element `Σ v_i e_i`.
    pub fn vector(v: &[Rational]) -> Self {
        let mut m = Self::zero(v.len());
        for (i, c) in v.iter().enumerate() {
            m.add_term(Blade(1 << i), c.clone());
        }
        m
    }

    pub fn from_records(n: usize, records: &[TermRecord]) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(ExteriorError::BadDimension(n));
        }
        let mut m = Self::zero(n);
        for r in records {
            m.add_term(Blade::from_indices(&r.indices, n)?, r.coeff.clone());
        }
        Ok(m)
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(b, c)| TermRecord {
                indices: b.indices(),
                coeff: c.clone(),
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (Blade, &Rational)> + '_ {
        self.terms.iter().map(|(b, c)| (*b, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, blade: Blade) -> Rational {
        self.terms.get(&blade).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scalar_part(&self) -> Rational {
        self.coeff(Blade::SCALAR)
    }

    pub fn add_term(&mut self, blade: Blade, c: Rational) {
        if c.is_zero() {
            return;
        }
        debug_assert!(blade.0 >> self.n == 0, "blade outside ambient dimension");
        let entry = self.terms.entry(blade).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&blade);
        }
    }

    /// Projection `q_(k)` onto Λᵏ.
    pub fn grade_part(&self, k: usize) -> Multivector {
        Multivector {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(b, _)| b.grade() == k)
                .map(|(b, c)| (*b, c.clone()))
                .collect(),
        }
    }

    /// Grades carrying a nonzero component, ascending.
    pub fn grades(&self) -> Vec<usize> {
        let mut g: Vec<usize> = self.terms.keys().map(|b| b.grade()).collect();
        g.dedup();
        g.sort_unstable();
        g.dedup();
        g
    }

    pub fn max_grade(&self) -> Option<usize> {
        self.terms.keys().map(|b| b.grade()).max()
    }

    pub fn min_grade(&self) -> Option<usize> {
        self.terms.keys().next().map(|b| b.grade())
    }

    pub fn is_homogeneous(&self, k: usize) -> bool {
        self.terms.keys().all(|b| b.grade() == k)
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|b| b.grade() % 2 == 0)
    }

    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    pub fn scale(&self, s: &Rational) -> Multivector {
        if s.is_zero() {
            return Multivector::zero(self.n);
        }
        Multivector {
            n: self.n,
            terms: self.terms.iter().map(|(b, c)| (*b, c * s)).collect(),
        }
    }

    pub fn neg(&self) -> Multivector {
        self.scale(&-Rational::one())
    }

    pub fn add(&self, other: &Multivector) -> Result<Multivector> {
        check_dim(self.n, other.n)?;
        let mut out = self.clone();
        for (b, c) in &other.terms {
            out.add_term(*b, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Multivector) -> Result<Multivector> {
        self.add(&other.neg())
    }

    /// Exterior product.
    pub fn wedge(&self, other: &Multivector) -> Result<Multivector> {
        check_dim(self.n, other.n)?;
        let mut out = Multivector::zero(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some(neg) = wedge_sign(*a, *b) {
                    let c = ca * cb;
                    out.add_term(Blade(a.0 | b.0), if neg { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    /// `ι(e*_i)` for the 0-based coordinate `i`.
    fn contract_basis(&self, i: usize) -> Multivector {
        let mut out = Multivector::zero(self.n);
        for (s, c) in &self.terms {
            if let Some((neg, rest)) = contract_blade(i, *s) {
                out.add_term(rest, if neg { -c.clone() } else { c.clone() });
            }
        }
        out
    }

    /// Image under the algebra map induced by a linear map of V whose
    /// columns are the images of the basis vectors.
    pub fn map_linear(&self, m: &QMatrix) -> Result<Multivector> {
        check_dim(self.n, m.cols())?;
        check_dim(self.n, m.rows())?;
        let images: Vec<Multivector> = (0..self.n).map(|j| Multivector::vector(&m.col(j))).collect();
        let mut out = Multivector::zero(self.n);
        for (s, c) in &self.terms {
            let mut img = Multivector::scalar(self.n, c.clone());
            for i in s.indices() {
                img = img.wedge(&images[i - 1])?;
                if img.is_zero() {
                    break;
                }
            }
            out = out.add(&img)?;
        }
        Ok(out)
    }
}

impl fmt::Debug for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (b, c) in &self.terms {
            let (sign, mag) = if c.is_negative() {
                ("-", -c.clone())
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            if b.0 == 0 {
                write!(f, "{}", format_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{b:?}")?;
            } else {
                write!(f, "{}*{b:?}", format_rational(&mag))?;
            }
        }
        Ok(())
    }
}

/// Element of V* in the basis dual to the lattice basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Covector {
    coords: Vec<Rational>,
}

impl Covector {
    pub fn new(coords: Vec<Rational>) -> Self {
        Self { coords }
    }

    /// The dual basis covector `e*_i`, 1-based.
    pub fn dual_basis(n: usize, i: usize) -> Self {
        let mut coords = vec![Rational::zero(); n];
        coords[i - 1] = Rational::one();
        Self { coords }
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    /// Evaluation `x(v)`.
    pub fn eval(&self, v: &[Rational]) -> Rational {
        self.coords
            .iter()
            .zip(v)
            .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    }
}

/// Antisymmetric form in Λ²V*, stored as its full matrix `b(e_i, e_j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualTwoForm {
    matrix: QMatrix,
}

impl DualTwoForm {
    pub fn new(matrix: QMatrix) -> Result<Self> {
        if !matrix.is_antisymmetric() {
            return Err(ExteriorError::NotAntisymmetric);
        }
        Ok(Self { matrix })
    }

    pub fn from_rows(rows: &[Vec<Rational>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(ExteriorError::BadLength { len: bad.len(), n });
        }
        Self::new(QMatrix::from_rows(rows))
    }

    pub fn zero(n: usize) -> Self {
        Self {
            matrix: QMatrix::zeros(n, n),
        }
    }

    /// `c · e*_k ∧ e*_l` for 1-based `k ≠ l`.
    pub fn elementary(n: usize, k: usize, l: usize, c: Rational) -> Self {
        let mut m = QMatrix::zeros(n, n);
        m[(k - 1, l - 1)] = c.clone();
        m[(l - 1, k - 1)] = -c;
        Self { matrix: m }
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.matrix
    }

    /// `b(e_i, e_j)` with 0-based indices.
    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.matrix[(i, j)]
    }

    pub fn add(&self, other: &DualTwoForm) -> Result<DualTwoForm> {
        check_dim(self.n(), other.n())?;
        Ok(Self {
            matrix: self.matrix.add(&other.matrix),
        })
    }

    pub fn sub(&self, other: &DualTwoForm) -> Result<DualTwoForm> {
        check_dim(self.n(), other.n())?;
        Ok(Self {
            matrix: self.matrix.sub(&other.matrix),
        })
    }

    pub fn scale(&self, s: &Rational) -> DualTwoForm {
        Self {
            matrix: self.matrix.scale(s),
        }
    }

    pub fn neg(&self) -> DualTwoForm {
        self.scale(&-Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }

    /// The form expressed in a new basis whose vectors are the columns of `basis`:
    /// `Bᵀ M B`.
    pub fn in_basis(&self, basis: &QMatrix) -> DualTwoForm {
        Self {
            matrix: basis.transpose().mul(&self.matrix).mul(basis),
        }
    }

    /// `b(v, w)`.
    pub fn eval(&self, v: &[Rational], w: &[Rational]) -> Rational {
        let mw = self.matrix.mul_vec(w);
        v.iter().zip(&mw).fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        self.matrix.to_rows()
    }
}

/// Element of the lattice L = ℤⁿ in the fixed basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeVector {
    coords: Vec<BigInt>,
}

impl LatticeVector {
    pub fn new(coords: Vec<BigInt>) -> Self {
        Self { coords }
    }

    /// Accepts a rational vector only when every coordinate is integral.
    pub fn from_rational(v: &[Rational]) -> Option<Self> {
        v.iter()
            .map(rational::to_integer)
            .collect::<Option<Vec<_>>>()
            .map(Self::new)
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn to_rational(&self) -> Vec<Rational> {
        self.coords.iter().cloned().map(Rational::from_integer).collect()
    }
}

/// `a ∧ b`.
pub fn wedge(a: &Multivector, b: &Multivector) -> Result<Multivector> {
    a.wedge(b)
}

/// `ι(x) q` for a covector `x`.
pub fn contract(x: &Covector, q: &Multivector) -> Result<Multivector> {
    check_dim(x.n(), q.n())?;
    let mut out = Multivector::zero(q.n());
    for (i, c) in x.coords.iter().enumerate() {
        if !c.is_zero() {
            out = out.add(&q.contract_basis(i).scale(c))?;
        }
    }
    Ok(out)
}

/// `ι(b) q = Σ_{k<l} b_{kl} ι(e*_l) ι(e*_k) q`.
pub fn contract_two_form(b: &DualTwoForm, q: &Multivector) -> Result<Multivector> {
    check_dim(b.n(), q.n())?;
    let n = q.n();
    let mut out = Multivector::zero(n);
    for (s, c) in q.terms() {
        if s.grade() < 2 {
            continue;
        }
        let idx: Vec<usize> = s.indices().iter().map(|i| i - 1).collect();
        for (a, &k) in idx.iter().enumerate() {
            for &l in &idx[a + 1..] {
                let bkl = b.get(k, l);
                if bkl.is_zero() {
                    continue;
                }
                let (neg1, rest) = contract_blade(k, s).expect("k in blade");
                let (neg2, rest) = contract_blade(l, rest).expect("l in blade");
                let v = bkl * c;
                out.add_term(rest, if neg1 ^ neg2 { -v } else { v });
            }
        }
    }
    Ok(out)
}

/// `e^{ι(b)} q`; the series stops once `ι(b)ʲ q` vanishes.
pub fn exp_contract(b: &DualTwoForm, q: &Multivector) -> Result<Multivector> {
    check_dim(b.n(), q.n())?;
    let mut out = q.clone();
    let mut term = q.clone();
    let mut j = 1i64;
    loop {
        term = contract_two_form(b, &term)?.scale(&rational::rat(1, j));
        if term.is_zero() {
            break;
        }
        out = out.add(&term)?;
        j += 1;
    }
    Ok(out)
}

/// `e^a` for a homogeneous 2-vector `a`.
pub fn exp_two_vector(a: &Multivector) -> Result<Multivector> {
    if !a.is_homogeneous(2) {
        return Err(ExteriorError::NotHomogeneous { expected: 2 });
    }
    let mut out = Multivector::one(a.n());
    let mut term = Multivector::one(a.n());
    let mut j = 1i64;
    loop {
        term = term.wedge(a)?.scale(&rational::rat(1, j));
        if term.is_zero() {
            break;
        }
        out = out.add(&term)?;
        j += 1;
    }
    Ok(out)
}

/// Determinant pairing `⟨ω, x⟩` between Λᵏ V* and Λᵏ V with
/// `⟨e*_S, e_T⟩ = δ_{S,T}`.
pub fn pair(omega: &Multivector, x: &Multivector) -> Result<Rational> {
    check_dim(omega.n(), x.n())?;
    let grade_of = |m: &Multivector| m.max_grade().unwrap_or(0);
    let (go, gx) = (grade_of(omega), grade_of(x));
    if !omega.is_homogeneous(go) {
        return Err(ExteriorError::NotHomogeneous { expected: go });
    }
    if !x.is_homogeneous(gx) {
        return Err(ExteriorError::NotHomogeneous { expected: gx });
    }
    if !omega.is_zero() && !x.is_zero() && go != gx {
        return Err(ExteriorError::GradeMismatch { left: go, right: gx });
    }
    Ok(omega
        .terms()
        .fold(Rational::zero(), |acc, (b, c)| acc + c * x.coeff(b)))
}

/// `f(x, y) := ι(y) ι(x) f` for a 2-vector `f`; agrees with `f_{kl}` on `(e*_k, e*_l)`.
pub fn bivector_eval(f: &Multivector, x: &Covector, y: &Covector) -> Result<Rational> {
    Ok(contract(y, &contract(x, f)?)?.scalar_part())
}

/// The coefficient matrix `f(e*_i, e*_j)` of a 2-vector.
pub fn bivector_matrix(f: &Multivector) -> QMatrix {
    let n = f.n();
    let mut m = QMatrix::zeros(n, n);
    for (b, c) in f.terms() {
        if b.grade() == 2 {
            let idx = b.indices();
            let (k, l) = (idx[0] - 1, idx[1] - 1);
            m[(k, l)] = c.clone();
            m[(l, k)] = -c.clone();
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn e(n: usize, idx: &[usize]) -> Multivector {
        Multivector::basis(n, idx, int(1)).unwrap()
    }

    /// Brute-force sign of the permutation sorting `seq` (oracle for wedge signs).
    fn perm_sign(seq: &[usize]) -> Option<i64> {
        let mut inv = 0;
        for i in 0..seq.len() {
            for j in i + 1..seq.len() {
                if seq[i] == seq[j] {
                    return None;
                }
                if seq[i] > seq[j] {
                    inv += 1;
                }
            }
        }
        Some(if inv % 2 == 0 { 1 } else { -1 })
    }

    /// Wedge computed by concatenating index lists and sorting by permutation sign.
    fn wedge_oracle(a: &Multivector, b: &Multivector) -> Multivector {
        let mut out = Multivector::zero(a.n());
        for (x, cx) in a.terms() {
            for (y, cy) in b.terms() {
                let mut seq = x.indices();
                seq.extend(y.indices());
                if let Some(s) = perm_sign(&seq) {
                    let mut sorted = seq.clone();
                    sorted.sort_unstable();
                    let blade = Blade::from_indices(&sorted, a.n()).unwrap();
                    out.add_term(blade, cx * cy * int(s));
                }
            }
        }
        out
    }

    #[test]
    fn wedge_examples() {
        let one = Multivector::one(3);
        let q = e(3, &[2, 3]).add(&e(3, &[1])).unwrap();
        assert_eq!(one.wedge(&q).unwrap(), q);
        assert_eq!(e(2, &[1]).wedge(&e(2, &[2])).unwrap(), e(2, &[1, 2]));
        assert_eq!(e(2, &[2]).wedge(&e(2, &[1])).unwrap(), e(2, &[1, 2]).neg());
        // (e1 + e2) ∧ (e1 ∧ e3) = e2 ∧ e1 ∧ e3 = -e123
        let lhs = e(3, &[1]).add(&e(3, &[2])).unwrap();
        let got = lhs.wedge(&e(3, &[1, 3])).unwrap();
        assert_eq!(got, wedge_oracle(&lhs, &e(3, &[1, 3])));
        assert_eq!(got, e(3, &[1, 2, 3]).neg());
        assert!(matches!(
            e(2, &[1]).wedge(&e(3, &[1])),
            Err(ExteriorError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn contraction_examples() {
        let x1 = Covector::dual_basis(3, 1);
        let x2 = Covector::dual_basis(3, 2);
        assert_eq!(contract(&x1, &e(3, &[1])).unwrap(), Multivector::one(3));
        assert!(contract(&x1, &e(3, &[2, 3])).unwrap().is_zero());
        assert_eq!(contract(&x2, &e(3, &[1, 2])).unwrap(), e(3, &[1]).neg());
    }

    #[test]
    fn two_form_contraction_examples() {
        let b12 = DualTwoForm::elementary(4, 1, 2, int(1));
        assert!(contract_two_form(&b12, &Multivector::one(4)).unwrap().is_zero());
        assert_eq!(
            contract_two_form(&DualTwoForm::elementary(2, 1, 2, int(1)), &e(2, &[1, 2])).unwrap(),
            Multivector::one(2)
        );
        let b = b12.add(&DualTwoForm::elementary(4, 3, 4, int(1))).unwrap();
        let got = contract_two_form(&b, &e(4, &[1, 2, 3, 4])).unwrap();
        // Oracle: double single contractions ι(e*_l)ι(e*_k).
        let via_single = |k: usize, l: usize| {
            contract(
                &Covector::dual_basis(4, l),
                &contract(&Covector::dual_basis(4, k), &e(4, &[1, 2, 3, 4])).unwrap(),
            )
            .unwrap()
        };
        let oracle = via_single(1, 2).add(&via_single(3, 4)).unwrap();
        assert_eq!(got, oracle);
        assert_eq!(got, e(4, &[3, 4]).add(&e(4, &[1, 2])).unwrap());
    }

    #[test]
    fn exp_contract_examples() {
        let b = DualTwoForm::elementary(2, 1, 2, rat(2, 7));
        assert_eq!(exp_contract(&b, &Multivector::one(2)).unwrap(), Multivector::one(2));
        let q = Multivector::scalar(2, int(3)).add(&e(2, &[1, 2]).scale(&int(5))).unwrap();
        assert_eq!(exp_contract(&DualTwoForm::zero(2), &q).unwrap(), q);
        // (m + k t) + k e12 with m = 3, k = 5, t = 2/7
        let want = Multivector::scalar(2, int(3) + int(5) * rat(2, 7))
            .add(&e(2, &[1, 2]).scale(&int(5)))
            .unwrap();
        assert_eq!(exp_contract(&b, &q).unwrap(), want);
    }

    #[test]
    fn exp_two_vector_examples() {
        assert_eq!(exp_two_vector(&Multivector::zero(4)).unwrap(), Multivector::one(4));
        let a = e(4, &[1, 2]);
        assert_eq!(exp_two_vector(&a).unwrap(), Multivector::one(4).add(&a).unwrap());
        let a = e(4, &[1, 2]).add(&e(4, &[3, 4])).unwrap();
        let sq = wedge_oracle(&a, &a).scale(&rat(1, 2));
        let want = Multivector::one(4).add(&a).unwrap().add(&sq).unwrap();
        assert_eq!(exp_two_vector(&a).unwrap(), want);
        assert_eq!(sq, e(4, &[1, 2, 3, 4]));
        assert!(exp_two_vector(&e(4, &[1])).is_err());
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(pair(&e(3, &[1, 2]), &e(3, &[1, 2])).unwrap(), int(1));
        assert_eq!(pair(&e(3, &[1, 2]), &e(3, &[1, 3])).unwrap(), int(0));
        let x = e(3, &[1, 3]).scale(&int(2)).sub(&e(3, &[2, 3]).scale(&int(5))).unwrap();
        assert_eq!(pair(&e(3, &[1, 3]), &x).unwrap(), int(2));
        assert!(matches!(
            pair(&e(3, &[1]), &e(3, &[1, 2])),
            Err(ExteriorError::GradeMismatch { .. })
        ));
    }

    #[test]
    fn blade_order_is_grade_then_lex() {
        let mut v: Vec<Blade> = (0u32..16).map(Blade).collect();
        v.sort();
        let shown: Vec<Vec<usize>> = v.iter().map(|b| b.indices()).collect();
        assert_eq!(shown[0], Vec::<usize>::new());
        assert_eq!(shown[5], vec![1, 2]);
        assert_eq!(shown[6], vec![1, 3]);
        assert_eq!(shown[10], vec![3, 4]);
        assert_eq!(shown[15], vec![1, 2, 3, 4]);
    }

    #[test]
    fn graded_commutativity_exhaustive_n4() {
        let n = 4;
        for a in 0u32..16 {
            for b in 0u32..16 {
                let x = Multivector::blade(n, Blade(a), int(1));
                let y = Multivector::blade(n, Blade(b), int(1));
                let sign = if (a.count_ones() * b.count_ones()) % 2 == 0 { 1 } else { -1 };
                assert_eq!(x.wedge(&y).unwrap(), y.wedge(&x).unwrap().scale(&int(sign)));
                assert_eq!(x.wedge(&y).unwrap(), wedge_oracle(&x, &y));
                for c in 0u32..16 {
                    let z = Multivector::blade(n, Blade(c), int(1));
                    assert_eq!(
                        x.wedge(&y).unwrap().wedge(&z).unwrap(),
                        x.wedge(&y.wedge(&z).unwrap()).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn map_linear_matches_determinant() {
        let m = QMatrix::from_rows(&[vec![int(1), int(0)], vec![int(1), int(1)]]);
        // columns (1,1) and (0,1): (e1 + e2) ∧ e2 = e12
        assert_eq!(e(2, &[1, 2]).map_linear(&m).unwrap(), e(2, &[1, 2]));
    }

    fn small_rat() -> impl Strategy<Value = Rational> {
        (-6i64..=6, 1i64..=4).prop_map(|(p, q)| rat(p, q))
    }

    fn multivector(n: usize) -> impl Strategy<Value = Multivector> {
        prop::collection::vec((0u32..(1 << n), small_rat()), 0..6).prop_map(move |terms| {
            let mut m = Multivector::zero(n);
            for (b, c) in terms {
                m.add_term(Blade(b), c);
            }
            m
        })
    }

    fn two_form(n: usize) -> impl Strategy<Value = DualTwoForm> {
        prop::collection::vec(small_rat(), n * (n - 1) / 2).prop_map(move |v| {
            let mut m = QMatrix::zeros(n, n);
            let mut it = v.into_iter();
            for i in 0..n {
                for j in i + 1..n {
                    let c = it.next().unwrap();
                    m[(i, j)] = c.clone();
                    m[(j, i)] = -c;
                }
            }
            DualTwoForm::new(m).unwrap()
        })
    }

    fn covector(n: usize) -> impl Strategy<Value = Covector> {
        prop::collection::vec(small_rat(), n).prop_map(Covector::new)
    }

    proptest! {
        #[test]
        fn wedge_is_associative(
            (a, b, c) in (1usize..=8).prop_flat_map(|n| (multivector(n), multivector(n), multivector(n)))
        ) {
            prop_assert_eq!(a.wedge(&b).unwrap().wedge(&c).unwrap(), a.wedge(&b.wedge(&c).unwrap()).unwrap());
        }

        #[test]
        fn contraction_is_odd_derivation(
            (x, a, b) in (1usize..=6).prop_flat_map(|n| (covector(n), multivector(n), multivector(n)))
        ) {
            let lhs = contract(&x, &a.wedge(&b).unwrap()).unwrap();
            let mut rhs = contract(&x, &a).unwrap().wedge(&b).unwrap();
            for g in a.grades() {
                let part = a.grade_part(g);
                let t = part.wedge(&contract(&x, &b).unwrap()).unwrap();
                rhs = rhs.add(&if g % 2 == 0 { t } else { t.neg() }).unwrap();
            }
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn contractions_anticommute(
            (x, y, q) in (1usize..=6).prop_flat_map(|n| (covector(n), covector(n), multivector(n)))
        ) {
            prop_assert!(contract(&x, &contract(&x, &q).unwrap()).unwrap().is_zero());
            let xy = contract(&x, &contract(&y, &q).unwrap()).unwrap();
            let yx = contract(&y, &contract(&x, &q).unwrap()).unwrap();
            prop_assert_eq!(xy, yx.neg());
        }

        #[test]
        fn two_form_contractions_commute_and_exponentiate(
            (b, c, q) in (2usize..=6).prop_flat_map(|n| (two_form(n), two_form(n), multivector(n)))
        ) {
            let bc = contract_two_form(&b, &contract_two_form(&c, &q).unwrap()).unwrap();
            let cb = contract_two_form(&c, &contract_two_form(&b, &q).unwrap()).unwrap();
            prop_assert_eq!(bc, cb);
            let lhs = exp_contract(&b, &exp_contract(&c, &q).unwrap()).unwrap();
            let rhs = exp_contract(&b.add(&c).unwrap(), &q).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn grade_decomposition_recovers(q in (1usize..=8).prop_flat_map(multivector)) {
            let mut sum = Multivector::zero(q.n());
            for g in 0..=q.n() {
                sum = sum.add(&q.grade_part(g)).unwrap();
            }
            prop_assert_eq!(sum, q);
        }
    }
}
