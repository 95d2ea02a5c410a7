//! Clifford action of Cl(V ⊕ V*) on Λ(V) and the pure-spinor test for
//! generalized quadratic exponents.
//!
//! `ρ(x, y) q = x ∧ q + ι(y) q`. For nonzero `q` the annihilator
//! `{u : ρ(u) q = 0}` is automatically isotropic, so it has dimension at most
//! `n`; `q` is a generalized quadratic exponent exactly when the bound is
//! attained. Every such `q` factors as `w ∧ e^{q1}` with `w` a decomposable
//! top form on `W = {v : v ∧ q = 0}`.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::exterior::{self, Blade, Covector, DualTwoForm, ExteriorError, Multivector};
use crate::linalg::QMatrix;
use crate::rational::Rational;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CliffordError {
    #[error("the zero multivector is not a generalized quadratic exponent")]
    ZeroSpinor,
    #[error("not a generalized quadratic exponent: annihilator has dimension {kernel_dim} < {n}")]
    NotGqe { kernel_dim: usize, n: usize },
    #[error("internal consistency failure: {0}")]
    TheoryViolation(String),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
}

type Result<T> = std::result::Result<T, CliffordError>;

/// Element `(x, y)` of V ⊕ V*.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseSpaceVector {
    pub vee: Vec<Rational>,
    pub star: Vec<Rational>,
}

impl PhaseSpaceVector {
    pub fn new(vee: Vec<Rational>, star: Vec<Rational>) -> Self {
        assert_eq!(vee.len(), star.len(), "both parts must have length n");
        Self { vee, star }
    }

    pub fn n(&self) -> usize {
        self.vee.len()
    }

    /// Basis vector `k` of V ⊕ V* for `k < 2n`: `e_{k+1}` then `e*_{k-n+1}`.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut vee = vec![Rational::zero(); n];
        let mut star = vec![Rational::zero(); n];
        if k < n {
            vee[k] = Rational::one();
        } else {
            star[k - n] = Rational::one();
        }
        Self { vee, star }
    }

    /// `⟨(x1,y1),(x2,y2)⟩ = y2(x1) + y1(x2)`.
    pub fn inner(&self, other: &PhaseSpaceVector) -> Rational {
        let dot = |a: &[Rational], b: &[Rational]| {
            a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
        };
        dot(&other.star, &self.vee) + dot(&self.star, &other.vee)
    }

    fn from_flat(n: usize, v: &[Rational]) -> Self {
        Self::new(v[..n].to_vec(), v[n..].to_vec())
    }
}

/// Data certifying that `q` is a generalized quadratic exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GqeCertificate {
    pub annihilator_basis: Vec<PhaseSpaceVector>,
    pub w_basis: Vec<Vec<Rational>>,
    pub w: Multivector,
    pub q1: Multivector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GqeDecision {
    NotGqe { kernel_dim: usize, reason: String },
    Gqe(Box<GqeCertificate>),
}

impl GqeDecision {
    pub fn is_gqe(&self) -> bool {
        matches!(self, GqeDecision::Gqe(_))
    }

    pub fn certificate(&self) -> Option<&GqeCertificate> {
        match self {
            GqeDecision::Gqe(c) => Some(c),
            GqeDecision::NotGqe { .. } => None,
        }
    }
}

/// Factorization `q = w ∧ e^{q1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub w_basis: Vec<Vec<Rational>>,
    pub w: Multivector,
    pub q1: Multivector,
}

pub fn rho(u: &PhaseSpaceVector, q: &Multivector) -> Result<Multivector> {
    if u.n() != q.n() {
        return Err(ExteriorError::DimensionMismatch {
            left: u.n(),
            right: q.n(),
        }
        .into());
    }
    let left = Multivector::vector(&u.vee).wedge(q)?;
    let right = exterior::contract(&Covector::new(u.star.clone()), q)?;
    Ok(left.add(&right)?)
}

/// Stacks multivectors as the columns of a coefficient matrix indexed by blades.
fn coefficient_matrix(cols: &[Multivector]) -> QMatrix {
    let mut blades: Vec<Blade> = cols.iter().flat_map(|m| m.terms().map(|(b, _)| b)).collect();
    blades.sort();
    blades.dedup();
    let mut m = QMatrix::zeros(blades.len(), cols.len());
    for (j, col) in cols.iter().enumerate() {
        for (b, c) in col.terms() {
            let i = blades.binary_search(&b).expect("blade collected above");
            m[(i, j)] = c.clone();
        }
    }
    m
}

/// Basis of `{u ∈ V ⊕ V* : ρ(u) q = 0}`.
pub fn annihilator(q: &Multivector) -> Result<Vec<PhaseSpaceVector>> {
    if q.is_zero() {
        return Err(CliffordError::ZeroSpinor);
    }
    let n = q.n();
    let cols: Vec<Multivector> = (0..2 * n)
        .map(|k| rho(&PhaseSpaceVector::basis(n, k), q))
        .collect::<Result<_>>()?;
    let m = coefficient_matrix(&cols);
    Ok(m.kernel()
        .iter()
        .map(|v| PhaseSpaceVector::from_flat(n, v))
        .collect())
}

/// Pure-spinor decision with a full certificate on acceptance.
///
/// Errors are reserved for internal inconsistencies (an annihilator that is
/// not isotropic, or a factorization that does not reconstruct `q`).
pub fn is_gqe(q: &Multivector) -> Result<GqeDecision> {
    if q.is_zero() {
        return Ok(GqeDecision::NotGqe {
            kernel_dim: 2 * q.n(),
            reason: "q = 0".into(),
        });
    }
    let n = q.n();
    let ann = annihilator(q)?;
    if ann.len() > n {
        return Err(CliffordError::TheoryViolation(format!(
            "annihilator of a nonzero spinor has dimension {} > {n}",
            ann.len()
        )));
    }
    if ann.len() < n {
        return Ok(GqeDecision::NotGqe {
            kernel_dim: ann.len(),
            reason: format!("annihilator dimension {} < {n}", ann.len()),
        });
    }
    for (i, u) in ann.iter().enumerate() {
        for v in &ann[i..] {
            if !u.inner(v).is_zero() {
                return Err(CliffordError::TheoryViolation(
                    "annihilator is not isotropic".into(),
                ));
            }
        }
    }
    let form = canonical_form_unchecked(q)?;
    Ok(GqeDecision::Gqe(Box::new(GqeCertificate {
        annihilator_basis: ann,
        w_basis: form.w_basis,
        w: form.w,
        q1: form.q1,
    })))
}

/// `q = w ∧ e^{q1}` with `q1` supported on the greedy complement of W.
pub fn canonical_form(q: &Multivector) -> Result<CanonicalForm> {
    if q.is_zero() {
        return Err(CliffordError::ZeroSpinor);
    }
    let kernel_dim = annihilator(q)?.len();
    if kernel_dim != q.n() {
        return Err(CliffordError::NotGqe {
            kernel_dim,
            n: q.n(),
        });
    }
    canonical_form_unchecked(q)
}

fn canonical_form_unchecked(q: &Multivector) -> Result<CanonicalForm> {
    let n = q.n();
    let violation = |m: String| CliffordError::TheoryViolation(m);

    let wedge_cols: Vec<Multivector> = (0..n)
        .map(|i| {
            let mut v = vec![Rational::zero(); n];
            v[i] = Rational::one();
            Multivector::vector(&v).wedge(q)
        })
        .collect::<std::result::Result<_, _>>()?;
    let w_basis = coefficient_matrix(&wedge_cols).kernel();
    let k = w_basis.len();

    let w = q.grade_part(k);
    if q.min_grade() != Some(k) || w.is_zero() {
        return Err(violation(format!(
            "lowest grade of q is {:?}, expected dim W = {k}",
            q.min_grade()
        )));
    }

    // Greedy complement of W among the lattice basis vectors.
    let mut span: Vec<Vec<Rational>> = w_basis.clone();
    let mut complement = Vec::new();
    for j in 0..n {
        let mut cand = span.clone();
        let mut e = vec![Rational::zero(); n];
        e[j] = Rational::one();
        cand.push(e);
        if QMatrix::from_rows(&cand).rank() == cand.len() {
            span = cand;
            complement.push(j);
        }
    }

    // Solve w ∧ q1 = q_(k+2) for q1 ∈ Λ²(complement).
    let pairs: Vec<(usize, usize)> = complement
        .iter()
        .enumerate()
        .flat_map(|(a, &i)| complement[a + 1..].iter().map(move |&j| (i, j)))
        .collect();
    let target = q.grade_part(k + 2);
    let q1 = if pairs.is_empty() {
        Multivector::zero(n)
    } else {
        let images: Vec<Multivector> = pairs
            .iter()
            .map(|&(i, j)| w.wedge(&Multivector::blade(n, Blade::from_bits((1 << i) | (1 << j)), Rational::one())))
            .collect::<std::result::Result<_, _>>()?;
        let mut cols = images.clone();
        cols.push(target.clone());
        let m = coefficient_matrix(&cols);
        let a = QMatrix::from_cols(
            m.rows(),
            &(0..pairs.len()).map(|j| m.col(j)).collect::<Vec<_>>(),
        );
        let b = m.col(pairs.len());
        let coeffs = a
            .solve(&b)
            .ok_or_else(|| violation("grade k+2 component is not w ∧ q1".into()))?;
        let mut q1 = Multivector::zero(n);
        for (&(i, j), c) in pairs.iter().zip(coeffs) {
            q1.add_term(Blade::from_bits((1 << i) | (1 << j)), c);
        }
        q1
    };

    let rebuilt = w.wedge(&exterior::exp_two_vector(&q1)?)?;
    if &rebuilt != q {
        return Err(violation("w ∧ e^{q1} does not reconstruct q".into()));
    }
    Ok(CanonicalForm { w_basis, w, q1 })
}

/// `e^{ρ(b)} q = e^{ι(b)} q`.
pub fn apply_exp_b(b: &DualTwoForm, q: &Multivector) -> Result<Multivector> {
    Ok(exterior::exp_contract(b, q)?)
}
