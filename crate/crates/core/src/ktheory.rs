//! K-theory of the torus: Chern character, positivity, the subspaces cut out by
//! μ, the integer N, and the rational correction τ.
//!
//! Conventions: L = ℤⁿ ⊂ V, θ ∈ Λ²V*, μ ∈ Λ^{even}L. The adapted lattice basis
//! β_1..β_n lists a basis of L_μ = L ∩ W_μ first (k = dim W_μ vectors) and a
//! complement after it; `beta` stores these as rows.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::clifford::{self, CliffordError, GqeDecision};
use crate::exterior::{self, Blade, DualTwoForm, ExteriorError, Multivector};
use crate::intlat::{self, IntMatrix, LatticeError, SkewNormalForm};
use crate::linalg::QMatrix;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum KTheoryError {
    #[error("mu is not a generalized quadratic exponent ({reason})")]
    NotGqe { kernel_dim: usize, reason: String },
    #[error("Chern character has non-positive rank {ch0}")]
    NotPositive { ch0: Rational },
    #[error("mu is not integral")]
    NotIntegral,
    #[error("mu has odd-grade components")]
    NotEven,
    #[error("dimension mismatch: theta has n = {theta}, mu has n = {mu}")]
    DimensionMismatch { theta: usize, mu: usize },
    #[error("theory violation: {0}")]
    TheoryViolation(String),
    #[error(transparent)]
    Clifford(#[from] CliffordError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
}

type Result<T> = std::result::Result<T, KTheoryError>;

fn violation<T>(msg: impl Into<String>) -> Result<T> {
    Err(KTheoryError::TheoryViolation(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusSpec {
    pub theta: DualTwoForm,
}

impl TorusSpec {
    pub fn new(theta: DualTwoForm) -> Self {
        Self { theta }
    }

    pub fn n(&self) -> usize {
        self.theta.n()
    }
}

/// An element of Λ^{even}L.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KClass {
    mu: Multivector,
}

impl KClass {
    pub fn new(mu: Multivector) -> Result<Self> {
        if !mu.is_integral() {
            return Err(KTheoryError::NotIntegral);
        }
        if !mu.is_even() {
            return Err(KTheoryError::NotEven);
        }
        Ok(Self { mu })
    }

    pub fn mu(&self) -> &Multivector {
        &self.mu
    }

    pub fn n(&self) -> usize {
        self.mu.n()
    }
}

/// `ch = d_E · e^f` with `d_E = ch_(0) > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChernData {
    pub ch: Multivector,
    pub d_e: Rational,
    pub f: Multivector,
}

pub fn chern(spec: &TorusSpec, mu: &KClass) -> Result<ChernData> {
    if spec.n() != mu.n() {
        return Err(KTheoryError::DimensionMismatch {
            theta: spec.n(),
            mu: mu.n(),
        });
    }
    if let GqeDecision::NotGqe { kernel_dim, reason } = clifford::is_gqe(mu.mu())? {
        return Err(KTheoryError::NotGqe { kernel_dim, reason });
    }
    let ch = exterior::exp_contract(&spec.theta, mu.mu())?;
    let d_e = ch.scalar_part();
    if !d_e.is_positive() {
        return Err(KTheoryError::NotPositive { ch0: d_e });
    }
    let f = ch.grade_part(2).scale(&d_e.recip());
    if exterior::exp_two_vector(&f)?.scale(&d_e) != ch {
        return violation("ch is not d_E e^f");
    }
    Ok(ChernData { ch, d_e, f })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuGeometry {
    pub n: usize,
    pub k: usize,
    pub u_mu_basis: Vec<Vec<Rational>>,
    pub w_mu_basis: Vec<Vec<Rational>>,
    pub l_mu: IntMatrix,
    pub l_tilde: IntMatrix,
    /// Rows `β_1..β_n`: the L_μ basis followed by the complement.
    pub beta: IntMatrix,
    pub alpha: Multivector,
    pub n_mult: BigInt,
}

impl MuGeometry {
    /// Geometry described only by an adapted basis, as read back from a report.
    /// The subspace bases are rebuilt from the rows of `beta`.
    pub fn from_basis(beta: IntMatrix, k: usize, alpha: Multivector, n_mult: BigInt) -> Self {
        let n = beta.cols();
        let rows = |r: std::ops::Range<usize>| beta.select(&r.collect::<Vec<_>>(), &(0..n).collect::<Vec<_>>());
        let (l_mu, l_tilde) = (rows(0..k), rows(k..n));
        Self {
            n,
            k,
            u_mu_basis: Vec::new(),
            w_mu_basis: l_mu.to_qmatrix().to_rows(),
            l_mu,
            l_tilde,
            beta,
            alpha,
            n_mult,
        }
    }

    pub fn p(&self) -> usize {
        self.k / 2
    }

    pub fn q(&self) -> usize {
        self.n - self.k
    }

    /// `B` with columns `β_i`.
    pub fn basis_matrix(&self) -> QMatrix {
        self.beta.transpose().to_qmatrix()
    }

    /// Coordinates of a multivector in the β basis.
    pub fn to_beta(&self, m: &Multivector) -> Result<Multivector> {
        let inv = self
            .basis_matrix()
            .inverse()
            .expect("β is a lattice basis");
        Ok(m.map_linear(&inv)?)
    }

    /// `b(β_i, β_j)`.
    pub fn form_to_beta(&self, b: &DualTwoForm) -> DualTwoForm {
        b.in_basis(&self.basis_matrix())
    }

    /// Inverse of [`Self::form_to_beta`].
    pub fn form_from_beta(&self, b: &DualTwoForm) -> DualTwoForm {
        b.in_basis(&self.basis_matrix().inverse().expect("β is a lattice basis"))
    }

    pub fn n_rational(&self) -> Rational {
        Rational::from_integer(self.n_mult.clone())
    }
}

fn coefficient_columns(cols: &[Multivector]) -> QMatrix {
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

pub fn mu_geometry(mu: &KClass) -> Result<MuGeometry> {
    let n = mu.n();
    let q = mu.mu();
    if q.is_zero() {
        return Err(KTheoryError::NotGqe {
            kernel_dim: 2 * n,
            reason: "q = 0".into(),
        });
    }
    let contractions: Vec<Multivector> = (1..=n)
        .map(|i| exterior::contract(&exterior::Covector::dual_basis(n, i), q))
        .collect::<std::result::Result<_, _>>()?;
    let u_mu_basis = coefficient_columns(&contractions).kernel();
    let w_mu_basis = if u_mu_basis.is_empty() {
        QMatrix::identity(n).to_rows()
    } else {
        QMatrix::from_rows(&u_mu_basis).kernel()
    };
    let k = w_mu_basis.len();
    if k % 2 != 0 {
        return violation(format!("dim W_mu = {k} is odd"));
    }

    let mut l_mu = intlat::lattice_intersect(n, &w_mu_basis)?;
    let l_tilde = match intlat::unimodular_complement(&l_mu) {
        Ok(c) => c,
        Err(LatticeError::NotSaturated { index }) => {
            return violation(format!("L_mu is not saturated (index {index})"))
        }
        Err(e) => return Err(e.into()),
    };
    let stack = |l_mu: &IntMatrix| {
        let mut rows = l_mu.to_rows();
        rows.extend(l_tilde.to_rows());
        IntMatrix::from_rows_with_cols(&rows, n)
    };

    let mut geom = MuGeometry {
        n,
        k,
        u_mu_basis,
        w_mu_basis,
        beta: stack(&l_mu),
        alpha: intlat::volume_form(&l_mu)?,
        l_mu: l_mu.clone(),
        l_tilde: l_tilde.clone(),
        n_mult: BigInt::zero(),
    };
    let top = Blade::first(k);
    let mu_beta = geom.to_beta(q)?;
    let top_part = mu_beta.grade_part(k);
    let c = top_part.coeff(top);
    if top_part != Multivector::blade(n, top, c.clone()) || mu_beta.max_grade() != Some(k) {
        return violation("mu_(k) is not a multiple of the volume form");
    }
    let Some(mut n_mult) = rational::to_integer(&c) else {
        return violation("N is not an integer");
    };
    if n_mult.is_zero() {
        return violation("N = 0");
    }
    if n_mult.is_negative() {
        for j in 0..n {
            let v = -&l_mu[(0, j)];
            l_mu[(0, j)] = v;
        }
        n_mult = -n_mult;
        geom.alpha = geom.alpha.neg();
        geom.beta = stack(&l_mu);
        geom.l_mu = l_mu;
    }
    geom.n_mult = n_mult;
    Ok(geom)
}

/// `τ` in the β basis, supported on the L_μ block.
pub fn derive_tau_beta(geom: &MuGeometry, mu: &KClass) -> Result<DualTwoForm> {
    let (n, k) = (geom.n, geom.k);
    let mu_beta = geom.to_beta(mu.mu())?;
    let n_rat = geom.n_rational();
    // ι(γ_a∧γ_b) e_{1..k} = (−1)^{a+b+1} e_{1..k \ {a,b}} for 1-based a < b.
    let mut t = QMatrix::zeros(n, n);
    for a in 1..=k {
        for b in a + 1..=k {
            let rest = Blade::first(k).bits() & !(1 << (a - 1)) & !(1 << (b - 1));
            let c = mu_beta.coeff(Blade::from_bits(rest));
            if c.is_zero() {
                continue;
            }
            let v = if (a + b) % 2 == 0 { c } else { -c } / &n_rat;
            t[(a - 1, b - 1)] = v.clone();
            t[(b - 1, a - 1)] = -v;
        }
    }
    let t = DualTwoForm::new(t)?;
    let alpha_beta = Multivector::blade(n, Blade::first(k), n_rat.clone());
    let rebuilt = exterior::exp_contract(&t.neg(), &alpha_beta)?;
    if k >= 2 && rebuilt.grade_part(k - 2) != mu_beta.grade_part(k - 2) {
        return violation("grade k-2 component lies outside the image of the volume form");
    }
    if let Some(g) = mismatched_grade(&rebuilt, &mu_beta) {
        return violation(format!("mu != N e^(-i(tau)) alpha in grade {g}"));
    }
    let scaled = t.scale(&n_rat);
    if !scaled.to_rows().iter().flatten().all(|x| x.is_integer()) {
        return violation("N tau is not integral in the lattice basis");
    }
    Ok(t)
}

/// `τ = θ − θ̃` in the standard basis, from `μ = N e^{−ι(τ)} α`.
pub fn derive_tau(geom: &MuGeometry, mu: &KClass) -> Result<DualTwoForm> {
    Ok(geom.form_from_beta(&derive_tau_beta(geom, mu)?))
}

/// Lowest grade at which two multivectors differ.
pub fn mismatched_grade(a: &Multivector, b: &Multivector) -> Option<usize> {
    (0..=a.n()).find(|&g| a.grade_part(g) != b.grade_part(g))
}

/// The integral k×k matrix `N τ(β_i, β_j)` on the L_μ block.
pub fn n_tau_block(geom: &MuGeometry, tau_beta: &DualTwoForm) -> Result<IntMatrix> {
    let k = geom.k;
    let n_rat = geom.n_rational();
    let mut m = QMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] = tau_beta.get(i, j) * &n_rat;
        }
    }
    IntMatrix::from_qmatrix(&m).map_or_else(|| violation("N tau is not integral"), Ok)
}

/// Pairings `⟨γ'_{2j+1} ∧ … ∧ γ'_k, N ι(τ)^j / j! α⟩` for j = 1..m in the
/// normal-form basis; each must be `± d_1⋯d_j / N^{j−1}` and integral.
pub fn integrality_witness(
    geom: &MuGeometry,
    tau_beta: &DualTwoForm,
    snf: &SkewNormalForm,
) -> Result<Vec<BigInt>> {
    let k = geom.k;
    let n_rat = geom.n_rational();
    let u = snf.u.to_qmatrix();
    let block = QMatrix::from_rows(
        &(0..k)
            .map(|i| (0..k).map(|j| tau_beta.get(i, j).clone()).collect())
            .collect::<Vec<_>>(),
    );
    let tau_prime = DualTwoForm::new(u.transpose().mul(&block).mul(&u))?;
    let u_inv = u.inverse().expect("normal-form transform is unimodular");
    let alpha_prime = Multivector::blade(k, Blade::first(k), Rational::one()).map_linear(&u_inv)?;

    let mut out = Vec::new();
    let mut term = alpha_prime.scale(&n_rat);
    let mut expected = Rational::one();
    for (j, d) in snf.divisors.iter().enumerate() {
        let j1 = j + 1;
        term = exterior::contract_two_form(&tau_prime, &term)?.scale(&rational::rat(1, j1 as i64));
        let rest = Blade::first(k).bits() & !Blade::first(2 * j1).bits();
        let value = term.coeff(Blade::from_bits(rest));
        expected *= Rational::from_integer(d.clone());
        let want = &expected / n_rat.pow(j as i32);
        if value.abs() != want {
            return violation(format!(
                "witness j = {j1} is {value}, expected ±{want}"
            ));
        }
        let Some(v) = rational::to_integer(&value) else {
            return violation(format!("witness j = {j1} is not an integer: {value}"));
        };
        out.push(v);
    }
    Ok(out)
}
