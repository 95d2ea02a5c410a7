//! Finite-dimensional modules over rational noncommutative tori.
//!
//! Generators are monomial matrices whose nonzero entries are roots of unity
//! `e^{2πi k/D}`, stored as exponents modulo a shared denominator `D`; every
//! relation check is integer arithmetic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exterior::DualTwoForm;
use crate::intlat::{self, IntMatrix, LatticeError, SkewNormalForm};
use crate::linalg::QMatrix;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RatmodError {
    #[error("N must be a positive integer that fits in 64 bits, got {0}")]
    BadN(BigInt),
    #[error("divisors do not form a positive divisibility chain")]
    BadDivisorChain,
    #[error("multiplicity N / prod(m_i) = {quotient} is not an integer")]
    DivisibilityFailure { quotient: Rational },
    #[error("divisibility hypotheses unmet: quotient {j} is {value}")]
    HypothesesUnmet { j: usize, value: Rational },
    #[error("phase {phase} is incompatible with block size {m}")]
    PhaseSize { m: u64, phase: Rational },
    #[error("N tau is not integral")]
    NotIntegral,
    #[error("tau is not supported on the first {k} coordinates")]
    BadSupport { k: usize },
    #[error("relation U_{i} U_{j} fails")]
    RelationFailure { i: usize, j: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

type Result<T> = std::result::Result<T, RatmodError>;

/// Monomial matrix: column `j` has the single entry `e^{2πi exps[j]/denom}` in row `perm[j]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclotomicMatrix {
    pub perm: Vec<usize>,
    pub exps: Vec<u64>,
    pub denom: u64,
}

impl CyclotomicMatrix {
    pub fn identity(size: usize, denom: u64) -> Self {
        Self {
            perm: (0..size).collect(),
            exps: vec![0; size],
            denom,
        }
    }

    pub fn size(&self) -> usize {
        self.perm.len()
    }

    /// `diag(ω^{0}, ω^{d}, …, ω^{(m−1)d})` with `ω = e^{2πi/denom}`.
    pub fn clock(m: usize, d: u64, denom: u64) -> Self {
        Self {
            perm: (0..m).collect(),
            exps: (0..m as u64).map(|j| (j * d) % denom).collect(),
            denom,
        }
    }

    /// `e_j ↦ e_{j+1 mod m}`.
    pub fn shift(m: usize, denom: u64) -> Self {
        Self {
            perm: (0..m).map(|j| (j + 1) % m).collect(),
            exps: vec![0; m],
            denom,
        }
    }

    /// Well-formed and unitary: a permutation with in-range exponents.
    pub fn is_unitary(&self) -> bool {
        let mut seen = vec![false; self.size()];
        self.exps.len() == self.size()
            && self.denom > 0
            && self.exps.iter().all(|&e| e < self.denom)
            && self.perm.iter().all(|&r| r < seen.len() && !std::mem::replace(&mut seen[r], true))
    }

    pub fn mul(&self, other: &CyclotomicMatrix) -> CyclotomicMatrix {
        assert_eq!(self.size(), other.size(), "size mismatch in product");
        assert_eq!(self.denom, other.denom, "denominator mismatch in product");
        // (AB) e_j = A (ζ^{b_j} e_{π_B(j)}) = ζ^{b_j + a_{π_B(j)}} e_{π_A(π_B(j))}
        let (perm, exps) = (0..other.size())
            .map(|j| {
                let mid = other.perm[j];
                (self.perm[mid], (other.exps[j] + self.exps[mid]) % self.denom)
            })
            .unzip();
        Self {
            perm,
            exps,
            denom: self.denom,
        }
    }

    pub fn inverse(&self) -> CyclotomicMatrix {
        let mut perm = vec![0; self.size()];
        let mut exps = vec![0; self.size()];
        for (j, &r) in self.perm.iter().enumerate() {
            perm[r] = j;
            exps[r] = (self.denom - self.exps[j]) % self.denom;
        }
        Self {
            perm,
            exps,
            denom: self.denom,
        }
    }

    pub fn pow(&self, e: &BigInt) -> CyclotomicMatrix {
        let base = if e.is_negative() { self.inverse() } else { self.clone() };
        let mut out = Self::identity(self.size(), self.denom);
        let mut k = e.abs();
        let mut sq = base;
        while !k.is_zero() {
            if k.is_odd() {
                out = out.mul(&sq);
            }
            sq = sq.mul(&sq);
            k >>= 1;
        }
        out
    }

    /// `A ⊗ B` with the index of `e_a ⊗ e_b` equal to `a·|B| + b`.
    pub fn tensor(&self, other: &CyclotomicMatrix) -> CyclotomicMatrix {
        assert_eq!(self.denom, other.denom, "denominator mismatch in tensor");
        let nb = other.size();
        let mut perm = Vec::with_capacity(self.size() * nb);
        let mut exps = Vec::with_capacity(self.size() * nb);
        for a in 0..self.size() {
            for b in 0..nb {
                perm.push(self.perm[a] * nb + other.perm[b]);
                exps.push((self.exps[a] + other.exps[b]) % self.denom);
            }
        }
        Self {
            perm,
            exps,
            denom: self.denom,
        }
    }

    /// `A ⊕ A ⊕ … ⊕ A` (`r` copies).
    pub fn repeat_sum(&self, r: usize) -> CyclotomicMatrix {
        Self::identity(r, self.denom).tensor(self)
    }

    /// The rational `c` mod 1 with `AB = e^{2πic} BA`, if the two commute up to a scalar.
    pub fn commutation_phase(&self, other: &CyclotomicMatrix) -> Option<Rational> {
        let ab = self.mul(other);
        let ba = other.mul(self);
        if ab.perm != ba.perm {
            return None;
        }
        let d = self.denom;
        let mut diffs = ab.exps.iter().zip(&ba.exps).map(|(x, y)| (x + d - y) % d);
        let first = diffs.next().unwrap_or(0);
        diffs
            .all(|x| x == first)
            .then(|| rational::rat(first as i64, d as i64))
    }

    /// Dense complex render, `(re, im)` per entry.
    pub fn render(&self) -> Vec<Vec<(f64, f64)>> {
        let m = self.size();
        let mut out = vec![vec![(0.0, 0.0); m]; m];
        for (j, (&r, &e)) in self.perm.iter().zip(&self.exps).enumerate() {
            let angle = 2.0 * std::f64::consts::PI * e as f64 / self.denom as f64;
            out[r][j] = (angle.cos(), angle.sin());
        }
        out
    }
}

/// Dense complex product, used to cross-check the symbolic arithmetic.
pub fn dense_mul(a: &[Vec<(f64, f64)>], b: &[Vec<(f64, f64)>]) -> Vec<Vec<(f64, f64)>> {
    let n = a.len();
    let mut out = vec![vec![(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            let (ar, ai) = a[i][k];
            if ar == 0.0 && ai == 0.0 {
                continue;
            }
            for j in 0..n {
                let (br, bi) = b[k][j];
                out[i][j].0 += ar * br - ai * bi;
                out[i][j].1 += ar * bi + ai * br;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModulePlan {
    #[serde(with = "rational::serde_bigint")]
    pub n: BigInt,
    #[serde(with = "rational::serde_bigint_vec")]
    pub divisors: Vec<BigInt>,
    pub block_dims: Vec<u64>,
    pub multiplicity: u64,
    pub one_generator_count: usize,
}

fn check_n(n: &BigInt) -> Result<u64> {
    n.to_u64()
        .filter(|&v| v > 0)
        .ok_or_else(|| RatmodError::BadN(n.clone()))
}

/// Block sizes `m_i = N / gcd(N, d_i)` and multiplicity `r = N / ∏ m_i`.
pub fn plan_module(n: &BigInt, divisors: &[BigInt], generators: usize) -> Result<ModulePlan> {
    check_n(n)?;
    if divisors.iter().any(|d| !d.is_positive())
        || divisors.windows(2).any(|w| !w[1].is_multiple_of(&w[0]))
    {
        return Err(RatmodError::BadDivisorChain);
    }
    let block_dims: Vec<BigInt> = divisors.iter().map(|d| n / n.gcd(d)).collect();
    let prod: BigInt = block_dims.iter().product();
    let r = Rational::new(n.clone(), prod);
    if !r.is_integer() {
        return Err(RatmodError::DivisibilityFailure { quotient: r });
    }
    Ok(ModulePlan {
        n: n.clone(),
        divisors: divisors.to_vec(),
        block_dims: block_dims.iter().map(|m| m.to_u64().expect("m_i <= N")).collect(),
        multiplicity: r.to_integer().to_u64().expect("r <= N"),
        one_generator_count: generators.saturating_sub(2 * divisors.len()),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GcdCheck {
    HypothesesUnmet { j: usize, value: Rational },
    Holds { quotient: Rational },
    Fails { quotient: Rational },
}

/// Given integral `q_1^j q_2^{j−1}⋯q_j / N^{j−1}` for j = 2..m, decides whether
/// `∏_{i≤m} gcd(N, q_1⋯q_i) / N^{m−1}` is an integer.
pub fn gcd_divisibility_check(n: &BigInt, q: &[BigInt]) -> GcdCheck {
    let n_rat = Rational::from_integer(n.clone());
    let mut d = BigInt::one();
    let mut prod_d = BigInt::one();
    let mut prod_gcd = BigInt::one();
    for (i, qi) in q.iter().enumerate() {
        d *= qi;
        prod_d *= &d;
        prod_gcd *= n.gcd(&d);
        if i >= 1 {
            let value = Rational::from_integer(prod_d.clone()) / n_rat.pow(i as i32);
            if !value.is_integer() {
                return GcdCheck::HypothesesUnmet { j: i + 1, value };
            }
        }
    }
    let quotient = Rational::from_integer(prod_gcd) / n_rat.pow(q.len().saturating_sub(1) as i32);
    if quotient.is_integer() {
        GcdCheck::Holds { quotient }
    } else {
        GcdCheck::Fails { quotient }
    }
}

/// Clock and shift of size `m` with `UV = e^{2πi d/N} VU`.
pub fn clock_shift_pair(m: u64, d: &BigInt, n: &BigInt) -> Result<(CyclotomicMatrix, CyclotomicMatrix)> {
    let denom = check_n(n)?;
    let phase = Rational::new(d.clone(), n.clone());
    if !(&phase * Rational::from_integer(BigInt::from(m))).is_integer() {
        return Err(RatmodError::PhaseSize { m, phase });
    }
    let dm = d.mod_floor(n).to_u64().expect("reduced mod N");
    let size = m as usize;
    Ok((
        CyclotomicMatrix::clock(size, dm, denom),
        CyclotomicMatrix::shift(size, denom),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalModule {
    pub plan: ModulePlan,
    pub snf: SkewNormalForm,
    /// Generator for each lattice basis direction `β_1..β_n`.
    pub generators: Vec<CyclotomicMatrix>,
}

impl RationalModule {
    pub fn dim(&self) -> usize {
        self.generators.first().map_or(0, CyclotomicMatrix::size)
    }
}

/// Builds `U_1..U_n` of size N with `U_i U_j = e^{2πi τ_{ij}} U_j U_i`.
///
/// `tau_beta` is expressed in a lattice basis whose first `k` vectors carry its
/// support; `N τ` must be integral there.
pub fn build_rational_module(tau_beta: &DualTwoForm, k: usize, n_mult: &BigInt) -> Result<RationalModule> {
    let n = tau_beta.n();
    let denom = check_n(n_mult)?;
    let n_rat = Rational::from_integer(n_mult.clone());
    for i in 0..n {
        for j in 0..n {
            if (i >= k || j >= k) && !tau_beta.get(i, j).is_zero() {
                return Err(RatmodError::BadSupport { k });
            }
        }
    }
    let mut block = QMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            block[(i, j)] = tau_beta.get(i, j) * &n_rat;
        }
    }
    let block = IntMatrix::from_qmatrix(&block).ok_or(RatmodError::NotIntegral)?;
    let snf = intlat::skew_normal_form(&block)?;
    if let GcdCheck::HypothesesUnmet { j, value } = gcd_divisibility_check(n_mult, &snf.q_factors()) {
        return Err(RatmodError::HypothesesUnmet { j, value });
    }
    let plan = plan_module(n_mult, &snf.divisors, n)?;

    // Generators for the normal-form basis: a clock/shift pair per divisor,
    // tensored together and repeated r times; zero directions act trivially.
    let mut pairs = Vec::new();
    for (d, &m) in snf.divisors.iter().zip(&plan.block_dims) {
        pairs.push(clock_shift_pair(m, d, n_mult)?);
    }
    let embed = |slot: usize, x: &CyclotomicMatrix| {
        let mut acc = CyclotomicMatrix::identity(plan.multiplicity as usize, denom);
        for (t, &m) in plan.block_dims.iter().enumerate() {
            let factor = if t == slot {
                x.clone()
            } else {
                CyclotomicMatrix::identity(m as usize, denom)
            };
            acc = acc.tensor(&factor);
        }
        acc
    };
    let size = plan.n.to_usize().expect("N fits in usize");
    let mut primed = Vec::with_capacity(k);
    for (t, (clock, shift)) in pairs.iter().enumerate() {
        primed.push(embed(t, clock));
        primed.push(embed(t, shift));
    }
    primed.resize(k, CyclotomicMatrix::identity(size, denom));

    // β_a = Σ_b (U⁻¹)_{ba} β'_b, so U_{β_a} = ∏_b U'_b^{(U⁻¹)_{ba}}.
    let u_inv = snf.u.unimodular_inverse().expect("normal-form transform is unimodular");
    let mut generators = Vec::with_capacity(n);
    for a in 0..n {
        let mut g = CyclotomicMatrix::identity(size, denom);
        if a < k {
            for (b, gb) in primed.iter().enumerate() {
                let c = &u_inv[(b, a)];
                if !c.is_zero() {
                    g = g.mul(&gb.pow(c));
                }
            }
        }
        generators.push(g);
    }
    let module = RationalModule {
        plan,
        snf,
        generators,
    };
    if let Some((i, j)) = first_relation_failure(&module.generators, tau_beta) {
        return Err(RatmodError::RelationFailure { i, j });
    }
    Ok(module)
}

/// First pair `(i, j)` (0-based) whose commutation phase differs from `τ_{ij}` mod 1.
pub fn first_relation_failure(generators: &[CyclotomicMatrix], tau: &DualTwoForm) -> Option<(usize, usize)> {
    for i in 0..generators.len() {
        for j in 0..generators.len() {
            let ok = generators[i]
                .commutation_phase(&generators[j])
                .is_some_and(|c| rational::congruent_mod_one(&c, tau.get(i, j)));
            if !ok {
                return Some((i, j));
            }
        }
    }
    None
}
