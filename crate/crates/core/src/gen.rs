//! Seeded random generators for property suites and end-to-end instances.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::exterior::{self, Blade, DualTwoForm, Multivector};
use crate::intlat::IntMatrix;
use crate::linalg::QMatrix;
use crate::pipeline::Instance;
use crate::rational::{int, rat, Rational};

pub fn rational<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> Rational {
    rat(rng.gen_range(-max_num..=max_num), rng.gen_range(1..=max_den))
}

pub fn nonzero_rational<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> Rational {
    loop {
        let r = rational(rng, max_num, max_den);
        if !r.is_zero() {
            return r;
        }
    }
}

/// Antisymmetric form with rational entries, each entry zero with probability 1/4.
pub fn two_form<R: Rng>(rng: &mut R, n: usize, max_num: i64, max_den: i64) -> DualTwoForm {
    let mut m = QMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.75) {
                let v = rational(rng, max_num, max_den);
                m[(i, j)] = v.clone();
                m[(j, i)] = -v;
            }
        }
    }
    DualTwoForm::new(m).expect("antisymmetric by construction")
}

pub fn alternating<R: Rng>(rng: &mut R, n: usize, max: i64) -> IntMatrix {
    let mut m = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = BigInt::from(rng.gen_range(-max..=max));
            m[(i, j)] = v.clone();
            m[(j, i)] = -v;
        }
    }
    m
}

/// Product of random elementary integer operations; determinant ±1.
pub fn unimodular<R: Rng>(rng: &mut R, n: usize, steps: usize) -> IntMatrix {
    let mut rows: Vec<Vec<BigInt>> = IntMatrix::identity(n).to_rows();
    for _ in 0..steps {
        if n < 2 {
            break;
        }
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        match rng.gen_range(0..4) {
            0 => rows.swap(i, j),
            1 => rows[i].iter_mut().for_each(|x| *x = -x.clone()),
            _ => {
                let c = BigInt::from(rng.gen_range(-2i64..=2));
                let src = rows[j].clone();
                for (x, y) in rows[i].iter_mut().zip(src) {
                    *x += &c * y;
                }
            }
        }
    }
    IntMatrix::from_rows(&rows)
}

fn random_vector<R: Rng>(rng: &mut R, n: usize, max_num: i64, max_den: i64) -> Vec<Rational> {
    (0..n).map(|_| rational(rng, max_num, max_den)).collect()
}

/// `w ∧ e^{q1}` with `w` a decomposable form on a random subspace W.
pub fn gqe<R: Rng>(rng: &mut R, n: usize, max: i64) -> Multivector {
    let dim_w = rng.gen_range(0..=n);
    let mut w = Multivector::scalar(n, nonzero_rational(rng, max, max));
    while w.grades().first().copied().unwrap_or(0) < dim_w || w.is_zero() {
        if w.is_zero() {
            w = Multivector::scalar(n, nonzero_rational(rng, max, max));
        }
        let v = random_vector(rng, n, max, max);
        let next = w.wedge(&Multivector::vector(&v)).expect("same dimension");
        if !next.is_zero() {
            w = next;
        }
    }
    let mut q1 = Multivector::zero(n);
    if n >= 2 {
        for _ in 0..rng.gen_range(0..=3) {
            let a = rng.gen_range(0..n);
            let b = (a + rng.gen_range(1..n)) % n;
            q1.add_term(
                Blade::from_bits((1 << a) | (1 << b)),
                rational(rng, max, max),
            );
        }
    }
    w.wedge(&exterior::exp_two_vector(&q1).expect("grade 2"))
        .expect("same dimension")
}

/// Adds a monomial of the opposite parity, so the result has mixed parity.
pub fn opposite_parity_perturbation<R: Rng>(rng: &mut R, q: &Multivector, max: i64) -> Multivector {
    let n = q.n();
    let parity = q.grades().first().map_or(0, |g| g % 2);
    let candidates: Vec<u32> = (0u32..1 << n)
        .filter(|b| (b.count_ones() as usize) % 2 != parity)
        .collect();
    let bits = *candidates.choose(rng).expect("n >= 1");
    let mut out = q.clone();
    out.add_term(Blade::from_bits(bits), nonzero_rational(rng, max, max));
    out
}

/// A positive integral generalized quadratic exponent and a rational θ.
///
/// Seeds `N e_{1..k}`, applies `e^{ι(b)}` with integral `b` and an integral
/// unimodular change of basis, then draws θ with denominators up to
/// `max_den` until the Chern character has nonzero rank; a negative rank is
/// fixed by negating μ. Here τ is always integral, so the finite module is a
/// multiple of the trivial one.
pub fn instance<R: Rng>(rng: &mut R, n: usize, max_den: i64) -> Instance {
    let k = 2 * rng.gen_range(0..=n / 2);
    let seed = Multivector::blade(n, Blade::first(k), int(rng.gen_range(1..=6)));
    twist(rng, seed, max_den)
}

/// Like [`instance`], but seeds `N e^{−ι(τ)} e_{1..k}` with `k ≥ 2` and `Nτ`
/// integral and generally not divisible by N, so the finite module has
/// clock and shift blocks. Needs `n ≥ 2`.
pub fn fractional_instance<R: Rng>(rng: &mut R, n: usize, max_den: i64) -> Instance {
    assert!(n >= 2, "needs a two-dimensional block");
    let m = rng.gen_range(1..=n / 2);
    // Block-diagonal Nτ = Σ c_i e*_{2i−1}∧e*_{2i}; N e^{−ι(τ)} α is integral
    // iff every product of j ≥ 2 of the c_i is divisible by N^{j−1}.
    let (n_mult, cs) = loop {
        let n_mult = rng.gen_range(2..=12i64);
        let cs: Vec<i64> = (0..m).map(|_| rng.gen_range(-n_mult..=n_mult)).collect();
        let integral = (1u32..1 << m).all(|mask| {
            let j = mask.count_ones();
            let prod: i128 = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| cs[i] as i128).product();
            prod % (n_mult as i128).pow(j - 1) == 0
        });
        if integral {
            break (n_mult, cs);
        }
    };
    let mut t = QMatrix::zeros(n, n);
    for (i, &c) in cs.iter().enumerate() {
        t[(2 * i, 2 * i + 1)] = rat(c, n_mult);
        t[(2 * i + 1, 2 * i)] = rat(-c, n_mult);
    }
    let tau = DualTwoForm::new(t).expect("antisymmetric by construction");
    let seed = exterior::exp_contract(&tau.neg(), &Multivector::blade(n, Blade::first(2 * m), int(n_mult)))
        .expect("same dimension");
    debug_assert!(seed.is_integral());
    twist(rng, seed, max_den)
}

fn twist<R: Rng>(rng: &mut R, seed: Multivector, max_den: i64) -> Instance {
    let n = seed.n();
    let mut b = QMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.4) {
                let v = int(rng.gen_range(-2..=2));
                b[(i, j)] = v.clone();
                b[(j, i)] = -v;
            }
        }
    }
    let b = DualTwoForm::new(b).expect("antisymmetric by construction");
    let u = unimodular(rng, n, 3 * n).to_qmatrix();
    let mu = exterior::exp_contract(&b, &seed)
        .and_then(|m| m.map_linear(&u))
        .expect("same dimension");
    loop {
        let theta = two_form(rng, n, 6, max_den);
        let ch0 = exterior::exp_contract(&theta, &mu)
            .expect("same dimension")
            .scalar_part();
        if ch0.is_zero() {
            continue;
        }
        let mu = if ch0.is_negative() { mu.neg() } else { mu.clone() };
        return Instance::new(theta, mu).expect("integral even class");
    }
}

/// An integral element with `|coefficients| ≤ max` and only the listed grades.
pub fn integral_multivector<R: Rng>(rng: &mut R, n: usize, grades: &[usize], max: i64) -> Multivector {
    let mut m = Multivector::zero(n);
    for bits in 0u32..1 << n {
        if grades.contains(&(bits.count_ones() as usize)) && rng.gen_bool(0.3) {
            m.add_term(Blade::from_bits(bits), int(rng.gen_range(-max..=max)));
        }
    }
    m
}
