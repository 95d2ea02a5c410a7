//! Desk-scale property suites behind `nct selftest`.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clifford::{self, PhaseSpaceVector};
use crate::exterior::{self, Blade, DualTwoForm, Multivector};
use crate::gen;
use crate::intlat;
use crate::pipeline::{self, Decision, Instance, Report};
use crate::ratmod::{self, CyclotomicMatrix, GcdCheck};
use crate::rational::{int, rat, Rational};

pub const SUITES: [&str; 9] = [
    "clifford", "gqe", "closure", "snf", "divisibility", "ratmod", "construction", "gates", "mutation",
];

#[derive(Debug, Clone)]
pub struct Config {
    pub seed: u64,
    /// Largest n for exhaustive enumeration.
    pub exhaustive: usize,
    pub suite: Option<String>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 20240601,
            exhaustive: 4,
            suite: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
    pub elapsed: Duration,
}

impl SuiteResult {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Summary {
    pub suites: Vec<SuiteResult>,
}

impl Summary {
    pub fn pass(&self) -> bool {
        self.suites.iter().all(SuiteResult::pass)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            let _ = writeln!(
                out,
                "{:<12} {} cases={:<7} failures={:<3} time={:.3}s",
                s.name,
                if s.pass() { "PASS" } else { "FAIL" },
                s.cases,
                s.failures.len(),
                s.elapsed.as_secs_f64()
            );
            for f in s.failures.iter().take(5) {
                let _ = writeln!(out, "    {f}");
            }
        }
        let total: usize = self.suites.iter().map(|s| s.cases).sum();
        let _ = writeln!(
            out,
            "{} suites, {} cases, {}",
            self.suites.len(),
            total,
            if self.pass() { "all green" } else { "FAILURES" }
        );
        out
    }
}

struct Tally {
    cases: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self {
            cases: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

fn timed(name: &'static str, f: impl FnOnce(&mut Tally)) -> SuiteResult {
    let start = Instant::now();
    let mut tally = Tally::new();
    f(&mut tally);
    SuiteResult {
        name,
        cases: tally.cases,
        failures: tally.failures,
        elapsed: start.elapsed(),
    }
}

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

pub fn run(config: &Config) -> Result<Summary, String> {
    if let Some(s) = &config.suite {
        if !SUITES.contains(&s.as_str()) {
            return Err(format!("unknown suite {s:?}; expected one of {}", SUITES.join(", ")));
        }
    }
    let wanted = |name: &str| config.suite.as_deref().is_none_or(|s| s == name);
    let seed = config.seed;
    let mut summary = Summary::default();
    for (salt, name) in SUITES.iter().enumerate() {
        if !wanted(name) {
            continue;
        }
        let salt = salt as u64;
        let result = match *name {
            "clifford" => clifford_suite(config.exhaustive),
            "gqe" => gqe_suite(&mut rng_for(seed, salt), 500, config.exhaustive),
            "closure" => closure_suite(&mut rng_for(seed, salt), 200),
            "snf" => snf_suite(&mut rng_for(seed, salt), 300),
            "divisibility" => divisibility_suite(20, 3, 20),
            "ratmod" => ratmod_suite(&mut rng_for(seed, salt), 50),
            "construction" => construction_suite(&mut rng_for(seed, salt), 50),
            "gates" => gates_suite(),
            _ => mutation_suite(&mut rng_for(seed, salt), 10),
        };
        summary.suites.push(result);
    }
    Ok(summary)
}

/// `ρ(u)ρ(u') + ρ(u')ρ(u) = ⟨u, u'⟩` on every basis pair and basis blade.
pub fn clifford_suite(max_n: usize) -> SuiteResult {
    timed("clifford", |t| {
        for n in 1..=max_n {
            for a in 0..2 * n {
                for b in 0..2 * n {
                    let (u, v) = (PhaseSpaceVector::basis(n, a), PhaseSpaceVector::basis(n, b));
                    let g = u.inner(&v);
                    for bits in 0u32..1 << n {
                        let q = Multivector::blade(n, Blade::from_bits(bits), Rational::one());
                        let lhs = clifford::rho(&u, &clifford::rho(&v, &q).expect("same n"))
                            .and_then(|x| Ok(x.add(&clifford::rho(&v, &clifford::rho(&u, &q)?)?)?))
                            .expect("same n");
                        t.check(lhs == q.scale(&g), || format!("n={n} u={a} u'={b} blade={bits:b}"));
                    }
                }
            }
        }
    })
}

/// `Σ c · e_S` from 1-based index lists.
fn mv(n: usize, terms: &[(&[usize], i64)]) -> Multivector {
    let mut m = Multivector::zero(n);
    for (idx, c) in terms {
        m.add_term(Blade::from_indices(idx, n).expect("valid indices"), int(*c));
    }
    m
}

fn reconstructs(q: &Multivector) -> bool {
    match clifford::is_gqe(q) {
        Ok(d) => d.certificate().is_some_and(|c| {
            exterior::exp_two_vector(&c.q1)
                .and_then(|e| c.w.wedge(&e))
                .is_ok_and(|r| r == *q)
        }),
        Err(_) => false,
    }
}

pub fn gqe_suite(rng: &mut ChaCha8Rng, count: usize, exhaustive: usize) -> SuiteResult {
    timed("gqe", |t| {
        for case in 0..count {
            let n = 1 + case % 6;
            let q = gen::gqe(rng, n, 20);
            t.check(reconstructs(&q), || format!("accept/reconstruct failed: {:?}", q.to_records()));
            let bad = gen::opposite_parity_perturbation(rng, &q, 20);
            let rejected = clifford::is_gqe(&bad).is_ok_and(|d| !d.is_gqe());
            t.check(rejected, || format!("perturbation accepted: {:?}", bad.to_records()));
        }
        let counter = mv(4, &[(&[1, 2], 1), (&[3, 4], 1)]);
        let kernel = match clifford::is_gqe(&counter) {
            Ok(clifford::GqeDecision::NotGqe { kernel_dim, .. }) => Some(kernel_dim),
            _ => None,
        };
        t.check(kernel == Some(0), || format!("e12 + e34: kernel {kernel:?}"));
        for n in 1..=exhaustive {
            for bits in 0u32..1 << n {
                let q = Multivector::blade(n, Blade::from_bits(bits), int(3));
                t.check(reconstructs(&q), || format!("blade {bits:b} in n={n}"));
            }
        }
    })
}

pub fn closure_suite(rng: &mut ChaCha8Rng, count: usize) -> SuiteResult {
    timed("closure", |t| {
        for case in 0..count {
            let n = 1 + case % 6;
            let q = gen::gqe(rng, n, 20);
            let b = gen::two_form(rng, n, 20, 20);
            let out = clifford::apply_exp_b(&b, &q).expect("same n");
            let ok = clifford::is_gqe(&out).is_ok_and(|d| d.is_gqe());
            t.check(ok, || format!("e^(i(b)) q rejected for q = {:?}", q.to_records()));
        }
    })
}

/// Unimodularity, exact block form, divisor chain and agreement with the
/// paired Smith divisors.
pub fn snf_suite(rng: &mut ChaCha8Rng, count: usize) -> SuiteResult {
    timed("snf", |t| {
        for _ in 0..count {
            let size = rng.gen_range(1..=8);
            let a = gen::alternating(rng, size, 50);
            let Ok(snf) = intlat::skew_normal_form(&a) else {
                t.check(false, || format!("skew normal form failed on {:?}", a.to_rows()));
                continue;
            };
            let block = snf.u.transpose().mul(&a).mul(&snf.u);
            let chain = snf.divisors.windows(2).all(|w| w[1].is_multiple_of(&w[0]));
            let paired: Vec<BigInt> = snf.divisors.iter().flat_map(|d| [d.clone(), d.clone()]).collect();
            let ok = snf.u.is_unimodular()
                && block == snf.block_form()
                && chain
                && paired == intlat::smith_divisors(&a);
            t.check(ok, || format!("normal form check failed on {:?}", a.to_rows()));
        }
    })
}

/// Every `(N, q_1..q_m)` in range whose hypotheses are integral satisfies the
/// gcd divisibility conclusion.
pub fn divisibility_suite(max_n: u64, max_m: usize, max_q: u64) -> SuiteResult {
    timed("divisibility", |t| {
        for n in 1..=max_n {
            let nb = BigInt::from(n);
            for m in 1..=max_m {
                let mut q = vec![1u64; m];
                loop {
                    let qs: Vec<BigInt> = q.iter().map(|&x| BigInt::from(x)).collect();
                    match ratmod::gcd_divisibility_check(&nb, &qs) {
                        GcdCheck::HypothesesUnmet { .. } => {}
                        GcdCheck::Holds { .. } => t.check(true, String::new),
                        GcdCheck::Fails { quotient } => {
                            t.check(false, || format!("N={n} q={q:?}: quotient {quotient}"))
                        }
                    }
                    let Some(pos) = q.iter().position(|&x| x < max_q) else {
                        break;
                    };
                    q[pos] += 1;
                    q[..pos].iter_mut().for_each(|x| *x = 1);
                }
            }
        }
    })
}

/// Largest entry-wise deviation of `U_i U_j − e^{2πi τ_ij} U_j U_i` in the float render.
pub fn float_relation_error(gens: &[CyclotomicMatrix], tau: &DualTwoForm) -> f64 {
    let rendered: Vec<_> = gens.iter().map(CyclotomicMatrix::render).collect();
    let mut worst = 0.0f64;
    for i in 0..gens.len() {
        for j in 0..gens.len() {
            let ab = ratmod::dense_mul(&rendered[i], &rendered[j]);
            let ba = ratmod::dense_mul(&rendered[j], &rendered[i]);
            let angle = 2.0 * std::f64::consts::PI * crate::rational::to_f64(tau.get(i, j));
            let (c, s) = (angle.cos(), angle.sin());
            for (ra, rb) in ab.iter().zip(&ba) {
                for (&(xr, xi), &(yr, yi)) in ra.iter().zip(rb) {
                    let (zr, zi) = (c * yr - s * yi, c * yi + s * yr);
                    worst = worst.max((xr - zr).hypot(xi - zi));
                }
            }
        }
    }
    worst
}

/// A constructed instance; fractional τ whenever `n ≥ 2`.
fn constructed<R: Rng>(rng: &mut R, n: usize) -> (Instance, Box<pipeline::ModuleDescriptor>) {
    loop {
        let inst = if n >= 2 {
            gen::fractional_instance(rng, n, 12)
        } else {
            gen::instance(rng, n, 12)
        };
        if let Ok(Decision::Constructed(d)) = pipeline::decide(&inst) {
            return (inst, d);
        }
    }
}

pub fn ratmod_suite(rng: &mut ChaCha8Rng, count: usize) -> SuiteResult {
    timed("ratmod", |t| {
        for case in 0..count {
            let (inst, d) = constructed(rng, 1 + case % 8);
            let gens = &d.module.generators;
            let exact = ratmod::first_relation_failure(gens, &d.tau_beta);
            t.check(exact.is_none(), || format!("exact relation fails at {exact:?}: {}", inst.to_json()));
            let dim_ok = BigInt::from(d.module.dim()) == *d.n_mult()
                && gens.iter().all(CyclotomicMatrix::is_unitary);
            t.check(dim_ok, || format!("dim M != N: {}", inst.to_json()));
            let err = float_relation_error(gens, &d.tau_beta);
            t.check(err <= 1e-12, || format!("float render deviates by {err:e}"));
        }
    })
}

pub fn construction_suite(rng: &mut ChaCha8Rng, count: usize) -> SuiteResult {
    timed("construction", |t| {
        for case in 0..2 * count {
            let inst = if case < count {
                gen::instance(rng, 1 + case % 8, 12)
            } else {
                gen::fractional_instance(rng, 2 + case % 7, 12)
            };
            let start = Instant::now();
            let decision = pipeline::decide(&inst);
            let elapsed = start.elapsed();
            let ok = match &decision {
                Ok(d @ Decision::Constructed(_)) => pipeline::verify(&d.report(&inst))
                    .is_ok_and(|checks| checks.iter().all(|c| c.pass)),
                _ => false,
            };
            t.check(ok, || format!("{decision:?} for {}", inst.to_json()));
            t.check(elapsed < Duration::from_secs(1), || {
                format!("instance took {:.3}s: {}", elapsed.as_secs_f64(), inst.to_json())
            });
        }
    })
}

pub fn gates_suite() -> SuiteResult {
    timed("gates", |t| {
        let theta = DualTwoForm::elementary(3, 1, 2, rat(2, 7));
        let free = Instance::new(theta.clone(), Multivector::one(3)).expect("valid");
        let ok = pipeline::decide(&free).is_ok_and(|d| {
            d.descriptor().is_some_and(|m| {
                m.p() == 0 && m.n_mult().is_one() && m.chern.f.is_zero() && m.d_e().is_one()
            })
        });
        t.check(ok, || "mu = 1 is not the free rank-1 module".into());

        let neg = Instance::new(theta.clone(), Multivector::one(3).neg()).expect("valid");
        let ok = matches!(pipeline::decide(&neg), Ok(Decision::NotPositive { .. }));
        t.check(ok, || "mu = -1 not rejected as notPositive".into());

        // ch_(0) = 1 + ι(θ)(−7 e_12) vanishes for θ_12 = 1/7 under either sign.
        let theta7 = DualTwoForm::elementary(2, 1, 2, rat(1, 7));
        let mu = mv(2, &[(&[], 1), (&[1, 2], -7)]);
        let ch0 = exterior::exp_contract(&theta7, &mu).expect("same n").scalar_part();
        let mu = if ch0.is_zero() {
            mu
        } else {
            mv(2, &[(&[], 1), (&[1, 2], 7)])
        };
        let zero_rank = Instance::new(theta7, mu).expect("valid");
        let ok = matches!(pipeline::decide(&zero_rank), Ok(Decision::NotPositive { ch0 }) if ch0.is_zero());
        t.check(ok, || "ch_(0) = 0 not rejected as notPositive".into());

        let zero = Instance::new(theta.clone(), Multivector::zero(3)).expect("valid");
        let ok = matches!(pipeline::decide(&zero), Ok(Decision::NotGqe { .. }));
        t.check(ok, || "mu = 0 not rejected as notGQE".into());

        let counter = mv(4, &[(&[1, 2], 1), (&[3, 4], 1)]);
        let inst = Instance::new(DualTwoForm::zero(4), counter).expect("valid");
        let ok = matches!(pipeline::decide(&inst), Ok(Decision::NotGqe { kernel_dim: 0, .. }));
        t.check(ok, || "e12 + e34 not rejected with kernel dimension 0".into());
    })
}

fn failing(report: &Report) -> Vec<String> {
    match pipeline::verify(report) {
        Ok(checks) => checks.into_iter().filter(|c| !c.pass).map(|c| c.name).collect(),
        Err(e) => vec![format!("error: {e}")],
    }
}

/// Adds `delta` to `θ̃(β_i, β_j)` and subtracts it from `θ̃(β_j, β_i)`.
pub fn mutate_theta_tilde(report: &mut Report, i: usize, j: usize, delta: &Rational) {
    let c = report.construction_mut().expect("constructed report");
    c.theta_tilde[i][j] += delta;
    c.theta_tilde[j][i] -= delta;
}

pub fn mutate_n(report: &mut Report) {
    let c = report.construction_mut().expect("constructed report");
    c.n_mult -= 1;
}

/// Multiplies a diagonal generator by `diag(ω, 1, …, 1)`; returns false when
/// no generator pair makes this visible (all diagonal or N = 1).
pub fn mutate_generator_phase(report: &mut Report) -> bool {
    let c = report.construction_mut().expect("constructed report");
    let gens = &mut c.generators;
    let moves_zero = gens.iter().any(|g| g.perm.first().is_some_and(|&r| r != 0));
    let target = gens.iter().position(|g| g.perm.iter().enumerate().all(|(i, &r)| i == r));
    match target {
        Some(t) if moves_zero && gens[t].denom > 1 => {
            let g = &mut gens[t];
            g.exps[0] = (g.exps[0] + 1) % g.denom;
            true
        }
        _ => false,
    }
}

pub fn mutation_suite(rng: &mut ChaCha8Rng, count: usize) -> SuiteResult {
    timed("mutation", |t| {
        let mut generator_cases = 0;
        let mut attempts = 0;
        while generator_cases < count || attempts < count {
            attempts += 1;
            let (inst, d) = constructed(rng, 2 + attempts % 5);
            let report = d_report(&inst, &d);
            let n = inst.n();
            if n >= 2 && attempts <= count {
                let i = rng.gen_range(0..n);
                let j = (i + rng.gen_range(1..n)) % n;
                let mut m = report.clone();
                mutate_theta_tilde(&mut m, i, j, &rat(1, 7));
                let f = failing(&m);
                t.check(f.contains(&"v_relations".to_string()), || format!("theta~ ({i},{j}) mutation: {f:?}"));

                let mut m = report.clone();
                mutate_n(&mut m);
                let f = failing(&m);
                t.check(f.contains(&"class_check".to_string()), || format!("N mutation: {f:?}"));
            }
            let mut m = report.clone();
            if mutate_generator_phase(&mut m) {
                generator_cases += 1;
                let f = failing(&m);
                t.check(f.contains(&"finite_module_relations".to_string()), || {
                    format!("generator mutation: {f:?}")
                });
            }
            if attempts > 50 * count {
                t.check(false, || "no instance admits a visible generator mutation".into());
                break;
            }
        }
    })
}

fn d_report(inst: &Instance, d: &pipeline::ModuleDescriptor) -> Report {
    Decision::Constructed(Box::new(d.clone())).report(inst)
}
