//! End-to-end construction: decide whether μ is a positive generalized
//! quadratic exponent and, if so, build and verify the module data.
//!
//! Stages run in order: GQE test, Chern character, the μ-adapted lattice
//! basis, τ with its integrality witnesses, the skew normal form and the
//! finite-dimensional module, the Heisenberg operators, the Rieffel class, and
//! the final identity `ch(E) = N e^{ι(θ̃)} α = e^{ι(θ)} μ`. Every constructed
//! report is then re-checked by [`verify`], which reads nothing but the report.

use std::fmt::Display;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clifford::{self, GqeDecision};
use crate::exterior::{self, DualTwoForm, Multivector, TermRecord};
use crate::heismod::{self, ConnectionData, Darboux, HeisenbergDerivation, RieffelClass, WeylOperator};
use crate::intlat::{self, IntMatrix, SkewNormalForm};
use crate::ktheory::{self, ChernData, KClass, KTheoryError, MuGeometry, TorusSpec};
use crate::ratmod::{self, CyclotomicMatrix, ModulePlan, RationalModule};
use crate::rational::{self, format_rational, Rational};

pub const RATIONAL_THETA_CAVEAT: &str = "theta has rational entries: this report exhibits one \
projective module E with a constant curvature connection and [E] = mu; uniqueness of such a \
module is claimed only for irrational theta.";

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PipelineError {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("theory violation in {stage}: {message}")]
    TheoryViolation { stage: String, message: String },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Malformed(_) => 3,
            PipelineError::TheoryViolation { .. } => 4,
        }
    }
}

type Result<T> = std::result::Result<T, PipelineError>;

fn malformed(e: impl Display) -> PipelineError {
    PipelineError::Malformed(e.to_string())
}

fn theory(stage: &'static str) -> impl Fn(&dyn Display) -> PipelineError {
    move |e| PipelineError::TheoryViolation {
        stage: stage.into(),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    theta: DualTwoForm,
    mu: KClass,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n: usize,
    #[serde(with = "rational::serde_rational_matrix")]
    theta: Vec<Vec<Rational>>,
    mu: Vec<TermRecord>,
}

impl Instance {
    pub fn new(theta: DualTwoForm, mu: Multivector) -> Result<Self> {
        if theta.n() != mu.n() {
            return Err(malformed(format!(
                "theta is {0}x{0} but mu lives in dimension {1}",
                theta.n(),
                mu.n()
            )));
        }
        Ok(Self {
            theta,
            mu: KClass::new(mu).map_err(malformed)?,
        })
    }

    pub fn n(&self) -> usize {
        self.theta.n()
    }

    pub fn theta(&self) -> &DualTwoForm {
        &self.theta
    }

    pub fn mu(&self) -> &KClass {
        &self.mu
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text).map_err(malformed)?;
        if file.theta.len() != file.n {
            return Err(malformed(format!("theta must have {} rows", file.n)));
        }
        let theta = DualTwoForm::from_rows(&file.theta).map_err(malformed)?;
        let mu = Multivector::from_records(file.n, &file.mu).map_err(malformed)?;
        Self::new(theta, mu)
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            n: self.n(),
            theta: self.theta.to_rows(),
            mu: self.mu.mu().to_records(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    NotGqe { kernel_dim: usize, reason: String },
    NotPositive { ch0: Rational },
    Constructed(Box<ModuleDescriptor>),
}

impl Decision {
    pub fn exit_code(&self) -> i32 {
        match self {
            Decision::Constructed(_) => 0,
            _ => 2,
        }
    }

    pub fn descriptor(&self) -> Option<&ModuleDescriptor> {
        match self {
            Decision::Constructed(d) => Some(d),
            _ => None,
        }
    }

    pub fn report(&self, inst: &Instance) -> Report {
        let body = match self {
            Decision::NotGqe { kernel_dim, reason } => ReportBody::NotGqe {
                kernel_dim: *kernel_dim,
                reason: reason.clone(),
            },
            Decision::NotPositive { ch0 } => ReportBody::NotPositive { ch0: ch0.clone() },
            Decision::Constructed(d) => ReportBody::Constructed(Box::new(d.construction())),
        };
        let checks = match self {
            Decision::Constructed(d) => d.checks.clone(),
            _ => Vec::new(),
        };
        let mut report = Report {
            body,
            caveat: RATIONAL_THETA_CAVEAT.into(),
            n: inst.n(),
            theta: inst.theta.to_rows(),
            mu: inst.mu.mu().to_records(),
            checks,
        };
        if !matches!(self, Decision::Constructed(_)) {
            report.checks = verify(&report).unwrap_or_default();
        }
        report
    }
}

/// Every object produced by a successful construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleDescriptor {
    pub theta: DualTwoForm,
    pub mu: Multivector,
    pub chern: ChernData,
    pub geometry: MuGeometry,
    /// τ in the β basis.
    pub tau_beta: DualTwoForm,
    pub snf: SkewNormalForm,
    pub witnesses: Vec<BigInt>,
    pub module: RationalModule,
    pub connection: ConnectionData,
    pub rieffel: RieffelClass,
    /// `N e^{ι(θ̃)} α` in the standard basis.
    pub ch_e: Multivector,
    pub checks: Vec<Check>,
}

impl ModuleDescriptor {
    pub fn p(&self) -> usize {
        self.geometry.p()
    }

    pub fn q(&self) -> usize {
        self.geometry.q()
    }

    pub fn n_mult(&self) -> &BigInt {
        &self.geometry.n_mult
    }

    pub fn d(&self) -> &Rational {
        &self.rieffel.d
    }

    pub fn d_e(&self) -> &Rational {
        &self.chern.d_e
    }

    pub fn theta_tilde_beta(&self) -> &DualTwoForm {
        &self.connection.theta_tilde
    }

    fn construction(&self) -> Construction {
        Construction {
            n_mult: self.geometry.n_mult.clone(),
            p: self.p(),
            q: self.q(),
            d: self.rieffel.d.clone(),
            d_e: self.chern.d_e.clone(),
            f: self.chern.f.to_records(),
            beta: self.geometry.beta.to_rows(),
            alpha: self.geometry.alpha.to_records(),
            theta_tilde: self.connection.theta_tilde.to_rows(),
            tau: self.tau_beta.to_rows(),
            orientation: self.rieffel.orientation,
            witnesses: self.witnesses.clone(),
            darboux: self.connection.darboux.clone(),
            operators: Operators {
                nabla: self.connection.nabla.clone(),
                v: self.connection.v.clone(),
            },
            module_plan: self.module.plan.clone(),
            generators: self.module.generators.clone(),
            ch_e: self.ch_e.to_records(),
        }
    }
}

/// One named verification result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operators {
    pub nabla: Vec<HeisenbergDerivation>,
    #[serde(rename = "V")]
    pub v: Vec<WeylOperator>,
}

/// Construction data of a report. Forms `thetaTilde` and `tau`, and all
/// operator data, are expressed in the β basis; `f`, `alpha` and `chE` are in
/// the standard basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Construction {
    #[serde(rename = "N", with = "rational::serde_bigint")]
    pub n_mult: BigInt,
    pub p: usize,
    pub q: usize,
    #[serde(with = "rational::serde_rational")]
    pub d: Rational,
    #[serde(rename = "dE", with = "rational::serde_rational")]
    pub d_e: Rational,
    pub f: Vec<TermRecord>,
    #[serde(with = "rational::serde_bigint_matrix")]
    pub beta: Vec<Vec<BigInt>>,
    pub alpha: Vec<TermRecord>,
    #[serde(with = "rational::serde_rational_matrix")]
    pub theta_tilde: Vec<Vec<Rational>>,
    #[serde(with = "rational::serde_rational_matrix")]
    pub tau: Vec<Vec<Rational>>,
    pub orientation: i8,
    #[serde(with = "rational::serde_bigint_vec")]
    pub witnesses: Vec<BigInt>,
    pub darboux: Darboux,
    pub operators: Operators,
    pub module_plan: ModulePlan,
    pub generators: Vec<CyclotomicMatrix>,
    #[serde(rename = "chE")]
    pub ch_e: Vec<TermRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "decision")]
pub enum ReportBody {
    #[serde(rename = "constructed")]
    Constructed(Box<Construction>),
    #[serde(rename = "notGQE", rename_all = "camelCase")]
    NotGqe { kernel_dim: usize, reason: String },
    #[serde(rename = "notPositive")]
    NotPositive {
        #[serde(with = "rational::serde_rational")]
        ch0: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    #[serde(flatten)]
    pub body: ReportBody,
    pub caveat: String,
    pub n: usize,
    #[serde(with = "rational::serde_rational_matrix")]
    pub theta: Vec<Vec<Rational>>,
    pub mu: Vec<TermRecord>,
    #[serde(default)]
    pub checks: Vec<Check>,
}

impl Report {
    pub fn decision(&self) -> &'static str {
        match self.body {
            ReportBody::Constructed(_) => "constructed",
            ReportBody::NotGqe { .. } => "notGQE",
            ReportBody::NotPositive { .. } => "notPositive",
        }
    }

    pub fn construction(&self) -> Option<&Construction> {
        match &self.body {
            ReportBody::Constructed(c) => Some(c),
            _ => None,
        }
    }

    pub fn construction_mut(&mut self) -> Option<&mut Construction> {
        match &mut self.body {
            ReportBody::Constructed(c) => Some(c),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(malformed)
    }

    pub fn all_pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }
}

/// Runs the construction; input rejections are `Ok` decisions.
pub fn decide(inst: &Instance) -> Result<Decision> {
    let n = inst.n();
    let spec = TorusSpec::new(inst.theta.clone());
    let chern = match ktheory::chern(&spec, &inst.mu) {
        Ok(c) => c,
        Err(KTheoryError::NotGqe { kernel_dim, reason }) => {
            return Ok(Decision::NotGqe { kernel_dim, reason })
        }
        Err(KTheoryError::NotPositive { ch0 }) => return Ok(Decision::NotPositive { ch0 }),
        Err(e) => return Err(theory("chern")(&e)),
    };
    let geometry = ktheory::mu_geometry(&inst.mu).map_err(|e| theory("mu_geometry")(&e))?;
    let k = geometry.k;
    let n_mult = geometry.n_mult.clone();
    let tau_beta = ktheory::derive_tau_beta(&geometry, &inst.mu).map_err(|e| theory("derive_tau")(&e))?;
    let block = ktheory::n_tau_block(&geometry, &tau_beta).map_err(|e| theory("derive_tau")(&e))?;
    let snf = intlat::skew_normal_form(&block).map_err(|e| theory("skew_normal_form")(&e))?;
    let witnesses = ktheory::integrality_witness(&geometry, &tau_beta, &snf)
        .map_err(|e| theory("integrality_witness")(&e))?;
    let module = ratmod::build_rational_module(&tau_beta, k, &n_mult)
        .map_err(|e| theory("rational_module")(&e))?;

    let theta_beta = geometry.form_to_beta(&inst.theta);
    let f_beta = geometry.to_beta(&chern.f).map_err(|e| theory("heisenberg_module")(&e))?;
    let connection = heismod::build_connection(&theta_beta, &f_beta, k)
        .map_err(|e| theory("heisenberg_module")(&e))?;
    let alpha_beta = heismod::standard_volume(n, k);
    let rieffel = heismod::rieffel_class(&connection.v, k, &alpha_beta, &connection.theta_tilde, &f_beta)
        .map_err(|e| theory("rieffel_class")(&e))?;

    let assembly = theory("assembly");
    let tau_op = theta_beta
        .sub(&connection.theta_tilde)
        .map_err(|e| assembly(&e))?;
    if tau_op != tau_beta {
        return Err(assembly(&"theta - theta~ differs from the derived tau"));
    }
    let n_rat = Rational::from_integer(n_mult.clone());
    if chern.d_e != &n_rat * &rieffel.d {
        return Err(assembly(&"d_E != N d"));
    }
    let theta_tilde_std = geometry.form_from_beta(&connection.theta_tilde);
    let ch_e = exterior::exp_contract(&theta_tilde_std, &geometry.alpha)
        .map_err(|e| assembly(&e))?
        .scale(&n_rat);
    if ch_e != chern.ch {
        return Err(assembly(&"ch(E) != e^(i(theta)) mu"));
    }

    let mut descriptor = ModuleDescriptor {
        theta: inst.theta.clone(),
        mu: inst.mu.mu().clone(),
        chern,
        geometry,
        tau_beta,
        snf,
        witnesses,
        module,
        connection,
        rieffel,
        ch_e,
        checks: Vec::new(),
    };
    let decision = Decision::Constructed(Box::new(descriptor.clone()));
    let checks = verify(&decision.report(inst))?;
    if let Some(bad) = checks.iter().find(|c| !c.pass) {
        return Err(theory("verify")(&format!("{}: {}", bad.name, bad.detail)));
    }
    descriptor.checks = checks;
    Ok(Decision::Constructed(Box::new(descriptor)))
}

/// Convenience: decide and render the report.
pub fn decide_report(inst: &Instance) -> Result<Report> {
    Ok(decide(inst)?.report(inst))
}

fn grades_where_differ(a: &Multivector, b: &Multivector) -> Vec<usize> {
    (0..=a.n())
        .filter(|&g| a.grade_part(g) != b.grade_part(g))
        .collect()
}

fn describe_grades(grades: &[usize]) -> String {
    let g: Vec<String> = grades.iter().map(ToString::to_string).collect();
    format!("mismatch in grades [{}]", g.join(", "))
}

fn pair_detail(what: &str, pair: Option<(usize, usize)>) -> (bool, String) {
    match pair {
        None => (true, format!("{what} hold for all pairs")),
        Some((i, j)) => (false, format!("{what} fail at pair ({}, {})", i + 1, j + 1)),
    }
}

/// Re-checks a report from its own contents. Malformed structure is an error;
/// every mathematical failure is a failing [`Check`].
pub fn verify(report: &Report) -> Result<Vec<Check>> {
    let n = report.n;
    if report.theta.len() != n {
        return Err(malformed(format!("theta must have {n} rows")));
    }
    let theta = DualTwoForm::from_rows(&report.theta).map_err(malformed)?;
    let mu = Multivector::from_records(n, &report.mu).map_err(malformed)?;
    let mut checks = vec![Check::new(
        "instance",
        mu.is_integral() && mu.is_even(),
        "mu must be integral and even",
    )];
    let Ok(kclass) = KClass::new(mu.clone()) else {
        return Ok(checks);
    };
    match &report.body {
        ReportBody::NotGqe { kernel_dim, .. } => {
            let gate = clifford::is_gqe(&mu).map_err(malformed)?;
            let ok = match &gate {
                GqeDecision::NotGqe { kernel_dim: k, .. } => k == kernel_dim,
                GqeDecision::Gqe(_) => false,
            };
            checks.push(Check::new("rejection_gate", ok, format!("annihilator dimension {kernel_dim}")));
        }
        ReportBody::NotPositive { ch0 } => {
            let gqe = clifford::is_gqe(&mu).map_err(malformed)?.is_gqe();
            let actual = exterior::exp_contract(&theta, &mu).map_err(malformed)?.scalar_part();
            let ok = gqe && &actual == ch0 && !actual.is_positive();
            checks.push(Check::new("rejection_gate", ok, format!("ch_(0) = {}", format_rational(&actual))));
        }
        ReportBody::Constructed(c) => verify_construction(&theta, &kclass, c, &mut checks)?,
    }
    Ok(checks)
}

fn validate_shapes(n: usize, c: &Construction) -> Result<()> {
    let (p, q) = (c.p, c.q);
    let bad = |what: &str| Err(malformed(format!("{what} has the wrong shape")));
    if 2 * p + q != n {
        return bad("p, q");
    }
    if c.beta.len() != n || c.beta.iter().any(|r| r.len() != n) {
        return bad("beta");
    }
    for (name, m) in [("thetaTilde", &c.theta_tilde), ("tau", &c.tau)] {
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            return bad(name);
        }
    }
    let ops = &c.operators;
    if ops.nabla.len() != n
        || ops.nabla.iter().any(|d| d.kappa.len() != p || d.psi.len() != p || d.lambda.len() != q)
    {
        return bad("operators.nabla");
    }
    if ops.v.len() != n
        || ops.v.iter().any(|o| o.t.len() != p || o.chi.len() != p || o.s.len() != q || o.l.len() != q)
    {
        return bad("operators.V");
    }
    let d = &c.darboux;
    if d.f.len() != p
        || d.u.len() != p
        || d.v.len() != p
        || d.u.iter().chain(&d.v).any(|x| x.len() != 2 * p)
    {
        return bad("darboux");
    }
    if c.generators.len() != n {
        return bad("generators");
    }
    Ok(())
}

fn verify_construction(
    theta: &DualTwoForm,
    kclass: &KClass,
    c: &Construction,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let n = theta.n();
    let mu = kclass.mu();
    validate_shapes(n, c)?;
    let (p, k) = (c.p, 2 * c.p);
    let theta_tilde = DualTwoForm::from_rows(&c.theta_tilde).map_err(malformed)?;
    let tau = DualTwoForm::from_rows(&c.tau).map_err(malformed)?;
    let f = Multivector::from_records(n, &c.f).map_err(malformed)?;
    let alpha = Multivector::from_records(n, &c.alpha).map_err(malformed)?;
    let ch_e_report = Multivector::from_records(n, &c.ch_e).map_err(malformed)?;
    let beta = IntMatrix::from_rows_with_cols(&c.beta, n);
    let n_mult = c.n_mult.clone();
    let n_rat = Rational::from_integer(n_mult.clone());
    let n_positive = n_mult.is_positive();
    let mut push = |name: &str, pass: bool, detail: String| checks.push(Check::new(name, pass, detail));

    let unimodular = beta.is_unimodular();
    push("lattice_basis", unimodular, format!("det(beta) = {}", beta.det()));
    if !unimodular {
        return Ok(());
    }
    let geom = MuGeometry::from_basis(beta.clone(), k, alpha.clone(), n_mult.clone());
    let to_beta = |m: &Multivector| geom.to_beta(m).map_err(malformed);
    let theta_beta = geom.form_to_beta(theta);
    let alpha_beta = heismod::standard_volume(n, k);

    let gqe = clifford::is_gqe(mu).map_err(malformed)?;
    push("gqe", gqe.is_gqe(), "mu passes the annihilator test".into());

    let ch = exterior::exp_contract(theta, mu).map_err(malformed)?;
    let ch0 = ch.scalar_part();
    push(
        "positivity",
        ch0.is_positive() && ch0 == c.d_e,
        format!("ch_(0) = {}, dE = {}", format_rational(&ch0), format_rational(&c.d_e)),
    );
    let e_f = exterior::exp_two_vector(&f).map_err(malformed)?;
    let dfe = e_f.scale(&c.d_e);
    let diff = grades_where_differ(&dfe, &ch);
    push("chern_form", diff.is_empty(), if diff.is_empty() { "ch = dE e^f".into() } else { describe_grades(&diff) });
    let curvature_ok = !ch0.is_zero() && f == ch.grade_part(2).scale(&ch0.recip());
    push("curvature", curvature_ok, "f = ch_(2) / ch_(0)".into());

    let l_mu = beta.select(&(0..k).collect::<Vec<_>>(), &(0..n).collect::<Vec<_>>());
    let vol_ok = intlat::volume_form(&l_mu).is_ok_and(|v| v == alpha);
    let top_ok = mu.grade_part(k) == alpha.scale(&n_rat);
    push(
        "alpha_volume",
        vol_ok && top_ok && n_positive,
        format!(
            "alpha = beta_1 ^ .. ^ beta_{k}: {vol_ok}; mu_({k}) = N alpha: {top_ok}; N = {n_mult}"
        ),
    );

    let mu_beta = to_beta(mu)?;
    let rebuilt = exterior::exp_contract(&tau.neg(), &alpha_beta)
        .map_err(malformed)?
        .scale(&n_rat);
    let diff = grades_where_differ(&rebuilt, &mu_beta);
    push(
        "mu_reconstruction",
        diff.is_empty() && n_positive,
        if diff.is_empty() { "mu = N e^(-i(tau)) alpha".into() } else { describe_grades(&diff) },
    );

    let supported = (0..n).all(|i| (0..n).all(|j| (i < k && j < k) || tau.get(i, j).is_zero()));
    let integral = tau.scale(&n_rat).to_rows().iter().flatten().all(|x| x.is_integer());
    push(
        "tau_integral",
        supported && integral && n_positive,
        format!("tau supported on the L_mu block: {supported}; N tau integral: {integral}"),
    );

    let derived = if n_positive {
        ktheory::derive_tau_beta(&geom, kclass).map_err(|e| e.to_string())
    } else {
        Err("N must be positive".to_string())
    };
    push(
        "tau_matches_derivation",
        derived.as_ref().is_ok_and(|t| *t == tau),
        match &derived {
            Ok(_) => "tau from mu agrees with the report".into(),
            Err(e) => e.clone(),
        },
    );
    let op_tau = theta_beta.sub(&theta_tilde).map_err(malformed)?;
    push(
        "theta_minus_theta_tilde",
        op_tau == tau,
        "theta - theta~ = tau in the beta basis".into(),
    );

    let f_beta = to_beta(&f)?;
    let f_matrix = exterior::bivector_matrix(&f_beta);
    let nabla = &c.operators.nabla;
    let v = &c.operators.v;
    let (ok, detail) = pair_detail("[nabla_i, nabla_j] = 2 pi i f_ij", heismod::first_nabla_failure(nabla, &f_matrix));
    push("nabla_relations", ok, detail);
    let (ok, detail) = pair_detail(
        "[nabla_x, V_i] = 2 pi i x(beta_i) V_i",
        heismod::first_nabla_v_failure(nabla, v),
    );
    push("nabla_v_relations", ok, detail);
    let (ok, detail) = pair_detail(
        "V_i V_j = e^(2 pi i theta~_ij) V_j V_i",
        heismod::first_v_failure(v, &theta_tilde),
    );
    push("v_relations", ok, detail);

    let darboux_ok = c.darboux.f.iter().all(|x| !x.is_zero())
        && (0..p).all(|i| {
            (0..p).all(|j| {
                let fx = |a: &[Rational], b: &[Rational]| {
                    let mut s = Rational::zero();
                    for (r, ar) in a.iter().enumerate() {
                        for (t, bt) in b.iter().enumerate() {
                            s += ar * bt * &f_matrix[(r, t)];
                        }
                    }
                    s
                };
                let want = if i == j { c.darboux.f[i].clone() } else { Rational::zero() };
                fx(&c.darboux.u[i], &c.darboux.v[j]) == want
                    && fx(&c.darboux.u[i], &c.darboux.u[j]).is_zero()
                    && fx(&c.darboux.v[i], &c.darboux.v[j]).is_zero()
            })
        });
    push("darboux", darboux_ok, "Gram matrix of the Darboux basis".into());

    let class = heismod::rieffel_class(v, k, &alpha_beta, &theta_tilde, &f_beta);
    let (ok, detail) = match &class {
        Ok(r) => (
            r.class == alpha_beta && r.orientation == c.orientation && r.d == c.d,
            format!(
                "[E~] = alpha with orientation {} and d = |det T~| = {}",
                r.orientation,
                format_rational(&r.d)
            ),
        ),
        Err(e) => (false, e.to_string()),
    };
    push("rieffel_class", ok, detail);
    push(
        "dimension",
        c.d_e == &n_rat * &c.d,
        format!("dE = N d: {} = {} * {}", format_rational(&c.d_e), n_mult, format_rational(&c.d)),
    );

    let witness = if n_positive && integral && supported {
        ktheory::n_tau_block(&geom, &tau)
            .map_err(|e| e.to_string())
            .and_then(|b| intlat::skew_normal_form(&b).map_err(|e| e.to_string()))
            .and_then(|snf| {
                let w = ktheory::integrality_witness(&geom, &tau, &snf).map_err(|e| e.to_string())?;
                let plan = ratmod::plan_module(&n_mult, &snf.divisors, n).map_err(|e| e.to_string())?;
                Ok((w, plan))
            })
    } else {
        Err("requires positive N and integral N tau".to_string())
    };
    let (ok, detail) = match &witness {
        Ok((w, plan)) => (
            *w == c.witnesses && *plan == c.module_plan,
            format!("witnesses {:?}, multiplicity {}", w.iter().map(ToString::to_string).collect::<Vec<_>>(), plan.multiplicity),
        ),
        Err(e) => (false, e.clone()),
    };
    push("witnesses", ok, detail);

    let gens = &c.generators;
    let size = n_mult.to_usize().filter(|_| n_positive);
    let shapes_ok = size.is_some_and(|s| {
        gens.iter()
            .all(|g| g.size() == s && g.denom as usize == s && g.is_unitary())
    });
    let (ok, detail) = if shapes_ok {
        pair_detail(
            "U_i U_j = e^(2 pi i tau_ij) U_j U_i",
            ratmod::first_relation_failure(gens, &tau),
        )
    } else {
        (false, "generators must be unitary monomial matrices of size N".into())
    };
    push("finite_module_relations", ok, detail);

    let theta_tilde_std = geom.form_from_beta(&theta_tilde);
    let ch_e = exterior::exp_contract(&theta_tilde_std, &alpha)
        .map_err(malformed)?
        .scale(&n_rat);
    let diff = grades_where_differ(&ch_e, &ch);
    let matches_report = ch_e == ch_e_report;
    push(
        "class_check",
        diff.is_empty() && matches_report,
        if diff.is_empty() {
            format!("ch(E) = N e^(i(theta~)) alpha = e^(i(theta)) mu; report chE agrees: {matches_report}")
        } else {
            describe_grades(&diff)
        },
    );

    let back = exterior::exp_contract(&theta.neg(), &dfe).map_err(malformed)?;
    let back_gqe = clifford::is_gqe(&back).map_err(malformed)?.is_gqe();
    push(
        "first_direction_gqe",
        back == *mu && back_gqe,
        "e^(-i(theta)) (dE e^f) = mu is a generalized quadratic exponent".into(),
    );
    Ok(())
}
