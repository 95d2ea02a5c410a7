//! Symbolic Heisenberg and Weyl operators on functions over ℝ^p × ℤ^q, and the
//! constant curvature connection built from them.
//!
//! All data is expressed in the adapted lattice basis β (see
//! [`crate::ktheory::MuGeometry`]): directions `γ_1..γ_k` of V* span X_μ and
//! `γ_{k+1}..γ_n` span Y_μ*. Every scalar that multiplies 2πi is stored as the
//! rational coefficient alone.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exterior::{self, Blade, DualTwoForm, ExteriorError, Multivector};
use crate::linalg::QMatrix;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum HeisError {
    #[error("restricted curvature form is degenerate")]
    Degenerate,
    #[error("operator shapes disagree")]
    Shape,
    #[error("T is singular")]
    SingularT,
    #[error("theory violation: {0}")]
    TheoryViolation(String),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
}

type Result<T> = std::result::Result<T, HeisError>;

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

fn dot_int(a: &[Rational], b: &[BigInt]) -> Rational {
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + x * Rational::from_integer(y.clone()))
}

/// `(Of)(z, a) = e^{2πi(χ·z + l·a + c)} f(z + t, a + s)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeylOperator {
    #[serde(with = "rational::serde_rational_vec")]
    pub t: Vec<Rational>,
    #[serde(with = "rational::serde_rational_vec")]
    pub chi: Vec<Rational>,
    #[serde(with = "rational::serde_bigint_vec")]
    pub s: Vec<BigInt>,
    #[serde(with = "rational::serde_rational_vec")]
    pub l: Vec<Rational>,
    #[serde(with = "rational::serde_rational")]
    pub c: Rational,
}

impl WeylOperator {
    pub fn identity(p: usize, q: usize) -> Self {
        Self {
            t: vec![Rational::zero(); p],
            chi: vec![Rational::zero(); p],
            s: vec![BigInt::zero(); q],
            l: vec![Rational::zero(); q],
            c: Rational::zero(),
        }
    }

    pub fn p(&self) -> usize {
        self.t.len()
    }

    pub fn q(&self) -> usize {
        self.s.len()
    }

    fn same_shape(&self, other: &WeylOperator) -> Result<()> {
        if self.p() != other.p() || self.q() != other.q() {
            return Err(HeisError::Shape);
        }
        Ok(())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &WeylOperator) -> Result<WeylOperator> {
        self.same_shape(other)?;
        let add = |a: &[Rational], b: &[Rational]| a.iter().zip(b).map(|(x, y)| x + y).collect();
        Ok(WeylOperator {
            t: add(&self.t, &other.t),
            chi: add(&self.chi, &other.chi),
            s: self.s.iter().zip(&other.s).map(|(x, y)| x + y).collect(),
            l: add(&self.l, &other.l),
            c: &self.c + &other.c + dot(&other.chi, &self.t) + dot_int(&other.l, &self.s),
        })
    }

    /// The rational `c` with `O₁O₂ = e^{2πic} O₂O₁`.
    pub fn commutation_phase(&self, other: &WeylOperator) -> Result<Rational> {
        self.same_shape(other)?;
        Ok(dot(&other.chi, &self.t) + dot_int(&other.l, &self.s)
            - dot(&self.chi, &other.t)
            - dot_int(&self.l, &other.s))
    }

    /// Equality as operators: all parameters equal and constant phases equal mod 1.
    pub fn equivalent(&self, other: &WeylOperator) -> bool {
        self.t == other.t
            && self.chi == other.chi
            && self.s == other.s
            && self.l == other.l
            && rational::congruent_mod_one(&self.c, &other.c)
    }
}

/// `(Df)(z, a) = 2πi(κ·z + λ·a) f + Σ ψ_i ∂f/∂z_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeisenbergDerivation {
    #[serde(with = "rational::serde_rational_vec")]
    pub kappa: Vec<Rational>,
    #[serde(with = "rational::serde_rational_vec")]
    pub lambda: Vec<Rational>,
    #[serde(with = "rational::serde_rational_vec")]
    pub psi: Vec<Rational>,
}

impl HeisenbergDerivation {
    /// The rational `r` with `[D, D'] = 2πi r`.
    pub fn commutator(&self, other: &HeisenbergDerivation) -> Rational {
        dot(&other.kappa, &self.psi) - dot(&self.kappa, &other.psi)
    }

    /// The rational `r` with `[D, O] = 2πi r O`.
    pub fn commutator_with(&self, op: &WeylOperator) -> Rational {
        dot(&op.chi, &self.psi) - dot(&self.kappa, &op.t) - dot_int(&self.lambda, &op.s)
    }
}

/// Basis `u_1..u_p, v_1..v_p` of X_μ (coordinates in `γ_1..γ_k`) with
/// `f(u_i, v_j) = f_i δ_ij` and all other pairings zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Darboux {
    #[serde(with = "rational::serde_rational_matrix")]
    pub u: Vec<Vec<Rational>>,
    #[serde(with = "rational::serde_rational_matrix")]
    pub v: Vec<Vec<Rational>>,
    #[serde(with = "rational::serde_rational_vec")]
    pub f: Vec<Rational>,
}

impl Darboux {
    pub fn p(&self) -> usize {
        self.f.len()
    }

    /// Columns `u_1..u_p, v_1..v_p`.
    pub fn matrix(&self) -> QMatrix {
        let k = 2 * self.p();
        let cols: Vec<Vec<Rational>> = self.u.iter().chain(&self.v).cloned().collect();
        QMatrix::from_cols(k, &cols)
    }
}

fn form(m: &QMatrix, x: &[Rational], y: &[Rational]) -> Rational {
    dot(x, &m.mul_vec(y))
}

/// Symplectic Gram–Schmidt without rescaling.
pub fn darboux(f: &QMatrix) -> Result<Darboux> {
    let k = f.rows();
    if !k.is_multiple_of(2) || !f.is_antisymmetric() || f.det().is_zero() {
        return Err(HeisError::Degenerate);
    }
    let mut pool: Vec<Vec<Rational>> = QMatrix::identity(k).to_rows();
    let (mut us, mut vs, mut fs) = (Vec::new(), Vec::new(), Vec::new());
    while !pool.is_empty() {
        let u = pool.remove(0);
        let j = pool
            .iter()
            .position(|w| !form(f, &u, w).is_zero())
            .ok_or(HeisError::Degenerate)?;
        let v = pool.remove(j);
        let f1 = form(f, &u, &v);
        pool = pool
            .into_iter()
            .map(|w| {
                let a = form(f, &w, &v) / &f1;
                let b = form(f, &w, &u) / &f1;
                w.iter()
                    .zip(&u)
                    .zip(&v)
                    .map(|((wi, ui), vi)| wi - &a * ui + &b * vi)
                    .collect()
            })
            .collect();
        us.push(u);
        vs.push(v);
        fs.push(f1);
    }
    Ok(Darboux { u: us, v: vs, f: fs })
}

/// `∇_x` for a covector `x` given in β-dual coordinates.
pub fn derivation_for(d: &Darboux, k: usize, x: &[Rational]) -> HeisenbergDerivation {
    let p = d.p();
    let coords = d
        .matrix()
        .solve(&x[..k])
        .expect("Darboux basis spans X_mu");
    HeisenbergDerivation {
        psi: coords[..p].to_vec(),
        kappa: (0..p).map(|i| &coords[p + i] * &d.f[i]).collect(),
        lambda: x[k..].to_vec(),
    }
}

/// `∇` along each dual basis direction `γ_1..γ_n`.
pub fn build_nabla(d: &Darboux, n: usize, k: usize) -> Vec<HeisenbergDerivation> {
    (0..n)
        .map(|j| {
            let mut x = vec![Rational::zero(); n];
            x[j] = Rational::one();
            derivation_for(d, k, &x)
        })
        .collect()
}

/// `Ṽ_i = W(y_i, χ_i)` for `i < k` with `[∇_x, Ṽ_i] = 2πi x(β_i) Ṽ_i`.
pub fn solve_vi(i: usize, k: usize, q: usize, nabla: &[HeisenbergDerivation]) -> Result<WeylOperator> {
    let p = k / 2;
    // Unknowns (y, χ): χ·ψ(γ_j) − κ(γ_j)·y = δ_ij for j < k.
    let mut a = QMatrix::zeros(k, 2 * p);
    let mut rhs = vec![Rational::zero(); k];
    for (j, dj) in nabla.iter().take(k).enumerate() {
        for m in 0..p {
            a[(j, m)] = -dj.kappa[m].clone();
            a[(j, p + m)] = dj.psi[m].clone();
        }
        if j == i {
            rhs[j] = Rational::one();
        }
    }
    let sol = a.solve(&rhs).ok_or(HeisError::Degenerate)?;
    let op = WeylOperator {
        t: sol[..p].to_vec(),
        chi: sol[p..].to_vec(),
        ..WeylOperator::identity(p, q)
    };
    check_nabla_v_row(nabla, &op, i).map_or(Ok(op), |j| {
        Err(HeisError::TheoryViolation(format!(
            "[nabla_{}, V~_{}] has the wrong scalar",
            j + 1,
            i + 1
        )))
    })
}

/// `Ṽ_i f(z, a) = f(z, a − β_i)` for `k ≤ i < n`.
pub fn shift_vi(i: usize, k: usize, p: usize, q: usize) -> WeylOperator {
    let mut op = WeylOperator::identity(p, q);
    op.s[i - k] = -BigInt::one();
    op
}

fn check_nabla_v_row(nabla: &[HeisenbergDerivation], op: &WeylOperator, i: usize) -> Option<usize> {
    nabla.iter().enumerate().find_map(|(j, d)| {
        let want = if j == i { Rational::one() } else { Rational::zero() };
        (d.commutator_with(op) != want).then_some(j)
    })
}

/// `σ_ij`: the commutation phases of the `Ṽ_i`.
pub fn compute_sigma(ops: &[WeylOperator]) -> Result<DualTwoForm> {
    let n = ops.len();
    let mut m = QMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = ops[i].commutation_phase(&ops[j])?;
        }
    }
    Ok(DualTwoForm::new(m)?)
}

/// Phase corrections `l_i`, the corrected operators `V_i`, and `θ̃`.
pub fn solve_li(
    theta: &DualTwoForm,
    sigma: &DualTwoForm,
    vtilde: &[WeylOperator],
    k: usize,
) -> Result<(Vec<Vec<Rational>>, Vec<WeylOperator>, DualTwoForm)> {
    let n = theta.n();
    let half = rational::rat(1, 2);
    let mut li = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for (i, op) in vtilde.iter().enumerate() {
        let l: Vec<Rational> = (k..n)
            .map(|j| {
                let diff = theta.get(i, j) - sigma.get(i, j);
                if i < k {
                    diff
                } else {
                    diff * &half
                }
            })
            .collect();
        let mut vi = op.clone();
        vi.l = vi.l.iter().zip(&l).map(|(a, b)| a + b).collect();
        li.push(l);
        v.push(vi);
    }
    let mut tt = theta.matrix().clone();
    for i in 0..k {
        for j in 0..k {
            tt[(i, j)] = sigma.get(i, j).clone();
        }
    }
    Ok((li, v, DualTwoForm::new(tt)?))
}

/// First pair whose `[∇_i, ∇_j]` differs from `f(γ_i, γ_j)`.
pub fn first_nabla_failure(nabla: &[HeisenbergDerivation], f: &QMatrix) -> Option<(usize, usize)> {
    for i in 0..nabla.len() {
        for j in 0..nabla.len() {
            if nabla[i].commutator(&nabla[j]) != f[(i, j)] {
                return Some((i, j));
            }
        }
    }
    None
}

/// First `(x, i)` with `[∇_x, V_i] ≠ 2πi x(β_i) V_i`.
pub fn first_nabla_v_failure(nabla: &[HeisenbergDerivation], v: &[WeylOperator]) -> Option<(usize, usize)> {
    v.iter()
        .enumerate()
        .find_map(|(i, op)| check_nabla_v_row(nabla, op, i).map(|x| (x, i)))
}

/// First pair with `V_iV_j ≠ e^{2πi θ̃_ij} V_jV_i`.
pub fn first_v_failure(v: &[WeylOperator], theta_tilde: &DualTwoForm) -> Option<(usize, usize)> {
    for i in 0..v.len() {
        for j in 0..v.len() {
            let ok = v[i]
                .commutation_phase(&v[j])
                .is_ok_and(|c| rational::congruent_mod_one(&c, theta_tilde.get(i, j)));
            if !ok {
                return Some((i, j));
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RieffelClass {
    /// `T̃` on W_μ with target order `(e_1, ē_1, …, e_p, ē_p)`.
    pub t_tilde: QMatrix,
    pub det: Rational,
    pub d: Rational,
    pub ybar: Vec<Vec<Rational>>,
    pub raw_class: Multivector,
    pub orientation: i8,
    pub class: Multivector,
}

/// `[Ẽ] = det(T̃) ∏ Ȳ_j ∧ Ȳ_{j+p}`, normalized to `α`, and the identity
/// `d e^f = e^{ι(θ̃)} α` with `d = |det T̃|`.
pub fn rieffel_class(
    v: &[WeylOperator],
    k: usize,
    alpha_beta: &Multivector,
    theta_tilde: &DualTwoForm,
    f_beta: &Multivector,
) -> Result<RieffelClass> {
    let n = alpha_beta.n();
    let p = k / 2;
    let mut t = QMatrix::zeros(k, k);
    for (i, op) in v.iter().take(k).enumerate() {
        for j in 0..p {
            t[(2 * j, i)] = op.t[j].clone();
            t[(2 * j + 1, i)] = op.chi[j].clone();
        }
    }
    let det = t.det();
    let inv = t.inverse().ok_or(HeisError::SingularT)?;
    let pad = |c: Vec<Rational>| {
        let mut x = c;
        x.resize(n, Rational::zero());
        x
    };
    let mut ybar = Vec::with_capacity(k);
    for j in 0..p {
        ybar.push(pad(inv.col(2 * j + 1)));
    }
    for j in 0..p {
        ybar.push(pad(inv.col(2 * j)));
    }
    let mut raw = Multivector::scalar(n, det.clone());
    for j in 0..p {
        raw = raw
            .wedge(&Multivector::vector(&ybar[j]))?
            .wedge(&Multivector::vector(&ybar[j + p]))?;
    }
    let orientation = if raw == *alpha_beta {
        1
    } else if raw == alpha_beta.neg() {
        -1
    } else {
        return Err(HeisError::TheoryViolation(format!(
            "Rieffel class {raw} is not ±alpha"
        )));
    };
    let class = raw.scale(&Rational::from_integer(BigInt::from(orientation)));
    let d = det.abs();
    let lhs = exterior::exp_two_vector(f_beta)?.scale(&d);
    let rhs = exterior::exp_contract(theta_tilde, alpha_beta)?;
    if lhs != rhs {
        return Err(HeisError::TheoryViolation(
            "d e^f differs from e^(i(theta~)) alpha".into(),
        ));
    }
    Ok(RieffelClass {
        t_tilde: t,
        det,
        d,
        ybar,
        raw_class: raw,
        orientation,
        class,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionData {
    pub p: usize,
    pub q: usize,
    pub darboux: Darboux,
    pub nabla: Vec<HeisenbergDerivation>,
    pub vtilde: Vec<WeylOperator>,
    pub sigma: DualTwoForm,
    pub li: Vec<Vec<Rational>>,
    pub v: Vec<WeylOperator>,
    pub theta_tilde: DualTwoForm,
}

/// Builds ∇, Ṽ, σ, l and V from θ and f in the β basis; `f_beta` must be a
/// 2-vector on the first `k` coordinates, nondegenerate there.
pub fn build_connection(theta_beta: &DualTwoForm, f_beta: &Multivector, k: usize) -> Result<ConnectionData> {
    let n = theta_beta.n();
    let (p, q) = (k / 2, n - k);
    let fm = exterior::bivector_matrix(f_beta);
    let fx = QMatrix::from_rows(
        &(0..k)
            .map(|i| (0..k).map(|j| fm[(i, j)].clone()).collect())
            .collect::<Vec<_>>(),
    );
    let darb = if k == 0 {
        Darboux {
            u: vec![],
            v: vec![],
            f: vec![],
        }
    } else {
        darboux(&fx)?
    };
    let nabla = build_nabla(&darb, n, k);
    if let Some((i, j)) = first_nabla_failure(&nabla, &fm) {
        return Err(HeisError::TheoryViolation(format!(
            "[nabla_{}, nabla_{}] != f",
            i + 1,
            j + 1
        )));
    }
    let vtilde = (0..n)
        .map(|i| if i < k { solve_vi(i, k, q, &nabla) } else { Ok(shift_vi(i, k, p, q)) })
        .collect::<Result<Vec<_>>>()?;
    let sigma = compute_sigma(&vtilde)?;
    let (li, v, theta_tilde) = solve_li(theta_beta, &sigma, &vtilde, k)?;
    if let Some((i, j)) = first_v_failure(&v, &theta_tilde) {
        return Err(HeisError::TheoryViolation(format!(
            "V_{} V_{} relation fails",
            i + 1,
            j + 1
        )));
    }
    if let Some((x, i)) = first_nabla_v_failure(&nabla, &v) {
        return Err(HeisError::TheoryViolation(format!(
            "[nabla_{}, V_{}] has the wrong scalar",
            x + 1,
            i + 1
        )));
    }
    Ok(ConnectionData {
        p,
        q,
        darboux: darb,
        nabla,
        vtilde,
        sigma,
        li,
        v,
        theta_tilde,
    })
}

/// `e_{1..k}` in dimension n.
pub fn standard_volume(n: usize, k: usize) -> Multivector {
    Multivector::blade(n, Blade::first(k), Rational::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn qm(rows: &[&[Rational]]) -> QMatrix {
        QMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    fn gram(d: &Darboux, f: &QMatrix) {
        for i in 0..d.p() {
            for j in 0..d.p() {
                let want = if i == j { d.f[i].clone() } else { int(0) };
                assert_eq!(form(f, &d.u[i], &d.v[j]), want);
                assert!(form(f, &d.u[i], &d.u[j]).is_zero());
                assert!(form(f, &d.v[i], &d.v[j]).is_zero());
            }
        }
    }

    #[test]
    fn darboux_examples() {
        let f = qm(&[&[int(0), int(1)], &[int(-1), int(0)]]);
        let d = darboux(&f).unwrap();
        assert_eq!((d.u[0].clone(), d.v[0].clone(), d.f[0].clone()), (vec![int(1), int(0)], vec![int(0), int(1)], int(1)));
        let d = darboux(&f.scale(&int(3))).unwrap();
        assert_eq!(d.f, vec![int(3)]);
        let f = qm(&[
            &[int(0), rat(1, 2), int(3), int(-1)],
            &[rat(-1, 2), int(0), int(2), rat(5, 3)],
            &[int(-3), int(-2), int(0), int(4)],
            &[int(1), rat(-5, 3), int(-4), int(0)],
        ]);
        gram(&darboux(&f).unwrap(), &f);
        assert_eq!(darboux(&QMatrix::zeros(2, 2)), Err(HeisError::Degenerate));
    }

    #[test]
    fn nabla_commutators() {
        let f = qm(&[&[int(0), rat(1, 2)], &[rat(-1, 2), int(0)]]);
        let d = darboux(&f).unwrap();
        let nabla = build_nabla(&d, 3, 2);
        assert_eq!(nabla[0].commutator(&nabla[1]), rat(1, 2));
        assert!(nabla[0].commutator(&nabla[0]).is_zero());
        assert!(nabla[2].commutator(&nabla[0]).is_zero());
        assert!(nabla[2].commutator(&nabla[1]).is_zero());
    }

    #[test]
    fn vi_matches_closed_form() {
        for f1 in [int(1), rat(1, 2), rat(-7, 3)] {
            let f = qm(&[&[int(0), f1.clone()], &[-f1.clone(), int(0)]]);
            let d = darboux(&f).unwrap();
            let nabla = build_nabla(&d, 2, 2);
            for i in 0..2 {
                let op = solve_vi(i, 2, 0, &nabla).unwrap();
                assert_eq!(op.chi[0], d.u[0][i]);
                assert_eq!(op.t[0], -d.v[0][i].clone() / &d.f[0]);
            }
        }
    }

    #[test]
    fn shift_commutator() {
        let d = darboux(&qm(&[&[int(0), int(1)], &[int(-1), int(0)]])).unwrap();
        let nabla = build_nabla(&d, 3, 2);
        let op = shift_vi(2, 2, 1, 1);
        assert_eq!(op.s, vec![BigInt::from(-1)]);
        assert_eq!(nabla[2].commutator_with(&op), int(1));
        assert!(nabla[0].commutator_with(&op).is_zero());
    }

    #[test]
    fn sigma_and_li_examples() {
        let (p, q) = (1, 2);
        let trans = WeylOperator { t: vec![rat(2, 3)], ..WeylOperator::identity(p, q) };
        let phase = WeylOperator { chi: vec![rat(3, 5)], ..WeylOperator::identity(p, q) };
        assert_eq!(trans.commutation_phase(&phase).unwrap(), rat(2, 5));
        let ops = vec![trans, phase, shift_vi(2, 2, p, q), shift_vi(3, 2, p, q)];
        let sigma = compute_sigma(&ops).unwrap();
        assert!(sigma.get(0, 2).is_zero());
        assert!(sigma.get(2, 3).is_zero());

        let mut theta = QMatrix::zeros(4, 4);
        for (i, j, v) in [(0, 2, rat(1, 5)), (2, 3, rat(2, 7)), (0, 1, rat(1, 9))] {
            theta[(i, j)] = v.clone();
            theta[(j, i)] = -v;
        }
        let theta = DualTwoForm::new(theta).unwrap();
        let (li, v, tt) = solve_li(&theta, &sigma, &ops, 2).unwrap();
        assert_eq!(li[0][0], rat(1, 5));
        assert_eq!(li[2][1], rat(1, 7));
        assert_eq!(li[3][0], rat(-1, 7));
        assert_eq!(v[0].commutation_phase(&v[2]).unwrap(), rat(1, 5));
        assert_eq!(v[2].commutation_phase(&v[3]).unwrap(), rat(2, 7));
        assert_eq!(tt.get(0, 1), &rat(2, 5));
        assert!(first_v_failure(&v, &tt).is_none());
    }

    #[test]
    fn connection_and_class_p1() {
        // θ̃ = (1/3) e*12 on the block, α = e12, f = e12 / θ̃12.
        let n = 3;
        let theta = DualTwoForm::elementary(n, 1, 2, rat(1, 3))
            .add(&DualTwoForm::elementary(n, 1, 3, rat(3, 4)))
            .unwrap();
        let alpha = standard_volume(n, 2);
        let f = alpha.scale(&int(3));
        let conn = build_connection(&theta, &f, 2).unwrap();
        assert_eq!(conn.theta_tilde.get(0, 1), &rat(1, 3));
        let cls = rieffel_class(&conn.v, 2, &alpha, &conn.theta_tilde, &f).unwrap();
        assert_eq!(cls.class, alpha);
        assert_eq!(cls.d, rat(1, 3));
    }

    #[test]
    fn class_p0() {
        let alpha = Multivector::one(2);
        let theta = DualTwoForm::elementary(2, 1, 2, rat(1, 5));
        let conn = build_connection(&theta, &Multivector::zero(2), 0).unwrap();
        let cls = rieffel_class(&conn.v, 0, &alpha, &conn.theta_tilde, &Multivector::zero(2)).unwrap();
        assert_eq!(cls.class, alpha);
        assert_eq!(cls.d, int(1));
        assert_eq!(conn.theta_tilde, theta);
    }

    fn weyl(p: usize, q: usize) -> impl Strategy<Value = WeylOperator> {
        let r = || (-20i64..=20, 1i64..=9).prop_map(|(a, b)| rat(a, b));
        (
            proptest::collection::vec(r(), p),
            proptest::collection::vec(r(), p),
            proptest::collection::vec(-5i64..=5, q),
            proptest::collection::vec(r(), q),
            r(),
        )
            .prop_map(|(t, chi, s, l, c)| WeylOperator {
                t,
                chi,
                s: s.into_iter().map(BigInt::from).collect(),
                l,
                c,
            })
    }

    proptest! {
        #[test]
        fn weyl_laws(a in weyl(2, 2), b in weyl(2, 2), c in weyl(2, 2)) {
            let ab_c = a.compose(&b).unwrap().compose(&c).unwrap();
            let a_bc = a.compose(&b.compose(&c).unwrap()).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            let phase = a.commutation_phase(&b).unwrap();
            prop_assert_eq!(&phase, &-b.commutation_phase(&a).unwrap());
            let mut ba = b.compose(&a).unwrap();
            ba.c += &phase;
            prop_assert!(a.compose(&b).unwrap().equivalent(&ba));
        }
    }
}
