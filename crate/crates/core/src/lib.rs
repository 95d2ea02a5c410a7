//! Exact construction of constant-curvature projective modules over
//! noncommutative tori.
//!
//! Given a torus parameter θ (an antisymmetric rational form) and an integral
//! even multivector μ ∈ Λ^{even}L (a K₀ class), the [`pipeline`] decides
//! whether μ is a positive generalized quadratic exponent and, if so, builds
//! the full module data: curvature, the Heisenberg operators, the rational
//! torus module, and the tensor-product assembly, checking every identity in
//! exact arithmetic.

pub mod clifford;
pub mod exterior;
pub mod gen;
pub mod heismod;
pub mod intlat;
pub mod ktheory;
pub mod linalg;
pub mod pipeline;
pub mod ratmod;
pub mod rational;
pub mod selftest;

pub use exterior::{Blade, Covector, DualTwoForm, LatticeVector, Multivector};
pub use linalg::QMatrix;
pub use rational::Rational;
