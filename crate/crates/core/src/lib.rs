//! Full-correlation Bell inequalities for `n` parties with two settings and
//! two outcomes per party.
//!
//! A correlation vector `ξ(s)`, indexed by the setting string `s ∈ {0,1}^n`,
//! is classical iff its Walsh–Hadamard spectrum has ℓ1 norm at most one. The
//! tight inequalities are in bijection with sign functions `f : {0,1}^n → ±1`
//! through `β = 2^{-n} W f`, and this crate provides:
//!
//! - [`transform`]: bit strings, the Walsh–Hadamard transform, exact dyadic
//!   vectors;
//! - [`inequality`]: sign tables, coefficient tables, integer IDs and the
//!   polynomial notation;
//! - [`classical`]: membership in the local polytope, by formula and by LP;
//! - [`symmetry`]: the relabeling group, orbits and the orbit census;
//! - [`compose`]: substitution of inequalities into one another and CHSH
//!   nesting;
//! - [`quantum`]: maximal quantum values, GHZ realizations, Bell-operator
//!   norms and partial transposes.

pub mod classical;
pub mod compose;
pub mod error;
pub mod inequality;
pub mod quantum;
pub mod symmetry;
pub mod transform;

pub use classical::{
    l1_margin, lp_membership, membership, witness, ClassicalModel, CorrelationVector, Membership, ModelWeight,
    Sign,
};
pub use compose::{chsh_decompose, full_nesting, substitute, NestingTree};
pub use error::{Error, Result};
pub use inequality::{
    coefficients_from_signs, evaluate, id_to_signs, mermin_signs, parse_polynomial, polynomial_string,
    signs_from_coefficients, signs_to_id, BellTable, InequalityId, SignTable,
};
pub use quantum::{max_violation, OptimizerSettings, PhaseVector, ViolationResult};
pub use symmetry::{classify_all, orbit, GroupElement, Orbit, OrbitRecord};
pub use transform::{walsh_hadamard, BitString, DyadicVector};
