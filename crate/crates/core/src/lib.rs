//! Arithmetic laboratory for class-group actions on sphere points: binary
//! quadratic forms, Hurwitz quaternion conjugation, Weyl sums and joint
//! periods, Ramanujan τ sums and exact local factor identities.

pub mod arith;
pub mod class_action;
pub mod eigenvalues;
pub mod error;
pub mod local_factors;
pub mod mixing;
pub mod quadforms;
pub mod special;
pub mod sphere;

pub use error::{Error, Result};
