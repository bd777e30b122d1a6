//! Symbolic kernel and point-invariant pipeline for third-order ODEs
//! `x''' = F(t, x, x', x'')`.
//!
//! The crate computes the classical scalar invariants (Wunschmann, Cartan,
//! the K pair), the relative invariant forms built from them, and decides
//! whether the solution space of an equation carries a Lorentzian hyper-CR
//! Einstein-Weyl structure. Everything symbolic is exact (arbitrary
//! precision rationals); vanishing questions fall back to a seeded,
//! guard-aware numeric oracle when canonical simplification cannot decide.
//!
//! `no_std` compatible with `alloc`; the companion CLI crate carries IO and
//! file formats.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod rat;

pub mod expr;
pub mod interval;
pub mod modular;
pub mod quad;
pub mod invariants;
pub mod exterior;
pub mod jet;
pub mod parser;
pub mod sample;
pub mod transform;

pub use error::{Error, Result};
pub use exterior::{alpha_form, omega_coframe, omega_components, pullback, Form};
pub use invariants::{classify, Classification, InvariantReport};
pub use expr::{Bindings, Expr, JetPoint, Var};
pub use jet::{decompose_in_frame, prolong, Equation, PointMap, VectorField};
pub use parser::{parse_equation, parse_expr, parse_transformation, render};
pub use rat::Rat;
pub use sample::{is_zero, Guard, GuardKind, Prng, SamplePlan, ZeroVerdict};
pub use transform::{check_form_scaling, check_k1_rule, check_triviality_preservation, FormKind, InvarianceCheck, Rule};
