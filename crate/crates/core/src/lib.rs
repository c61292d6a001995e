//! Dirac chains and their operator calculus.
//!
//! A Dirac chain is a finite sum of k-vectors carried by points, optionally
//! differentiated along coordinate directions. Forms integrate against chains
//! exactly, and each chain operator is predual to a form operator:
//!
//! | chains | forms |
//! |---|---|
//! | [`operators::boundary`] | exterior derivative |
//! | [`operators::extrude`] | interior product |
//! | [`operators::retract`] | wedge with `V♭` |
//! | [`operators::prederiv`] | Lie derivative |
//! | [`operators::perp_chain`] | Hodge star |
//! | [`operators::pushforward`] | pullback |
//!
//! [`represent`] builds dyadic approximants of cubes, open sets, fractals
//! and vector fields; [`norms`] brackets `B^r` norms; [`flow`] moves chains
//! along vector fields; [`cli`] holds the `chaincalc` command.
//!
//! The `examples/` directory has one program per capability: `algebra`,
//! `stokes_convergence`, `change_of_variables`, `cartesian`, `cantor`,
//! `sierpinski`, `slit_disk`, `dipole_sphere`, `vectorfield`, `norms`,
//! `flow` and `verify_suites`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chains;
pub mod error;
pub mod exterior;
pub mod forms;
pub mod operators;
pub mod sample;
pub mod product;
pub mod represent;
pub mod norms;
pub mod flow;
pub mod cli;
