//! Enumeration and classification of all critical points of the canonical
//! dual problem for finite deformation of a St Venant-Kirchhoff solid.
//!
//! [`dual_solver::solve_all`] returns every solution `T` of
//! `T(I + 2∇U*(T))T = τᵀτ`; [`energetics::classify_triality`] labels each
//! one; [`field`] rebuilds deformations on a box and checks compatibility;
//! [`oracle`] is an independent brute-force cross-check.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::large_enum_variant)]

pub mod branches;
pub mod cli;
pub mod dual_solver;
pub mod energetics;
pub mod error;
pub mod field;
pub mod material;
pub mod oracle;
pub mod tensors;

pub use error::{Error, Result};
