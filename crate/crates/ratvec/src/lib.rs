//! Orthonormal bases of 2-component rational function vectors with respect
//! to a discrete inner product, computed by solving an inverse eigenvalue
//! problem for a 2-Hessenberg matrix pencil.
//!
//! Two solvers are provided: a rotation-based updating algorithm that grows
//! the solution one node at a time, and a rational vector Arnoldi iteration.
//! The [`eval`] module evaluates the resulting basis functions numerically
//! and exactly, [`metrics`] implements the error measures used to compare
//! the algorithms, and [`harness`] reproduces the reference experiments and
//! a lightning-plus-polynomial approximation of sqrt(z) on [0, 1].

pub mod error;
pub mod eval;
pub mod harness;
pub mod krylov;
pub mod linalg;
pub mod matrix;
pub mod metrics;
pub mod pencil;
pub mod pole;
pub mod problem;
pub mod rotation;
pub mod updating;

pub use error::{Error, Result};
pub use matrix::CMat;
pub use pencil::{BasisDegrees, ComponentDegrees, PencilSolution};
pub use pole::{Component, ProjectivePole};
pub use problem::{inner_product, validate, InnerProductTable, Problem, ValidatedProblem};
