//! Numerical laboratory for the determinant functional
//! `D(A) = ∫_T^n det(A(x))^(1/(n-1)) dx` on periodic SPD matrix fields
//! with divergence of bounded mass.
//!
//! The crate is organized around five layers:
//!
//! - [`sym`]: small dense symmetric matrix algebra (determinants, cofactors,
//!   spectra, elementary symmetric functions),
//! - [`fields`]: periodic fields on the unit torus with spectral calculus
//!   (means, divergence, mollification, Lp norms, the functional `D`),
//! - [`generators`]: the matrix-field families of interest (concentration
//!   counterexample, cofactor-of-Hessian divergence-free fields, oscillation
//!   sequences, epsilon shifts),
//! - [`ma`]: a damped-Newton spectral solver for the periodic Monge-Ampere
//!   problem `det(H phi + S) = f` with `det(S) = ∫ f`,
//! - [`experiments`]: the experiment harness (quasiconcavity gap,
//!   semicontinuity probes, proof-term tables, Young-measure estimates).
//!
//! [`io`] serializes fields and reports; [`cli`] is the batch front door.

pub mod cli;
pub mod experiments;
pub mod fields;
pub(crate) mod fft;
pub mod generators;
pub mod io;
pub mod ma;
pub mod sym;
pub(crate) mod util;

pub use fields::{DivergenceReport, MatrixField, ScalarField, TorusGrid, VectorField};
pub use sym::{Spectrum, SymMatrix};
