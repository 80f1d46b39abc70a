//! Exact algebra for the anchor-graded decomposition of `End(Q^n)` and the
//! integral isometry search it induces.
//!
//! Everything is computed over `Q` with arbitrary-precision rationals.
//!
//! ```
//! use superlat_core::{find_isometries, GramForm, IsometryProblem, QVector, SearchOptions, Verdict};
//!
//! # fn main() -> superlat_core::Result<()> {
//! let b = GramForm::standard(4)?;
//! let w = GramForm::from_int_rows(&[[5, 7, 6, 5], [7, 10, 8, 7], [6, 8, 10, 9], [5, 7, 9, 10]])?;
//! let problem = IsometryProblem::new(b, w, QVector::from_ints(&[1, 0, 0, 0]), None)?;
//! let out = find_isometries(&problem, &SearchOptions::default())?;
//! assert_eq!(out.certificate.verdict, Verdict::IsometricWitness);
//! assert_eq!(out.candidates.iter().filter(|c| c.integral).count(), 384);
//! # Ok(())
//! # }
//! ```

pub mod diophant;
pub mod error;
pub mod forms;
pub mod isosearch;
pub mod lattice;
pub mod linalg;
pub mod supergrade;

pub use error::{Error, Result};
pub use forms::{Endo, GramForm};
pub use isosearch::{
    find_isometries, CandidateIsometry, Certificate, IsometryProblem, SearchOptions, SearchOutcome, Verdict,
};
pub use linalg::{QMatrix, QVector, Rational};
pub use supergrade::{GradedContext, GradedDecomposition};
