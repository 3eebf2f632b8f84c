//! Measure-dependent projection bodies, covariograms and mean bodies of convex
//! polytopes in dimensions 2 to 4, with a numerical verification suite for the
//! associated Zhang, Petty and Rogers-Shephard type inequalities.

pub mod bodies;
pub mod covariogram;
pub mod error;
pub mod inequalities;
pub mod isotropic;
pub mod linalg;
pub mod meanbodies;
pub mod measures;
pub mod numerics;
pub mod projection;
pub mod report;
pub mod spec;

pub use error::{Error, Result};
