//! Numerical toolkit for time- and space-dependent anisotropic
//! Musielak–Orlicz analysis: N-function calculus, modular norms, balance
//! conditions, mollification operators, and an implicit solver for nonlinear
//! parabolic problems with generalized-growth fluxes.

pub mod balance;
pub mod catalog;
pub mod config;
pub mod error;
pub mod expr;
pub mod field;
pub mod flux;
pub mod grid;
pub mod modular;
pub mod mollify;
pub mod nfunction;
pub mod profile;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use field::{ScalarField, VecField};
pub use grid::GridDomain;
pub use nfunction::{ConjugateSearch, NFunctionSpec, SamplingPlan};
