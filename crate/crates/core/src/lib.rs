//! Rearrangements, rearrangement-invariant norms, isoperimetric and capacity
//! profiles, and numerical verification of symmetrization inequalities on
//! model metric probability spaces.
//!
//! Functions are sampled as weighted atoms; their decreasing rearrangements are
//! exact step functions, so every norm and maximal function is a closed-form
//! sum. Quadrature error only enters through sampling and through the profile
//! integrals of the [`capacity`] module.

pub mod capacity;
pub mod error;
pub mod expr;
pub mod families;
pub mod grid;
pub mod inequalities;
pub mod interpolation;
pub mod martingale;
pub mod measure_space;
pub mod par;
pub mod quadrature;
pub mod rearrangement;
pub mod ri_spaces;

pub use error::{Error, Result};
pub use measure_space::{ModelSpace, ProfileSpec, SampledFunction, TestFunction};
pub use rearrangement::MonotoneStep;
pub use ri_spaces::SpaceSpec;
