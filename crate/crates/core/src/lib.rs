//! Contrastive explanations for centralized multi-agent optimization problems.
//!
//! A problem is a linear [`model::Model`] over binary and integer variables.
//! [`solver`] finds an optimal solution; [`hcmaop`] derives the hypothetical
//! problem that enforces a user's property while trading quality against
//! changes; [`explain`] turns the two solutions into an explanation.

pub mod bench;
pub mod domains;
pub mod engine;
pub mod explain;
pub mod hcmaop;
pub mod model;
pub mod rational;
pub mod session;
pub mod solver;

pub use explain::{full_explanation, Explanation};
pub use hcmaop::{build_hcmaop, derive_weights, solve_hcmaop, HcmaopModel, Property, Variant, Weights};
pub use model::{Assignment, Model, Sense};
pub use rational::Rational;
pub use solver::{solve, SolveParams, SolveResult, SolveStatus};
