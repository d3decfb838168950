//! Compositional falsification of cyber-physical systems with
//! machine-learning perception.
//!
//! The pipeline computes where a signal temporal logic property holds under
//! perfect and always-wrong perception, analyzes the classifier only inside
//! the region where the two disagree, and searches the resulting input
//! subset for concrete counterexamples. See [`falsifier::comp_falsify`].

pub mod cps;
pub mod falsifier;
pub mod mlanalyzer;
pub mod mlcomp;
pub mod sampling;
pub mod scenario;
pub mod stl;
pub mod trace;
