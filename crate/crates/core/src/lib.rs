//! Random-CSP hardness reductions made executable: `SAT_K` formulas are
//! packed, half-negated and turned into labeled samples over `{±1}^{2KMn}`;
//! hypotheses are realized as DNFs, halfspace intersections and automata; and
//! scattered samples drive a realizable-versus-random distinguisher.

pub mod automata;
pub mod cli;
pub mod csp;
pub mod error;
pub mod io;
pub mod predicates;
pub mod realize;
pub mod reductions;
pub mod report;
pub mod rng;
pub mod sample;
pub mod scatter;
pub mod stats;

pub use error::{Error, Result};
