//! Executable checks for filtrations indexed by the non-positive integers.
//!
//! * [`field`] : GF(q) arithmetic, matrices and the quadratic extension.
//! * [`sequences`] : length sequences, the (Δ), (⋆) and (□) predicates with
//!   certificates, extraction sets and time slowing.
//! * [`split_words`] : sampling, exact enumeration and extraction of
//!   split-words processes.
//! * [`bricks`] : transversal partition families, strong bricks, the
//!   geometric brick over (F_p)⁵ and glued chains.
//! * [`coupling`] : overlaps, Kantorovich-Rubinstein distances, coupling
//!   strategies, Monte Carlo reports and immersion checks.
//!
//! Indices n ≤ 0 are used in every report; internally arrays are
//! indexed by depth d = −n.

pub mod bricks;
pub mod coupling;
pub mod exec;
pub mod field;
pub mod rational;
pub mod sequences;
pub mod split_words;

pub use exec::Execution;

/// Version tag written into every JSON report.
pub const SCHEMA_VERSION: u32 = 1;
