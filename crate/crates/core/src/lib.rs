//! Numerical laboratory for the trackability of unstable integer-valued
//! processes observed through noisy channels.
//!
//! The crate evaluates, over exactly enumerable source/channel systems:
//!
//! - moment-entropy inequalities linking E|X|^ρ to Rényi entropy,
//! - finite-horizon necessary conditions for keeping any error moment
//!   bounded, expressed through the information density of state and
//!   observation history,
//! - Gallager's reliability function E₀ in two algebraically equal forms,
//!   its input-distribution maximization, and the induced anytime-capacity
//!   checks for rate-R sources,
//! - MAP and distance-profile (ρ-)estimators with exact and Monte Carlo
//!   error moments, plus the upper bounds their constructions satisfy.
//!
//! Everything is exact finite enumeration in the log domain; Monte Carlo is
//! an explicitly seeded extension, never a silent fallback. The [`harness`]
//! module adds the config-driven experiment runner, the randomized
//! verification suite, and the serialization surfaces the CLI exposes.

pub mod bounds;
pub mod dist;
pub mod error;
pub mod estimate;
pub mod harness;
pub mod numerics;
pub mod process;

pub use dist::{IntegerPmf, JointDist, LabelPmf, LogProb, ObservationLabel};
pub use error::{Error, Result};
pub use numerics::SeedSpec;
