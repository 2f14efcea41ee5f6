//! Persistence probabilities of processes with stationary increments.
//!
//! Generators cover partial sums of fractional Gaussian noise, random walks
//! in random scenery on `Z^d`, the Kesten–Spitzer scenery limit and the
//! Matheron–de Marsily walk on an oriented lattice. The [`stats`] module
//! turns them into persistence estimates, exponent fits and exact checks.

pub mod error;
pub mod gaussian;
pub mod lattice;
pub mod mdm;
pub mod parallel;
pub mod path;
pub mod rng;
pub mod rwrs;
pub mod scenery_limit;
pub mod stats;

pub use error::{Error, Result};
pub use path::{path_stats, persistence_event, FirstReturn, PathSample, PathStats};
pub use rng::{Seed, Stream};
pub use stats::ProcessSpec;
