//! Tools for building "maps of elections": pairwise distances between ordinal
//! elections (possibly of different sizes, possibly top-truncated), statistical
//! vote generators, and 2D embeddings of the resulting distance matrices.
//!
//! The crate is organised around a small set of layers:
//!
//! * [`election`] — votes, elections, vote-level swap distance, frequency matrices;
//! * [`transport`] — 1D Wasserstein machinery, assignment and transportation solvers;
//! * [`distances`] — election-level distances (isomorphic swap, positionwise,
//!   their different-size extensions) and distance matrices;
//! * [`dap`] — diversity / agreement / polarization indices and the feature
//!   distance built on them;
//! * [`cultures`] — statistical cultures, truncation operators, dataset recipes;
//! * [`embedding`] — metric MDS (SMACOF) and Kamada-Kawai style embeddings;
//! * [`preflib`] — reading and writing `.soc` / `.soi` files.
//!
//! Everything that consumes randomness takes an explicit 64-bit seed and is
//! deterministic given that seed, independent of thread or worker counts.

pub mod dap;
pub mod cultures;
pub mod distances;
pub mod election;
pub mod embedding;
pub mod error;
pub mod preflib;
pub mod seeding;
pub mod transport;

pub use election::{Election, Vote};
pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Canonical numeric formatting for CSV output: 12 significant digits in
/// scientific notation. One fixed format keeps serialised artifacts
/// byte-identical across runs and platforms.
pub fn sig12(x: f64) -> String {
    format!("{:.11e}", x)
}
