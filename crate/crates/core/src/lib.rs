//! Combinatorics and dynamics of interval exchange transformations:
//! Rauzy classes and their diagrams, Rauzy-Veech and Zorich induction, the
//! symplectic structure carried by a permutation pair, Lyapunov spectrum
//! estimation for the Zorich cocycle, and randomized searches for matrix
//! witnesses (pinching, twisting, parabolic elements) in Rauzy monoids.
//!
//! All combinatorial and algebraic identities are checked in exact
//! arithmetic (`num-bigint` / `num-rational`); floating point is confined to
//! the long renormalized cocycle runs and singular-value numerics.

pub mod dynamics;
pub mod lyapunov;
pub mod matrix;
pub mod monoid;
pub mod perm;
pub mod rauzy;
pub mod symplectic;
pub mod verify;

pub use dynamics::{DynError, IetState, StepRecord, SuspensionState};
pub use lyapunov::{LyapunovReport, Mode};
pub use matrix::{Int, IntMatrix, Rat, RatMatrix};
pub use monoid::{SearchError, WitnessResult};
pub use perm::{Alphabet, PermError, Permutation};
pub use verify::{run_suite, SuiteReport};
pub use rauzy::{all_classes, Arrow, ArrowKind, Path, RauzyClass, RauzyError};
