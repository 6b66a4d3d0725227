//! Orbit-by-orbit construction of depth-3 bottom-fan-in-2 circuits for the
//! Inner Product function `IP_n(x, y) = x_1 y_1 ^ ... ^ x_n y_n`.
//!
//! The crate is organized bottom-up:
//!
//! * [`boolfn`]: assignments, orbit keys `(p, q, r)` and the automorphism group of IP.
//! * [`cnf`]: 2-CNFs, the six building blocks and their disjoint conjunctions.
//! * [`spectrum`]: exact trivariate generating polynomials counting solutions per orbit.
//! * [`regions`]: the six-region orbit partition, per-region recipes and exact ratio reports.
//! * [`asymptotics`]: entropy bounds, saddle-point coefficient estimates and objective scans.
//! * [`search`]: Pareto building-block discovery, exact `mu` and the composition search.
//! * [`cover`]: randomized orbit covers and full circuit assembly with exhaustive checks.

pub mod asymptotics;
pub mod boolfn;
pub mod cnf;
pub mod cover;
mod error;
pub mod numeric;
pub mod regions;
pub mod search;
pub mod spectrum;

pub use boolfn::{Assignment, Automorphism, OrbitKey};
pub use cnf::{BlockKind, Composition, TwoCnf};
pub use error::{Error, Result};
pub use spectrum::Spectrum;

/// Default cap on `n` for exhaustive enumeration oracles.
pub const DEFAULT_ENUM_CAP: usize = 6;

/// Hard limit on the number of coordinates an [`Assignment`] can hold.
pub const MAX_COORDS: usize = 32;
