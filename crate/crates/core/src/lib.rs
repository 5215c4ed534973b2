//! Asymptotic rank bounds for tensor formats.
//!
//! A secant variety `σ_r` of the Segre variety in `C^a ⊗ C^b ⊗ C^c` is sampled
//! numerically: a generic linear slice `L = {A t + B}` is intersected with the
//! image of the multilinear chart `Σ (a_i,1) ⊗ (b_i,1) ⊗ c_i`, one intersection
//! point is seeded by construction and the rest are found by monodromy loops of
//! parameter homotopies. The number of distinct points is a lower bound on the
//! degree of `σ_r`, and the absence of low-degree vanishing polynomials on the
//! sampled points turns into the bound
//!
//! ```text
//! asymptotic rank ≤ r · C(dim L + q − 1, q)^(1/q)
//! ```
//!
//! Module map:
//!
//! - [`formats`]: format bookkeeping and square-system shapes.
//! - [`numerics`]: dense complex linear algebra and the tolerance policy.
//! - [`segre`]: the slicing system, its Jacobian, secant dimensions, seeding.
//! - [`tracker`]: predictor-corrector path tracking.
//! - [`monodromy`]: witness-set expansion, dedupe and the trace test.
//! - [`interpolation`]: monomial evaluation matrices and their rank.
//! - [`bounds`]: the bound formula and minimal improving degrees.
//! - [`kronecker`]: small-scale checks of the symmetric Kronecker-power basis.
//! - [`persist`]: witness files and configuration.
//! - [`tables`]: published result tables and their recomputation.

pub mod bounds;
pub mod error;
pub mod formats;
pub mod interpolation;
pub mod kronecker;
pub mod monodromy;
pub mod numerics;
pub mod persist;
pub mod segre;
pub mod tables;
pub mod tracker;

pub use error::{Error, Result};
pub use formats::Format;
pub use monodromy::WitnessSet;
pub use numerics::{CVector, ComplexMatrix, Tolerances};
pub use segre::{SecantProfile, SliceParams, Solution};
pub use tracker::TrackerConfig;

/// Version string written into every witness file.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
