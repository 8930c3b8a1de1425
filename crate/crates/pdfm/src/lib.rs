//! Metric geometry of persistence diagrams under the 2-Wasserstein distance.
//!
//! A persistence diagram is a finite multiset of points strictly above the
//! diagonal in the birth/death plane, together with the diagonal itself
//! (available with infinite multiplicity as a matching target). This crate
//! implements the toolkit needed to do geometry in the space of such
//! diagrams:
//!
//! - exact optimal matchings and the 2-Wasserstein distance ([`wasserstein`]),
//!   including geodesic interpolation and a brute-force enumeration oracle;
//! - groupings of families of diagrams, their means and variance, and
//!   flatness certificates that guarantee a *unique* Fréchet mean
//!   ([`grouping`]);
//! - the Fréchet functional, an alternating mean-finding algorithm, and a
//!   brute-force optimal-grouping oracle ([`frechet`]);
//! - tangent-cone numerics at a base diagram: log maps, angle cosines, the
//!   cone metric, the hugging function and its equalities ([`tangent`]);
//! - seeded Monte Carlo experiments validating the finite-sample convergence
//!   rate of empirical Fréchet means ([`convergence`]).
//!
//! # Quick start
//!
//! ```
//! use pdfm::diagram::PersistenceDiagram;
//! use pdfm::wasserstein::w2_distance;
//!
//! let a = PersistenceDiagram::from_coords(&[[1.0, 4.0], [3.0, 6.0]]).unwrap();
//! let b = PersistenceDiagram::from_coords(&[[1.0, 6.0], [3.0, 4.0]]).unwrap();
//! let matching = w2_distance(&a, &b);
//! assert!((matching.distance() - 8.0_f64.sqrt()).abs() < 1e-12);
//! ```
//!
//! # Runnable examples
//!
//! Each major capability has a runnable example under `examples/`:
//!
//! | Example | Run with | Shows |
//! |---------|----------|-------|
//! | `distance` | `cargo run --example distance` | optimal matchings, brute-force cross-check |
//! | `geodesics` | `cargo run --example geodesics` | interpolation along Wasserstein geodesics |
//! | `grouping_variance` | `cargo run --example grouping_variance` | groupings, two variance routes |
//! | `flatness` | `cargo run --example flatness` | flatness certificates, single-linkage search |
//! | `frechet_mean` | `cargo run --example frechet_mean` | alternating algorithm vs. exhaustive oracle |
//! | `tangent_cone` | `cargo run --example tangent_cone` | log maps, angles, cone metric, Cauchy family |
//! | `hugging` | `cargo run --example hugging` | hugging function and its mean equalities |
//! | `convergence_rate` | `cargo run --example convergence_rate` | Monte Carlo rate of empirical means |
//!
//! The `pdfm` binary exposes the same operations as subcommands over JSON
//! files; see the crate README for the file formats.

pub mod convergence;
pub mod diagram;
pub mod frechet;
pub mod grouping;
pub mod manifest;
pub mod tangent;
pub mod wasserstein;

mod assignment;

use thiserror::Error;

/// Errors produced by validation, parsing, and numeric preconditions.
#[derive(Debug, Error)]
pub enum Error {
    /// A plane point failed the strictly-above-the-diagonal requirement.
    #[error("point {index}: death ({death}) must be strictly greater than birth ({birth})")]
    NotAboveDiagonal {
        index: usize,
        birth: f64,
        death: f64,
    },

    /// A plane point has a NaN or infinite coordinate.
    #[error("point {index}: coordinates must be finite (got [{birth}, {death}])")]
    NonFinite {
        index: usize,
        birth: f64,
        death: f64,
    },

    /// A JSON document did not have the expected shape.
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    /// A collection had the wrong number of entries.
    #[error("{context}: expected {expected} entries, got {got}")]
    Arity {
        context: String,
        expected: usize,
        got: usize,
    },

    /// An index referred past the end of a diagram or family.
    #[error("{context}: index {index} out of bounds (len {len})")]
    IndexOutOfBounds {
        context: String,
        index: usize,
        len: usize,
    },

    /// An instance is too large for exhaustive enumeration.
    #[error("{what} exceeds the brute-force cap of {cap}; set PDFM_BRUTE_CAP to raise it")]
    CapExceeded { what: String, cap: usize },

    /// A grouping matrix violated its structural invariants.
    #[error("invalid grouping: {0}")]
    InvalidGrouping(String),

    /// An interpolation parameter fell outside [0, 1].
    #[error("interpolation parameter t = {t} outside [0, 1]")]
    ParameterOutOfRange { t: f64 },

    /// Two tangent vectors do not share a base diagram.
    #[error("tangent vectors are based at different diagrams")]
    BaseMismatch,

    /// A tangent vector component failed validation.
    #[error("invalid tangent vector: {0}")]
    InvalidTangent(String),

    /// The hugging function is undefined when the reference point coincides
    /// with the base.
    #[error("hugging function undefined: reference diagram coincides with the base (W2 distance 0)")]
    HuggingUndefined,

    /// Mixture weights must be nonnegative and sum to one.
    #[error("mixture weights must be nonnegative and sum to 1 (sum = {sum})")]
    InvalidWeights { sum: f64 },

    /// A rate fit needs at least three distinct sample sizes.
    #[error("rate fit needs at least 3 usable (B, estimate) pairs, got {got}")]
    InsufficientRatePoints { got: usize },

    /// Generic precondition failure with a human-readable message.
    #[error("{0}")]
    Precondition(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
