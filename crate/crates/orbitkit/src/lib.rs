//! orbitkit: numerical and exact experiments with translates of diagonal
//! orbits on SL(n,R)/SL(n,Z).
//!
//! The crate is organized around the objects it computes:
//!
//! - [`exterior`]: multi-indexes, wedge products of standard basis vectors,
//!   index-sum functionals on the trace-zero diagonal.
//! - [`families`]: parametrized unipotent families g(k), divergence graphs,
//!   predecessor-closed subsets, limit-group prediction, Iwasawa splitting.
//! - [`polytope`]: the wedge-norm and adjoint-weight polytopes in Lie(A),
//!   with exact vertex geometry and reproducible uniform sampling.
//! - [`lattice`]: LLL reduction, shortest vectors, point counts, and the
//!   weight decomposition of wedge powers of sl_n.
//! - [`equidist`]: pushforward sampling experiments, Siegel-oracle
//!   comparisons, escape-of-mass curves, block-factor statistics.
//! - [`counting`]: integer matrices with a fixed split characteristic
//!   polynomial; exact conjugation algebra and the counting asymptotics.
//! - [`report`]/[`cli`]: deterministic JSON/CSV/SVG reports and the batch
//!   front-end used by the `orbitkit` binary.
//!
//! Each runnable capability has a corresponding example under `examples/`;
//! start with `cargo run --example predict_limits`.

pub mod cli;
pub mod counting;
pub mod equidist;
pub mod exterior;
pub mod families;
pub mod geometry;
pub mod lattice;
pub mod polytope;
pub mod rat;
pub mod report;

pub use rat::{Mat, Poly, Rat};

/// Schema version strings embedded in every JSON report.
pub const SCHEMAS: &[&str] = &[
    "orbitkit/predict/1",
    "orbitkit/polytope/1",
    "orbitkit/equidist/1",
    "orbitkit/count/1",
    "orbitkit/c0/1",
    "orbitkit/certify/1",
];
