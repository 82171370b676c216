//! Max-min fair allocation of indivisible resources under monotone submodular
//! valuations, restricted to the assignment setting, together with the
//! relaxed hypergraph matching machinery it reduces to.
//!
//! The pipeline runs in stages:
//!
//! 1. [`configlp`] solves the configuration LP by column generation, pricing
//!    columns with a submodular knapsack approximation.
//! 2. [`clustering`] splits resources into fat and thin, groups players into
//!    clusters and samples thin configurations per cluster.
//! 3. [`reduction`] turns the sample into a weighted hypergraph, rounds it and
//!    regroups it into a regular unweighted hypergraph with player groups.
//! 4. [`sampling`], [`lll`], [`flow`] and [`reconstruct`] compute a relaxed
//!    matching in that hypergraph.
//! 5. [`pipeline`] lifts the matching back and assembles an allocation.
//!
//! Numeric code is generic over [`Scalar`]; `f64`, `f32` and the exact
//! [`Rational`] all implement it. Exact rationals are the default for the
//! allocation pipeline, while the LP master is always solved in `f64`.

pub mod clustering;
pub mod configlp;
pub mod error;
pub mod flow;
pub mod generate;
pub mod io;
pub mod lll;
pub mod model;
pub mod oracles;
pub mod pipeline;
pub mod reconstruct;
pub mod reduction;
pub mod rng;
pub mod sampling;
pub mod santa_reduction;
pub mod scalar;
pub mod simplex;
pub mod submodular;

pub use error::{Error, Result};
pub use model::{
    Configuration, Group, GroupedHypergraph, RelaxedMatching, SantaInstance, Verdict,
    WeightedHypergraph,
};
pub use rng::RngSeed;
pub use scalar::Scalar;
pub use submodular::ValuationOracle;

/// Arbitrary-precision rational used wherever comparisons must be exact.
pub type Rational = num_rational::BigRational;

/// Instance with double-precision values.
pub type Instance = SantaInstance<f64>;
/// Instance with exact rational values.
pub type ExactInstance = SantaInstance<Rational>;
/// Valuation with double-precision values.
pub type Valuation = ValuationOracle<f64>;
/// Valuation with exact rational values.
pub type ExactValuation = ValuationOracle<Rational>;
/// Weighted hypergraph with exact rational weights.
pub type ExactWeightedHypergraph = WeightedHypergraph<Rational>;


