//! Simulation and analysis kernels for the contact process with a
//! semi-infected state on the complete graph.
//!
//! Vertices are healthy (0), semi-infected (1) or wholly-infected (2); only
//! wholly-infected vertices infect, each hit upgrades its target by one
//! level, and every infected vertex recovers at rate one. By exchangeability
//! the pair `(B, G)` of wholly-/semi-infected counts is itself a Markov
//! chain, and the time `tau` until `B` hits zero switches from logarithmic
//! to exponential growth in `n` as the infection rate crosses 4.
//!
//! Modules:
//!
//! * [`chain`] — exact event-driven simulation of the lumped `(B, G)` chain;
//! * [`full`] — the per-vertex configuration process, used as a lumping
//!   oracle;
//! * [`ode`] — the mean-field ODE, its equilibria and subcritical decay
//!   envelopes;
//! * [`coupling`] — the partial order, the two-chain coupling tables and the
//!   minorant domination coupling;
//! * [`survival`] — supercritical design constants and the minorant walk;
//! * [`tilde`] — the subcritical envelope birth-death chain;
//! * [`rng`] — reproducible seeded streams.
//!
//! All numeric kernels are generic over `num_traits::Float`; the crate root
//! exports `f64` aliases for concrete work.

pub mod chain;
pub mod coupling;
pub mod error;
pub mod full;
pub mod ode;
pub mod rng;
pub mod survival;
pub mod tilde;

pub use chain::{Counts, EventKind};
pub use error::{Error, Result};
pub use rng::RngStream;

/// Default concrete scalar.
pub type Real = f64;

pub type ModelParams = chain::ModelParams<Real>;
pub type RateVector = chain::RateVector<Real>;
pub type Trajectory = chain::Trajectory<Real>;
pub type OdeState = ode::OdeState<Real>;
pub type OdePath = ode::OdePath<Real>;
pub type EquilibriumSet = ode::EquilibriumSet<Real>;
pub type DecayEnvelope = ode::DecayEnvelope<Real>;
pub type PairState = coupling::PairState;
pub type JointRateRow = coupling::JointRateRow<Real>;
pub type SurvivalDesign = survival::SurvivalDesign<Real>;
pub type HatRates = survival::HatRates<Real>;
pub type TildeParams = tilde::TildeParams<Real>;
