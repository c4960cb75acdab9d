//! House allocation with existing tenants under dichotomous preferences.
//!
//! Two mechanisms, MSIR and MIR, built on a max-weight perfect matching
//! with serial refinement, plus brute-force oracles for the properties
//! they are meant to satisfy.

pub mod cli;
pub mod fixtures;
pub mod gen;
pub mod io;
pub mod matching;
pub mod mechanisms;
pub mod model;
pub mod oracles;
pub mod report;

pub use mechanisms::{run_mechanism, MechanismVariant, PermutationPolicy};
pub use model::{validate_instance, welfare, AgentId, Allocation, HouseId, Instance, Utility};
pub use oracles::{evaluate, Property, PropertyReport, SizeBudget};

/// Integer-weighted bipartite graph, as the mechanisms use.
pub type Graph = matching::WeightedBipartiteGraph<i64>;
pub type Matching = matching::Matching<i64>;
pub type MarketGraph = mechanisms::MarketGraph<i64>;
pub type Trace = mechanisms::MechanismTrace<i64>;

/// Float-weighted variants.
pub type GraphF64 = matching::WeightedBipartiteGraph<f64>;
pub type GraphF32 = matching::WeightedBipartiteGraph<f32>;
