//! Budgeted influence maximization.
//!
//! Budgets are integer vectors on the agents of a social network. Under the
//! budgeted triggering model an agent's budget lets it influence neighbors
//! whose threshold it meets, after which influence spreads along
//! zero-threshold edges. This crate provides
//!
//! * the model itself ([`instance`], [`triggering`], [`cascade`]) with exact
//!   and Monte Carlo value oracles ([`oracle`]),
//! * offline solvers under capacity and knapsack constraints ([`offline`]),
//! * the random-order online allocator and its analysis helpers ([`online`]),
//! * the multi-player colored-cascade game ([`game`]),
//! * property batteries that check the structural claims empirically
//!   ([`verify`]).
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled
//! (the default); see [`par::Exec`].

pub mod cascade;
pub mod error;
pub mod game;
pub mod generate;
pub mod graph;
pub mod instance;
pub mod lattice;
pub mod offline;
pub mod online;
pub mod oracle;
pub mod par;
pub mod seeds;
pub mod triggering;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{DirectedGraph, Edge};
pub use instance::Instance;
pub use lattice::{Allocation, BudgetConstraints};
pub use oracle::{InfluenceOracle, ValueOracle};
pub use par::Exec;
