//! Edge-budget dismantling of planar graphs on a spanning-tree skeleton.
//!
//! The pipeline samples uniform spanning trees ([`ust`]), cuts each tree into
//! balanced parts ([`partition`]), removes every graph edge that crosses the
//! resulting vertex classes and keeps the best trial ([`solver`]). Budgets below
//! the cost of the best bisection go through a subgraph bipartition, larger
//! budgets through a k-way search around a fitted estimate ([`calibration`]).

pub mod bench;
pub mod calibration;
pub mod cli;
pub mod error;
pub mod graph;
pub mod partition;
pub mod planar;
pub mod seeds;
pub mod solver;
pub mod ust;

pub use error::{Error, Result};
pub use graph::{components, is_connected, ComponentLabeling, EdgeId, EdgeSet, Graph};
