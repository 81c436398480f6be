//! Placement of story locations ("plot facilities") on procedurally
//! generated polygon maps under spatial constraints.
//!
//! The crate is organised bottom-up:
//!
//! - [`worldgen`] builds seeded Voronoi terrain maps with biomes.
//! - [`constraints`] scores twelve families of spatial relations.
//! - [`taskgen`] samples solvable layout tasks from random placements.
//! - [`env`] is the turn-based layout environment with shaped rewards.
//! - [`solvers`] holds baseline policies, an annealing solver and evaluation.
//! - [`protocol`] drives all of the above through JSON messages, and
//!   [`api`] holds the batch request bodies used over HTTP.

pub mod api;
pub mod constraints;
pub mod demo;
pub mod env;
pub mod error;
pub mod geometry;
pub mod protocol;
pub mod seeds;
pub mod solvers;
pub mod taskgen;
pub mod worldgen;

pub use error::{Error, Result};
pub use geometry::Point;
