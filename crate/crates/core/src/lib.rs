//! Reachability queries over spatiotemporal contact networks.

pub mod bench;
pub mod block_store;
pub mod codec;
pub mod contacts;
pub mod error;
pub mod fixture;
pub mod model;
pub mod oracle;
pub mod reachgraph;
pub mod reachgrid;
pub mod scalar;
pub mod spj;
pub mod ten;
pub mod trajectory;
pub mod workload;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use model::*;
pub use scalar::Scalar;

pub type Point64 = Point<f64>;
pub type Point32 = Point<f32>;
pub type TrajectorySet64 = trajectory::TrajectorySet<f64>;
pub type TrajectorySet32 = trajectory::TrajectorySet<f32>;
pub type GridIndex64 = reachgrid::GridIndex<f64>;
pub type GridIndex32 = reachgrid::GridIndex<f32>;
pub type SpjStore64 = spj::SpjStore<f64>;
pub type SpjStore32 = spj::SpjStore<f32>;
