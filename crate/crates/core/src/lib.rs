pub mod cli;
pub mod clustering;
pub mod construction;
pub mod dataset;
pub mod error;
pub mod gnn;
pub mod graph;
pub mod neural;
pub mod pipeline;
pub mod seed;
pub mod synthetic;

pub use error::{Error, Result};
