//! Vector-cost bimatrix games for multi-objective behavioral planning.

pub mod adjust;
pub mod api;
pub mod error;
pub mod explore;
pub mod features;
pub mod protocol;
pub mod report;
pub mod game;
pub mod qp;
pub mod sim;

pub use error::{ConfigError, GameError};
