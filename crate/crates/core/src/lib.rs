//! Two-cell downlink simulator with a deep-Q agent that jointly steers
//! beams, controls power and coordinates interference, plus the fixed power,
//! tabular Q-learning and exhaustive-search baselines it is measured against.

pub mod agents;
pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod radio;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
