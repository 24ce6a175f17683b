pub mod error;
pub mod hilbert;
pub mod analytic;
pub mod model;
pub mod report;
pub mod dynamics;
pub mod analysis;
pub mod cli;

pub use error::{Error, Result};
