pub mod array_design;
pub mod coarray;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod signal_model;

pub use error::{Error, Module, Result};
