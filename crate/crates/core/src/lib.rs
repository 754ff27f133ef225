//! Step paths on Skorokhod space: J1/M1 metrics and moduli, simple stochastic
//! integrals, heavy-tailed random-walk constructions and Monte Carlo diagnostics.

pub mod error;
pub mod integrals;
pub mod metrics;
pub mod montecarlo;
pub mod paths;
pub mod processes;

pub use error::{Error, Result};
pub use paths::{GraphPolyline, ParamRep, Side, StepPath};
