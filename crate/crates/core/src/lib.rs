pub mod cascade;
pub mod cces;
pub mod cli;
pub mod dynge;
pub mod elasticity;
pub mod equilibrium;
pub mod error;
pub mod fluctuations;
pub mod household;
pub mod iotable;
pub mod reference;
pub mod synthetic;

pub use error::{Error, Result};
