//! Two-stage distributionally robust expansion planning for hydrogen supply networks
//! with decision-dependent demand ambiguity.

pub mod algorithms;
pub mod error;
pub mod evaluation;
pub mod instances;
pub mod model;
pub mod reformulation;
pub mod solver;

pub use error::{Error, Result};
