pub mod domain;
mod error;
pub mod formulation;
pub mod metrics;
pub mod scenario;

pub use error::{DomainError, FormulationError, MetricsError, ScenarioError};
