pub mod bounds;
pub mod centropy;
pub mod channels;
pub mod cli;
pub mod error;
pub mod pdit;
pub mod qalg;
pub mod sweep;

pub use error::{Error, Result};
