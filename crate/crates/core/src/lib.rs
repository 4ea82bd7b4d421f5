pub mod arith;
pub mod error;
pub mod experiments;
pub mod expsums;
pub mod kernel;
pub mod mainterm;
pub mod phase;
pub mod quad;
pub mod special;

pub use error::{Error, Result};
