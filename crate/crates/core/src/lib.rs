pub mod analytics;
pub mod error;
pub mod harness;
pub mod moebius;
pub mod numerics;
pub mod quaternion;
pub mod sampler;
pub mod verify;

pub use error::{Error, Result};
