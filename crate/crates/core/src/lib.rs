pub mod arith;
pub mod error;
pub mod forms;
pub mod hecke;
pub mod lfunction;
pub mod linalg;
pub mod mp;
pub mod qseries;
pub mod verify;

pub use error::{Error, Result};
