pub mod bundle;
pub mod complex;
pub mod error;
pub mod f2;
pub mod flip;
pub mod harness;
pub mod product;
pub mod ring;
pub mod tanner;

pub use error::{Error, Result};
