//! Local invariants of elliptic curves over p-adic fields and the structure of the
//! Albanese kernel of a product of two curves.

pub mod arith;
pub mod curves;
pub mod engine;
pub mod error;
pub mod mackey;
pub mod padic;
pub mod ramify;
pub mod symbols;
pub mod units;

pub use error::{Error, Result};
