//! Workbench for rate-adaptive protograph MacKay-Neal codes over the
//! binary-input AWGN channel.

pub mod base;
pub mod bounds;
pub mod channel;
pub mod decoder;
pub mod designer;
pub mod density;
pub mod error;
pub mod exec;
pub mod gf2;
pub mod lift;
pub mod matcher;
pub mod rng;
pub mod spectrum;

pub use error::{Error, Result};
