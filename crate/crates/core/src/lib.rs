//! Density evolution and coupling-design search for non-uniformly coupled
//! spatially coupled LDPC ensembles on the binary erasure channel.

pub mod de;
pub mod dynamics;
pub mod ensembles;
pub mod error;
pub mod multitype;
pub mod optimize;
pub mod reference;
pub mod reports;

pub use error::{Error, Result};
