//! Persistent homology of preference profiles and the polar persistence distance.

pub mod classical;
pub mod diagram;
pub mod error;
pub mod experiment;
pub mod filtration;
pub mod kernels;
pub mod matching;
pub mod persistence;
pub mod polar;
pub mod preflib;
pub mod summaries;

pub use diagram::{DiagramPoint, PersistenceDiagram, PolarParams, PolarPoint};
pub use error::{Error, Result};
