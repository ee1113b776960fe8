//! Inhomogeneous continuum random trees built by stick-breaking: parameter
//! families, the random measure, cut samplers, exact tree queries, mass
//! measures, dimension estimates and statistical checks.

pub mod cli;
pub mod dimension;
pub mod error;
pub mod io;
pub mod massmeasure;
pub mod measure;
pub mod numerics;
pub mod params;
pub mod rtree;
pub mod rng;
pub mod stats;
pub mod stickbreak;
pub mod verify;

pub use error::{IcrtError, Result};
