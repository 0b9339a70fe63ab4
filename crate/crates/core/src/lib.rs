//! Convex-hull geometry of datasets: membership certificates, distances and
//! directions to the hull, wavelet-space replays, and two extrapolation
//! demos (Legendre polynomial boundaries, small MLPs).

pub mod error;
pub mod hullgeom;
pub mod ingest;
pub mod legendre;
pub mod mlpdemo;
pub mod pointset;
pub mod rng;
pub mod stats;
pub mod wavelets;

pub use error::{Error, Result};
pub use pointset::PointSet;
