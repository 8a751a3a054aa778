//! Spectral kernels on the interval, circle and sphere; Littlewood-Paley band
//! sums on delta-nets; Karhunen-Loeve and joint-Gaussian path sampling.

pub mod acceptance;
pub mod error;
pub mod fit;
pub mod kernels;
pub mod lp;
pub mod quadrature;
pub mod rng;
pub mod sim;
pub mod spaces;
pub mod special;

pub use error::{Error, Result};
pub use spaces::{EigenEntry, EigenSystem, PointSet, Space};
