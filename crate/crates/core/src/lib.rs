//! Gibbs-free reconstruction of piecewise-smooth functions from Chebyshev
//! pseudospectral data.
//!
//! The pipeline is: sample on a Chebyshev–Gauss–Lobatto grid ([`cheb`]),
//! locate discontinuities from the coefficients ([`edge`]), then recover a
//! non-oscillatory function either with adaptive one-sided mollifiers
//! ([`mollify`]) or by Gegenbauer reprojection ([`gegenbauer`]).  [`advect`]
//! produces discontinuous test data by solving linear advection, and
//! [`harness`] drives the convergence studies.

pub mod advect;
pub mod cheb;
pub mod edge;
pub mod error;
pub mod gegenbauer;
pub mod harness;
pub mod mollify;
mod quad;

pub use error::{Error, Result};
