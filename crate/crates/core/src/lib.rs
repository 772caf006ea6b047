//! Numerical laboratory for radii of information.
//!
//! Computes worst-case, probabilistic and p-average radii of information for
//! linear recovery problems on small model problems, and reproduces the
//! Brownian-path example in which discarding an arbitrarily small set of
//! paths halves the worst-case recovery error under the norm
//! `|f|_sup + |f(1/2)|`.

pub mod chebyshev;
pub mod information;
pub mod paverage;
pub mod error;
pub mod experiment;
pub mod gallery;
pub mod rng;
pub mod spaces;
pub mod wiener;
pub mod stats;

pub use error::{Error, Result};
