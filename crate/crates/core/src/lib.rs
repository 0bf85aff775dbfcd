//! Orthogonal polynomials on Brownian path space.
//!
//! Exact algebra on words (shuffle and quasi-shuffle products), the inner
//! products induced by expected signatures of Brownian motion, orthogonal
//! bases of signature coordinates, graded recurrence matrices, a symbolic
//! naturality audit, and Monte Carlo expansions of path functionals.

pub mod error;
pub mod esig;
pub mod expansion;
pub mod experiments;
pub mod hoffman;
pub mod linalg;
pub mod lyndon;
pub mod naturality;
pub mod ortho;
pub mod path;
pub mod poly;
pub mod recurrence;
pub mod shuffle;
pub mod word;

pub use error::{Error, Result};
pub use poly::{Rational, TensorPoly};
pub use word::{Letter, Word, TIME};
