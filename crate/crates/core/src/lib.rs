//! Certified upper and lower bounds on the value of two-player free non-local
//! games with fixed-dimensional entanglement.
//!
//! Upper bounds come from symmetry-reduced SDP hierarchies over extendable
//! states; lower bounds come from rounding hierarchy solutions to explicit
//! strategies and polishing them with see-saw iterations.

pub mod blockreduce;
pub mod cli;
pub mod csep;
pub mod error;
pub mod gamecore;
pub mod hierarchy;
pub mod invbasis;
pub mod linalg;
pub mod rounding;
pub mod sdpsolve;
pub mod symcomb;

pub use error::{Error, Result};
