//! Bell-inequality violation by parties who measure along randomly oriented
//! triads of orthogonal directions and share no reference frame.
//!
//! * [`geometry`]: directions, triads, Haar sampling and the two-party
//!   canonical form.
//! * [`correlations`]: closed-form singlet and GHZ correlation tensors.
//! * [`oracle`]: dense state-vector simulator used as ground truth.
//! * [`mabk`]: the MABK family over all labelings and the violation search.
//! * [`bipartite`]: the reduced two-party inequalities and their integral.
//! * [`experiments`]: seeded parallel Monte Carlo runs and cross-checks.
//! * [`cli`]: the `triad-bell` command line.

pub mod bipartite;
pub mod cli;
pub mod correlations;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod mabk;
pub mod oracle;

pub use error::{BellError, Result};
