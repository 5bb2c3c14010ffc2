//! Dual-subnetwork active node selection for graph domain adaptation.
//!
//! Two graph networks with complementary views (1-hop message passing and
//! weighted path aggregation) are trained on a labeled source graph and an
//! unlabeled target graph. Target nodes on which they disagree are ranked by
//! neighborhood-level predictive entropy plus feature distance to the labeled
//! source nodes, and the top `k` are proposed for annotation.
//!
//! The crate is `no_std` and needs only `alloc`; file formats, reports and the
//! command line live in `delta-harness`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod graph;
pub mod metrics;
pub mod numerics;
pub mod select;
pub mod subnet;

pub use error::{Error, Result};
