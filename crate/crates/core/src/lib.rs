//! Degrees-of-freedom regions for single-hop interference networks in which
//! every transmitter sends one message and every receiver asks for an
//! arbitrary subset of the messages.
//!
//! The crate has two halves:
//!
//! * exact region work: the region is the polytope
//!   `{ d >= 0 : sum_{k in M_j} d_k + max_{i not in M_j} d_i <= M for all j }`,
//!   expanded into simplex-form half-spaces, with membership, vertex
//!   enumeration and sum-DoF maximisation all done in rational arithmetic
//!   ([`demand`], [`region`], [`vertex`], [`simplex`]);
//! * achievability: the time-expanded interference-alignment construction
//!   with multiple base vectors, described symbolically ([`plan`]) and then
//!   materialised over seeded random channels and checked numerically
//!   ([`channel`], [`verify`]).
//!
//! ```
//! use dof_region::region::{expand_region, max_sum_dof};
//! use dof_region::DemandSpec;
//!
//! let spec = DemandSpec::parse(r#"{"K": 4, "M": 1, "demands": [[1, 2], [2, 3], [3, 4]]}"#).unwrap();
//! let best = max_sum_dof(&expand_region(&spec));
//! assert_eq!(best.total.to_string(), "4/3");
//! ```
//!
//! [`cli`] ties both halves to the `dofregion` binary; the `examples/`
//! directory walks through each capability.

pub mod channel;
pub mod cli;
pub mod demand;
mod error;
pub mod linalg;
pub mod plan;
pub mod rational;
pub mod region;
pub mod simplex;
pub mod verify;
pub mod vertex;

pub use demand::{DemandSpec, Grouping, ReceiverMeta};
pub use error::{Error, ErrorClass, Result};
pub use plan::{BeamPlan, IntegerizedPoint, MultiBeamPlan};
pub use rational::{DofPoint, Rational};
pub use region::{Inequality, Membership, RegionDescription};
pub use verify::{VerificationReport, VerifyOptions};
pub use vertex::VertexSet;
