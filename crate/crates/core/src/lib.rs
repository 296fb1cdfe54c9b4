//! Hierarchical rate splitting for FDD massive MIMO under imperfect CSIT.
//!
//! Users are grouped by their spatial covariance. A long-term outer precoder
//! nulls inter-group leakage, a regularized zero-forcing inner precoder serves
//! each group, and a two-layer common message absorbs residual interference.

pub mod channel_model;
pub mod det_equiv;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod power_alloc;
pub mod precoding;
pub mod rate_mc;
pub mod scenario;

pub use error::{Error, Result};
pub use precoding::PowerSplit;
pub use rate_mc::Scheme;
pub use scenario::Scenario;
