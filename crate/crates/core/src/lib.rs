//! Compiler and solver harness for the rank-constrained quantum inflation
//! hierarchy.
//!
//! The pipeline runs causal structure → network scenario ([`scenario`]) →
//! inflated generator algebra ([`algebra`], [`inflation`]) → symbolic moment
//! and localizing matrices ([`moment`]) → numeric SDP ([`sdp`]). The
//! [`oracle`] module provides explicit finite-dimensional models used as
//! ground truth, and [`hierarchy`] ties the stages together.

pub mod algebra;
pub mod error;
pub mod hierarchy;
pub mod inflation;
pub mod moment;
pub mod oracle;
pub mod scenario;
pub mod sdp;

pub use error::{Error, Result};
