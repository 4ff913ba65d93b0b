//! Building blocks for sentence-aligned parallel corpora from
//! comparable bilingual document collections.
//!
//! The stages are usable on their own: [`normalize`], [`langid`],
//! [`split`], [`docalign`], [`sentalign`], [`clean`]. [`pipeline`] wires
//! them together behind a TOML config.

pub mod clean;
pub mod corpus;
pub mod docalign;
pub mod error;
pub mod langid;
pub mod normalize;
pub mod pipeline;
pub mod sentalign;
pub mod split;

pub use error::{Error, Result};
