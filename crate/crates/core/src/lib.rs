//! LDPC ensembles, message-passing decoders and density evolution.
//!
//! The crate covers degree-distribution algebra ([`degree_dist`]), random
//! factor graphs and encoding ([`factor_graph`]), channel models
//! ([`channels`]), iterative decoders ([`decoders`]), threshold computation
//! ([`density_evolution`]), repeat-accumulate codes ([`ira`]) and the
//! Monte-Carlo harness used by the command-line tool ([`harness`]).

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod decoders;
pub mod degree_dist;
pub mod density_evolution;
pub mod error;
pub mod factor_graph;
pub mod gf2;
pub mod harness;
pub mod ira;

pub use error::{Error, Result};
