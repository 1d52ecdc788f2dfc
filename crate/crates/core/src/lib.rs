//! Chessboard densities, separated-set encoders and bounds on Lipschitz
//! bijections onto integer grids.
//!
//! The guide in `book/` walks through the modules in the order a run uses
//! them.

// Negated float comparisons are NaN guards; elimination loops read best indexed.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod assign;
pub mod dichotomy;
pub mod encoder;
pub mod error;
pub mod experiment;
pub mod forge;
pub mod geometry;
pub mod io;
pub mod mapping;
pub mod rational;
pub mod regularity;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/dichotomy.md")]
    mod dichotomy {}
    #[doc = include_str!("../../../book/src/chessboard.md")]
    mod chessboard {}
    #[doc = include_str!("../../../book/src/encoder.md")]
    mod encoder {}
    #[doc = include_str!("../../../book/src/assignment.md")]
    mod assignment {}
    #[doc = include_str!("../../../book/src/regularity.md")]
    mod regularity {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
