//! Distance and interval chromatic numbers of the hyperbolic plane and of
//! regular trees: checkerboard colorings by horocyclic rectangles, their
//! optimized bounds, tree stratifications, exact coloring search, the
//! heptagonal tiling and the flat model `H_n`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod checkerboard;
pub mod chromasolve;
pub mod cli;
pub mod error;
pub mod flatmodel;
pub mod heptile;
pub mod hypgeom;
pub mod output;
pub mod treegeom;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/checkerboard.md")]
    mod checkerboard {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/trees.md")]
    mod trees {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/heptagons.md")]
    mod heptagons {}
    #[doc = include_str!("../../../book/src/flat-model.md")]
    mod flat_model {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
