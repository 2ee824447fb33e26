//! Discrete L² Hodge theory on simplicial surfaces, end structure of weighted
//! graphs, and one-dimensional mode reductions of warped products
//! `dr² + e^{2r} h`.

// negated comparisons in this crate are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod sparse;
pub mod complex;
pub mod metric;
pub mod hodge;
pub mod warped;
pub mod ends;
pub mod mesh_io;
