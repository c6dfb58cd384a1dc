// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod floorplan;
pub mod geom;
pub mod layout;
pub mod materials;
pub mod model;
pub mod openings;
pub mod pipeline;
pub mod retrieval;
