#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod certify;
pub mod expr;
pub mod geomcore;
pub mod immersion;
pub mod spaces;
