#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod compare;
pub mod continuum;
pub mod density;
pub mod discrete;
pub mod kernels;
pub mod numerics;
pub mod params;
pub mod scaling;
