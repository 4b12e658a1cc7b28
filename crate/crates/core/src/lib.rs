//! Exact divided-power calculus of level `m` over `Z/p^N`.

pub mod arith;
pub mod dpcore;
pub mod frob;
pub mod hdr;
pub mod jet;
pub mod homology;
pub mod matrix;
pub mod params;
pub mod poly;
pub mod strat;
pub mod zpn;

pub use params::{Bounds, MultiIndex, PParams, ParamError};
pub use zpn::Zpn;
