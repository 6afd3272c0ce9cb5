pub mod dst;
pub mod error;
pub mod experiment;
pub mod kernels;
pub mod levy;
pub mod noise;
pub mod par;
pub mod quad;
pub mod regularity;
pub mod rng;
pub mod sobolev;
pub mod solver;
pub mod special;
pub mod stats;
pub mod util;

pub use error::{Error, Result};
