//! Bit-accurate simulation and analysis toolkit for LUT-based
//! divide-and-conquer multipliers: exact and storage-optimized approximate
//! multiplier models, a hardware component/area/energy cost model, a
//! quantized neural-network inference engine routed through the simulated
//! multipliers, lottery-ticket pruning for desk-scale networks, and a
//! mixed-precision boundary-layer search.

pub mod error;
pub mod fixedpoint;
pub mod hwcost;
pub mod ltp;
pub mod lutcore;
pub mod mixedprec;
pub mod modelio;
pub mod netsim;

pub use error::{Error, Result};
