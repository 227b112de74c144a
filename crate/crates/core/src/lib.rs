//! Functional and cycle-level model of a lane-based RISC-V V 1.0 vector unit.
//!
//! The crate is organized around a flat functional oracle ([`rvv`]) and a
//! timing engine ([`timing`]) that stores registers in a lane-split, banked
//! register file. Everything the timing engine computes is checked back
//! against the oracle.
//!
//! - [`rvv`]: vtype/vl handling, trace decoding, flat execution.
//! - [`layout`]: byte-to-lane mapping, shuffle/deshuffle, reshuffle planning, masks.
//! - [`banks`]: per-lane bank addressing, 1RW arbitration, crossbar area.
//! - [`timing`]: the cycle-level engine plus analytic models (reduction, roofline, issue rate).
//! - [`coherency`]: scalar/vector memory ordering rules and litmus checking.
//! - [`bench`]: kernel generators, sweeps and CSV reports.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod banks;
pub mod bench;
pub mod cli;
pub mod coherency;
pub mod error;
pub mod layout;
pub mod rvv;
pub mod timing;

pub use error::{Error, Result};
