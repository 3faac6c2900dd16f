//! Simulation and analysis of fault-tolerant memories built from unreliable
//! components: registers holding an LDPC codeword, refreshed every cycle by a
//! correcting circuit whose own XOR and majority gates may fail.
//!
//! - [`tanner`]: regular Tanner graphs, codeword checks, GF(2) encoding, alist/JSON I/O.
//! - [`expansion`]: expansion certificates and closed-form expansion bounds.
//! - [`decoders`]: Algorithm A, parallel bit flipping, the bit-copy (TK) rule and Gallager B.
//! - [`faults`]: adversarial and independent fault plans.
//! - [`memsim`]: multi-cycle memory simulation and Monte Carlo aggregation.
//! - [`metrics`]: complexity, redundancy, Chernoff and failure-probability bounds.

pub mod decoders;
pub mod error;
pub mod expansion;
pub mod faults;
pub mod memsim;
pub mod metrics;
pub mod tanner;

pub use error::{Error, Result};
