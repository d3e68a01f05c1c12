//! Core library for crafting protocol-valid MQTT-over-TCP traffic, extracting
//! per-packet NIDS features, simulating SOC alert queues, and computing
//! distributional statistics over traffic feature sets.
//!
//! The crate is `no_std`-compatible (with `alloc`): everything here is pure
//! computation over in-memory buffers. File formats, sockets, and the CLI live
//! in the companion `fpa-forge` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod craft;
pub mod features;
pub mod frame;
pub mod mqtt;
mod num;
pub mod socsim;
pub mod stats;
pub mod surrogate;
pub mod tcp;
