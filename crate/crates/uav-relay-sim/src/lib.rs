//! Desk-scale simulator for a secure UAV-relay downlink.
//!
//! A ground base station with an M-antenna array serves one cluster of users
//! directly while an aerial amplify-and-forward relay with N antennas serves
//! the weaker cluster, all in the presence of passive eavesdroppers. The
//! library provides:
//!
//! * Rician air-to-ground and alpha-beta-gamma ground-to-ground channel
//!   generation ([`channel`]),
//! * WMMSE direct-link precoding, zero-forcing relay beamforming through
//!   channel SVDs, and the closed-form KKT relay power allocation
//!   ([`beamforming`]),
//! * SINR, capacity and secrecy-capacity evaluation ([`capacity`]),
//! * user clustering under distance, rate and channel metrics
//!   ([`clustering`]),
//! * an MDP environment plus tabular Q-learning and a from-scratch deep
//!   Q-network for relay trajectory optimization ([`rl`]),
//! * a scenario/experiment harness with a CLI for benchmark schemes,
//!   hyperparameter sweeps and the user-mobility study ([`harness`]).
//!
//! Every run is reproducible from a configuration file and a 64-bit seed.
//! The accompanying guide in `book/` walks through the concepts; its code
//! snippets are mirrored as doc-tests throughout the modules.

pub mod beamforming;
pub mod capacity;
pub mod channel;
pub mod clustering;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod rl;

pub use error::{Result, SimError};
