//! # tsn5g-sim
//!
//! Deterministic discrete-event simulation of a single 5G-TSN link in a
//! 3GPP TR 38.901 indoor factory (InF) radio environment.
//!
//! The simulated topology is a central control station connected over a
//! wired TSN segment to a gNB, which serves one mobile UE over the radio:
//!
//! ```text
//!   CC station ── wired TSN segment ── gNB ~~ radio ~~ UE (mobile robot)
//! ```
//!
//! The crate provides:
//! - TR 38.901 InF large-scale channel models ([`channel`])
//! - Random Waypoint / fixed-ring UE mobility ([`mobility`])
//! - SINR, BLER-curve link adaptation and HARQ ([`phy`])
//! - TSN traffic classes, strict-priority queuing and wire transit ([`tsn`])
//! - the event-driven simulation core ([`engine`])
//! - latency/SINR/HARQ statistics and CSV/JSON exports ([`metrics`])
//!
//! Every random draw flows through named streams derived from a single
//! scenario seed, so a `(scenario, seed)` pair fully determines every
//! output byte.

pub mod channel;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod mobility;
pub mod phy;
pub mod rng;
pub mod scenario;
pub mod time;
pub mod tsn;

pub use error::{Result, SimError};
pub use time::SimTime;
