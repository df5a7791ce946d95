//! Deterministic discrete-event simulator of a wireless-sensor-network
//! crop protection system.
//!
//! Motion sensors placed over a field detect intruding animals; detection
//! messages travel a tree-topology radio network to a central Repelling and
//! Notifying System that drives an ultrasonic repeller and notifies the
//! farmer by (simulated) SMS. The radio layer is calibrated against
//! measured latency, RSSI and throughput tables.

pub mod config;
pub mod energy;
pub mod engine;
pub mod geometry;
pub mod nettree;
pub mod radio;
pub mod report;
pub mod rns;
pub mod wildlife;

pub use geometry::{Field, Placement};
pub use nettree::{NetworkTree, NodeId, Role};
pub use radio::{LatencyTable, LinkPolicy, PathLossModel, ThroughputSteps};
pub use wildlife::SpeciesProfile;
