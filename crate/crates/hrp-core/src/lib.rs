//! Network planning and resource allocation for HAPS-RIS beyond-cell
//! communications.
//!
//! The crate models a downlink snapshot of an urban network where terrestrial
//! base stations serve the users they can, and the remainder are served by a
//! ground control station through a reconfigurable intelligent surface mounted
//! on a high altitude platform station. Power and reflecting-unit allocations
//! for the beyond-cell users are computed by geometric programming under three
//! objectives (sum-rate, max-min rate, reflector minimization) plus a
//! proportional benchmark.
//!
//! Pipeline: [`scenario`] generates topologies, [`channel`] computes link
//! gains, [`association`] partitions users into within-cell and beyond-cell
//! sets, [`allocator`] builds and solves the allocation problems on top of the
//! [`gp`] solver, and [`experiments`] orchestrates seeded runs and sweeps.

pub mod allocator;
pub mod association;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiments;
pub mod gp;
pub mod rng;
pub mod scenario;
pub mod units;

pub use allocator::{Allocation, AllocationProblem, ObjectiveKind};
pub use association::Partition;
pub use channel::ChannelSet;
pub use config::NetworkConfig;
pub use error::Error;
pub use experiments::{Report, SweepAxis, SweepSpec};
pub use scenario::Topology;
