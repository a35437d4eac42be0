//! Deterministic discrete-event simulator of a computational grid.
//!
//! A batch of gridlets (jobs sized in million instructions) is scheduled onto
//! heterogeneous resources by a fault-index-aware ant-colony heuristic.
//! Resources crash and recover; running jobs survive crashes through
//! checkpoint records that are replicated to peer nodes and purged as newer
//! checkpoints commit. Two checkpoint policies are built in:
//!
//! * **baseline** — unconditional periodic checkpoints at a fixed interval;
//! * **adaptive** — the checkpoint count for a dispatch is derived from the
//!   target resource's observed failure rate and failure tendency, so
//!   reliable resources pay almost no checkpoint overhead while flaky ones
//!   checkpoint densely.
//!
//! The [`sweep`] module runs both policies over identical workloads and
//! fault traces (paired seeds) and reports makespan, throughput, and average
//! turnaround time with per-point improvement percentages.
//!
//! Everything is deterministic: a config (including its seed) fixes the full
//! event trace bit-for-bit, which the test suite relies on.

pub mod checkpoint;
pub mod fault;
pub mod kernel;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod scheduler;
pub mod sim;
pub mod sweep;

pub use model::{SimConfig, ValidatedConfig};
pub use sim::{SimError, Simulation};
pub use sweep::{run_sweep, SweepKind, SweepReport, SweepSpec};
