//! Latency and floorplan model for an annular surface-code architecture.
//!
//! Logical data tiles sit on concentric square rings around a central compute
//! region (CR). Workloads are expressed as T-layers of π/8 Pauli-product
//! rotations, placed onto the rings by a workload-aware cost, optionally given
//! two-tile fast-Y encodings, and priced by a per-layer movement plus
//! measurement model in units of the surface-code cycle `t`.
//!
//! Modules, bottom-up:
//! - [`circuit`]: rotations, T-layers, per-qubit profiles, the circuit
//!   document format and the synthetic benchmark generator.
//! - [`transpiler`]: Clifford+T gate lists to layered π/8 rotations, with a
//!   dense unitary oracle for small instances.
//! - [`floorplan`]: ring geometry, CR-entry lanes, budgets and density.
//! - [`placement`]: per-qubit cost and the greedy radial fill.
//! - [`fasty`]: two-tile fast-Y promotion.
//! - [`scheduler`]: the layer latency simulator and derived metrics.
//! - [`multiprog`]: quotas, sector placement and fairness metrics for
//!   concurrent workloads.

pub mod circuit;
pub mod error;
pub mod fasty;
pub mod floorplan;
pub mod multiprog;
pub mod placement;
pub mod scheduler;
pub mod transpiler;

pub use error::{Error, Result};
