//! Solver core for multi-agent pickup-and-delivery on 4-neighbor grids.
//!
//! The crate is split along the pipeline stages:
//!
//! - [`grid`]: grid maps, warehouse generation, exact shortest-path
//!   distances, and well-formedness checking
//! - [`task`]: tasks, release batches, and visibility settings
//! - [`assign`]: Hungarian-based insertion and the LNS improvement loop
//! - [`path`]: multi-goal space-time A*, collision detection, and
//!   priority-based search (full and windowed)
//! - [`sim`]: the timestep simulation loop, metrics, and the independent
//!   execution validator
//!
//! The crate is `no_std` (with `alloc`); wall-clock time enters only
//! through the [`clock::Clock`] trait supplied by the embedder.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod assign;
pub mod clock;
pub mod grid;
pub mod path;
pub mod sim;
pub mod task;

pub use clock::{Budget, Clock, NullClock};
pub use grid::{DistanceOracle, GridMap, Location, WarehouseProfile};
pub use sim::{run, verify_execution, ExecutionLog, Metrics, RunOutput, SimConfig, Variant};
pub use task::{Setting, Task, TaskStream};
