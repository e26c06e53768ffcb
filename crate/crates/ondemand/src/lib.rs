//! Toolkit for queueing systems whose servers ("agents") are invited
//! on demand.
//!
//! Customers arrive as a Poisson stream and are matched first-come
//! first-served with agents; invited agents accept after an exponential
//! delay, may rejoin the queue after each service, and both sides may
//! abandon while waiting. A queue-length feedback scheme controls the number
//! of pending invitations. The crate provides:
//!
//! - [`sim`]: exact stochastic simulation of the system under the stylized
//!   and the actual (target-tracking) feedback schemes;
//! - [`fluid`]: deterministic integration of the centered fluid dynamics,
//!   with and without the pending-agent floor;
//! - [`stability`]: the switched-linear-system stability analysis — regime
//!   matrices, Routh–Hurwitz tests, sufficient gain conditions, and the
//!   common-quadratic-Lyapunov-function existence decision;
//! - [`params`], [`state`], [`trajectory`]: parameter validation, the exact
//!   coordinate transforms between raw and centered state, and uniform-grid
//!   trajectories with sup-distance comparison.

pub mod cubic;
pub mod error;
pub mod fluid;
pub mod params;
pub mod sim;
pub mod stability;
pub mod state;
pub mod trajectory;

pub use error::Error;
pub use params::{ModelParams, OperatingPoint};
pub use state::{FluidState, SimState};
pub use trajectory::{DistanceReport, Trajectory, TrajectoryKind};
