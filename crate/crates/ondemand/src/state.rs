//! Raw integer process state and the centered fluid coordinates, with the
//! exact affine transforms between them.

use std::ops::{Add, Mul, Sub};

use crate::error::Error;
use crate::params::ModelParams;

/// Integer state of the stochastic system.
///
/// `queue_diff` is the agent queue minus the customer queue; the two queues
/// are never simultaneously positive, so the agent queue is
/// `queue_diff.max(0)` and the customer queue is `(-queue_diff).max(0)`.
/// `target` is the real-valued invitation target maintained by the actual
/// scheme; the stylized scheme carries no target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState {
    /// Invited agents that have not yet accepted.
    pub pending: i64,
    /// Agent queue length minus customer queue length.
    pub queue_diff: i64,
    /// Customers (equivalently, agents) currently in service.
    pub in_service: i64,
    /// Invitation target (actual scheme only).
    pub target: Option<f64>,
}

impl SimState {
    /// Stylized-scheme state (no invitation target).
    pub fn new(pending: i64, queue_diff: i64, in_service: i64) -> Self {
        Self {
            pending,
            queue_diff,
            in_service,
            target: None,
        }
    }

    /// Actual-scheme state with an invitation target.
    pub fn with_target(pending: i64, queue_diff: i64, in_service: i64, target: f64) -> Self {
        Self {
            pending,
            queue_diff,
            in_service,
            target: Some(target),
        }
    }

    /// Agent queue length.
    pub fn agent_queue(&self) -> i64 {
        self.queue_diff.max(0)
    }

    /// Customer queue length.
    pub fn customer_queue(&self) -> i64 {
        (-self.queue_diff).max(0)
    }

    /// Total agents in the system: queued plus in service.
    pub fn agents_in_system(&self) -> i64 {
        self.agent_queue() + self.in_service
    }

    /// Count non-negativity and target sanity.
    pub fn validate(&self) -> Result<(), Error> {
        if self.pending < 0 {
            return Err(Error::NegativeCount("pending count"));
        }
        if self.in_service < 0 {
            return Err(Error::NegativeCount("in-service count"));
        }
        if let Some(t) = self.target {
            if !t.is_finite() {
                return Err(Error::NotFinite("target"));
            }
            if t < 0.0 {
                return Err(Error::NegativeValue("target"));
            }
        }
        Ok(())
    }

    /// Centered, `r`-scaled coordinates of this state.
    ///
    /// Computed in per-unit form so that zero pending agents land exactly on
    /// [`ModelParams::centered_floor`].
    pub fn to_centered(&self, params: &ModelParams) -> FluidState {
        let r = params.scale();
        FluidState {
            pending: self.pending as f64 / r + params.centered_floor(),
            queue_diff: self.queue_diff as f64 / r,
            agents: self.agents_in_system() as f64 / r - params.lambda / params.mu,
        }
    }
}

/// Centered fluid coordinates.
///
/// `pending` is the centered pending-agent mass, `queue_diff` the
/// agent-minus-customer queue mass, and `agents` the centered mass of agents
/// in the system (queued plus in service). The origin is the desired
/// equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidState {
    pub pending: f64,
    pub queue_diff: f64,
    pub agents: f64,
}

impl FluidState {
    pub const ORIGIN: FluidState = FluidState {
        pending: 0.0,
        queue_diff: 0.0,
        agents: 0.0,
    };

    pub fn new(pending: f64, queue_diff: f64, agents: f64) -> Self {
        Self {
            pending,
            queue_diff,
            agents,
        }
    }

    /// Euclidean norm of the coordinate vector.
    pub fn norm(&self) -> f64 {
        (self.pending * self.pending
            + self.queue_diff * self.queue_diff
            + self.agents * self.agents)
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.pending.is_finite() && self.queue_diff.is_finite() && self.agents.is_finite()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.pending, self.queue_diff, self.agents]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self {
            pending: a[0],
            queue_diff: a[1],
            agents: a[2],
        }
    }

    /// Inverse of [`SimState::to_centered`] on the real-valued coordinates:
    /// returns raw `(pending, queue_diff, agents_in_system)`.
    pub fn to_raw(&self, params: &ModelParams) -> (f64, f64, f64) {
        let op = params.operating_point();
        let r = params.scale();
        (
            r * self.pending + op.pending,
            r * self.queue_diff,
            r * self.agents + op.in_service,
        )
    }
}

impl Add for FluidState {
    type Output = FluidState;
    fn add(self, rhs: FluidState) -> FluidState {
        FluidState {
            pending: self.pending + rhs.pending,
            queue_diff: self.queue_diff + rhs.queue_diff,
            agents: self.agents + rhs.agents,
        }
    }
}

impl Sub for FluidState {
    type Output = FluidState;
    fn sub(self, rhs: FluidState) -> FluidState {
        FluidState {
            pending: self.pending - rhs.pending,
            queue_diff: self.queue_diff - rhs.queue_diff,
            agents: self.agents - rhs.agents,
        }
    }
}

impl Mul<f64> for FluidState {
    type Output = FluidState;
    fn mul(self, rhs: f64) -> FluidState {
        FluidState {
            pending: self.pending * rhs,
            queue_diff: self.queue_diff * rhs,
            agents: self.agents * rhs,
        }
    }
}
