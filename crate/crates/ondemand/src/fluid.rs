//! Deterministic integration of the fluid-limit dynamics.
//!
//! Two variants are supported: the boundary-free switched linear system, and
//! the bounded system in which the centered pending-agent coordinate is kept
//! at or above its floor (the image of "zero pending agents") by clipping its
//! derivative on the floor and projecting after each step.

use serde::Serialize;

use crate::error::Error;
use crate::params::ModelParams;
use crate::state::FluidState;
use crate::trajectory::{Trajectory, TrajectoryKind};

/// Integration and convergence-detection settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluidConfig {
    /// Fixed integration step.
    pub dt: f64,
    /// Integration horizon; snapped to the nearest multiple of `dt`.
    pub horizon: f64,
    /// Apply the pending-agent floor.
    pub bounded: bool,
    /// Norm threshold for convergence to the origin.
    pub conv_tol: f64,
    /// Trailing window over which the norm must stay below `conv_tol`.
    pub conv_window: f64,
}

impl Default for FluidConfig {
    fn default() -> Self {
        FluidConfig {
            dt: 1e-3,
            horizon: 100.0,
            bounded: true,
            conv_tol: 1e-3,
            conv_window: 10.0,
        }
    }
}

impl FluidConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::NotPositive("dt"));
        }
        if !self.horizon.is_finite() || self.horizon <= 0.0 {
            return Err(Error::NotPositive("horizon"));
        }
        if self.dt > self.horizon {
            return Err(Error::ExceedsHorizon("dt"));
        }
        if !self.conv_tol.is_finite() || self.conv_tol <= 0.0 {
            return Err(Error::NotPositive("conv_tol"));
        }
        if !self.conv_window.is_finite() || self.conv_window <= 0.0 {
            return Err(Error::NotPositive("conv_window"));
        }
        if self.conv_window > self.horizon {
            return Err(Error::ExceedsHorizon("conv_window"));
        }
        Ok(())
    }
}

/// Absolute tolerance under which the pending coordinate counts as sitting
/// on the floor; exact equality is meaningless after floating-point steps.
pub fn floor_snap_tol(params: &ModelParams) -> f64 {
    1e-9 * (1.0 + params.centered_floor().abs())
}

/// Time derivative of the boundary-free system.
///
/// With `(x, y, v) = (pending, queue_diff, agents)`:
/// `y' = beta x + alpha mu (v - y+) + delta y- - theta y+`,
/// `v' = beta x - (1 - alpha) mu (v - y+) - theta y+`,
/// `x' = -gamma y' - epsilon y`.
/// Equivalently `u' = A u` with the surplus matrix for `y >= 0` and the
/// deficit matrix for `y < 0`; the right side is continuous across `y = 0`.
pub fn rhs_unbounded(s: &FluidState, p: &ModelParams) -> FluidState {
    let (x, y, v) = (s.pending, s.queue_diff, s.agents);
    let y_pos = y.max(0.0);
    let y_neg = (-y).max(0.0);
    let in_service = v - y_pos;
    let dy = p.beta * x + p.alpha * p.mu * in_service + p.delta * y_neg - p.theta * y_pos;
    let dv = p.beta * x - (1.0 - p.alpha) * p.mu * in_service - p.theta * y_pos;
    let dx = -p.gamma * dy - p.epsilon * y;
    FluidState::new(dx, dy, dv)
}

/// Time derivative of the bounded system: identical to [`rhs_unbounded`]
/// away from the floor; on the floor the pending derivative is clipped at
/// zero so the trajectory cannot leave the admissible region.
///
/// States more than the snap tolerance below the floor are rejected.
pub fn rhs_bounded(s: &FluidState, p: &ModelParams) -> Result<FluidState, Error> {
    let floor = p.centered_floor();
    if s.pending < floor - floor_snap_tol(p) {
        return Err(Error::OutsideAdmissibleRegion);
    }
    Ok(rhs_clipped(s, p, floor, floor_snap_tol(p)))
}

/// Total-function form of the bounded right side used inside the stepper:
/// treats anything within the snap tolerance of the floor as on it.
fn rhs_clipped(s: &FluidState, p: &ModelParams, floor: f64, snap: f64) -> FluidState {
    let mut d = rhs_unbounded(s, p);
    if s.pending <= floor + snap {
        d.pending = d.pending.max(0.0);
    }
    d
}

/// Classical fixed-step 4th-order integration of the selected system.
///
/// The trajectory is sampled at every step. When bounded, the pending
/// coordinate is projected onto the admissible region after each step.
pub fn integrate(
    s0: FluidState,
    params: &ModelParams,
    cfg: &FluidConfig,
) -> Result<Trajectory, Error> {
    params.validate()?;
    cfg.validate()?;
    let floor = params.centered_floor();
    let snap = floor_snap_tol(params);

    let mut state = s0;
    if cfg.bounded {
        if state.pending < floor - snap {
            return Err(Error::OutsideAdmissibleRegion);
        }
        state.pending = state.pending.max(floor);
    }

    let steps = (cfg.horizon / cfg.dt).round().max(1.0) as usize;
    let h = cfg.dt;
    let rhs = |s: &FluidState| -> FluidState {
        if cfg.bounded {
            rhs_clipped(s, params, floor, snap)
        } else {
            rhs_unbounded(s, params)
        }
    };

    let mut states = Vec::with_capacity(steps + 1);
    states.push(state);
    for step in 0..steps {
        let k1 = rhs(&state);
        let k2 = rhs(&(state + k1 * (h / 2.0)));
        let k3 = rhs(&(state + k2 * (h / 2.0)));
        let k4 = rhs(&(state + k3 * h));
        state = state + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if cfg.bounded {
            state.pending = state.pending.max(floor);
        }
        if !state.is_finite() {
            return Err(Error::Diverged {
                t: (step + 1) as f64 * h,
            });
        }
        states.push(state);
    }

    Ok(Trajectory {
        kind: if cfg.bounded {
            TrajectoryKind::FluidBounded
        } else {
            TrajectoryKind::FluidUnbounded
        },
        dt: h,
        states,
    })
}

/// Convergence verdict for a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Convergence {
    /// The norm stayed below `conv_tol` over the entire trailing window.
    pub converged: bool,
    /// Earliest grid time after which the norm never exceeds `conv_tol`.
    pub t_conv: Option<f64>,
    /// Norm of the final state.
    pub final_norm: f64,
}

/// Decides convergence to the origin: the state norm must stay below
/// `cfg.conv_tol` over the whole trailing window of length `cfg.conv_window`.
///
/// Panics if the trajectory is empty.
pub fn detect_convergence(traj: &Trajectory, cfg: &FluidConfig) -> Convergence {
    assert!(!traj.is_empty(), "trajectory must be nonempty");
    let final_norm = traj.states.last().unwrap().norm();
    // Last sample whose norm reaches the tolerance, scanning backwards.
    let last_exceed = traj
        .states
        .iter()
        .rposition(|s| s.norm() >= cfg.conv_tol);
    let t_conv = match last_exceed {
        None => Some(0.0),
        Some(i) if i + 1 < traj.len() => Some(traj.time(i + 1)),
        Some(_) => None,
    };
    let converged = match t_conv {
        Some(t) => t <= traj.horizon() - cfg.conv_window + 1e-12,
        None => false,
    };
    Convergence {
        converged,
        t_conv,
        final_norm,
    }
}

/// Fitted exponential envelope `norm(t) <= amplitude * exp(-rate t) * norm(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayEnvelope {
    pub amplitude: f64,
    pub rate: f64,
}

/// Least-squares fit of `ln norm(t)` against `t`. Returns the envelope when
/// the fitted slope is negative, `None` otherwise. Diagnostic only; zero-norm
/// samples are skipped.
pub fn decay_envelope(traj: &Trajectory) -> Option<DecayEnvelope> {
    let norm0 = traj.states.first()?.norm();
    if norm0 <= 0.0 {
        return None;
    }
    let mut n = 0.0_f64;
    let (mut st, mut sl, mut stt, mut stl) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for (t, s) in traj.iter() {
        let norm = s.norm();
        if norm <= 0.0 {
            continue;
        }
        let l = norm.ln();
        n += 1.0;
        st += t;
        sl += l;
        stt += t * t;
        stl += t * l;
    }
    if n < 2.0 {
        return None;
    }
    let var_t = stt - st * st / n;
    if var_t <= 0.0 {
        return None;
    }
    let slope = (stl - st * sl / n) / var_t;
    if slope.is_nan() || slope >= 0.0 {
        return None;
    }
    let intercept = (sl - slope * st) / n;
    Some(DecayEnvelope {
        amplitude: intercept.exp() / norm0,
        rate: -slope,
    })
}

/// Number of sampled states sitting on the pending-agent floor (within the
/// snap tolerance). Zero means the trajectory never touched the boundary.
pub fn boundary_contacts(traj: &Trajectory, params: &ModelParams) -> usize {
    let floor = params.centered_floor();
    let snap = floor_snap_tol(params);
    traj.states
        .iter()
        .filter(|s| s.pending <= floor + snap)
        .count()
}
