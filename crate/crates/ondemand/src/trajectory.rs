//! Time-indexed state sequences on a uniform sampling grid, plus the
//! sup-distance comparison used to measure simulation/fluid agreement.

use std::io;

use serde::Serialize;

use crate::error::Error;
use crate::params::ModelParams;
use crate::state::FluidState;

/// What produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryKind {
    FluidBounded,
    FluidUnbounded,
    SimStylized,
    SimActual,
}

/// Centered states sampled on the uniform grid `0, dt, 2 dt, ...`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    /// Grid spacing; strictly positive.
    pub dt: f64,
    pub states: Vec<FluidState>,
}

/// Sup-distance between two trajectories on a common grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DistanceReport {
    /// Sup over the grid of the Euclidean distance between states.
    pub sup: f64,
    /// Per-coordinate sup distances (pending, queue_diff, agents).
    pub per_component: [f64; 3],
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Grid time of sample `i`.
    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    /// Final grid time (0 for a single-sample trajectory).
    pub fn horizon(&self) -> f64 {
        match self.states.len() {
            0 => 0.0,
            n => (n - 1) as f64 * self.dt,
        }
    }

    pub fn last(&self) -> Option<&FluidState> {
        self.states.last()
    }

    /// `(time, state)` pairs over the grid.
    pub fn iter(&self) -> impl Iterator<Item = (f64, &FluidState)> {
        self.states
            .iter()
            .enumerate()
            .map(|(i, s)| (i as f64 * self.dt, s))
    }

    /// Keeps every `stride`-th sample (including the first), producing a
    /// trajectory on the coarser grid `stride * dt`.
    pub fn thin(&self, stride: usize) -> Trajectory {
        assert!(stride >= 1, "stride must be at least 1");
        Trajectory {
            kind: self.kind,
            dt: self.dt * stride as f64,
            states: self.states.iter().copied().step_by(stride).collect(),
        }
    }

    /// Sup-distance report against another trajectory on the same grid.
    pub fn sup_distance(&self, other: &Trajectory) -> Result<DistanceReport, Error> {
        if self.is_empty() || other.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        let dt_scale = self.dt.abs().max(other.dt.abs());
        if self.len() != other.len() || (self.dt - other.dt).abs() > 1e-12 * dt_scale {
            return Err(Error::GridMismatch);
        }
        let mut sup = 0.0_f64;
        let mut per = [0.0_f64; 3];
        for (a, b) in self.states.iter().zip(&other.states) {
            let d = *a - *b;
            sup = sup.max(d.norm());
            let comps = d.as_array();
            for (acc, c) in per.iter_mut().zip(comps) {
                *acc = acc.max(c.abs());
            }
        }
        Ok(DistanceReport {
            sup,
            per_component: per,
        })
    }

    /// Writes the centered CSV form, header `t,x,y,v`.
    pub fn write_centered_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x,y,v")?;
        for (t, s) in self.iter() {
            writeln!(w, "{},{},{},{}", t, s.pending, s.queue_diff, s.agents)?;
        }
        Ok(())
    }

    /// Writes the raw-coordinate CSV form, header `t,X,Y,V,Z`, obtained by
    /// undoing the centering; `Z` is agents-in-system minus the agent queue.
    pub fn write_raw_csv<W: io::Write>(&self, mut w: W, params: &ModelParams) -> io::Result<()> {
        writeln!(w, "t,X,Y,V,Z")?;
        for (t, s) in self.iter() {
            let (x, y, v) = s.to_raw(params);
            let z = v - y.max(0.0);
            writeln!(w, "{},{},{},{},{}", t, x, y, v, z)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(states: Vec<FluidState>) -> Trajectory {
        Trajectory {
            kind: TrajectoryKind::FluidUnbounded,
            dt: 0.5,
            states,
        }
    }

    #[test]
    fn identical_trajectories_have_zero_distance() {
        let a = traj(vec![
            FluidState::new(1.0, 2.0, 3.0),
            FluidState::new(-1.0, 0.0, 0.5),
        ]);
        let d = a.sup_distance(&a.clone()).unwrap();
        assert_eq!(d.sup, 0.0);
        assert_eq!(d.per_component, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn grid_mismatch_detected() {
        let a = traj(vec![FluidState::ORIGIN; 3]);
        let mut b = traj(vec![FluidState::ORIGIN; 3]);
        b.dt = 0.25;
        assert_eq!(a.sup_distance(&b).unwrap_err(), Error::GridMismatch);
        let c = traj(vec![FluidState::ORIGIN; 4]);
        assert_eq!(a.sup_distance(&c).unwrap_err(), Error::GridMismatch);
    }

    #[test]
    fn sup_dominates_components() {
        let a = traj(vec![FluidState::new(1.0, -2.0, 0.0), FluidState::ORIGIN]);
        let b = traj(vec![FluidState::ORIGIN, FluidState::new(0.0, 0.0, 4.0)]);
        let d = a.sup_distance(&b).unwrap();
        let max_comp = d.per_component.iter().cloned().fold(0.0_f64, f64::max);
        assert!(d.sup >= max_comp);
        assert!((d.per_component[2] - 4.0).abs() < 1e-15);
    }

    #[test]
    fn centered_csv_header_and_rows() {
        let a = traj(vec![FluidState::new(0.25, -1.0, 2.0)]);
        let mut buf = Vec::new();
        a.write_centered_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "t,x,y,v\n0,0.25,-1,2\n");
    }

    #[test]
    fn thinning_preserves_first_sample() {
        let a = traj(vec![
            FluidState::new(1.0, 0.0, 0.0),
            FluidState::new(2.0, 0.0, 0.0),
            FluidState::new(3.0, 0.0, 0.0),
        ]);
        let t = a.thin(2);
        assert_eq!(t.len(), 2);
        assert_eq!(t.dt, 1.0);
        assert_eq!(t.states[0].pending, 1.0);
        assert_eq!(t.states[1].pending, 3.0);
    }
}
