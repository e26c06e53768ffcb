//! End-to-end experiment execution: stability report, bounded and
//! boundary-free fluid runs, one simulation, the fluid/simulation
//! comparison, and the on-disk artifact layout.

use std::fs;
use std::path::Path;

use serde::Serialize;

use ondemand::error::Error;
use ondemand::fluid::{boundary_contacts, detect_convergence, integrate, Convergence, FluidConfig};
use ondemand::params::ModelParams;
use ondemand::sim::{run, Scheme, SimConfig, SimTrajectory};
use ondemand::stability::StabilityReport;
use ondemand::state::SimState;
use ondemand::trajectory::Trajectory;

use crate::presets::ExperimentPreset;

/// Summary of one fluid integration.
#[derive(Debug, Clone, Serialize)]
pub struct FluidSummary {
    pub converged: bool,
    pub t_conv: Option<f64>,
    pub final_norm: f64,
    /// Samples sitting on the pending floor (bounded runs only).
    pub boundary_contacts: usize,
}

impl FluidSummary {
    fn new(verdict: Convergence, contacts: usize) -> Self {
        FluidSummary {
            converged: verdict.converged,
            t_conv: verdict.t_conv,
            final_norm: verdict.final_norm,
            boundary_contacts: contacts,
        }
    }
}

/// Fluid/simulation distances on the shared sample grid.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonSummary {
    /// Sup over the whole grid of the Euclidean distance.
    pub sup: f64,
    pub per_component: [f64; 3],
    /// Sup excluding the t = 0 sample; for target-tracking runs the first
    /// sample precedes the first invitation and is not comparable.
    pub sup_excluding_start: f64,
}

/// How far the pending count ran above the invitation target
/// (target-tracking runs only).
#[derive(Debug, Clone, Serialize)]
pub struct TargetTracking {
    pub max_gap: f64,
    /// Gap relative to the peak pending count over the run.
    pub max_gap_over_peak_pending: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub preset: String,
    pub description: String,
    pub scheme: Scheme,
    pub horizon: f64,
    pub seed: u64,
    pub sample_dt: f64,
    pub params: ModelParams,
    pub stability: StabilityReport,
    pub fluid: FluidSummary,
    pub unbounded_fluid: FluidSummary,
    pub comparison: ComparisonSummary,
    pub target_tracking: Option<TargetTracking>,
}

/// Centered fluid image of a simulation initial state. Under the
/// target-tracking scheme the fluid models the stylized dynamics, where the
/// pending count is identified with the target, so pending starts from the
/// larger of the two.
pub fn fluid_initial(initial: &SimState, params: &ModelParams) -> ondemand::FluidState {
    let pending = match initial.target {
        Some(target) => initial.pending.max(target.ceil() as i64),
        None => initial.pending,
    };
    SimState::new(pending, initial.queue_diff, initial.in_service).to_centered(params)
}

fn sup_excluding_start(a: &Trajectory, b: &Trajectory) -> f64 {
    a.states
        .iter()
        .zip(&b.states)
        .skip(1)
        .map(|(x, y)| (*x - *y).norm())
        .fold(0.0_f64, f64::max)
}

/// Runs a preset end to end and writes `params.txt`, `stability.json`,
/// `fluid.csv`, `sim.csv`, and `report.json` into `out_dir`.
pub fn run_example(
    preset: &ExperimentPreset,
    seed: u64,
    sample_dt: f64,
    out_dir: &Path,
) -> anyhow::Result<ExperimentReport> {
    let (report, fluid, sim) = execute(preset, seed, sample_dt)?;
    write_artifacts(&report, &fluid, &sim, out_dir)?;
    Ok(report)
}

/// Runs a preset without touching the filesystem.
pub fn execute(
    preset: &ExperimentPreset,
    seed: u64,
    sample_dt: f64,
) -> Result<(ExperimentReport, Trajectory, SimTrajectory), Error> {
    let params = preset.params.validated()?;
    let stability = StabilityReport::evaluate(&params);

    let dt = 1e-3;
    let stride = (sample_dt / dt).round().max(1.0) as usize;
    let fluid_cfg = FluidConfig {
        dt,
        horizon: preset.horizon,
        bounded: true,
        conv_tol: 1e-3,
        conv_window: 10.0_f64.min(preset.horizon / 2.0),
    };
    let s0 = fluid_initial(&preset.initial, &params);
    let bounded = integrate(s0, &params, &fluid_cfg)?;
    let bounded_summary = FluidSummary::new(
        detect_convergence(&bounded, &fluid_cfg),
        boundary_contacts(&bounded, &params),
    );

    let unbounded_cfg = FluidConfig {
        bounded: false,
        ..fluid_cfg
    };
    let unbounded = integrate(s0, &params, &unbounded_cfg)?;
    let unbounded_summary =
        FluidSummary::new(detect_convergence(&unbounded, &unbounded_cfg), 0);

    let sim_cfg = SimConfig::new(preset.horizon, sample_dt, seed, preset.scheme, preset.initial);
    let sim = run(&sim_cfg, &params)?;

    let fluid_grid = bounded.thin(stride);
    let centered_sim = sim.centered(&params);
    let distance = centered_sim.sup_distance(&fluid_grid)?;
    let comparison = ComparisonSummary {
        sup: distance.sup,
        per_component: distance.per_component,
        sup_excluding_start: sup_excluding_start(&centered_sim, &fluid_grid),
    };

    let target_tracking = match preset.scheme {
        Scheme::Actual => {
            let max_gap = sim
                .samples
                .iter()
                .map(|s| s.pending as f64 - s.target.unwrap_or(0.0))
                .fold(0.0_f64, f64::max);
            let peak_pending = sim
                .samples
                .iter()
                .map(|s| s.pending as f64)
                .fold(1.0_f64, f64::max);
            Some(TargetTracking {
                max_gap,
                max_gap_over_peak_pending: max_gap / peak_pending,
            })
        }
        Scheme::Stylized => None,
    };

    let report = ExperimentReport {
        preset: preset.id.to_string(),
        description: preset.description.to_string(),
        scheme: preset.scheme,
        horizon: preset.horizon,
        seed,
        sample_dt,
        params,
        stability,
        fluid: bounded_summary,
        unbounded_fluid: unbounded_summary,
        comparison,
        target_tracking,
    };
    Ok((report, fluid_grid, sim))
}

/// Writes the five-file artifact layout for one run.
pub fn write_artifacts(
    report: &ExperimentReport,
    fluid_grid: &Trajectory,
    sim: &SimTrajectory,
    out_dir: &Path,
) -> anyhow::Result<()> {
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("params.txt"), report.params.to_key_values())?;
    fs::write(
        out_dir.join("stability.json"),
        serde_json::to_string_pretty(&report.stability)? + "\n",
    )?;

    let mut fluid_csv = Vec::new();
    fluid_grid.write_centered_csv(&mut fluid_csv)?;
    fs::write(out_dir.join("fluid.csv"), fluid_csv)?;

    let mut sim_csv = Vec::new();
    sim.write_csv(&mut sim_csv)?;
    fs::write(out_dir.join("sim.csv"), sim_csv)?;

    fs::write(
        out_dir.join("report.json"),
        serde_json::to_string_pretty(report)? + "\n",
    )?;
    Ok(())
}
