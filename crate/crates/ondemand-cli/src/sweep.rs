//! Parameter sweeps over the feedback gains, with optional fluid and
//! simulation convergence checks per grid point, and the multi-start probe
//! that looks for counterexamples to "locally stable implies every bounded
//! trajectory settles".

use rayon::prelude::*;
use serde::Serialize;

use ondemand::error::Error;
use ondemand::fluid::{detect_convergence, integrate, FluidConfig};
use ondemand::params::ModelParams;
use ondemand::sim::{run_replications, Scheme, SimConfig};
use ondemand::stability::{condition_i, condition_ii, cqlf_exists, CqlfVerdict, SwitchedPair};
use ondemand::state::SimState;

use crate::report::fluid_initial;

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Gamma,
    Epsilon,
}

impl SweepParam {
    pub fn apply(&self, base: &ModelParams, value: f64) -> ModelParams {
        let mut p = *base;
        match self {
            SweepParam::Gamma => p.gamma = value,
            SweepParam::Epsilon => p.epsilon = value,
        }
        p
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Gamma => "gamma",
            SweepParam::Epsilon => "epsilon",
        }
    }
}

/// Empirical-check settings shared by sweeps and probes.
#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    /// Run the bounded fluid from the initial state at each point.
    pub fluid: bool,
    /// Run stylized simulations at each point.
    pub sim: bool,
    /// Replications per point for the simulation verdict (majority vote).
    pub seeds: usize,
    pub seed: u64,
    pub horizon: f64,
    pub sample_dt: f64,
    /// Convergence tolerance for the centered simulation trajectory; the
    /// fluid uses the tighter default.
    pub sim_conv_tol: f64,
    pub initial: SimState,
}

impl SweepOptions {
    pub fn new(initial: SimState) -> Self {
        SweepOptions {
            fluid: true,
            sim: true,
            seeds: 20,
            seed: 1,
            horizon: 100.0,
            sample_dt: 0.1,
            sim_conv_tol: 0.1,
            initial,
        }
    }
}

/// Stability predicates and empirical verdicts at one grid value.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub cond_i: bool,
    pub cond_ii: bool,
    pub cqlf: CqlfVerdict,
    pub fluid_converged: Option<bool>,
    /// Majority verdict over the replications.
    pub sim_converged: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub param: String,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// CSV form: one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,cond_i,cond_ii,cqlf,fluid_converged,sim_converged\n");
        for p in &self.points {
            let cqlf = match p.cqlf {
                CqlfVerdict::Exists => "exists",
                CqlfVerdict::NotExists => "not_exists",
                CqlfVerdict::Undetermined => "undetermined",
            };
            let opt = |v: Option<bool>| match v {
                Some(true) => "true",
                Some(false) => "false",
                None => "",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.value,
                p.cond_i,
                p.cond_ii,
                cqlf,
                opt(p.fluid_converged),
                opt(p.sim_converged)
            ));
        }
        out
    }
}

/// Inclusive uniform grid from `from` to `to`.
pub fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    assert!(steps >= 1);
    if steps == 1 {
        return vec![from];
    }
    (0..steps)
        .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
        .collect()
}

fn fluid_converged_from(
    params: &ModelParams,
    initial: &SimState,
    horizon: f64,
) -> Result<bool, Error> {
    let cfg = FluidConfig {
        dt: 1e-3,
        horizon,
        bounded: true,
        conv_tol: 1e-3,
        conv_window: 10.0_f64.min(horizon / 2.0),
    };
    let traj = integrate(fluid_initial(initial, params), params, &cfg)?;
    Ok(detect_convergence(&traj, &cfg).converged)
}

fn sim_majority_converged(
    params: &ModelParams,
    initial: &SimState,
    opts: &SweepOptions,
) -> Result<bool, Error> {
    let initial = SimState::new(initial.pending, initial.queue_diff, initial.in_service);
    let cfg = SimConfig::new(
        opts.horizon,
        opts.sample_dt,
        opts.seed,
        Scheme::Stylized,
        initial,
    );
    let conv_cfg = FluidConfig {
        dt: opts.sample_dt,
        horizon: opts.horizon,
        bounded: true,
        conv_tol: opts.sim_conv_tol,
        conv_window: 10.0_f64.min(opts.horizon / 2.0),
    };
    let runs = run_replications(&cfg, params, opts.seeds)?;
    let converged = runs
        .iter()
        .filter(|traj| detect_convergence(&traj.centered(params), &conv_cfg).converged)
        .count();
    Ok(converged * 2 > opts.seeds)
}

/// Evaluates stability predicates (and optionally empirical convergence)
/// across the grid. Grid points run in parallel.
pub fn run_sweep(
    base: &ModelParams,
    param: SweepParam,
    values: &[f64],
    opts: &SweepOptions,
) -> Result<SweepResult, Error> {
    let points: Result<Vec<SweepPoint>, Error> = values
        .par_iter()
        .map(|&value| {
            let p = param.apply(base, value).validated()?;
            let pair = SwitchedPair::from_params(&p);
            let fluid_converged = if opts.fluid {
                Some(fluid_converged_from(&p, &opts.initial, opts.horizon)?)
            } else {
                None
            };
            let sim_converged = if opts.sim {
                Some(sim_majority_converged(&p, &opts.initial, opts)?)
            } else {
                None
            };
            Ok(SweepPoint {
                value,
                cond_i: condition_i(&p).satisfied,
                cond_ii: condition_ii(&p).satisfied,
                cqlf: cqlf_exists(&pair),
                fluid_converged,
                sim_converged,
            })
        })
        .collect();
    Ok(SweepResult {
        param: param.name().to_string(),
        points: points?,
    })
}

/// One probe verdict: local-stability predicates against empirical
/// convergence of a battery of bounded-fluid starts plus simulations.
#[derive(Debug, Clone, Serialize)]
pub struct ProbePoint {
    pub gamma: f64,
    /// Either sufficient gain condition holds.
    pub locally_stable: bool,
    pub cqlf: CqlfVerdict,
    pub fluid_all_converged: bool,
    /// Every battery start reached a majority-of-seeds settling verdict.
    pub sim_all_converged: Option<bool>,
    /// Locally stable by the sufficient conditions, yet some bounded fluid
    /// trajectory failed to settle: evidence against "local implies global".
    pub counterexample: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeResult {
    pub battery: Vec<[i64; 3]>,
    pub points: Vec<ProbePoint>,
}

/// Default battery of raw initial states, scaled by `r`: empty, queue-heavy
/// on the floor, customer-heavy, crowded, and far-displaced.
pub fn default_battery(r: u64) -> Vec<[i64; 3]> {
    let r = r as i64;
    vec![
        [0, 0, 0],
        [0, 2 * r, 0],
        [2 * r, -2 * r, r],
        [2 * r, 4 * r, r],
        [r, 6 * r, 2 * r],
    ]
}

/// Probes the "locally stable implies bounded trajectories settle"
/// conjecture over a gain grid.
pub fn conjecture_probe(
    base: &ModelParams,
    gammas: &[f64],
    battery: &[[i64; 3]],
    opts: &SweepOptions,
) -> Result<ProbeResult, Error> {
    let points: Result<Vec<ProbePoint>, Error> = gammas
        .par_iter()
        .map(|&gamma| {
            let p = SweepParam::Gamma.apply(base, gamma).validated()?;
            let locally_stable = condition_i(&p).satisfied || condition_ii(&p).satisfied;
            let mut fluid_all_converged = true;
            let mut sim_all_converged = opts.sim.then_some(true);
            for raw in battery {
                let initial = SimState::new(raw[0], raw[1], raw[2]);
                if !fluid_converged_from(&p, &initial, opts.horizon)? {
                    fluid_all_converged = false;
                }
                if let Some(all) = sim_all_converged.as_mut() {
                    if *all && !sim_majority_converged(&p, &initial, opts)? {
                        *all = false;
                    }
                }
            }
            Ok(ProbePoint {
                gamma,
                locally_stable,
                cqlf: cqlf_exists(&SwitchedPair::from_params(&p)),
                fluid_all_converged,
                sim_all_converged,
                counterexample: locally_stable && !fluid_all_converged,
            })
        })
        .collect();
    Ok(ProbeResult {
        battery: battery.to_vec(),
        points: points?,
    })
}
