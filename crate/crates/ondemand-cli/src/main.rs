//! Command-line front end: stability reports, fluid integration, stochastic
//! simulation, fluid/simulation comparison, preset experiments, and gain
//! sweeps. Exit status is 0 on success, 1 on usage or validation errors,
//! and 2 on numerical failures.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ondemand::fluid::{boundary_contacts, detect_convergence, integrate, FluidConfig};
use ondemand::params::ModelParams;
use ondemand::sim::{run as run_sim, Scheme, SimConfig};
use ondemand::stability::StabilityReport;
use ondemand::state::SimState;
use ondemand::Error as ModelError;

use ondemand_cli::presets::{preset, preset_ids};
use ondemand_cli::report::{execute, fluid_initial, run_example, write_artifacts};
use ondemand_cli::sweep::{
    conjecture_probe, default_battery, linspace, run_sweep, SweepOptions, SweepParam,
};

#[derive(Parser)]
#[command(
    name = "ondemand",
    about = "Queueing with on-demand invited agents: simulation, fluid limits, stability",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Stylized,
    Actual,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::Stylized => Scheme::Stylized,
            SchemeArg::Actual => Scheme::Actual,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CoordsArg {
    /// Centered fluid coordinates (`t,x,y,v`).
    Centered,
    /// Raw process coordinates.
    Raw,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct ParamArgs {
    /// Parameter file with `key = value` lines (the nine model keys).
    #[arg(long, value_name = "FILE")]
    params: Option<PathBuf>,
    /// Set or override one parameter, e.g. `--set gamma=2.5` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ParamArgs {
    fn resolve(&self) -> anyhow::Result<ModelParams> {
        let pairs: Vec<(String, String)> = self
            .set
            .iter()
            .map(|kv| {
                kv.split_once('=')
                    .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                    .ok_or_else(|| anyhow!("malformed --set (expected KEY=VALUE): {kv:?}"))
            })
            .collect::<anyhow::Result<_>>()?;
        match &self.params {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading parameter file {}", path.display()))?;
                let mut params = ModelParams::from_key_values(&text)?;
                for (key, value) in &pairs {
                    params.set(key, value)?;
                }
                Ok(params.validated()?)
            }
            None => {
                if pairs.is_empty() {
                    bail!("no parameters given: use --params FILE and/or --set KEY=VALUE");
                }
                // Later --set occurrences override earlier ones.
                let mut merged: Vec<(String, String)> = Vec::new();
                for (key, value) in pairs {
                    if let Some(entry) = merged.iter_mut().find(|(k, _)| *k == key) {
                        entry.1 = value;
                    } else {
                        merged.push((key, value));
                    }
                }
                Ok(ModelParams::from_pairs(
                    merged.iter().map(|(k, v)| (k.as_str(), v.as_str())),
                )?)
            }
        }
    }
}

/// Parses `X,Y,Z` or `X,Y,Z,Xtarget`.
fn parse_initial(text: &str, scheme: Scheme) -> anyhow::Result<SimState> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 && parts.len() != 4 {
        bail!("--initial expects X,Y,Z or X,Y,Z,Xtarget, got {text:?}");
    }
    let count = |s: &str, what: &str| -> anyhow::Result<i64> {
        s.parse::<i64>()
            .map_err(|_| anyhow!("invalid {what} in --initial: {s:?}"))
    };
    let pending = count(parts[0], "pending count")?;
    let queue_diff = count(parts[1], "queue difference")?;
    let in_service = count(parts[2], "in-service count")?;
    let state = if parts.len() == 4 {
        let target: f64 = parts[3]
            .parse()
            .map_err(|_| anyhow!("invalid target in --initial: {:?}", parts[3]))?;
        SimState::with_target(pending, queue_diff, in_service, target)
    } else if scheme == Scheme::Actual {
        // Default target: track the supplied pending count.
        SimState::with_target(pending, queue_diff, in_service, pending.max(0) as f64)
    } else {
        SimState::new(pending, queue_diff, in_service)
    };
    state.validate()?;
    Ok(state)
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the stability report (Hurwitz tests, gain conditions, CQLF).
    Stability {
        #[command(flatten)]
        params: ParamArgs,
        /// Write `stability.json` here instead of stdout.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Integrate the fluid dynamics; emits trajectory CSV and a convergence
    /// verdict.
    Fluid {
        #[command(flatten)]
        params: ParamArgs,
        /// Raw initial state `X,Y,Z` (centered internally).
        #[arg(long, value_name = "X,Y,Z", default_value = "0,0,0")]
        initial: String,
        /// Integration horizon.
        #[arg(long = "T", default_value_t = 100.0)]
        horizon: f64,
        /// Integration step.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Drop the pending-agent floor (boundary-free system).
        #[arg(long)]
        unbounded: bool,
        /// Output grid spacing for the CSV (trajectory is thinned to it).
        #[arg(long = "sample-dt", default_value_t = 0.05)]
        sample_dt: f64,
        #[arg(long, value_enum, default_value_t = CoordsArg::Centered)]
        coords: CoordsArg,
        /// Write `fluid.csv` here instead of stdout.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Run one stochastic simulation; emits trajectory CSV.
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = SchemeArg::Stylized)]
        scheme: SchemeArg,
        /// Initial state `X,Y,Z` or `X,Y,Z,Xtarget`.
        #[arg(long, value_name = "X,Y,Z[,Xt]", default_value = "0,0,0")]
        initial: String,
        #[arg(long = "T", default_value_t = 50.0)]
        horizon: f64,
        #[arg(long = "sample-dt", default_value_t = 0.05)]
        sample_dt: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = CoordsArg::Raw)]
        coords: CoordsArg,
        /// Write `sim.csv` here instead of stdout.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Run the fluid and one simulation on a shared grid; emits a
    /// sup-distance report.
    Compare {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = SchemeArg::Stylized)]
        scheme: SchemeArg,
        #[arg(long, value_name = "X,Y,Z[,Xt]", default_value = "0,0,0")]
        initial: String,
        #[arg(long = "T", default_value_t = 50.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long = "sample-dt", default_value_t = 0.05)]
        sample_dt: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write `report.json` here instead of stdout.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Run a preset experiment end to end into an output directory.
    Example {
        /// Preset id; use `--list` to see the catalog.
        id: Option<String>,
        /// List available presets.
        #[arg(long)]
        list: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long = "sample-dt", default_value_t = 0.05)]
        sample_dt: f64,
        /// Output directory for the artifact files.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Sweep gamma or epsilon over a grid; emits per-point stability and
    /// convergence verdicts.
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value = "gamma")]
        param: SweepParamArg,
        #[arg(long, default_value_t = 1.0)]
        from: f64,
        #[arg(long, default_value_t = 20.0)]
        to: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Explicit grid values (overrides --from/--to/--steps).
        #[arg(long, value_name = "V1,V2,...")]
        values: Option<String>,
        /// Replications per point for the simulation verdict.
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Skip the bounded-fluid convergence check.
        #[arg(long)]
        no_fluid: bool,
        /// Skip the simulation convergence check.
        #[arg(long)]
        no_sim: bool,
        /// Horizon for the empirical checks.
        #[arg(long = "T", default_value_t = 100.0)]
        horizon: f64,
        #[arg(long = "sample-dt", default_value_t = 0.1)]
        sample_dt: f64,
        /// Centered-norm tolerance for the simulation settling verdict;
        /// scale it to the family's stationary fluctuation level.
        #[arg(long = "sim-conv-tol", default_value_t = 0.1)]
        sim_conv_tol: f64,
        /// Raw initial state for the empirical checks (default `0,2r,0`).
        #[arg(long, value_name = "X,Y,Z")]
        initial: Option<String>,
        /// Probe a battery of initial states per gain and report
        /// counterexamples to "locally stable implies settling" (gamma only).
        #[arg(long)]
        battery: bool,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        /// Write the result here instead of stdout.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepParamArg {
    Gamma,
    Epsilon,
}

impl From<SweepParamArg> for SweepParam {
    fn from(p: SweepParamArg) -> SweepParam {
        match p {
            SweepParamArg::Gamma => SweepParam::Gamma,
            SweepParamArg::Epsilon => SweepParam::Epsilon,
        }
    }
}

fn emit(out: &Option<PathBuf>, file_name: &str, contents: &str) -> anyhow::Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join(file_name);
            fs::write(&path, contents)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes())?;
            Ok(())
        }
    }
}

fn run_command(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Stability { params, out } => {
            let p = params.resolve()?;
            let report = StabilityReport::evaluate(&p);
            let json = serde_json::to_string_pretty(&report)? + "\n";
            emit(&out, "stability.json", &json)
        }
        Command::Fluid {
            params,
            initial,
            horizon,
            dt,
            unbounded,
            sample_dt,
            coords,
            out,
        } => {
            let p = params.resolve()?;
            let init = parse_initial(&initial, Scheme::Stylized)?;
            if init.target.is_some() {
                bail!("fluid takes a 3-component initial state (X,Y,Z)");
            }
            let cfg = FluidConfig {
                dt,
                horizon,
                bounded: !unbounded,
                conv_tol: 1e-3,
                conv_window: 10.0_f64.min(horizon / 2.0),
            };
            let traj = integrate(init.to_centered(&p), &p, &cfg)?;
            let verdict = detect_convergence(&traj, &cfg);
            let stride = (sample_dt / dt).round().max(1.0) as usize;
            let thinned = traj.thin(stride);
            let mut csv = Vec::new();
            match coords {
                CoordsArg::Centered => thinned.write_centered_csv(&mut csv)?,
                CoordsArg::Raw => thinned.write_raw_csv(&mut csv, &p)?,
            }
            emit(&out, "fluid.csv", std::str::from_utf8(&csv)?)?;
            eprintln!(
                "convergence: {}",
                serde_json::json!({
                    "converged": verdict.converged,
                    "t_conv": verdict.t_conv,
                    "final_norm": verdict.final_norm,
                    "boundary_contacts": if cfg.bounded { Some(boundary_contacts(&traj, &p)) } else { None },
                })
            );
            Ok(())
        }
        Command::Simulate {
            params,
            scheme,
            initial,
            horizon,
            sample_dt,
            seed,
            coords,
            out,
        } => {
            let p = params.resolve()?;
            let scheme: Scheme = scheme.into();
            let init = parse_initial(&initial, scheme)?;
            let cfg = SimConfig::new(horizon, sample_dt, seed, scheme, init);
            let traj = run_sim(&cfg, &p)?;
            let mut csv = Vec::new();
            match coords {
                CoordsArg::Raw => traj.write_csv(&mut csv)?,
                CoordsArg::Centered => traj.centered(&p).write_centered_csv(&mut csv)?,
            }
            emit(&out, "sim.csv", std::str::from_utf8(&csv)?)
        }
        Command::Compare {
            params,
            scheme,
            initial,
            horizon,
            dt,
            sample_dt,
            seed,
            out,
        } => {
            let p = params.resolve()?;
            let scheme: Scheme = scheme.into();
            let init = parse_initial(&initial, scheme)?;
            let fluid_cfg = FluidConfig {
                dt,
                horizon,
                bounded: true,
                conv_tol: 1e-3,
                conv_window: 10.0_f64.min(horizon / 2.0),
            };
            let stride = (sample_dt / dt).round().max(1.0) as usize;
            if (stride as f64 * dt - sample_dt).abs() > 1e-9 * sample_dt {
                bail!("--sample-dt must be an integer multiple of --dt for comparison");
            }
            let fluid = integrate(fluid_initial(&init, &p), &p, &fluid_cfg)?;
            let verdict = detect_convergence(&fluid, &fluid_cfg);
            let fluid_grid = fluid.thin(stride);
            let sim_cfg = SimConfig::new(horizon, sample_dt, seed, scheme, init);
            let sim = run_sim(&sim_cfg, &p)?;
            let distance = sim.centered(&p).sup_distance(&fluid_grid)?;
            let json = serde_json::to_string_pretty(&serde_json::json!({
                "scheme": scheme,
                "seed": seed,
                "horizon": horizon,
                "fluid": {
                    "converged": verdict.converged,
                    "t_conv": verdict.t_conv,
                    "final_norm": verdict.final_norm,
                },
                "comparison": distance,
            }))? + "\n";
            emit(&out, "report.json", &json)
        }
        Command::Example {
            id,
            list,
            seed,
            sample_dt,
            out,
        } => {
            if list {
                for p in ondemand_cli::presets::all_presets() {
                    println!("{:10} {}", p.id, p.description);
                }
                return Ok(());
            }
            let id = id.ok_or_else(|| anyhow!("missing preset id; try `example --list`"))?;
            let preset = preset(&id).ok_or_else(|| {
                anyhow!(
                    "unknown preset {id:?}; available: {}",
                    preset_ids().join(", ")
                )
            })?;
            let report = match &out {
                Some(dir) => run_example(&preset, seed, sample_dt, Path::new(dir))?,
                None => {
                    let (report, fluid, sim) = execute(&preset, seed, sample_dt)?;
                    // No directory given: artifacts go under ./runs/<id>.
                    let dir = PathBuf::from("runs").join(&id);
                    write_artifacts(&report, &fluid, &sim, &dir)?;
                    eprintln!("wrote artifacts under {}", dir.display());
                    report
                }
            };
            println!(
                "{}",
                serde_json::json!({
                    "preset": report.preset,
                    "fluid_converged": report.fluid.converged,
                    "boundary_contacts": report.fluid.boundary_contacts,
                    "comparison_sup": report.comparison.sup,
                    "comparison_sup_excluding_start": report.comparison.sup_excluding_start,
                })
            );
            Ok(())
        }
        Command::Sweep {
            params,
            param,
            from,
            to,
            steps,
            values,
            seeds,
            seed,
            no_fluid,
            no_sim,
            horizon,
            sample_dt,
            initial,
            sim_conv_tol,
            battery,
            format,
            out,
        } => {
            let p = params.resolve()?;
            let grid: Vec<f64> = match values {
                Some(list) => list
                    .split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<f64>()
                            .map_err(|_| anyhow!("invalid sweep value {v:?}"))
                    })
                    .collect::<anyhow::Result<_>>()?,
                None => linspace(from, to, steps),
            };
            if grid.is_empty() {
                bail!("empty sweep grid");
            }
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                bail!("sweep grid must be strictly increasing");
            }
            let init = match initial {
                Some(text) => parse_initial(&text, Scheme::Stylized)?,
                None => SimState::new(0, 2 * p.r as i64, 0),
            };
            let mut opts = SweepOptions::new(init);
            opts.fluid = !no_fluid;
            opts.sim = !no_sim;
            opts.seeds = seeds;
            opts.seed = seed;
            opts.horizon = horizon;
            opts.sample_dt = sample_dt;
            opts.sim_conv_tol = sim_conv_tol;

            if battery {
                let sweep_param: SweepParam = param.into();
                if sweep_param != SweepParam::Gamma {
                    bail!("--battery probes the gamma grid only");
                }
                let result = conjecture_probe(&p, &grid, &default_battery(p.r), &opts)?;
                let json = serde_json::to_string_pretty(&result)? + "\n";
                return emit(&out, "probe.json", &json);
            }

            let result = run_sweep(&p, param.into(), &grid, &opts)?;
            match format {
                FormatArg::Json => {
                    let json = serde_json::to_string_pretty(&result)? + "\n";
                    emit(&out, "sweep.json", &json)
                }
                FormatArg::Csv => emit(&out, "sweep.csv", &result.to_csv()),
            }
        }
    }
}

/// 2 for numerical failures, 1 for everything else.
fn classify(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<ModelError>() {
        Some(
            ModelError::Diverged { .. }
            | ModelError::AbsorbingState
            | ModelError::InvariantViolation { .. },
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes; everything else is a
            // usage error (exit 1).
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match run_command(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(classify(&e))
        }
    }
}
