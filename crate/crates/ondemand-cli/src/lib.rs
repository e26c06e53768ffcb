//! Experiment harness for the on-demand invitation toolkit: canned presets,
//! end-to-end experiment execution with flat-file artifacts, and parameter
//! sweeps. The `ondemand` binary is a thin front end over this crate.

pub mod presets;
pub mod report;
pub mod sweep;
