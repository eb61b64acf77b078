//! Scenario files and the experiment runner behind the command-line tool.

mod config;
mod run;

pub use config::{
    AdmitParams, DecayParams, EvolveParams, Experiment, InvarianceParams, LadderParams, LatticeConfig,
    MonodromyParams, PacketConfig, ScenarioConfig, SmoothCutoffScan, SmoothParams, SpectrumParams,
    WaveopParams, WindowConfig,
};
pub use run::{execute, par_map, run_scenario, write_outputs, RunOptions, RunOutput};
