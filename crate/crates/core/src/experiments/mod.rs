//! Experiment drivers: configuration, presets, the command implementations
//! and their CSV output.

mod commands;
mod config;
mod output;
mod presets;

pub use commands::{
    cmd_eoc, cmd_run, cmd_table1, eoc, execute, table1, thread_pool, write_run, write_table1,
    EocOptions, EocResult, EocSpec, RunArtifacts, RunOptions, Table1, Table1Cell, Table1Options,
    Table1Spec, EXIT_CONFIG, EXIT_OK, EXIT_SOLVER,
};
pub use config::{
    load_config, nodes_for_spacing, parse_config, parse_real, InitialProfile, RunConfig,
};
pub use output::{
    fmt_real, read_field, time_label, write_eoc, write_field, write_ledger, LEDGER_HEADER,
};
pub use presets::{preset, presets, Preset};
