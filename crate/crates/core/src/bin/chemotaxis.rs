use std::path::PathBuf;
use std::process::ExitCode;

use chemotaxis_fe::experiments::{
    cmd_eoc, cmd_run, cmd_table1, parse_real, EocOptions, RunOptions, Table1Options, EXIT_CONFIG,
};
use chemotaxis_fe::schemes::SchemeId;
use clap::{ArgGroup, Parser, Subcommand};

fn real(s: &str) -> Result<f64, String> {
    parse_real(s).map_err(|e| e.to_string())
}

/// Finite element solvers for a chemotaxis-consumption system in 1D.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its ledger, snapshots and summary.
    #[command(group(ArgGroup::new("source").required(true).args(["preset", "config"])))]
    Run {
        /// example-i, example-ii, example-iii or example-iv
        #[arg(long)]
        preset: Option<String>,
        /// key = value configuration file
        #[arg(long)]
        config: Option<PathBuf>,
        /// uv, uv-nd, uv-ns, uvs or uv-ad
        #[arg(long)]
        scheme: Option<SchemeId>,
        /// mesh size, e.g. 1/1000
        #[arg(long, value_parser = real)]
        h: Option<f64>,
        #[arg(long, value_parser = real)]
        dt: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimum of u over time for every scheme on the Example II grid.
    Table1 {
        #[arg(long, value_parser = real, value_delimiter = ',', num_args = 1..)]
        dt_list: Vec<f64>,
        #[arg(long, value_parser = real, value_delimiter = ',', num_args = 1..)]
        h_list: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Errors and convergence orders on Example IV.
    Eoc {
        #[arg(long)]
        scheme: SchemeId,
        /// compute the reference with the scheme under test
        #[arg(long)]
        self_reference: bool,
        /// reference at h = 1/120000 and dt = 1e-9 (slow)
        #[arg(long)]
        paper_reference: bool,
        /// reuse u_ref.csv and v_ref.csv from this directory
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Run {
            preset,
            config,
            scheme,
            h,
            dt,
            out,
        } => cmd_run(&RunOptions {
            preset,
            config,
            scheme,
            h,
            dt,
            out,
        }),
        Command::Table1 {
            dt_list,
            h_list,
            out,
        } => cmd_table1(&Table1Options {
            dt_list,
            h_list,
            out,
        }),
        Command::Eoc {
            scheme,
            self_reference,
            paper_reference,
            reference,
            out,
        } => cmd_eoc(&EocOptions {
            scheme,
            self_reference,
            paper_reference,
            reference_dir: reference,
            out,
        }),
    };
    ExitCode::from(code as u8)
}
