//! A run described by a configuration file with expression initial data.
//! Writes the ledger, snapshots and summary into a temporary directory, or
//! into the directory given as argument.
//!
//! ```text
//! cargo run --release --example custom_config [out-dir]
//! ```

use std::path::PathBuf;

use chemotaxis_fe::experiments::{execute, parse_config, write_run};

const CONFIG: &str = "
# two bumps attracted by a chemical peak in the middle
scheme = uv-ad
u0 = 1 + 0.8*cos(4*pi*x)
v0 = 1 + exp(-((x - 0.5)/0.05)^2)
chi = 20
mu = 50
T = 2e-3
dt = 1e-6
h = 1/400
snapshots = 0, 5e-4, 1e-3, 2e-3
";

fn main() {
    let cfg = parse_config(CONFIG).unwrap();
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("chemotaxis-custom"));
    let art = execute(&cfg).unwrap();
    write_run(&out, &cfg, &art).unwrap();
    let ledger = &art.outcome.ledger;
    println!(
        "{} steps of {}, min u {:.4e}, final max v {:.4e}",
        ledger.completed_steps(),
        cfg.scheme,
        ledger.global_min_u,
        ledger.last().max_v
    );
    println!("results in {}", out.display());
}
