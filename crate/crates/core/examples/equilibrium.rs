//! Example I: the population flattens out to its mean while the chemical is
//! consumed. Runs on a coarse mesh by default; pass `full` for h = 1e-3,
//! dt = 1e-6 (about half a minute in release mode).
//!
//! ```text
//! cargo run --release --example equilibrium [full]
//! ```

use chemotaxis_fe::experiments::{execute, RunConfig};
use chemotaxis_fe::schemes::SchemeId;

fn main() {
    let full = std::env::args().any(|a| a == "full");
    let mut cfg = RunConfig::preset("example-i", SchemeId::Uv).unwrap();
    if !full {
        cfg.set_h(1.0 / 200.0).unwrap();
        cfg.dt = 1e-5;
    }
    cfg.snapshot_times = Some(vec![0.0, 0.001, 0.01, 0.03, 0.1, 0.3]);
    let art = execute(&cfg).unwrap();
    let ledger = &art.outcome.ledger;
    let m0 = ledger.records[0].mass;

    println!("h = {}, dt = {}, {} steps", cfg.h(), cfg.dt, ledger.completed_steps());
    println!("{:>6} {:>12} {:>12} {:>12}", "t", "|u - m0|", "max v", "E(u, v)");
    for (t, state) in &art.snapshots {
        let dev = state.u.values().iter().map(|u| (u - m0).abs()).fold(0.0, f64::max);
        let record = ledger.records.iter().find(|r| r.n == state.n).unwrap();
        println!("{t:>6} {dev:>12.4e} {:>12.4e} {:>12.6e}", state.v.max(), record.e_uv);
    }
    let drift = ledger
        .records
        .iter()
        .map(|r| (r.mass - m0).abs() / m0)
        .fold(0.0, f64::max);
    println!("mass drift {drift:.1e}, min u over run {:.4e}", ledger.global_min_u);
}
