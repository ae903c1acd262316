//! Per-step energy inequalities of the energy-stable schemes. A negative
//! residual means the discrete energy law holds with room to spare.
//!
//! ```text
//! cargo run --release --example energy_stability
//! ```

use chemotaxis_fe::experiments::RunConfig;
use chemotaxis_fe::schemes::{run, SchemeId};

fn main() {
    let cases = [
        ("example-i", SchemeId::Uvs, 1e-6),
        ("example-ii", SchemeId::UvNd, 1e-8),
        ("example-ii", SchemeId::UvNs, 1e-8),
    ];
    for (preset, scheme, dt) in cases {
        let mut cfg = RunConfig::preset(preset, scheme).unwrap();
        cfg.dt = dt;
        cfg.t_final = 1000.0 * dt;
        let out = run(scheme, cfg.initial_state().unwrap(), &cfg.params().unwrap(), cfg.t_final, &mut [])
            .unwrap();
        let ledger = &out.ledger;
        let worst = ledger
            .records
            .iter()
            .filter_map(|r| Some((r.n, r.energy_residual?, r.tol_energy?)))
            .max_by(|a, b| (a.1 / a.2).total_cmp(&(b.1 / b.2)))
            .unwrap();
        println!(
            "{scheme:<6} {preset:<10} steps {:>5}  violations {}  worst step {:>4}: residual {:.3e} vs tol {:.3e}",
            ledger.completed_steps(),
            ledger.energy_violations(),
            worst.0,
            worst.1,
            worst.2
        );
    }
}
