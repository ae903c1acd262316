//! Errors and convergence orders on Example IV. Defaults to the coarse
//! ladder 1/50..1/200 against h = 1/2000; pass `full` for 1/200..1/1000
//! against h = 1/12000.
//!
//! ```text
//! cargo run --release --example convergence_order [uv|uv-nd|uv-ns|uvs|uv-ad] [full]
//! ```

use chemotaxis_fe::experiments::{eoc, thread_pool, EocSpec};
use chemotaxis_fe::schemes::SchemeId;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scheme: SchemeId = args
        .iter()
        .find_map(|a| a.parse().ok())
        .unwrap_or(SchemeId::Uv);
    let mut spec = if args.iter().any(|a| a == "full") {
        EocSpec::new(scheme)
    } else {
        EocSpec::mini(scheme)
    };
    // uvs is compared against itself
    spec.self_reference = scheme == SchemeId::Uvs;
    let result = thread_pool().unwrap().install(|| eoc(&spec)).unwrap();
    println!(
        "{scheme}, reference {} at h = {:e}",
        spec.reference_scheme(),
        spec.reference_h
    );
    let r = |x: Option<f64>| x.map_or("-".into(), |x| format!("{x:.4}"));
    for row in &result.table.rows {
        println!(
            "h = 1/{:<5} e(u) {:.3e} r {:>6}  e(v) {:.3e} r {:>6}  e(v_x) {:.3e} r {:>6}",
            (1.0 / row.h).round(),
            row.e_u,
            r(row.r_u),
            row.e_v,
            r(row.r_v),
            row.e_vx,
            r(row.r_vx)
        );
    }
}
