//! Minimum of u over Example II for every scheme, on a reduced grid.
//! Cells whose run fails are shown as `x`.
//!
//! ```text
//! cargo run --release --example positivity_table
//! THREADS=4 cargo run --release --example positivity_table
//! ```

use chemotaxis_fe::experiments::{table1, thread_pool, Table1Spec};

fn main() {
    let spec = Table1Spec {
        dts: vec![1e-7, 1e-8],
        hs: vec![1.0 / 100.0, 1.0 / 500.0, 1.0 / 1000.0],
        ..Table1Spec::default()
    };
    let table = thread_pool().unwrap().install(|| table1(&spec)).unwrap();
    print!("{:<6} {:>6}", "scheme", "dt");
    for h in &spec.hs {
        print!(" {:>12}", format!("h=1/{}", (1.0 / h).round()));
    }
    println!();
    for &scheme in &spec.schemes {
        for &dt in &spec.dts {
            print!("{:<6} {dt:>6.0e}", scheme.name());
            for &h in &spec.hs {
                let cell = table.cell(scheme, dt, h).unwrap();
                match cell.min_u {
                    Some(m) => print!(" {m:>12.3e}"),
                    None => print!(" {:>12}", "x"),
                }
            }
            println!();
        }
    }
}
