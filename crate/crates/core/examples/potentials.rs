//! Truncated potentials and the Lambda coefficient.
//!
//! ```text
//! cargo run --example potentials
//! ```

use chemotaxis_fe::mesh::{Mesh1D, NodalField};
use chemotaxis_fe::potentials::Truncation;

fn main() {
    let t = Truncation::new(0.01).unwrap();
    println!("eps = {}", t.eps());
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "u", "G", "G'", "F", "F'");
    for u in [-0.1, -0.01, 0.0, 0.005, 0.01, 0.1, 1.0, 10.0, 100.0, 200.0] {
        println!(
            "{u:>8} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e}",
            t.g(u),
            t.g_prime(u),
            t.f(u),
            t.f_prime(u)
        );
    }

    // Lambda on each cell satisfies (Lambda dG')^2 = du dG'
    let mesh = Mesh1D::new(0.0, 1.0, 6).unwrap();
    let u = NodalField::new(mesh, vec![1.0, 2.0, 0.5, -0.2, 0.001, 50.0]).unwrap();
    let lam = t.lambda(&u);
    println!("\ncell  u_l      u_r      Lambda       (Lambda dG')^2 - du dG'");
    for e in 0..mesh.elements() {
        let (l, r) = (u[e], u[e + 1]);
        let dg = t.g_prime(r) - t.g_prime(l);
        let gap = (lam[e] * dg).powi(2) - (r - l) * dg;
        println!("{e:>4}  {l:<8} {r:<8} {:<12.6e} {gap:.1e}", lam[e]);
    }
}
