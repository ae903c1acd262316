//! The upwind finite volume system and the finite element system with
//! artificial diffusion are the same matrix, and the step keeps u positive
//! where the plain scheme does not.
//!
//! ```text
//! cargo run --example upwind_equivalence
//! ```

use chemotaxis_fe::mesh::{Mesh1D, NodalField};
use chemotaxis_fe::schemes::{
    step, upwind_fv_matrix, uvad_matrix, Params, PhysicalParams, SchemeId, SchemeState,
    SolverParams,
};

fn main() {
    let mesh = Mesh1D::new(0.0, 1.0, 101).unwrap();
    let u0 = NodalField::interpolate(mesh, |x| 1.1 - (-((x - 0.5) / 0.1).powi(2)).exp());
    let v0 = NodalField::interpolate(mesh, |x| 2.0 - (-((x - 0.5) / 0.01).powi(2)).exp());
    let params = Params {
        physical: PhysicalParams::new(100.0, 1.0).unwrap(),
        solver: SolverParams::new(1e-6, &mesh),
    };

    let fe = uvad_matrix(&v0, &params);
    let fv = upwind_fv_matrix(&v0, &params);
    let mut diff: f64 = 0.0;
    for i in 0..mesh.nodes() {
        for k in i.saturating_sub(1)..(i + 2).min(mesh.nodes()) {
            diff = diff.max((fe.get(i, k) - fv.get(i, k)).abs());
        }
    }
    println!("max |A_fe - A_fv| = {diff:.2e} (|A|_inf = {:.2e})", fe.norm_inf());

    for scheme in [SchemeId::Uv, SchemeId::UvAd] {
        let mut state = SchemeState::initial(scheme, u0.clone(), v0.clone()).unwrap();
        let mut min_u = state.u.min();
        for _ in 0..100 {
            state = step(scheme, &state, &params).unwrap().0;
            min_u = min_u.min(state.u.min());
        }
        println!("{scheme:<6} min u over 100 steps: {min_u:.4e}");
    }
}
