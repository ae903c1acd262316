//! Property tests of the discrete invariants.

use chemotaxis_fe::linalg::{assemble_convection, TriDiagMatrix};
use chemotaxis_fe::mesh::{
    gradient, interpolate, l2_norm, lumped_norm, restrict, Mesh1D, NodalField,
};
use chemotaxis_fe::potentials::Truncation;
use chemotaxis_fe::schemes::{
    run, step, step_v, Params, PhysicalParams, SchemeId, SchemeState, SolverParams,
};
use proptest::prelude::*;

fn field(values: Vec<f64>) -> NodalField {
    let mesh = Mesh1D::new(0.0, 1.0, values.len()).unwrap();
    NodalField::new(mesh, values).unwrap()
}

fn params(mesh: &Mesh1D, chi: f64, mu: f64, dt: f64) -> Params {
    Params {
        physical: PhysicalParams::new(chi, mu).unwrap(),
        solver: SolverParams {
            carry_forward_on_cap: Some(true),
            ..SolverParams::new(dt, mesh)
        },
    }
}

/// Positive nodal data on `n` nodes.
fn positive(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..5.0, n)
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (4usize..40).prop_flat_map(|n| (positive(n), positive(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_scheme_conserves_mass(
        (u, v) in pair(),
        chi in 0.1f64..20.0,
        mu in 0.1f64..50.0,
        dt in 1e-6f64..1e-3,
        k in 0usize..5,
    ) {
        let scheme = SchemeId::ALL[k];
        let (u, v) = (field(u), field(v));
        let p = params(u.mesh(), chi, mu, dt);
        let m0 = u.lumped_integral();
        let state = SchemeState::initial(scheme, u, v).unwrap();
        if let Ok((next, _)) = step(scheme, &state, &p) {
            let m1 = next.u.lumped_integral();
            prop_assert!((m1 - m0).abs() <= 1e-11 * m0, "{scheme}: {m0} -> {m1}");
        }
    }

    #[test]
    fn upwind_step_keeps_u_positive(
        (u, v) in pair(),
        chi in 0.1f64..500.0,
        dt in 1e-8f64..1e-1,
    ) {
        let (u, v) = (field(u), field(v));
        let p = params(u.mesh(), chi, 1.0, dt);
        let state = SchemeState::initial(SchemeId::UvAd, u, v).unwrap();
        let (next, _) = step(SchemeId::UvAd, &state, &p).unwrap();
        prop_assert!(next.u.min() > 0.0);
    }

    #[test]
    fn v_step_obeys_maximum_principle(
        (u, v) in pair(),
        mu in 0.0f64..1e4,
        dt in 1e-8f64..1e-1,
    ) {
        let (u, v) = (field(u), field(v));
        let p = params(u.mesh(), 1.0, mu, dt);
        let next = step_v(&u, &v, &p).unwrap();
        prop_assert!(next.min() > 0.0);
        prop_assert!(next.max() <= v.max() * (1.0 + 1e-14));
    }

    #[test]
    fn convection_columns_sum_to_zero(v in prop::collection::vec(-10.0f64..10.0, 3..60)) {
        let a = assemble_convection(&gradient(&field(v)));
        let scale = a.norm_inf().max(1.0);
        prop_assert!(a.column_sums().iter().all(|s| s.abs() <= 1e-12 * scale));
    }

    #[test]
    fn lumped_norm_dominates_l2_norm(f in prop::collection::vec(-10.0f64..10.0, 2..60)) {
        let f = field(f);
        prop_assert!(l2_norm(&f) <= lumped_norm(&f) * (1.0 + 1e-14));
    }

    #[test]
    fn thomas_solve_has_small_residual(
        rows in prop::collection::vec((-1.0f64..1.0, 0.1f64..3.0, -1.0f64..1.0, -5.0f64..5.0), 2..80),
    ) {
        let mesh = Mesh1D::new(0.0, 1.0, rows.len()).unwrap();
        let n = rows.len();
        let mut a = TriDiagMatrix::zeros(mesh);
        for (i, &(l, d, u, _)) in rows.iter().enumerate() {
            if i > 0 {
                a.set(i, i - 1, l);
            }
            if i + 1 < n {
                a.set(i, i + 1, u);
            }
            a.set(i, i, d + l.abs() + u.abs());
        }
        let b: Vec<f64> = rows.iter().map(|r| r.3).collect();
        let x = a.solve(&b).unwrap();
        let r = a.apply(&x);
        prop_assert!(r.iter().zip(&b).all(|(p, q)| (p - q).abs() <= 1e-12 * (1.0 + q.abs())));
    }

    #[test]
    fn lambda_identity(l in 1e-3f64..100.0, r in 1e-3f64..100.0, eps in 0.005f64..0.5) {
        prop_assume!((l - r).abs() > 1e-9);
        let t = Truncation::new(eps).unwrap();
        let lam = t.lambda(&field(vec![l, r]))[0];
        let dg = t.g_prime(r) - t.g_prime(l);
        let lhs = lam * lam * dg * dg;
        prop_assert!((lhs - (r - l) * dg).abs() <= 1e-9 * lhs.abs());
    }

    #[test]
    fn restriction_commutes_with_interpolation(coarse in 2usize..30, ratio in 1usize..8, w in 0.5f64..20.0) {
        let c = Mesh1D::new(0.0, 2.0, coarse).unwrap();
        let f = Mesh1D::new(0.0, 2.0, (coarse - 1) * ratio + 1).unwrap();
        let g = |x: f64| (w * x).sin();
        prop_assert_eq!(restrict(&interpolate(g, f), &c).unwrap(), interpolate(g, c));
    }

    #[test]
    fn short_runs_satisfy_the_weak_v_estimate(
        (u, v) in pair(),
        chi in 0.1f64..50.0,
        mu in 0.1f64..100.0,
        k in 0usize..5,
    ) {
        let scheme = SchemeId::ALL[k];
        let (u, v) = (field(u), field(v));
        let p = params(u.mesh(), chi, mu, 1e-4);
        let state = SchemeState::initial(scheme, u, v).unwrap();
        let out = run(scheme, state, &p, 2e-3, &mut []).unwrap();
        prop_assert!(out.ledger.weak_estimate_holds());
    }
}

#[test]
fn identical_runs_give_identical_ledgers() {
    let mesh = Mesh1D::new(0.0, 1.0, 51).unwrap();
    let u = NodalField::interpolate(mesh, |x| 2.0 + (3.0 * x).cos());
    let v = NodalField::interpolate(mesh, |x| 1.0 + x * x);
    let p = params(&mesh, 5.0, 5.0, 1e-4);
    for scheme in SchemeId::ALL {
        let go = || {
            let s = SchemeState::initial(scheme, u.clone(), v.clone()).unwrap();
            run(scheme, s, &p, 5e-3, &mut []).unwrap()
        };
        let (a, b) = (go(), go());
        assert_eq!(a.ledger, b.ledger);
        assert_eq!(a.state.u, b.state.u);
    }
}
