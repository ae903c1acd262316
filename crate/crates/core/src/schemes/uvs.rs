//! The `uvs` scheme: cell density coupled with `sigma = (sqrt v)_x`.

use super::nonlinear::{flux_load, relative_dual_norm};
use super::{check_finite, dt_condition, field, heat_matrix, mass_rhs, step_v, Params, SchemeId,
    SchemeState, StepReport};
use crate::error::{Error, Result};
use crate::linalg::{
    assemble_consistent_mass, assemble_stiffness, assemble_weighted_mass, TriDiagMatrix,
};
use crate::mesh::{gradient, h1_norm, NodalField};
use crate::potentials::{pos_part, Truncation};

/// Five-point Gauss-Legendre rule on `[0, 1]` as `(point, weight)`, weights
/// summing to one. Used for every nonlinear element integral of the scheme
/// and of its energy dissipation.
pub const GAUSS_POINTS: [(f64, f64); 5] = [
    (0.046_910_077_030_668_0, 0.118_463_442_528_094_5),
    (0.230_765_344_947_158_5, 0.239_314_335_249_683_2),
    (0.5, 0.284_444_444_444_444_4),
    (0.769_234_655_052_841_5, 0.239_314_335_249_683_2),
    (0.953_089_922_969_332, 0.118_463_442_528_094_5),
];

/// Nodal `sqrt(max(v, floor))` and the number of nodes raised to the floor.
pub(crate) fn sqrt_floored(v: &NodalField, floor: f64) -> (NodalField, usize) {
    let hits = v.values().iter().filter(|&&x| x < floor).count();
    (v.map(|x| x.max(floor).sqrt()), hits)
}

#[inline]
fn lerp(values: &[f64], e: usize, xi: f64) -> f64 {
    values[e] + xi * (values[e + 1] - values[e])
}

/// Initial `sigma`: lumped L2 projection of the element derivative of
/// `I_h sqrt(v0)`, with zero boundary values.
pub fn init_sigma(v0: &NodalField) -> Result<NodalField> {
    if let Some(j) = v0.values().iter().position(|&x| !(x > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "initial chemical must be positive, found {} at node {j}",
            v0[j]
        )));
    }
    let g = gradient(&v0.map(f64::sqrt));
    let n = v0.len();
    let mut sigma = vec![0.0; n];
    for j in 1..n - 1 {
        sigma[j] = 0.5 * (g[j - 1] + g[j]);
    }
    Ok(field(*v0.mesh(), sigma))
}

/// Right-hand side of the sigma equation without the time-derivative term.
fn sigma_source(
    sigma: &[f64],
    u: &[f64],
    w: &[f64],
    trunc: &Truncation,
    mu: f64,
    h: f64,
) -> Vec<f64> {
    let n = sigma.len();
    let mut load = vec![0.0; n];
    for e in 0..n - 1 {
        let s_x = (sigma[e + 1] - sigma[e]) / h;
        let w_x = (w[e + 1] - w[e]) / h;
        let df = (trunc.f_prime(u[e + 1]) - trunc.f_prime(u[e])) / h;
        for &(xi, wt) in &GAUSS_POINTS {
            let s = lerp(sigma, e, xi);
            let wq = lerp(w, e, xi);
            let inv_v = 1.0 / (wq * wq);
            let f = -s * s * s * inv_v / 3.0 + 2.0 * s_x * s / wq
                - 2.0 / 3.0 * w_x * s * s * inv_v
                - 0.5 * mu * wq * lerp(u, e, xi) * df;
            let c = h * wt * f;
            load[e] += c * (1.0 - xi);
            load[e + 1] += c * xi;
        }
    }
    load
}

/// Element fluxes `int_e u w sigma dx / h`, i.e. the cell average of the
/// chemotactic flux.
fn chemotaxis_flux(u: &[f64], w: &[f64], sigma: &[f64]) -> Vec<f64> {
    (0..u.len() - 1)
        .map(|e| {
            GAUSS_POINTS
                .iter()
                .map(|&(xi, wt)| wt * lerp(u, e, xi) * lerp(w, e, xi) * lerp(sigma, e, xi))
                .sum()
        })
        .collect()
}

fn sigma_matrix(u_new: &NodalField, params: &Params) -> TriDiagMatrix {
    let mesh = *u_new.mesh();
    let mut b = assemble_stiffness(mesh);
    b.add_scaled(&assemble_consistent_mass(mesh), 1.0 / params.dt())
        .expect("same mesh");
    b.add_scaled(&assemble_weighted_mass(&u_new.map(pos_part)), 0.5 * params.mu())
        .expect("same mesh");
    b.set_identity_row(0);
    b.set_identity_row(mesh.nodes() - 1);
    b
}

fn joint_increment(
    u_next: &NodalField,
    u: &NodalField,
    s_next: &NodalField,
    s: &NodalField,
) -> f64 {
    let du = h1_norm(&u_next.sub(u).expect("same mesh"));
    let ds = h1_norm(&s_next.sub(s).expect("same mesh"));
    let num = du.hypot(ds);
    let den = h1_norm(u).hypot(h1_norm(s));
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        num
    } else {
        num / den
    }
}

pub fn uvs_step(state: &SchemeState, params: &Params) -> Result<(SchemeState, StepReport)> {
    let mesh = *state.mesh();
    let n = mesh.nodes();
    let h = mesh.h();
    let dt = params.dt();
    let step = state.n + 1;
    let trunc = params.solver.truncation();
    let sigma_n = state.sigma.clone().ok_or_else(|| {
        Error::InvalidParameter("uvs state is missing sigma".into())
    })?;
    let (w, hits) = sqrt_floored(&state.v, params.solver.v_floor);
    let mut report = StepReport {
        dt_condition_ok: dt_condition(&state.v, params),
        v_floor_hits: hits,
        ..StepReport::default()
    };

    let lu = heat_matrix(mesh, dt).factorize()?;
    let u_base = mass_rhs(&state.u, dt);
    let s_base: Vec<f64> = assemble_consistent_mass(mesh)
        .apply(sigma_n.values())
        .iter()
        .map(|x| x / dt)
        .collect();
    let chi = params.chi();
    let mu = params.mu();

    let mut u = state.u.clone();
    let mut sigma = sigma_n.clone();
    let mut converged = false;
    for iter in 1..=params.solver.max_iter {
        let flux = chemotaxis_flux(u.values(), w.values(), sigma.values());
        let load = flux_load(&flux, n);
        let rhs: Vec<f64> = u_base
            .iter()
            .zip(&load)
            .map(|(b, l)| b + 2.0 * chi * l)
            .collect();
        let u_next = field(mesh, lu.solve(&rhs));

        let src = sigma_source(sigma.values(), u.values(), w.values(), &trunc, mu, h);
        let mut s_rhs: Vec<f64> = s_base.iter().zip(&src).map(|(a, b)| a + b).collect();
        s_rhs[0] = 0.0;
        s_rhs[n - 1] = 0.0;
        // the sigma matrix is SPD for finite u; a failed pivot means the
        // iterate has blown up
        let s_next = match sigma_matrix(&u_next, params).solve(&s_rhs) {
            Ok(s) => field(mesh, s),
            Err(Error::Singular { .. }) => {
                return Err(Error::NonConvergence {
                    step,
                    iterations: iter,
                    residual: f64::INFINITY,
                })
            }
            Err(e) => return Err(e),
        };

        let residual = joint_increment(&u_next, &u, &s_next, &sigma);
        report.picard_iters = iter;
        report.picard_residual = residual;
        if !residual.is_finite()
            || u_next.first_non_finite().is_some()
            || s_next.first_non_finite().is_some()
        {
            return Err(Error::NonConvergence {
                step,
                iterations: iter,
                residual,
            });
        }
        u = u_next;
        sigma = s_next;
        if residual <= params.solver.c_tol {
            converged = true;
            break;
        }
    }
    report.converged = converged;
    if !converged && !params.solver.carry_forward(SchemeId::Uvs) {
        return Err(Error::NonConvergence {
            step,
            iterations: report.picard_iters,
            residual: report.picard_residual,
        });
    }
    check_finite(&u, "u", step)?;
    check_finite(&sigma, "sigma", step)?;
    let v = step_v(&u, &state.v, params)?;
    check_finite(&v, "v", step)?;
    Ok((
        SchemeState {
            u,
            v,
            sigma: Some(sigma),
            t: state.t + dt,
            n: step,
        },
        report,
    ))
}

/// Residual of the coupled nonlinear `uvs` equations at `(u_new, sigma_new)`,
/// in the dual energy norm relative to the solution.
pub fn nonlinear_residual_uvs(
    prev: &SchemeState,
    u_new: &NodalField,
    sigma_new: &NodalField,
    params: &Params,
) -> Result<f64> {
    let mesh = *prev.mesh();
    mesh.ensure_same(u_new.mesh())?;
    mesh.ensure_same(sigma_new.mesh())?;
    let n = mesh.nodes();
    let dt = params.dt();
    let trunc = params.solver.truncation();
    let sigma_n = prev.sigma_or_zero();
    let (w, _) = sqrt_floored(&prev.v, params.solver.v_floor);

    let a = heat_matrix(mesh, dt);
    let ku = assemble_stiffness(mesh).apply(u_new.values());
    let load = flux_load(
        &chemotaxis_flux(u_new.values(), w.values(), sigma_new.values()),
        n,
    );
    let r_u: Vec<f64> = (0..n)
        .map(|j| {
            mesh.weight(j) * (u_new[j] - prev.u[j]) / dt + ku[j]
                - 2.0 * params.chi() * load[j]
        })
        .collect();

    let b = sigma_matrix(u_new, params);
    let mut full = assemble_stiffness(mesh);
    full.add_scaled(&assemble_consistent_mass(mesh), 1.0 / dt)?;
    full.add_scaled(&assemble_weighted_mass(&u_new.map(pos_part)), 0.5 * params.mu())?;
    let bs = full.apply(sigma_new.values());
    let ms = assemble_consistent_mass(mesh).apply(sigma_n.values());
    let src = sigma_source(
        sigma_new.values(),
        u_new.values(),
        w.values(),
        &trunc,
        params.mu(),
        mesh.h(),
    );
    let mut r_s: Vec<f64> = (0..n).map(|j| bs[j] - ms[j] / dt - src[j]).collect();
    r_s[0] = 0.0;
    r_s[n - 1] = 0.0;

    let ru = relative_dual_norm(&a, &r_u, u_new.values())?;
    let rs = relative_dual_norm(&b, &r_s, sigma_new.values())?;
    Ok(ru.max(rs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh1D;
    use crate::schemes::{PhysicalParams, SolverParams};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn params(m: &Mesh1D, dt: f64, chi: f64, mu: f64) -> Params {
        Params {
            physical: PhysicalParams::new(chi, mu).unwrap(),
            solver: SolverParams::new(dt, m),
        }
    }

    #[test]
    fn gauss_rule_is_exact_to_degree_nine() {
        let total: f64 = GAUSS_POINTS.iter().map(|p| p.1).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-15);
        for k in 0..10 {
            let q: f64 = GAUSS_POINTS.iter().map(|&(x, w)| w * x.powi(k)).sum();
            assert_relative_eq!(q, 1.0 / (k as f64 + 1.0), epsilon = 1e-15);
        }
    }

    #[test]
    fn init_sigma_cases() {
        let m = Mesh1D::new(0.0, 1.0, 101).unwrap();
        let flat = init_sigma(&NodalField::constant(m, 3.0)).unwrap();
        assert!(flat.values().iter().all(|&s| s == 0.0));

        // sqrt((1+x)^2) = 1+x has unit derivative
        let s = init_sigma(&NodalField::interpolate(m, |x| (1.0 + x) * (1.0 + x))).unwrap();
        for j in 1..100 {
            assert_relative_eq!(s[j], 1.0, max_relative = 1e-12);
        }

        let v0 = NodalField::interpolate(m, |x| 1.0001 + (2.0 * PI * x).cos());
        let s = init_sigma(&v0).unwrap();
        assert_eq!((s[0], s[100]), (0.0, 0.0));

        assert!(init_sigma(&NodalField::interpolate(m, |x| x - 0.5)).is_err());
    }

    #[test]
    fn constant_steady_state_is_invariant() {
        let m = Mesh1D::new(0.0, 1.0, 41).unwrap();
        let p = params(&m, 1e-4, 10.0, 1.0);
        let u = NodalField::constant(m, 0.8);
        let v = NodalField::constant(m, 1.5);
        let s = SchemeState::initial(SchemeId::Uvs, u, NodalField::zeros(m))
            .unwrap_err();
        assert!(matches!(s, Error::InvalidParameter(_)));
        let s = SchemeState::initial(SchemeId::Uvs, NodalField::constant(m, 0.8), v).unwrap();
        let (next, rep) = uvs_step(&s, &p).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.picard_iters, 1);
        for j in 0..41 {
            assert_relative_eq!(next.u[j], 0.8, max_relative = 1e-14);
            assert_eq!(next.sigma.as_ref().unwrap()[j], 0.0);
        }
    }

    #[test]
    fn step_conserves_mass_and_solves_the_system() {
        let m = Mesh1D::new(0.0, 1.0, 201).unwrap();
        let p = params(&m, 1e-6, 100.0, 1000.0);
        let u = NodalField::interpolate(m, |x| 1.0001 + (5.0 * PI * x).cos());
        let v = NodalField::interpolate(m, |x| 1.0001 + (2.0 * PI * x).cos());
        let s = SchemeState::initial(SchemeId::Uvs, u, v).unwrap();
        let (next, rep) = uvs_step(&s, &p).unwrap();
        assert!(rep.converged, "{rep:?}");
        assert_eq!(rep.v_floor_hits, 0);
        assert_relative_eq!(
            next.u.lumped_integral(),
            s.u.lumped_integral(),
            max_relative = 1e-12
        );
        let sigma = next.sigma.as_ref().unwrap();
        assert_eq!((sigma[0], sigma[200]), (0.0, 0.0));
        let r = nonlinear_residual_uvs(&s, &next.u, sigma, &p).unwrap();
        assert!(r <= 10.0 * p.solver.c_tol, "residual {r}");
        let off = nonlinear_residual_uvs(&s, &next.u, &sigma.map(|x| 1.01 * x), &p).unwrap();
        assert!(off > 1e-5);
    }
}
