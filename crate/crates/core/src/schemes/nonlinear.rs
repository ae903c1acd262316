//! Fixed-point schemes `uv-nd` and `uv-ns` for the cell step.

use super::{
    check_finite, dt_condition, field, heat_matrix, mass_rhs, step_v, Params, SchemeId,
    SchemeState, StepReport,
};
use crate::error::{Error, Result};
use crate::linalg::{assemble_convection, assemble_stiffness, TriDiagLu, TriDiagMatrix};
use crate::mesh::{gradient, h1_norm, CellField, NodalField};
use crate::potentials::Truncation;

/// Relative H1 increment `|a - b|_{H1} / |b|_{H1}`; `0/0` counts as zero.
pub(crate) fn relative_increment(next: &NodalField, prev: &NodalField) -> f64 {
    let num = h1_norm(&next.sub(prev).expect("same mesh"));
    let den = h1_norm(prev);
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Element fluxes `u_mid^2 d(I_h G'(u))` of the nonlinear diffusion, with the
/// derivative of `G'` taken as the mean of `G''` times the jump of `u`.
pub(crate) fn nonlinear_diffusion_flux(u: &NodalField, trunc: &Truncation) -> Vec<f64> {
    let h = u.mesh().h();
    u.values()
        .windows(2)
        .map(|p| {
            let mid = 0.5 * (p[0] + p[1]);
            let dg = trunc.g_second_mean(p[0], p[1]) * (p[1] - p[0]) / h;
            mid * mid * dg
        })
        .collect()
}

/// Load `sum_e h f_e phi_i'` of a cell-constant flux `f`.
pub(crate) fn flux_load(flux: &[f64], n: usize) -> Vec<f64> {
    let mut load = vec![0.0; n];
    for (e, f) in flux.iter().enumerate() {
        load[e] -= f;
        load[e + 1] += f;
    }
    load
}

/// Picard loop `A u_{l+1} = rhs(u_l)` starting from `u^n`.
fn picard(
    scheme: SchemeId,
    state: &SchemeState,
    params: &Params,
    lu: &TriDiagLu,
    rhs: impl Fn(&NodalField) -> Vec<f64>,
) -> Result<(NodalField, StepReport)> {
    let mesh = *state.mesh();
    let step = state.n + 1;
    let mut report = StepReport {
        dt_condition_ok: dt_condition(&state.v, params),
        ..StepReport::default()
    };
    let mut current = state.u.clone();
    for iter in 1..=params.solver.max_iter {
        let next = field(mesh, lu.solve(&rhs(&current)));
        let residual = relative_increment(&next, &current);
        report.picard_iters = iter;
        report.picard_residual = residual;
        if !residual.is_finite() || next.first_non_finite().is_some() {
            return Err(Error::NonConvergence {
                step,
                iterations: iter,
                residual,
            });
        }
        current = next;
        if residual <= params.solver.c_tol {
            report.converged = true;
            return Ok((current, report));
        }
    }
    if params.solver.carry_forward(scheme) {
        Ok((current, report))
    } else {
        Err(Error::NonConvergence {
            step,
            iterations: report.picard_iters,
            residual: report.picard_residual,
        })
    }
}

fn finish(
    state: &SchemeState,
    params: &Params,
    u: NodalField,
    report: StepReport,
) -> Result<(SchemeState, StepReport)> {
    let step = state.n + 1;
    check_finite(&u, "u", step)?;
    let v = step_v(&u, &state.v, params)?;
    check_finite(&v, "v", step)?;
    Ok((
        SchemeState {
            u,
            v,
            sigma: None,
            t: state.t + params.dt(),
            n: step,
        },
        report,
    ))
}

/// Cell step with nonlinear diffusion `(u^2 (I_h G_eps'(u))_x, w_x)`.
pub fn uvnd_step(state: &SchemeState, params: &Params) -> Result<(SchemeState, StepReport)> {
    let mesh = *state.mesh();
    let dt = params.dt();
    let trunc = params.solver.truncation();
    let lu = heat_matrix(mesh, dt).factorize()?;
    let k = assemble_stiffness(mesh);
    let c = assemble_convection(&gradient(&state.v));
    let base = mass_rhs(&state.u, dt);
    let chi = params.chi();
    let (u, report) = picard(SchemeId::UvNd, state, params, &lu, |ul| {
        let ku = k.apply(ul.values());
        let cu = c.apply(ul.values());
        let d = flux_load(&nonlinear_diffusion_flux(ul, &trunc), mesh.nodes());
        (0..mesh.nodes())
            .map(|i| base[i] + ku[i] + chi * cu[i] - d[i])
            .collect()
    })?;
    finish(state, params, u, report)
}

/// Cell step with nonlinear sensitivity `chi (Lambda_eps(u) v_x, w_x)`.
pub fn uvns_step(state: &SchemeState, params: &Params) -> Result<(SchemeState, StepReport)> {
    let mesh = *state.mesh();
    let dt = params.dt();
    let trunc = params.solver.truncation();
    let lu = heat_matrix(mesh, dt).factorize()?;
    let g = gradient(&state.v);
    let base = mass_rhs(&state.u, dt);
    let chi = params.chi();
    let (u, report) = picard(SchemeId::UvNs, state, params, &lu, |ul| {
        let load = flux_load(&sensitivity_flux(&trunc.lambda(ul), &g), mesh.nodes());
        base.iter().zip(&load).map(|(b, l)| b + chi * l).collect()
    })?;
    finish(state, params, u, report)
}

pub(crate) fn sensitivity_flux(lambda: &CellField, g: &CellField) -> Vec<f64> {
    lambda
        .values()
        .iter()
        .zip(g.values())
        .map(|(l, g)| l * g)
        .collect()
}

/// `|r|_{A^-1} / |u|_A` with `A = M/dt + K`: the size of the residual `r` in
/// the dual of the step's energy norm, relative to the solution.
pub(crate) fn relative_dual_norm(a: &TriDiagMatrix, r: &[f64], u: &[f64]) -> Result<f64> {
    let z = a.solve(r)?;
    let num: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let au = a.apply(u);
    let den: f64 = au.iter().zip(u).map(|(a, b)| a * b).sum();
    Ok(if num <= 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    })
}

/// Residual of the nonlinear `uv-nd` cell equation at `u_new`, measured in
/// the dual energy norm relative to `u_new`.
pub fn nonlinear_residual_uvnd(
    prev: &SchemeState,
    u_new: &NodalField,
    params: &Params,
) -> Result<f64> {
    let mesh = *prev.mesh();
    mesh.ensure_same(u_new.mesh())?;
    let dt = params.dt();
    let trunc = params.solver.truncation();
    let a = heat_matrix(mesh, dt);
    let cu = assemble_convection(&gradient(&prev.v)).apply(u_new.values());
    let d = flux_load(&nonlinear_diffusion_flux(u_new, &trunc), mesh.nodes());
    let r: Vec<f64> = (0..mesh.nodes())
        .map(|j| {
            mesh.weight(j) * (u_new[j] - prev.u[j]) / dt + d[j] - params.chi() * cu[j]
        })
        .collect();
    relative_dual_norm(&a, &r, u_new.values())
}

/// Residual of the nonlinear `uv-ns` cell equation at `u_new`.
pub fn nonlinear_residual_uvns(
    prev: &SchemeState,
    u_new: &NodalField,
    params: &Params,
) -> Result<f64> {
    let mesh = *prev.mesh();
    mesh.ensure_same(u_new.mesh())?;
    let dt = params.dt();
    let trunc = params.solver.truncation();
    let a = heat_matrix(mesh, dt);
    let ku = assemble_stiffness(mesh).apply(u_new.values());
    let load = flux_load(
        &sensitivity_flux(&trunc.lambda(u_new), &gradient(&prev.v)),
        mesh.nodes(),
    );
    let r: Vec<f64> = (0..mesh.nodes())
        .map(|j| {
            mesh.weight(j) * (u_new[j] - prev.u[j]) / dt + ku[j] - params.chi() * load[j]
        })
        .collect();
    relative_dual_norm(&a, &r, u_new.values())
}
