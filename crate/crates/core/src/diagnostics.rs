//! Energies, dissipations, per-step energy inequality residuals, run ledgers
//! and convergence-order tables.

use crate::error::Result;
use crate::mesh::{cell_l2_norm, gradient, l2_norm, lumped_norm, restrict, NodalField};
use crate::potentials::{pos_part, Truncation};
use crate::schemes::{Params, SchemeId, SchemeState, StepReport};

use crate::schemes::GAUSS_POINTS;

/// Lower bound applied to `u` before evaluating `u ln u - u + 1`.
pub const ENERGY_FLOOR: f64 = 1e-12;

fn entropy(s: f64) -> f64 {
    s * s.ln() - s + 1.0
}

fn lerp(values: &[f64], e: usize, xi: f64) -> f64 {
    values[e] + xi * (values[e + 1] - values[e])
}

/// Sum over elements and quadrature points of `h * weight * f(e, xi)`.
fn quadrature(n_elements: usize, h: f64, f: impl Fn(usize, f64) -> f64) -> f64 {
    let mut total = 0.0;
    for e in 0..n_elements {
        for &(xi, w) in &GAUSS_POINTS {
            total += h * w * f(e, xi);
        }
    }
    total
}

/// `E(u, v) = mu/4 int I_h F(u) + chi/2 int |(I_h sqrt v)_x|^2` together with
/// the number of nodes where `u` was raised to [`ENERGY_FLOOR`].
pub fn energy_uv_counted(u: &NodalField, v: &NodalField, params: &Params) -> (f64, usize) {
    let hits = u.values().iter().filter(|&&x| x < ENERGY_FLOOR).count();
    let f = u.map(|x| entropy(x.max(ENERGY_FLOOR))).lumped_integral();
    let w = v.map(|x| x.max(0.0).sqrt());
    let grad = cell_l2_norm(&gradient(&w));
    (0.25 * params.mu() * f + 0.5 * params.chi() * grad * grad, hits)
}

pub fn energy_uv(u: &NodalField, v: &NodalField, params: &Params) -> f64 {
    energy_uv_counted(u, v, params).0
}

/// `E_h(u, sigma) = mu/4 int I_h F_eps(u) + chi/2 int sigma^2`.
pub fn energy_usigma(u: &NodalField, sigma: &NodalField, params: &Params) -> f64 {
    let trunc = params.solver.truncation();
    let f = u.map(|x| trunc.f(x)).lumped_integral();
    let s = l2_norm(sigma);
    0.25 * params.mu() * f + 0.5 * params.chi() * s * s
}

/// Dissipation rates of the `(u, sigma)` energy law.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dissipations {
    /// `1/4 int u_x (I_h F_eps'(u))_x`
    pub d1: f64,
    /// `int sigma_x^2 + 1/3 int sigma^4 / v`
    pub d2: f64,
    /// `1/2 int u_+ sigma^2`
    pub d3: f64,
}

/// Dissipations at the new level. `1/v` is evaluated as `1/w^2` with
/// `w = I_h sqrt(max(v_old, v_floor))`, as in the `uvs` step.
pub fn dissipations(
    u_new: &NodalField,
    v_old: &NodalField,
    sigma_new: &NodalField,
    params: &Params,
) -> Dissipations {
    let mesh = *u_new.mesh();
    let h = mesh.h();
    let trunc = params.solver.truncation();
    let fp = u_new.map(|x| trunc.f_prime(x));
    let d1 = 0.25
        * gradient(u_new)
            .values()
            .iter()
            .zip(gradient(&fp).values())
            .map(|(a, b)| h * a * b)
            .sum::<f64>();
    let s = sigma_new.values();
    let w = v_old.map(|x| x.max(params.solver.v_floor).sqrt());
    let wv = w.values();
    let sx = cell_l2_norm(&gradient(sigma_new));
    let quartic = quadrature(mesh.elements(), h, |e, xi| {
        let sq = lerp(s, e, xi);
        let wq = lerp(wv, e, xi);
        sq.powi(4) / (wq * wq)
    });
    let up = u_new.map(pos_part);
    let d3 = 0.5
        * quadrature(mesh.elements(), h, |e, xi| {
            let sq = lerp(s, e, xi);
            lerp(up.values(), e, xi) * sq * sq
        });
    Dissipations {
        d1,
        d2: sx * sx + quartic / 3.0,
        d3,
    }
}

/// Slack allowed on a per-step energy inequality for an energy of size `e`.
pub fn tol_energy(energy: f64, c_tol: f64) -> f64 {
    10.0 * c_tol * (1.0 + energy.abs())
}

/// Per-step form of the `uvs` energy law,
/// `E(u^{n+1}, s^{n+1}) - E(u^n, s^n) + dt (mu D1 + chi D2 + mu chi D3)`.
/// Nonpositive for an exact solve.
pub fn energy_residual_uvs(prev: &SchemeState, next: &SchemeState, params: &Params) -> f64 {
    let s_prev = prev.sigma_or_zero();
    let s_next = next.sigma_or_zero();
    let trunc = params.solver.truncation();
    let mesh = *prev.mesh();
    // energy difference node by node to avoid cancelling two large totals
    let df: f64 = (0..mesh.nodes())
        .map(|j| mesh.weight(j) * (trunc.f(next.u[j]) - trunc.f(prev.u[j])))
        .sum();
    let (a, b) = (l2_norm(&s_next), l2_norm(&s_prev));
    let de = 0.25 * params.mu() * df + 0.5 * params.chi() * (a - b) * (a + b);
    let d = dissipations(&next.u, &prev.v, &s_next, params);
    let (mu, chi) = (params.mu(), params.chi());
    de + params.dt() * (mu * d.d1 + chi * d.d2 + mu * chi * d.d3)
}

/// `int I_h G_eps(u)`.
pub fn energy_g(u: &NodalField, trunc: &Truncation) -> f64 {
    u.map(|x| trunc.g(x)).lumped_integral()
}

fn g_difference(prev_u: &NodalField, next_u: &NodalField, trunc: &Truncation) -> f64 {
    let mesh = *prev_u.mesh();
    (0..mesh.nodes())
        .map(|j| mesh.weight(j) * (trunc.g_shifted(next_u[j]) - trunc.g_shifted(prev_u[j])))
        .sum()
}

/// Element derivatives of `I_h G_eps'(u)`.
fn g_prime_gradient(u: &NodalField, trunc: &Truncation) -> Vec<f64> {
    let h = u.mesh().h();
    u.values()
        .windows(2)
        .map(|p| trunc.g_second_mean(p[0], p[1]) * (p[1] - p[0]) / h)
        .collect()
}

/// Per-step form of the `uv-nd` inequality,
///
/// ```text
/// int I_h G(u^{n+1}) - int I_h G(u^n)
///   + dt (1/2 int u^2 |(I_h G'(u^{n+1}))_x|^2 - chi^2/2 int |v_x|^2)
/// ```
///
/// where `v` is the chemical field of the cell step and `u^2` is taken at
/// element midpoints. Nonpositive for an exact solve.
pub fn energy_residual_uvnd(
    prev_u: &NodalField,
    next_u: &NodalField,
    v: &NodalField,
    params: &Params,
) -> f64 {
    let trunc = params.solver.truncation();
    let h = next_u.mesh().h();
    let dg = g_prime_gradient(next_u, &trunc);
    let diss: f64 = next_u
        .values()
        .windows(2)
        .zip(&dg)
        .map(|(p, d)| {
            let mid = 0.5 * (p[0] + p[1]);
            h * mid * mid * d * d
        })
        .sum();
    let vx = cell_l2_norm(&gradient(v));
    let chi = params.chi();
    g_difference(prev_u, next_u, &trunc) + params.dt() * (0.5 * diss - 0.5 * chi * chi * vx * vx)
}

/// Per-step form of the `uv-ns` inequality with dissipation
/// `1/2 int |Lambda_eps(u) (I_h G'(u))_x|^2`.
pub fn energy_residual_uvns(
    prev_u: &NodalField,
    next_u: &NodalField,
    v: &NodalField,
    params: &Params,
) -> f64 {
    let trunc = params.solver.truncation();
    let h = next_u.mesh().h();
    let dg = g_prime_gradient(next_u, &trunc);
    let lambda = trunc.lambda(next_u);
    let diss: f64 = lambda
        .values()
        .iter()
        .zip(&dg)
        .map(|(l, d)| h * (l * d) * (l * d))
        .sum();
    let vx = cell_l2_norm(&gradient(v));
    let chi = params.chi();
    g_difference(prev_u, next_u, &trunc) + params.dt() * (0.5 * diss - 0.5 * chi * chi * vx * vx)
}

/// Diagnostics of one time level.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepRecord {
    pub n: usize,
    pub t: f64,
    pub mass: f64,
    pub min_u: f64,
    pub min_v: f64,
    pub max_v: f64,
    pub e_uv: f64,
    pub e_usigma: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    /// Energy inequality residual of the step; `None` for schemes without one
    /// and for the initial level.
    pub energy_residual: Option<f64>,
    pub tol_energy: Option<f64>,
    pub picard_iters: usize,
    pub picard_residual: f64,
    pub converged: bool,
    pub dt_condition_ok: bool,
    pub v_floor_hits: usize,
    pub energy_floor_hits: usize,
}

impl StepRecord {
    /// Record of `next`, reached from `prev` by one step (or the initial
    /// level when `prev` is `None`).
    pub fn compute(
        scheme: SchemeId,
        prev: Option<&SchemeState>,
        next: &SchemeState,
        report: Option<&StepReport>,
        params: &Params,
    ) -> Self {
        let sigma = next.sigma_or_zero();
        let (e_uv, energy_floor_hits) = energy_uv_counted(&next.u, &next.v, params);
        let e_usigma = energy_usigma(&next.u, &sigma, params);
        let v_old = prev.map_or(&next.v, |p| &p.v);
        let d = dissipations(&next.u, v_old, &sigma, params);
        let c_tol = params.solver.c_tol;
        let (energy_residual, tol) = match (prev, scheme) {
            (Some(p), SchemeId::Uvs) => (
                Some(energy_residual_uvs(p, next, params)),
                Some(tol_energy(e_usigma, c_tol)),
            ),
            (Some(p), SchemeId::UvNd) => (
                Some(energy_residual_uvnd(&p.u, &next.u, &p.v, params)),
                Some(tol_energy(energy_g(&next.u, &params.solver.truncation()), c_tol)),
            ),
            (Some(p), SchemeId::UvNs) => (
                Some(energy_residual_uvns(&p.u, &next.u, &p.v, params)),
                Some(tol_energy(energy_g(&next.u, &params.solver.truncation()), c_tol)),
            ),
            _ => (None, None),
        };
        let report = report.copied().unwrap_or(StepReport {
            converged: true,
            dt_condition_ok: true,
            ..StepReport::default()
        });
        Self {
            n: next.n,
            t: next.t,
            mass: next.u.lumped_integral(),
            min_u: next.u.min(),
            min_v: next.v.min(),
            max_v: next.v.max(),
            e_uv,
            e_usigma,
            d1: d.d1,
            d2: d.d2,
            d3: d.d3,
            energy_residual,
            tol_energy: tol,
            picard_iters: report.picard_iters,
            picard_residual: report.picard_residual,
            converged: report.converged,
            dt_condition_ok: report.dt_condition_ok,
            v_floor_hits: report.v_floor_hits,
            energy_floor_hits,
        }
    }

    /// Whether the step satisfies its energy inequality within tolerance.
    pub fn energy_ok(&self) -> bool {
        match (self.energy_residual, self.tol_energy) {
            (Some(r), Some(t)) => r <= t,
            _ => true,
        }
    }
}

/// Where and why a run stopped early.
#[derive(Clone, Debug, PartialEq)]
pub struct RunFailure {
    pub step: usize,
    pub time: f64,
    pub reason: String,
}

/// Time series of diagnostics of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunLedger {
    pub scheme: SchemeId,
    pub records: Vec<StepRecord>,
    pub global_min_u: f64,
    /// `dt sum |v^{n+1}_x|^2` over completed steps.
    pub weak_estimate_lhs: f64,
    /// `int I_h (v^0)^2`.
    pub weak_estimate_rhs: f64,
    pub failure: Option<RunFailure>,
}

impl RunLedger {
    pub fn new(scheme: SchemeId, initial: &SchemeState, params: &Params) -> Self {
        let record = StepRecord::compute(scheme, None, initial, None, params);
        let v0 = lumped_norm(&initial.v);
        Self {
            scheme,
            global_min_u: record.min_u,
            records: vec![record],
            weak_estimate_lhs: 0.0,
            weak_estimate_rhs: v0 * v0,
            failure: None,
        }
    }

    pub fn push(&mut self, record: StepRecord) {
        self.global_min_u = self.global_min_u.min(record.min_u);
        self.records.push(record);
    }

    /// Adds `dt |v_new_x|^2` to the weak estimate.
    pub fn weak_estimate_accumulate(&mut self, v_new: &NodalField, dt: f64) {
        let g = cell_l2_norm(&gradient(v_new));
        self.weak_estimate_lhs += dt * g * g;
    }

    pub fn weak_estimate_holds(&self) -> bool {
        self.weak_estimate_lhs <= self.weak_estimate_rhs
    }

    pub fn completed_steps(&self) -> usize {
        self.records.len() - 1
    }

    pub fn last(&self) -> &StepRecord {
        self.records.last().expect("ledger has an initial record")
    }

    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    pub fn energy_violations(&self) -> usize {
        self.records.iter().filter(|r| !r.energy_ok()).count()
    }

    pub fn dt_condition_violations(&self) -> usize {
        self.records.iter().filter(|r| !r.dt_condition_ok).count()
    }

    pub fn v_floor_hits(&self) -> usize {
        self.records.iter().map(|r| r.v_floor_hits).sum()
    }

    pub fn energy_floor_hits(&self) -> usize {
        self.records.iter().map(|r| r.energy_floor_hits).sum()
    }

    pub fn unconverged_steps(&self) -> usize {
        self.records.iter().filter(|r| !r.converged).count()
    }
}

/// Convergence rate `log(e / e_prev) / log(h / h_prev)`.
pub fn rate(e: f64, e_prev: f64, h: f64, h_prev: f64) -> f64 {
    (e / e_prev).ln() / (h / h_prev).ln()
}

/// L2 error of `approx` against the reference restricted to its mesh, and the
/// rate against a previous `(error, h)` pair.
pub fn error_and_rate(
    reference: &NodalField,
    approx: &NodalField,
    prev: Option<(f64, f64)>,
) -> Result<(f64, Option<f64>)> {
    let r = restrict(reference, approx.mesh())?;
    let e = l2_norm(&r.sub(approx)?);
    let h = approx.mesh().h();
    Ok((e, prev.map(|(ep, hp)| rate(e, ep, h, hp))))
}

/// Cell L2 error of the derivative of `approx` against the reference.
pub fn gradient_error(reference: &NodalField, approx: &NodalField) -> Result<f64> {
    let r = restrict(reference, approx.mesh())?;
    Ok(cell_l2_norm(&gradient(&r).sub(&gradient(approx))?))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EocRow {
    pub h: f64,
    pub e_u: f64,
    pub r_u: Option<f64>,
    pub e_v: f64,
    pub r_v: Option<f64>,
    pub e_vx: f64,
    pub r_vx: Option<f64>,
}

/// Errors and convergence rates on a ladder of meshes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EocTable {
    pub rows: Vec<EocRow>,
}

impl EocTable {
    /// Appends a rung; rates are computed against the previous row.
    pub fn push(&mut self, h: f64, e_u: f64, e_v: f64, e_vx: f64) {
        let prev = self.rows.last().copied();
        let r = |e: f64, pick: fn(&EocRow) -> f64| prev.map(|p| rate(e, pick(&p), h, p.h));
        self.rows.push(EocRow {
            h,
            e_u,
            r_u: r(e_u, |p| p.e_u),
            e_v,
            r_v: r(e_v, |p| p.e_v),
            e_vx,
            r_vx: r(e_vx, |p| p.e_vx),
        });
    }

    /// Errors of the final states `(u, v)` of each rung against reference
    /// fields on a nested fine mesh.
    pub fn from_solutions(
        reference: (&NodalField, &NodalField),
        rungs: &[(NodalField, NodalField)],
    ) -> Result<Self> {
        let mut table = EocTable::default();
        for (u, v) in rungs {
            let (e_u, _) = error_and_rate(reference.0, u, None)?;
            let (e_v, _) = error_and_rate(reference.1, v, None)?;
            let e_vx = gradient_error(reference.1, v)?;
            table.push(u.mesh().h(), e_u, e_v, e_vx);
        }
        Ok(table)
    }

    pub fn last(&self) -> Option<&EocRow> {
        self.rows.last()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh1D;
    use crate::schemes::{PhysicalParams, SolverParams};
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn params(m: &Mesh1D, chi: f64, mu: f64) -> Params {
        Params {
            physical: PhysicalParams::new(chi, mu).unwrap(),
            solver: SolverParams::new(1e-4, m),
        }
    }

    #[test]
    fn energy_uv_closed_forms() {
        let m = Mesh1D::new(0.0, 2.0, 21).unwrap();
        let p = params(&m, 3.0, 8.0);
        let v = NodalField::constant(m, 4.0);
        assert_eq!(energy_uv(&NodalField::constant(m, 1.0), &v, &p), 0.0);
        assert_relative_eq!(
            energy_uv(&NodalField::constant(m, E), &v, &p),
            8.0 / 4.0 * 2.0,
            max_relative = 1e-14
        );
        // v = x^2 gives sqrt v = x exactly at nodes, |w_x|^2 = 1
        let v = NodalField::interpolate(m, |x| x * x);
        assert_relative_eq!(
            energy_uv(&NodalField::constant(m, 1.0), &v, &p),
            0.5 * 3.0 * 2.0,
            max_relative = 1e-13
        );
        let (_, hits) = energy_uv_counted(&NodalField::constant(m, -1.0), &v, &p);
        assert_eq!(hits, 21);
    }

    #[test]
    fn energy_usigma_closed_forms() {
        let m = Mesh1D::new(0.0, 1.0, 11).unwrap();
        let p = params(&m, 6.0, 2.0);
        let one = NodalField::constant(m, 1.0);
        assert_eq!(energy_usigma(&one, &NodalField::zeros(m), &p), 0.0);
        assert_relative_eq!(energy_usigma(&one, &one, &p), 3.0, max_relative = 1e-14);
    }

    #[test]
    fn dissipation_cases() {
        let m = Mesh1D::new(0.0, 1.0, 2).unwrap();
        let mut p = params(&m, 1.0, 1.0);
        p.solver.eps = 0.01;
        let zero = NodalField::zeros(m);
        let v = NodalField::constant(m, 2.0);
        let d = dissipations(&NodalField::constant(m, 0.5), &v, &zero, &p);
        assert_eq!(d, Dissipations::default());
        // one jump between 1 and 2: (1/4) h (1/h)(ln 2/h)
        let u = NodalField::new(m, vec![1.0, 2.0]).unwrap();
        let d = dissipations(&u, &v, &zero, &p);
        assert_relative_eq!(d.d1, 0.25 * 2f64.ln(), max_relative = 1e-14);
        // sigma = 1 - 2|x - 1/2| is not P1 on this mesh; use sigma = x on [0,1]
        let s = NodalField::new(m, vec![0.0, 1.0]).unwrap();
        let d = dissipations(&NodalField::constant(m, 3.0), &v, &s, &p);
        // int 1 + (1/3) int x^4 / 2 ; (1/2) int 3 x^2
        assert_relative_eq!(d.d2, 1.0 + 1.0 / 30.0, max_relative = 1e-14);
        assert_relative_eq!(d.d3, 0.5, max_relative = 1e-14);
    }

    #[test]
    fn uvnd_residual_of_constant_states() {
        let m = Mesh1D::new(0.0, 1.0, 11).unwrap();
        let p = params(&m, 4.0, 1.0);
        let u = NodalField::constant(m, 0.5);
        let v = NodalField::constant(m, 1.0);
        assert_eq!(energy_residual_uvnd(&u, &u, &v, &p), 0.0);
        assert_eq!(energy_residual_uvns(&u, &u, &v, &p), 0.0);
        let v = NodalField::interpolate(m, |x| x);
        let expect = -p.dt() * 0.5 * 16.0;
        assert_relative_eq!(energy_residual_uvnd(&u, &u, &v, &p), expect, max_relative = 1e-12);
        assert_relative_eq!(energy_residual_uvns(&u, &u, &v, &p), expect, max_relative = 1e-12);
    }

    #[test]
    fn eoc_rates() {
        let mut t = EocTable::default();
        t.push(0.1, 1.0, 2.0, 4.0);
        t.push(0.05, 0.5, 0.5, 4.0);
        assert_eq!(t.rows[0].r_u, None);
        assert_relative_eq!(t.rows[1].r_u.unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(t.rows[1].r_v.unwrap(), 2.0, epsilon = 1e-14);
        assert_relative_eq!(t.rows[1].r_vx.unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn error_against_own_restriction_is_zero() {
        let fine = Mesh1D::new(0.0, 1.0, 101).unwrap();
        let coarse = Mesh1D::new(0.0, 1.0, 11).unwrap();
        let f = NodalField::interpolate(fine, |x| (3.0 * x).sin());
        let c = restrict(&f, &coarse).unwrap();
        assert_eq!(error_and_rate(&f, &c, None).unwrap(), (0.0, None));
        assert_eq!(gradient_error(&f, &c).unwrap(), 0.0);
        let (e, r) = error_and_rate(&f, &c.map(|x| x + 1.0), Some((2.0, 0.2))).unwrap();
        assert_relative_eq!(e, 1.0, max_relative = 1e-14);
        assert_relative_eq!(r.unwrap(), 1.0, max_relative = 1e-14);
        let bad = Mesh1D::new(0.0, 1.0, 8).unwrap();
        assert!(error_and_rate(&f, &NodalField::zeros(bad), None).is_err());
    }
}
