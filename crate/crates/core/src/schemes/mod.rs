//! Time-stepping schemes for the chemo-attraction/consumption system.
//!
//! Every scheme advances `(u, v)` in two steps: a cell-density step that
//! differs per scheme, followed by the shared chemical step [`step_v`].

mod nonlinear;
mod run;
mod uvs;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{
    assemble_convection, assemble_lumped_mass, assemble_lumped_reaction, assemble_stiffness,
    assemble_weighted_stiffness, TriDiagMatrix,
};
use crate::mesh::{gradient, CellField, Mesh1D, NodalField};
use crate::potentials::{pos_part, Truncation};

pub use nonlinear::{
    nonlinear_residual_uvnd, nonlinear_residual_uvns, uvnd_step, uvns_step,
};
pub use run::{run, step_plan, Observer, RunOutcome};
pub use uvs::{init_sigma, nonlinear_residual_uvs, uvs_step, GAUSS_POINTS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeId {
    Uv,
    UvNd,
    UvNs,
    Uvs,
    UvAd,
}

impl SchemeId {
    pub const ALL: [SchemeId; 5] = [
        SchemeId::Uv,
        SchemeId::UvNd,
        SchemeId::UvNs,
        SchemeId::Uvs,
        SchemeId::UvAd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Uv => "uv",
            SchemeId::UvNd => "uv-nd",
            SchemeId::UvNs => "uv-ns",
            SchemeId::Uvs => "uvs",
            SchemeId::UvAd => "uv-ad",
        }
    }

    /// Whether the cell step is solved by fixed-point iteration.
    pub fn is_nonlinear(self) -> bool {
        matches!(self, SchemeId::UvNd | SchemeId::UvNs | SchemeId::Uvs)
    }

    pub fn uses_sigma(self) -> bool {
        self == SchemeId::Uvs
    }

    /// Default for keeping the last iterate when the iteration cap is hit.
    pub fn default_carry_forward(self) -> bool {
        self == SchemeId::UvNs
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        SchemeId::ALL
            .into_iter()
            .find(|id| id.name() == key)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown scheme '{s}' (expected one of uv, uv-nd, uv-ns, uvs, uv-ad)"
                ))
            })
    }
}

/// Chemo-sensitivity `chi` and consumption rate `mu`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    pub chi: f64,
    pub mu: f64,
}

impl PhysicalParams {
    pub fn new(chi: f64, mu: f64) -> Result<Self> {
        if !(chi > 0.0 && chi.is_finite()) || !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "chi and mu must be positive, got chi = {chi}, mu = {mu}"
            )));
        }
        Ok(Self { chi, mu })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverParams {
    pub dt: f64,
    pub eps: f64,
    pub c_tol: f64,
    pub max_iter: usize,
    /// `None` selects the per-scheme default.
    pub carry_forward_on_cap: Option<bool>,
    /// Lower bound applied to `v` before it is used as a divisor.
    pub v_floor: f64,
}

impl SolverParams {
    /// Defaults `eps = h^2`, `c_tol = 1e-8`, `max_iter = 100`.
    pub fn new(dt: f64, mesh: &Mesh1D) -> Self {
        Self {
            dt,
            eps: mesh.h() * mesh.h(),
            c_tol: 1e-8,
            max_iter: 100,
            carry_forward_on_cap: None,
            v_floor: 1e-300,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, v: f64| {
            Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
        };
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", self.dt);
        }
        if !(self.c_tol > 0.0) {
            return bad("c_tol", self.c_tol);
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        if !(self.v_floor >= 0.0) {
            return Err(Error::InvalidParameter("v_floor must be nonnegative".into()));
        }
        Truncation::new(self.eps).map(|_| ())
    }

    pub fn carry_forward(&self, scheme: SchemeId) -> bool {
        self.carry_forward_on_cap
            .unwrap_or_else(|| scheme.default_carry_forward())
    }

    pub fn truncation(&self) -> Truncation {
        Truncation::new(self.eps).expect("validated eps")
    }
}

/// Physical and numerical parameters of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    pub physical: PhysicalParams,
    pub solver: SolverParams,
}

impl Params {
    pub fn chi(&self) -> f64 {
        self.physical.chi
    }

    pub fn mu(&self) -> f64 {
        self.physical.mu
    }

    pub fn dt(&self) -> f64 {
        self.solver.dt
    }

    /// Same parameters with a different time step.
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.solver.dt = dt;
        self
    }
}

/// Discrete unknowns at time level `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeState {
    pub u: NodalField,
    pub v: NodalField,
    /// Present only for the `uvs` scheme.
    pub sigma: Option<NodalField>,
    pub t: f64,
    pub n: usize,
}

impl SchemeState {
    /// Initial state at `t = 0`; `sigma` is built from `v` when the scheme
    /// needs it.
    pub fn initial(scheme: SchemeId, u: NodalField, v: NodalField) -> Result<Self> {
        u.mesh().ensure_same(v.mesh())?;
        let sigma = if scheme.uses_sigma() {
            Some(init_sigma(&v)?)
        } else {
            None
        };
        Ok(Self {
            u,
            v,
            sigma,
            t: 0.0,
            n: 0,
        })
    }

    pub fn mesh(&self) -> &Mesh1D {
        self.u.mesh()
    }

    pub(crate) fn sigma_or_zero(&self) -> NodalField {
        self.sigma
            .clone()
            .unwrap_or_else(|| NodalField::zeros(*self.mesh()))
    }
}

/// Telemetry of one time step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepReport {
    pub picard_iters: usize,
    pub picard_residual: f64,
    pub converged: bool,
    /// `dt < 2 / (chi^2 max|v_x^n|)`.
    pub dt_condition_ok: bool,
    /// Number of nodes where `v` was raised to the floor before division.
    pub v_floor_hits: usize,
}

impl StepReport {
    fn linear(dt_condition_ok: bool) -> Self {
        Self {
            picard_iters: 0,
            picard_residual: 0.0,
            converged: true,
            dt_condition_ok,
            v_floor_hits: 0,
        }
    }
}

/// Advances one step with the given scheme.
pub fn step(
    scheme: SchemeId,
    state: &SchemeState,
    params: &Params,
) -> Result<(SchemeState, StepReport)> {
    match scheme {
        SchemeId::Uv => uv_step(state, params),
        SchemeId::UvNd => uvnd_step(state, params),
        SchemeId::UvNs => uvns_step(state, params),
        SchemeId::Uvs => uvs_step(state, params),
        SchemeId::UvAd => uvad_step(state, params),
    }
}

pub(crate) fn dt_condition(v: &NodalField, params: &Params) -> bool {
    let g = gradient(v).max_abs();
    g == 0.0 || params.dt() < 2.0 / (params.chi() * params.chi() * g)
}

/// Nonzero entries of `M / dt + K`.
pub(crate) fn heat_matrix(mesh: Mesh1D, dt: f64) -> TriDiagMatrix {
    let mut a = assemble_stiffness(mesh);
    a.add_scaled(&assemble_lumped_mass(mesh), 1.0 / dt)
        .expect("same mesh");
    a
}

/// `M f / dt`.
pub(crate) fn mass_rhs(f: &NodalField, dt: f64) -> Vec<f64> {
    let m = f.mesh();
    f.values()
        .iter()
        .enumerate()
        .map(|(j, v)| m.weight(j) * v / dt)
        .collect()
}

pub(crate) fn check_finite(f: &NodalField, field: &'static str, step: usize) -> Result<()> {
    match f.first_non_finite() {
        Some(node) => Err(Error::Diverged { field, node, step }),
        None => Ok(()),
    }
}

pub(crate) fn field(mesh: Mesh1D, values: Vec<f64>) -> NodalField {
    NodalField::new(mesh, values).expect("one value per node")
}

/// Chemical step: `(M/dt + K + mu M_{u+}) v = M v^n / dt`.
pub fn step_v(u_new: &NodalField, v_old: &NodalField, params: &Params) -> Result<NodalField> {
    u_new.mesh().ensure_same(v_old.mesh())?;
    let mesh = *v_old.mesh();
    let mut a = heat_matrix(mesh, params.dt());
    let reaction = assemble_lumped_reaction(&u_new.map(pos_part));
    a.add_scaled(&reaction, params.mu())?;
    let v = a.solve(&mass_rhs(v_old, params.dt()))?;
    Ok(field(mesh, v))
}

/// System matrix of the linear cell step of `uv`.
pub fn uv_matrix(v_old: &NodalField, params: &Params) -> TriDiagMatrix {
    let mut a = heat_matrix(*v_old.mesh(), params.dt());
    a.add_scaled(&assemble_convection(&gradient(v_old)), -params.chi())
        .expect("same mesh");
    a
}

/// System matrix of the linear cell step of `uv-ad`: the `uv` matrix plus the
/// artificial diffusion `h chi/2 (|v_x| u_x, w_x)`.
pub fn uvad_matrix(v_old: &NodalField, params: &Params) -> TriDiagMatrix {
    let mesh = *v_old.mesh();
    let g = gradient(v_old);
    let mut a = uv_matrix(v_old, params);
    let abs_g = CellField::new(mesh, g.values().iter().map(|x| x.abs()).collect())
        .expect("one value per element");
    a.add_scaled(
        &assemble_weighted_stiffness(&abs_g),
        0.5 * mesh.h() * params.chi(),
    )
    .expect("same mesh");
    a
}

/// Upwind finite-volume matrix for the cell step, assembled from the control
/// volume fluxes. Algebraically equal to [`uvad_matrix`].
pub fn upwind_fv_matrix(v_old: &NodalField, params: &Params) -> TriDiagMatrix {
    let mesh = *v_old.mesh();
    let n = mesh.nodes();
    let h = mesh.h();
    let chi = params.chi();
    let dt = params.dt();
    let g = gradient(v_old);
    let mut rows = vec![[0.0f64; 3]; n];
    for (j, row) in rows.iter_mut().enumerate() {
        row[1] = mesh.weight(j) / dt;
        // flux through x_{j+1/2}
        if j + 1 < n {
            let gp = g[j];
            row[1] += 1.0 / h + chi * gp.max(0.0);
            row[2] += -1.0 / h + chi * gp.min(0.0);
        }
        // flux through x_{j-1/2}
        if j > 0 {
            let gm = g[j - 1];
            row[1] += 1.0 / h - chi * gm.min(0.0);
            row[0] += -1.0 / h - chi * gm.max(0.0);
        }
    }
    let mut a = TriDiagMatrix::zeros(mesh);
    for (j, row) in rows.iter().enumerate() {
        if j > 0 {
            a.set(j, j - 1, row[0]);
        }
        a.set(j, j, row[1]);
        if j + 1 < n {
            a.set(j, j + 1, row[2]);
        }
    }
    a
}

fn linear_cell_step(
    state: &SchemeState,
    params: &Params,
    a: TriDiagMatrix,
) -> Result<(SchemeState, StepReport)> {
    let mesh = *state.mesh();
    let step = state.n + 1;
    let report = StepReport::linear(dt_condition(&state.v, params));
    let u = field(mesh, a.solve(&mass_rhs(&state.u, params.dt()))?);
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

pub fn uv_step(state: &SchemeState, params: &Params) -> Result<(SchemeState, StepReport)> {
    linear_cell_step(state, params, uv_matrix(&state.v, params))
}

pub fn uvad_step(state: &SchemeState, params: &Params) -> Result<(SchemeState, StepReport)> {
    linear_cell_step(state, params, uvad_matrix(&state.v, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn params(mesh: &Mesh1D, dt: f64, chi: f64, mu: f64) -> Params {
        Params {
            physical: PhysicalParams::new(chi, mu).unwrap(),
            solver: SolverParams::new(dt, mesh),
        }
    }

    #[test]
    fn scheme_names_round_trip() {
        for id in SchemeId::ALL {
            assert_eq!(id.name().parse::<SchemeId>().unwrap(), id);
        }
        assert_eq!("UV_AD".parse::<SchemeId>().unwrap(), SchemeId::UvAd);
        assert!("upwind".parse::<SchemeId>().is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(PhysicalParams::new(0.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, -1.0).is_err());
        let m = Mesh1D::new(0.0, 1.0, 11).unwrap();
        let s = SolverParams::new(1e-3, &m);
        assert_relative_eq!(s.eps, 0.01, max_relative = 1e-14);
        assert_eq!(s.c_tol, 1e-8);
        assert_eq!(s.max_iter, 100);
        assert!(s.validate().is_ok());
        assert!(SolverParams { dt: 0.0, ..s }.validate().is_err());
        assert!(SolverParams { eps: 2.0, ..s }.validate().is_err());
        assert!(s.carry_forward(SchemeId::UvNs));
        assert!(!s.carry_forward(SchemeId::UvNd));
        assert!(!s.carry_forward(SchemeId::Uvs));
    }

    #[test]
    fn step_v_without_cells_keeps_constant() {
        let m = Mesh1D::new(0.0, 1.0, 21).unwrap();
        let p = params(&m, 1e-3, 1.0, 5.0);
        let v = step_v(&NodalField::zeros(m), &NodalField::constant(m, 2.5), &p).unwrap();
        for x in v.values() {
            assert_relative_eq!(*x, 2.5, max_relative = 1e-14);
        }
    }

    #[test]
    fn step_v_constant_consumption_recurrence() {
        let m = Mesh1D::new(0.0, 1.0, 21).unwrap();
        let (dt, mu, big_u, c) = (1e-3, 7.0, 3.0, 2.0);
        let p = params(&m, dt, 1.0, mu);
        let v = step_v(&NodalField::constant(m, big_u), &NodalField::constant(m, c), &p).unwrap();
        for x in v.values() {
            assert_relative_eq!(*x, c / (1.0 + mu * dt * big_u), max_relative = 1e-13);
        }
    }

    #[test]
    fn step_v_maximum_principle_example_i() {
        let m = Mesh1D::new(0.0, 1.0, 1001).unwrap();
        let p = params(&m, 1e-6, 100.0, 1000.0);
        let u = NodalField::interpolate(m, |x| 1.0001 + (5.0 * PI * x).cos());
        let v0 = NodalField::interpolate(m, |x| 1.0001 + (2.0 * PI * x).cos());
        let v1 = step_v(&u, &v0, &p).unwrap();
        assert!(v1.min() > 0.0);
        assert!(v1.max() <= v0.max());
    }

    #[test]
    fn constant_chemical_gives_heat_step() {
        let m = Mesh1D::new(0.0, 1.0, 41).unwrap();
        let p = params(&m, 1e-4, 50.0, 2.0);
        let u = NodalField::interpolate(m, |x| 1.0 + 0.5 * (PI * x).cos());
        let s = SchemeState::initial(SchemeId::Uv, u.clone(), NodalField::constant(m, 1.0))
            .unwrap();
        for scheme in [SchemeId::Uv, SchemeId::UvAd] {
            let (next, rep) = step(scheme, &s, &p).unwrap();
            assert!(rep.converged && rep.dt_condition_ok);
            assert_relative_eq!(
                next.u.lumped_integral(),
                u.lumped_integral(),
                max_relative = 1e-13
            );
            assert!(next.u.max() <= u.max() && next.u.min() >= u.min());
            // identical systems when the chemical is flat
            let heat = heat_matrix(m, p.dt()).solve(&mass_rhs(&u, p.dt())).unwrap();
            for (a, b) in next.u.values().iter().zip(&heat) {
                assert_relative_eq!(*a, *b, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn cell_step_matrices_are_conservative() {
        let m = Mesh1D::new(0.0, 1.0, 51).unwrap();
        let p = params(&m, 1e-5, 30.0, 1.0);
        let v = NodalField::interpolate(m, |x| 2.0 + (7.0 * x).sin());
        let mass = assemble_lumped_mass(m);
        for mut a in [uv_matrix(&v, &p), uvad_matrix(&v, &p), upwind_fv_matrix(&v, &p)] {
            a.add_scaled(&mass, -1.0 / p.dt()).unwrap();
            let scale = a.norm_inf();
            assert!(a.column_sums().iter().all(|s| s.abs() <= 1e-12 * scale));
        }
    }

    #[test]
    fn upwind_forms_agree() {
        let m = Mesh1D::new(0.0, 1.0, 31).unwrap();
        let p = params(&m, 1e-6, 100.0, 1.0);
        let v = NodalField::interpolate(m, |x| 1.0 + (9.0 * x).cos());
        let fe = uvad_matrix(&v, &p);
        let fv = upwind_fv_matrix(&v, &p);
        for i in 0..31 {
            for k in 0..31 {
                let scale = fe.get(i, k).abs().max(1.0);
                assert!((fe.get(i, k) - fv.get(i, k)).abs() <= 1e-13 * scale);
            }
        }
    }

    #[test]
    fn upwind_step_stays_positive() {
        let m = Mesh1D::new(0.0, 1.0, 101).unwrap();
        let p = params(&m, 1e-7, 100.0, 1.0);
        let u = NodalField::interpolate(m, |x| 1.1 - (-((x - 0.5) / 0.1).powi(2)).exp());
        let v = NodalField::interpolate(m, |x| 2.0 - (-((x - 0.5) / 0.01).powi(2)).exp());
        let mut s = SchemeState::initial(SchemeId::UvAd, u, v).unwrap();
        for _ in 0..200 {
            s = uvad_step(&s, &p).unwrap().0;
            assert!(s.u.min() > 0.0);
        }
        assert_eq!(s.n, 200);
    }
}
