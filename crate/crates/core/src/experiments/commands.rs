//! The `run`, `table1` and `eoc` commands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{load_config, RunConfig};
use super::output::{
    fmt_real, read_field, table_cell, time_label, write_eoc, write_field, write_ledger,
};
use crate::diagnostics::{EocTable, RunFailure};
use crate::error::{Error, Result};
use crate::mesh::{Mesh1D, NodalField};
use crate::schemes::{run, RunOutcome, SchemeId, SchemeState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

/// Rayon pool sized by the `THREADS` environment variable when it is set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var("THREADS") {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("THREADS: '{s}' is not a thread count")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))
}

/// A finished (or failed) run with the states captured at snapshot times.
#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub outcome: RunOutcome,
    /// `(requested time, state)` for every snapshot time that was reached.
    pub snapshots: Vec<(f64, SchemeState)>,
}

impl RunArtifacts {
    pub fn exit_code(&self) -> i32 {
        if self.outcome.ledger.failed() {
            EXIT_SOLVER
        } else {
            EXIT_OK
        }
    }
}

/// Runs a configuration, capturing the first state at or past each
/// snapshot time.
pub fn execute(cfg: &RunConfig) -> Result<RunArtifacts> {
    let params = cfg.params()?;
    let initial = cfg.initial_state()?;
    let mut times = cfg.snapshot_times();
    times.sort_by(f64::total_cmp);
    let half_dt = 0.5 * cfg.dt;
    let mut snapshots: Vec<(f64, SchemeState)> = Vec::new();
    let mut next = 0;
    let mut capture = |state: &SchemeState, _: &crate::diagnostics::StepRecord| {
        while next < times.len() && state.t >= times[next] - half_dt {
            snapshots.push((times[next], state.clone()));
            next += 1;
        }
    };
    let outcome = run(cfg.scheme, initial, &params, cfg.t_final, &mut [&mut capture])?;
    Ok(RunArtifacts { outcome, snapshots })
}

fn summary_text(cfg: &RunConfig, art: &RunArtifacts) -> String {
    let ledger = &art.outcome.ledger;
    let mut s = String::new();
    let status = if ledger.failed() { "failed" } else { "completed" };
    let _ = writeln!(s, "status: {status}");
    let _ = writeln!(s, "exit_code: {}", art.exit_code());
    let _ = writeln!(s, "scheme: {}", cfg.scheme);
    let _ = writeln!(s, "initial_data: {}", cfg.name);
    let _ = writeln!(s, "u0: {}", cfg.u0.label());
    let _ = writeln!(s, "v0: {}", cfg.v0.label());
    let _ = writeln!(s, "domain: [{}, {}]", cfg.a, cfg.b);
    let _ = writeln!(s, "nodes: {}", cfg.nodes);
    let _ = writeln!(s, "h: {}", fmt_real(cfg.h()));
    let _ = writeln!(s, "dt: {}", fmt_real(cfg.dt));
    let _ = writeln!(s, "T: {}", fmt_real(cfg.t_final));
    let _ = writeln!(s, "chi: {}", fmt_real(cfg.chi));
    let _ = writeln!(s, "mu: {}", fmt_real(cfg.mu));
    if let Ok(p) = cfg.params() {
        let _ = writeln!(s, "eps: {}", fmt_real(p.solver.eps));
        let _ = writeln!(s, "c_tol: {}", fmt_real(p.solver.c_tol));
        let _ = writeln!(s, "max_iter: {}", p.solver.max_iter);
        let _ = writeln!(s, "carry_forward_on_cap: {}", p.solver.carry_forward(cfg.scheme));
    }
    let _ = writeln!(s, "steps_completed: {}", ledger.completed_steps());
    if let Some(RunFailure { step, time, reason }) = &ledger.failure {
        let _ = writeln!(s, "failure_step: {step}");
        let _ = writeln!(s, "failure_time: {}", fmt_real(*time));
        let _ = writeln!(s, "failure_reason: {reason}");
    }
    let _ = writeln!(s, "min_u_over_run: {}", fmt_real(ledger.global_min_u));
    let _ = writeln!(s, "energy_violations: {}", ledger.energy_violations());
    let _ = writeln!(s, "unconverged_steps: {}", ledger.unconverged_steps());
    let _ = writeln!(s, "dt_condition_violations: {}", ledger.dt_condition_violations());
    let _ = writeln!(s, "v_floor_hits: {}", ledger.v_floor_hits());
    let _ = writeln!(
        s,
        "energy_floor_hits: {} (u floored at {:e} inside log u for E_uv)",
        ledger.energy_floor_hits(),
        crate::diagnostics::ENERGY_FLOOR
    );
    let _ = writeln!(
        s,
        "weak_v_estimate: {} <= {} : {}",
        fmt_real(ledger.weak_estimate_lhs),
        fmt_real(ledger.weak_estimate_rhs),
        ledger.weak_estimate_holds()
    );
    let times: Vec<String> = art.snapshots.iter().map(|(t, _)| time_label(*t)).collect();
    let _ = writeln!(
        s,
        "snapshots: {} (default frames 0, T/1000, T/100, T/10, T)",
        times.join(" ")
    );
    s
}

/// Writes `ledger.csv`, the snapshots and `summary.txt` into `dir`.
pub fn write_run(dir: &Path, cfg: &RunConfig, art: &RunArtifacts) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_ledger(&dir.join("ledger.csv"), &art.outcome.ledger)?;
    for (t, state) in &art.snapshots {
        let label = time_label(*t);
        write_field(&dir.join(format!("u_t{label}.csv")), &state.u)?;
        write_field(&dir.join(format!("v_t{label}.csv")), &state.v)?;
    }
    std::fs::write(dir.join("summary.txt"), summary_text(cfg, art))?;
    Ok(())
}

/// Options of the `run` command.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub preset: Option<String>,
    pub config: Option<PathBuf>,
    pub scheme: Option<SchemeId>,
    pub h: Option<f64>,
    pub dt: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunOptions {
    /// The configuration after command-line overrides.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.preset, &self.config) {
            (Some(name), None) => RunConfig::preset(name, self.scheme.unwrap_or(SchemeId::Uv))?,
            (None, Some(path)) => load_config(path)?,
            _ => {
                return Err(Error::Config(
                    "exactly one of --preset and --config is required".into(),
                ))
            }
        };
        if let Some(s) = self.scheme {
            cfg.scheme = s;
        }
        if let Some(h) = self.h {
            cfg.set_h(h)?;
        }
        if let Some(dt) = self.dt {
            cfg.dt = dt;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        cfg.params()?;
        Ok(cfg)
    }
}

pub fn cmd_run(opts: &RunOptions) -> i32 {
    let cfg = match opts.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let art = match execute(&cfg) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = write_run(&out, &cfg, &art) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    let ledger = &art.outcome.ledger;
    match &ledger.failure {
        Some(f) => println!(
            "{} on {}: failed at step {} (t = {:e}): {}",
            cfg.scheme, cfg.name, f.step, f.time, f.reason
        ),
        None => println!(
            "{} on {}: {} steps, min u = {:e}, results in {}",
            cfg.scheme,
            cfg.name,
            ledger.completed_steps(),
            ledger.global_min_u,
            out.display()
        ),
    }
    art.exit_code()
}

/// Grid of runs for the minimum-of-u table.
#[derive(Clone, Debug)]
pub struct Table1Spec {
    pub preset: String,
    pub schemes: Vec<SchemeId>,
    pub dts: Vec<f64>,
    pub hs: Vec<f64>,
}

impl Default for Table1Spec {
    fn default() -> Self {
        Self {
            preset: "example-ii".into(),
            schemes: SchemeId::ALL.to_vec(),
            dts: vec![1e-7, 1e-8],
            hs: vec![1.0 / 100.0, 1.0 / 500.0, 1.0 / 1000.0, 1.0 / 5000.0, 1.0 / 10000.0],
        }
    }
}

#[derive(Clone, Debug)]
pub struct Table1Cell {
    pub scheme: SchemeId,
    pub dt: f64,
    pub h: f64,
    /// Minimum of u over the whole run; `None` when the run failed.
    pub min_u: Option<f64>,
    pub steps: usize,
    pub failure: Option<RunFailure>,
}

#[derive(Clone, Debug)]
pub struct Table1 {
    pub spec: Table1Spec,
    pub cells: Vec<Table1Cell>,
}

impl Table1 {
    pub fn cell(&self, scheme: SchemeId, dt: f64, h: f64) -> Option<&Table1Cell> {
        self.cells
            .iter()
            .find(|c| c.scheme == scheme && c.dt == dt && c.h == h)
    }
}

fn h_label(h: f64) -> String {
    let inv = 1.0 / h;
    if (inv - inv.round()).abs() < 1e-9 * inv {
        format!("1/{}", inv.round())
    } else {
        format!("{h:e}")
    }
}

/// Runs every cell of the table in parallel. Failed runs are recorded in
/// their cell.
pub fn table1(spec: &Table1Spec) -> Result<Table1> {
    let mut configs = Vec::new();
    for &scheme in &spec.schemes {
        for &dt in &spec.dts {
            for &h in &spec.hs {
                let mut cfg = RunConfig::preset(&spec.preset, scheme)?;
                cfg.set_h(h)?;
                cfg.dt = dt;
                cfg.params()?;
                configs.push((scheme, dt, h, cfg));
            }
        }
    }
    let cells = configs
        .into_par_iter()
        .map(|(scheme, dt, h, cfg)| {
            let outcome = run(scheme, cfg.initial_state()?, &cfg.params()?, cfg.t_final, &mut [])?;
            let ledger = outcome.ledger;
            Ok(Table1Cell {
                scheme,
                dt,
                h,
                min_u: (!ledger.failed()).then_some(ledger.global_min_u),
                steps: ledger.completed_steps(),
                failure: ledger.failure,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table1 {
        spec: spec.clone(),
        cells,
    })
}

/// `table1.csv` in the published layout (one row per scheme and time step, one
/// column per mesh) and `table1_cells.csv` with one row per run.
pub fn write_table1(dir: &Path, table: &Table1) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut wide = String::from("scheme,dt");
    for &h in &table.spec.hs {
        let _ = write!(wide, ",h={}", h_label(h));
    }
    wide.push('\n');
    for &scheme in &table.spec.schemes {
        for &dt in &table.spec.dts {
            let _ = write!(wide, "{scheme},{dt:e}");
            for &h in &table.spec.hs {
                let min_u = table.cell(scheme, dt, h).and_then(|c| c.min_u);
                let _ = write!(wide, ",{}", table_cell(min_u));
            }
            wide.push('\n');
        }
    }
    std::fs::write(dir.join("table1.csv"), wide)?;

    let mut long = String::from("scheme,dt,h,min_u,steps,failure_step,failure_reason\n");
    for c in &table.cells {
        let (step, reason) = match &c.failure {
            Some(f) => (f.step.to_string(), f.reason.replace(',', ";")),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            long,
            "{},{:e},{},{},{},{},{}",
            c.scheme,
            c.dt,
            fmt_real(c.h),
            table_cell(c.min_u),
            c.steps,
            step,
            reason
        );
    }
    std::fs::write(dir.join("table1_cells.csv"), long)?;
    Ok(())
}

/// Options of the `table1` command; empty lists select the defaults.
#[derive(Clone, Debug, Default)]
pub struct Table1Options {
    pub dt_list: Vec<f64>,
    pub h_list: Vec<f64>,
    pub out: Option<PathBuf>,
}

pub fn cmd_table1(opts: &Table1Options) -> i32 {
    let mut spec = Table1Spec::default();
    if !opts.dt_list.is_empty() {
        spec.dts = opts.dt_list.clone();
    }
    if !opts.h_list.is_empty() {
        spec.hs = opts.h_list.clone();
    }
    let out = opts.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let result = thread_pool().and_then(|pool| pool.install(|| table1(&spec)));
    let table = match result {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = write_table1(&out, &table) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    match std::fs::read_to_string(out.join("table1.csv")) {
        Ok(text) => print!("{text}"),
        Err(e) => eprintln!("error: {e}"),
    }
    // per-cell failures are results, not errors
    EXIT_OK
}

/// Convergence study against a reference solution on a nested fine mesh.
#[derive(Clone, Debug)]
pub struct EocSpec {
    pub preset: String,
    pub scheme: SchemeId,
    pub ladder: Vec<f64>,
    pub dt: f64,
    pub reference_h: f64,
    pub reference_dt: f64,
    /// Compute the reference with `scheme` instead of `uv`.
    pub self_reference: bool,
    /// Directory holding `u_ref.csv` and `v_ref.csv` from an earlier study.
    pub reference_dir: Option<PathBuf>,
}

impl EocSpec {
    /// Ladder 1/200..1/1000 against a reference at h = 1/12000, dt = 1e-8.
    pub fn new(scheme: SchemeId) -> Self {
        Self {
            preset: "example-iv".into(),
            scheme,
            ladder: [200.0, 400.0, 600.0, 800.0, 1000.0]
                .iter()
                .map(|n| 1.0 / n)
                .collect(),
            dt: 1e-8,
            reference_h: 1.0 / 12000.0,
            reference_dt: 1e-8,
            self_reference: false,
            reference_dir: None,
        }
    }

    /// Ladder 1/50, 1/100, 1/200 against a reference at h = 1/2000.
    pub fn mini(scheme: SchemeId) -> Self {
        Self {
            ladder: vec![1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0],
            reference_h: 1.0 / 2000.0,
            ..Self::new(scheme)
        }
    }

    /// Reference at h = 1/120000 and dt = 1e-9 for every run.
    pub fn paper_reference(mut self) -> Self {
        self.reference_h = 1.0 / 120000.0;
        self.reference_dt = 1e-9;
        self.dt = 1e-9;
        self
    }

    pub fn reference_scheme(&self) -> SchemeId {
        if self.self_reference {
            self.scheme
        } else {
            SchemeId::Uv
        }
    }
}

#[derive(Clone, Debug)]
pub struct EocResult {
    pub table: EocTable,
    pub reference_u: NodalField,
    pub reference_v: NodalField,
}

fn final_fields(scheme: SchemeId, preset: &str, h: f64, dt: f64) -> Result<(NodalField, NodalField)> {
    let mut cfg = RunConfig::preset(preset, scheme)?;
    cfg.set_h(h)?;
    cfg.dt = dt;
    let outcome = run(scheme, cfg.initial_state()?, &cfg.params()?, cfg.t_final, &mut [])?;
    if let Some(f) = outcome.ledger.failure {
        return Err(Error::RunFailed {
            run: format!("{scheme} at h = {}", h_label(h)),
            step: f.step,
            reason: f.reason,
        });
    }
    Ok((outcome.state.u, outcome.state.v))
}

/// Runs the ladder (and the reference unless it is loaded) in parallel.
pub fn eoc(spec: &EocSpec) -> Result<EocResult> {
    let loaded = match &spec.reference_dir {
        Some(dir) => Some((
            read_field(&dir.join("u_ref.csv"))?,
            read_field(&dir.join("v_ref.csv"))?,
        )),
        None => None,
    };
    let reference_mesh = match &loaded {
        Some((u, v)) => {
            u.mesh().ensure_same(v.mesh())?;
            *u.mesh()
        }
        None => Mesh1D::with_spacing(0.0, 1.0, spec.reference_h)?,
    };
    let mut meshes = Vec::new();
    for &h in &spec.ladder {
        let m = Mesh1D::with_spacing(0.0, 1.0, h)?;
        Mesh1D::nesting_stride(&reference_mesh, &m)?;
        meshes.push(m);
    }

    let mut jobs: Vec<(SchemeId, f64, f64)> = Vec::new();
    if loaded.is_none() {
        jobs.push((spec.reference_scheme(), spec.reference_h, spec.reference_dt));
    }
    jobs.extend(spec.ladder.iter().map(|&h| (spec.scheme, h, spec.dt)));
    let mut results = jobs
        .into_par_iter()
        .map(|(scheme, h, dt)| final_fields(scheme, &spec.preset, h, dt))
        .collect::<Result<Vec<_>>>()?;
    let (reference_u, reference_v) = match loaded {
        Some(r) => r,
        None => results.remove(0),
    };
    let table = EocTable::from_solutions((&reference_u, &reference_v), &results)?;
    Ok(EocResult {
        table,
        reference_u,
        reference_v,
    })
}

/// Options of the `eoc` command.
#[derive(Clone, Debug)]
pub struct EocOptions {
    pub scheme: SchemeId,
    pub self_reference: bool,
    pub paper_reference: bool,
    pub reference_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

pub fn cmd_eoc(opts: &EocOptions) -> i32 {
    let mut spec = EocSpec::new(opts.scheme);
    if opts.paper_reference {
        spec = spec.paper_reference();
    }
    spec.self_reference = opts.self_reference;
    spec.reference_dir = opts.reference_dir.clone();
    let out = opts.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let result = thread_pool().and_then(|pool| pool.install(|| eoc(&spec)));
    let result = match result {
        Ok(r) => r,
        Err(e @ Error::RunFailed { .. }) => {
            eprintln!("error: {e}");
            return EXIT_SOLVER;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let written = std::fs::create_dir_all(&out)
        .map_err(Error::from)
        .and_then(|_| write_eoc(&out.join("eoc.csv"), &result.table))
        .and_then(|_| write_field(&out.join("u_ref.csv"), &result.reference_u))
        .and_then(|_| write_field(&out.join("v_ref.csv"), &result.reference_v));
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    let rate = |r: Option<f64>| r.map_or("-".to_string(), |r| format!("{r:.4}"));
    println!("{:>8} {:>11} {:>7} {:>11} {:>7} {:>11} {:>7}", "h", "e(u)", "r(u)", "e(v)", "r(v)", "e(v_x)", "r(v_x)");
    for r in &result.table.rows {
        println!(
            "{:>8} {:>11.4e} {:>7} {:>11.4e} {:>7} {:>11.4e} {:>7}",
            h_label(r.h),
            r.e_u,
            rate(r.r_u),
            r.e_v,
            rate(r.r_v),
            r.e_vx,
            rate(r.r_vx)
        );
    }
    EXIT_OK
}
