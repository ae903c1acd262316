//! Run configuration and its `key = value` text format.
//!
//! ```text
//! # Example I with the upwind scheme on a coarser mesh
//! preset = example-i
//! scheme = uv-ad
//! h = 1/500
//! ```
//!
//! Without `preset`, the keys `u0`, `v0`, `T`, `chi`, `mu`, `dt` and one of
//! `h`/`nodes` are required. Initial data are expressions in `x`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use super::presets::{preset, Preset};
use crate::error::{Error, Result};
use crate::mesh::{Mesh1D, NodalField};
use crate::schemes::{Params, PhysicalParams, SchemeId, SchemeState, SolverParams};

/// Initial profile: a built-in function or an expression in `x`.
#[derive(Clone)]
pub enum InitialProfile {
    Function { label: String, f: fn(f64) -> f64 },
    Expression(String),
}

impl fmt::Debug for InitialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl InitialProfile {
    pub fn expression(text: &str) -> Result<Self> {
        let profile = InitialProfile::Expression(text.trim().to_string());
        // parse and evaluate once so that errors surface at load time
        profile.sample(0.5)?;
        Ok(profile)
    }

    pub fn label(&self) -> String {
        match self {
            InitialProfile::Function { label, .. } => label.clone(),
            InitialProfile::Expression(s) => s.clone(),
        }
    }

    fn sample(&self, x: f64) -> Result<f64> {
        match self {
            InitialProfile::Function { f, .. } => Ok(f(x)),
            InitialProfile::Expression(s) => {
                let expr: meval::Expr = s
                    .parse()
                    .map_err(|e| Error::Config(format!("cannot parse '{s}': {e}")))?;
                let f = expr
                    .bind("x")
                    .map_err(|e| Error::Config(format!("cannot evaluate '{s}': {e}")))?;
                Ok(f(x))
            }
        }
    }

    /// Nodal interpolant on `mesh`.
    pub fn interpolate(&self, mesh: Mesh1D) -> Result<NodalField> {
        let field = match self {
            InitialProfile::Function { f, .. } => NodalField::interpolate(mesh, f),
            InitialProfile::Expression(s) => {
                let expr: meval::Expr = s
                    .parse()
                    .map_err(|e| Error::Config(format!("cannot parse '{s}': {e}")))?;
                let f = expr
                    .bind("x")
                    .map_err(|e| Error::Config(format!("cannot evaluate '{s}': {e}")))?;
                NodalField::interpolate(mesh, f)
            }
        };
        if let Some(j) = field.first_non_finite() {
            return Err(Error::Config(format!(
                "initial profile '{}' is not finite at x = {}",
                self.label(),
                mesh.x(j)
            )));
        }
        Ok(field)
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Preset name, or `custom`.
    pub name: String,
    pub scheme: SchemeId,
    pub a: f64,
    pub b: f64,
    pub nodes: usize,
    pub dt: f64,
    pub t_final: f64,
    pub chi: f64,
    pub mu: f64,
    /// `None` means `h^2`.
    pub eps: Option<f64>,
    pub c_tol: f64,
    pub max_iter: usize,
    pub carry_forward: Option<bool>,
    pub v_floor: f64,
    pub u0: InitialProfile,
    pub v0: InitialProfile,
    /// `None` selects `{0, T/1000, T/100, T/10, T}`.
    pub snapshot_times: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
}

/// Node count of a uniform mesh of spacing `h` on `[a, b]`.
pub fn nodes_for_spacing(a: f64, b: f64, h: f64) -> Result<usize> {
    Mesh1D::with_spacing(a, b, h)
        .map(|m| m.nodes())
        .map_err(|e| Error::Config(e.to_string()))
}

/// Parses `0.001`, `1e-3` or `1/1000`.
pub fn parse_real(text: &str) -> Result<f64> {
    let t = text.trim();
    let value = match t.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| bad_number(t))?;
            let d: f64 = d.trim().parse().map_err(|_| bad_number(t))?;
            n / d
        }
        None => t.parse().map_err(|_| bad_number(t))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad_number(t))
    }
}

fn bad_number(t: &str) -> Error {
    Error::Config(format!("'{t}' is not a number"))
}

impl RunConfig {
    pub fn from_preset(p: &Preset, scheme: SchemeId) -> Self {
        Self {
            name: p.name.to_string(),
            scheme,
            a: 0.0,
            b: 1.0,
            nodes: nodes_for_spacing(0.0, 1.0, p.h).expect("preset spacing divides [0, 1]"),
            dt: p.dt,
            t_final: p.t_final,
            chi: p.chi,
            mu: p.mu,
            eps: None,
            c_tol: 1e-8,
            max_iter: 100,
            carry_forward: None,
            v_floor: 1e-300,
            u0: InitialProfile::Function {
                label: p.u0_text.to_string(),
                f: p.u0,
            },
            v0: InitialProfile::Function {
                label: p.v0_text.to_string(),
                f: p.v0,
            },
            snapshot_times: None,
            out: None,
        }
    }

    pub fn preset(name: &str, scheme: SchemeId) -> Result<Self> {
        let p = preset(name).ok_or_else(|| {
            Error::Config(format!(
                "unknown preset '{name}' (expected example-i, example-ii, example-iii or example-iv)"
            ))
        })?;
        Ok(Self::from_preset(p, scheme))
    }

    pub fn set_h(&mut self, h: f64) -> Result<()> {
        self.nodes = nodes_for_spacing(self.a, self.b, h)?;
        Ok(())
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / (self.nodes - 1) as f64
    }

    pub fn mesh(&self) -> Result<Mesh1D> {
        Mesh1D::new(self.a, self.b, self.nodes).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn params(&self) -> Result<Params> {
        let mesh = self.mesh()?;
        let physical = PhysicalParams::new(self.chi, self.mu)
            .map_err(|e| Error::Config(e.to_string()))?;
        let mut solver = SolverParams::new(self.dt, &mesh);
        if let Some(eps) = self.eps {
            solver.eps = eps;
        }
        solver.c_tol = self.c_tol;
        solver.max_iter = self.max_iter;
        solver.carry_forward_on_cap = self.carry_forward;
        solver.v_floor = self.v_floor;
        solver
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!(
                "T must be nonnegative, got {}",
                self.t_final
            )));
        }
        Ok(Params { physical, solver })
    }

    pub fn initial_state(&self) -> Result<SchemeState> {
        let mesh = self.mesh()?;
        let u = self.u0.interpolate(mesh)?;
        let v = self.v0.interpolate(mesh)?;
        SchemeState::initial(self.scheme, u, v).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        match &self.snapshot_times {
            Some(t) => t.clone(),
            None => {
                let t = self.t_final;
                let mut times = vec![0.0, t / 1000.0, t / 100.0, t / 10.0, t];
                times.dedup();
                times
            }
        }
    }
}

const KEYS: [&str; 19] = [
    "preset",
    "scheme",
    "a",
    "b",
    "h",
    "nodes",
    "dt",
    "T",
    "chi",
    "mu",
    "eps",
    "c_tol",
    "max_iter",
    "carry_forward",
    "v_floor",
    "u0",
    "v0",
    "snapshots",
    "out",
];

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: '{v}' is not a boolean"))),
    }
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: '{v}' is not a nonnegative integer")))
}

fn parse_key_real(key: &str, v: &str) -> Result<f64> {
    parse_real(v).map_err(|_| Error::Config(format!("{key}: '{v}' is not a number")))
}

/// Parses the text of a configuration file. Relative `out` paths are kept
/// as written.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut entries: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
        })?;
        let key = match key.trim() {
            "t_final" | "t" => "T",
            k => k,
        };
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!(
                "line {}: unknown key '{key}'",
                lineno + 1
            )));
        }
        if entries
            .insert(key.to_string(), value.trim().to_string())
            .is_some()
        {
            return Err(Error::Config(format!(
                "line {}: key '{key}' given twice",
                lineno + 1
            )));
        }
    }
    let get = |k: &str| entries.get(k).map(String::as_str);

    let scheme = match get("scheme") {
        Some(s) => s.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
        None => SchemeId::Uv,
    };
    let mut cfg = match get("preset") {
        Some(name) => RunConfig::preset(name, scheme)?,
        None => {
            for key in ["u0", "v0", "T", "chi", "mu", "dt"] {
                if get(key).is_none() {
                    return Err(Error::Config(format!("missing required key '{key}'")));
                }
            }
            if get("h").is_none() && get("nodes").is_none() {
                return Err(Error::Config("missing required key 'h' (or 'nodes')".into()));
            }
            RunConfig {
                name: "custom".into(),
                scheme,
                a: 0.0,
                b: 1.0,
                nodes: 2,
                dt: 0.0,
                t_final: 0.0,
                chi: 0.0,
                mu: 0.0,
                eps: None,
                c_tol: 1e-8,
                max_iter: 100,
                carry_forward: None,
                v_floor: 1e-300,
                u0: InitialProfile::Expression(String::new()),
                v0: InitialProfile::Expression(String::new()),
                snapshot_times: None,
                out: None,
            }
        }
    };

    if let Some(v) = get("a") {
        cfg.a = parse_key_real("a", v)?;
    }
    if let Some(v) = get("b") {
        cfg.b = parse_key_real("b", v)?;
    }
    match (get("h"), get("nodes")) {
        (Some(_), Some(_)) => {
            return Err(Error::Config("give either 'h' or 'nodes', not both".into()))
        }
        (Some(v), None) => cfg.set_h(parse_key_real("h", v)?)?,
        (None, Some(v)) => cfg.nodes = parse_usize("nodes", v)?,
        (None, None) if get("a").is_some() || get("b").is_some() => {
            let h = 1.0 / (cfg.nodes - 1) as f64;
            cfg.set_h(h * (cfg.b - cfg.a))?;
        }
        (None, None) => {}
    }
    if let Some(v) = get("dt") {
        cfg.dt = parse_key_real("dt", v)?;
    }
    if let Some(v) = get("T") {
        cfg.t_final = parse_key_real("T", v)?;
    }
    if let Some(v) = get("chi") {
        cfg.chi = parse_key_real("chi", v)?;
    }
    if let Some(v) = get("mu") {
        cfg.mu = parse_key_real("mu", v)?;
    }
    if let Some(v) = get("eps") {
        cfg.eps = Some(parse_key_real("eps", v)?);
    }
    if let Some(v) = get("c_tol") {
        cfg.c_tol = parse_key_real("c_tol", v)?;
    }
    if let Some(v) = get("max_iter") {
        cfg.max_iter = parse_usize("max_iter", v)?;
    }
    if let Some(v) = get("carry_forward") {
        cfg.carry_forward = Some(parse_bool("carry_forward", v)?);
    }
    if let Some(v) = get("v_floor") {
        cfg.v_floor = parse_key_real("v_floor", v)?;
    }
    if let Some(v) = get("u0") {
        cfg.u0 = InitialProfile::expression(v)?;
    }
    if let Some(v) = get("v0") {
        cfg.v0 = InitialProfile::expression(v)?;
    }
    if let Some(v) = get("snapshots") {
        let times = v
            .split(',')
            .map(|s| parse_key_real("snapshots", s))
            .collect::<Result<Vec<_>>>()?;
        cfg.snapshot_times = Some(times);
    }
    if let Some(v) = get("out") {
        cfg.out = Some(PathBuf::from(v));
    }
    // surface parameter errors at load time
    cfg.params()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}
