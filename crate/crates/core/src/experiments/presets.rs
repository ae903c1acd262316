//! The four reference experiments on `[0, 1]`.

use std::f64::consts::PI;

/// Initial data, parameters and default discretization of an experiment.
#[derive(Clone, Copy, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub u0: fn(f64) -> f64,
    pub v0: fn(f64) -> f64,
    pub u0_text: &'static str,
    pub v0_text: &'static str,
    pub t_final: f64,
    pub chi: f64,
    pub mu: f64,
    pub h: f64,
    pub dt: f64,
}

fn u0_i(x: f64) -> f64 {
    1.0001 + (5.0 * PI * x).cos()
}

fn v0_i(x: f64) -> f64 {
    1.0001 + (2.0 * PI * x).cos()
}

fn u0_ii(x: f64) -> f64 {
    1.1 - (-((x - 0.5) / 0.1).powi(2)).exp()
}

fn v0_ii(x: f64) -> f64 {
    2.0 - (-((x - 0.5) / 0.01).powi(2)).exp()
}

fn u0_iii(x: f64) -> f64 {
    4.0 * (2.0001 + (7.0 * PI * x).cos())
}

fn v0_iii(x: f64) -> f64 {
    3.0 * (2.0001 + (12.0 * PI * x).cos())
}

fn u0_iv(x: f64) -> f64 {
    3.0 * (1.0001 + (8.0 * PI * x).cos())
}

fn v0_iv(x: f64) -> f64 {
    5.0 * (1.0001 + (7.0 * PI * x).cos())
}

static PRESETS: [Preset; 4] = [
    Preset {
        name: "example-i",
        u0: u0_i,
        v0: v0_i,
        u0_text: "1.0001 + cos(5*pi*x)",
        v0_text: "1.0001 + cos(2*pi*x)",
        t_final: 0.3,
        chi: 100.0,
        mu: 1000.0,
        h: 1e-3,
        dt: 1e-6,
    },
    Preset {
        name: "example-ii",
        u0: u0_ii,
        v0: v0_ii,
        u0_text: "1.1 - exp(-((x - 0.5)/0.1)^2)",
        v0_text: "2 - exp(-((x - 0.5)/0.01)^2)",
        t_final: 1e-4,
        chi: 100.0,
        mu: 1.0,
        h: 1e-3,
        dt: 1e-8,
    },
    Preset {
        name: "example-iii",
        u0: u0_iii,
        v0: v0_iii,
        u0_text: "4*(2.0001 + cos(7*pi*x))",
        v0_text: "3*(2.0001 + cos(12*pi*x))",
        t_final: 1e-4,
        chi: 30.0,
        mu: 10000.0,
        h: 1e-3,
        dt: 1e-7,
    },
    Preset {
        name: "example-iv",
        u0: u0_iv,
        v0: v0_iv,
        u0_text: "3*(1.0001 + cos(8*pi*x))",
        v0_text: "5*(1.0001 + cos(7*pi*x))",
        t_final: 1e-4,
        chi: 10.0,
        mu: 1500.0,
        h: 1e-3,
        dt: 1e-8,
    },
];

pub fn presets() -> &'static [Preset] {
    &PRESETS
}

pub fn preset(name: &str) -> Option<&'static Preset> {
    let key = name.trim().to_ascii_lowercase().replace('_', "-");
    PRESETS.iter().find(|p| p.name == key)
}
