//! End-to-end tests of the `chemotaxis` binary.

use std::path::Path;
use std::process::{Command, Output};

use chemotaxis_fe::experiments::{
    load_config, preset, presets, read_field, RunConfig, LEDGER_HEADER,
};
use chemotaxis_fe::schemes::SchemeId;

fn chemotaxis(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chemotaxis"))
        .args(args)
        .current_dir(dir)
        .env_remove("THREADS")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(String::from)
        .collect()
}

#[test]
fn presets_match_the_experiment_definitions() {
    let names: Vec<&str> = presets().iter().map(|p| p.name).collect();
    assert_eq!(names, ["example-i", "example-ii", "example-iii", "example-iv"]);
    let golden = [
        ("example-i", 100.0, 1000.0, 0.3),
        ("example-ii", 100.0, 1.0, 1e-4),
        ("example-iii", 30.0, 10000.0, 1e-4),
        ("example-iv", 10.0, 1500.0, 1e-4),
    ];
    for (name, chi, mu, t) in golden {
        let p = preset(name).unwrap();
        assert_eq!((p.chi, p.mu, p.t_final), (chi, mu, t), "{name}");
    }
    let (i, ii, iii, iv) = (
        preset("example-i").unwrap(),
        preset("example-ii").unwrap(),
        preset("example-iii").unwrap(),
        preset("example-iv").unwrap(),
    );
    let pi = std::f64::consts::PI;
    for x in [0.0, 0.13, 0.5, 0.77, 1.0] {
        assert_eq!((i.u0)(x), 1.0001 + (5.0 * pi * x).cos());
        assert_eq!((i.v0)(x), 1.0001 + (2.0 * pi * x).cos());
        assert_eq!((ii.u0)(x), 1.1 - (-((x - 0.5) / 0.1).powi(2)).exp());
        assert_eq!((ii.v0)(x), 2.0 - (-((x - 0.5) / 0.01).powi(2)).exp());
        assert_eq!((iii.u0)(x), 4.0 * (2.0001 + (7.0 * pi * x).cos()));
        assert_eq!((iii.v0)(x), 3.0 * (2.0001 + (12.0 * pi * x).cos()));
        assert_eq!((iv.u0)(x), 3.0 * (1.0001 + (8.0 * pi * x).cos()));
        assert_eq!((iv.v0)(x), 5.0 * (1.0001 + (7.0 * pi * x).cos()));
    }
}

#[test]
fn short_run_writes_ledger_snapshots_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "short.cfg",
        "preset = example-i\nh = 1/100\ndt = 1e-5\nT = 1e-3\n",
    );
    let out = chemotaxis(&["run", "--config", &cfg, "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let res = dir.path().join("res");
    let ledger = lines(&res.join("ledger.csv"));
    assert_eq!(ledger[0], LEDGER_HEADER);
    assert_eq!(ledger.len(), 1 + 101);
    // mass column constant
    let mass: Vec<f64> = ledger[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(mass.iter().all(|m| (m - mass[0]).abs() <= 1e-12 * mass[0]));
    for t in ["0", "1e-6", "1e-5", "1e-4", "1e-3"] {
        let u = read_field(&res.join(format!("u_t{t}.csv"))).unwrap();
        assert_eq!(u.len(), 101);
        assert!(res.join(format!("v_t{t}.csv")).exists());
    }
    let summary = std::fs::read_to_string(res.join("summary.txt")).unwrap();
    assert!(summary.contains("status: completed"));
    assert!(summary.contains("exit_code: 0"));
    assert!(!summary.contains("failure_step"));
}

#[test]
fn zero_length_run_has_one_ledger_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "zero.cfg", "preset = example-ii\nh = 1/100\nT = 0\n");
    let out = chemotaxis(&["run", "--config", &cfg, "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(lines(&dir.path().join("res/ledger.csv")).len(), 2);
}

#[test]
fn solver_failure_exits_with_two_and_records_the_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = chemotaxis(
        &[
            "run", "--preset", "example-ii", "--scheme", "uv-nd", "--h", "1/100", "--dt", "1e-7",
            "--out", "res",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let summary = std::fs::read_to_string(dir.path().join("res/summary.txt")).unwrap();
    assert!(summary.contains("status: failed"));
    assert!(summary.contains("failure_step: "));
    assert!(summary.contains("exit_code: 2"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "a.cfg", "preset = example-i\ngamma = 3\n");
    let bad = write(dir.path(), "b.cfg", "preset = example-i\ndt = soon\n");
    let missing = write(dir.path(), "c.cfg", "u0 = 1\nv0 = 1\nT = 1\nchi = 1\ndt = 0.1\nh = 0.1\n");
    for (args, needle) in [
        (vec!["run", "--config", &unknown], "gamma"),
        (vec!["run", "--config", &bad], "dt"),
        (vec!["run", "--config", &missing], "mu"),
        (vec!["run", "--preset", "example-v"], "example-v"),
        (vec!["run", "--preset", "example-i", "--h", "0.3"], "h"),
        (vec!["run", "--config", "no-such-file.cfg"], "no-such-file"),
    ] {
        let out = chemotaxis(&args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{args:?}: {err}");
    }
    let out = chemotaxis(&["run"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = chemotaxis(&["run", "--preset", "example-i", "--scheme", "uvw"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn identical_configs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.cfg",
        "scheme = uvs\nu0 = 1 + 0.5*cos(pi*x)\nv0 = 2 + x^2\nT = 2e-3\nchi = 3\nmu = 4\ndt = 1e-4\nnodes = 41\nsnapshots = 0, 1e-3, 2e-3\n",
    );
    for out in ["one", "two"] {
        let o = chemotaxis(&["run", "--config", &cfg, "--out", out], dir.path());
        assert_eq!(o.status.code(), Some(0));
    }
    for file in ["ledger.csv", "u_t1e-3.csv", "v_t2e-3.csv", "summary.txt"] {
        let a = std::fs::read(dir.path().join("one").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("two").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
}

#[test]
fn small_table1_marks_failures_with_x() {
    let dir = tempfile::tempdir().unwrap();
    let out = chemotaxis(
        &["table1", "--dt-list", "1e-7", "--h-list", "1/100,1/500", "--out", "t"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = lines(&dir.path().join("t/table1.csv"));
    assert_eq!(table[0], "scheme,dt,h=1/100,h=1/500");
    assert_eq!(table.len(), 6);
    let row = |scheme: &str| {
        table
            .iter()
            .find(|l| l.starts_with(&format!("{scheme},")))
            .unwrap()
            .split(',')
            .skip(2)
            .map(String::from)
            .collect::<Vec<_>>()
    };
    assert_eq!(row("uv-nd"), ["x", "x"]);
    let ad: f64 = row("uv-ad")[0].parse().unwrap();
    // published value 4.84e-5
    assert!((ad - 4.84e-5).abs() < 0.01e-5, "{ad}");
    assert_eq!(lines(&dir.path().join("t/table1_cells.csv")).len(), 11);
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_chemotaxis"))
        .args(["table1", "--dt-list", "1e-7", "--h-list", "1/100", "--out", "t"])
        .current_dir(dir.path())
        .env("THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eoc_rejects_a_non_nested_reference() {
    let dir = tempfile::tempdir().unwrap();
    let field = "x,value\n".to_string()
        + &(0..=1000)
            .map(|j| format!("{},1\n", j as f64 / 1000.0))
            .collect::<String>();
    write(dir.path(), "u_ref.csv", &field);
    write(dir.path(), "v_ref.csv", &field);
    let out = chemotaxis(&["eoc", "--scheme", "uv", "--reference", "."], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not nested"));
    let out = chemotaxis(&["eoc", "--scheme", "uv", "--reference", "missing"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_round_trip_through_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "lib.cfg",
        "preset = example-iii # coarse\nscheme = uv_ns\nh = 1/200\neps = 1e-3\ncarry_forward = no\n",
    );
    let c: RunConfig = load_config(Path::new(&cfg)).unwrap();
    assert_eq!(c.scheme, SchemeId::UvNs);
    assert_eq!(c.nodes, 201);
    let p = c.params().unwrap();
    assert_eq!(p.solver.eps, 1e-3);
    assert!(!p.solver.carry_forward(SchemeId::UvNs));
}
