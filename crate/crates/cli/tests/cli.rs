use std::path::Path;
use std::process::Command;

use qmeter::config::parse;
use qmeter::output::Field;
use qmeter::{execute, Command as Cmd};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qmeter"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn reals(col: Vec<Field>) -> Vec<Option<f64>> {
    col.iter().map(Field::as_f64).collect()
}

const SEQUENCE: &str = r#"
seed = 11
[sequence]
epsilon = [0.2, 0.3]
alpha_ratio = [1.0, 2.0]
n_steps = [1, 5, 20]
monte_carlo_samples = 10000
"#;

#[test]
fn output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seq.toml", SEQUENCE);
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}"));
        let status = bin()
            .args(["sequence", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args(["--threads", threads])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(out.join("sequence.csv")).unwrap());
    }
    let env_out = dir.path().join("env");
    let status = bin()
        .args(["sequence", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&env_out)
        .env("QMETER_THREADS", "3")
        .status()
        .unwrap();
    assert!(status.success());
    outputs.push(std::fs::read(env_out.join("sequence.csv")).unwrap());
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn seed_flag_overrides_config() {
    let cfg = parse(SEQUENCE).unwrap();
    let a = execute(Cmd::Sequence, &cfg, 11, 2).unwrap().table.to_csv();
    let b = execute(Cmd::Sequence, &cfg, 12, 2).unwrap().table.to_csv();
    assert_ne!(a, b);
}

#[test]
fn svg_flag_does_not_change_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.toml",
        "[single]\nepsilon = [0.5, 1.0]\nalpha_bar = [0.0, 1.0]\nplot_style = \"heatmap\"\n",
    );
    let run = |sub: &str, svg: bool| {
        let out = dir.path().join(sub);
        let mut c = bin();
        c.args(["single", "--config"]).arg(&cfg).arg("--out").arg(&out);
        if svg {
            c.arg("--svg");
        }
        assert!(c.status().unwrap().success());
        out
    };
    let a = run("a", false);
    let b = run("b", true);
    assert!(!a.join("single.svg").exists());
    assert!(b.join("single.svg").exists());
    assert_eq!(
        std::fs::read(a.join("single.csv")).unwrap(),
        std::fs::read(b.join("single.csv")).unwrap()
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.toml", "[single]\nepsilon = []\n");
    let code = |cmd: &str, cfg: &Path| {
        bin()
            .args([cmd, "--config"])
            .arg(cfg)
            .arg("--out")
            .arg(dir.path().join("o"))
            .status()
            .unwrap()
            .code()
    };
    assert_eq!(code("single", &bad), Some(2));
    assert_eq!(code("single", &dir.path().join("missing.toml")), Some(2));
    let other = write_config(dir.path(), "other.toml", "[rotation]\nepsilon = 1.0\ntheta = 0.0\n");
    assert_eq!(code("single", &other), Some(2));
    let stuck = write_config(
        dir.path(),
        "stuck.toml",
        "[compare]\nepsilon_weak = [0.0, 1.5]\nalpha_bar = 0.5\n",
    );
    assert_eq!(code("compare", &stuck), Some(4));
    let csv = std::fs::read_to_string(dir.path().join("o/compare.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().ends_with(",false"));
    let strict = write_config(
        dir.path(),
        "strict.toml",
        "[tolerances]\nhierarchy_slack = 0.0\n[single]\nepsilon = 0.5\nalpha_bar = 0.5\n",
    );
    assert_eq!(code("single", &strict), Some(0));
}

#[test]
fn uncoupled_row_along_diagonal() {
    let cfg = parse("[single]\nepsilon = [0.0, 0.5]\nalpha_ratio = 1.0\n").unwrap();
    let t = execute(Cmd::Single, &cfg, 0, 1).unwrap().table;
    let row = &t.rows[0];
    assert_eq!(row[2], Field::Real(0.0));
    assert_eq!(row[3], Field::Null);
    assert_eq!(row[4], Field::Null);
    for name in ["w_bound_dephasing", "w_bound_dissipation"] {
        assert_eq!(t.column(name).unwrap()[0], Field::Real(0.0));
    }
}

#[test]
fn rotation_has_quarter_period() {
    let cfg = parse(
        "[rotation]\nepsilon = 5.0\ntheta = [0.0, 0.3, 0.7853981633974483, 1.5707963267948966, 1.8707963267948966, 2.356194490192345]\n",
    )
    .unwrap();
    let r = execute(Cmd::Rotation, &cfg, 0, 2).unwrap();
    let v = reals(r.table.column("eta_xr").unwrap());
    assert!(v[0].unwrap_or(0.0).abs() < 1e-9);
    assert!((v[1].unwrap() - v[4].unwrap()).abs() < 1e-9);
    assert!((v[2].unwrap() - v[5].unwrap()).abs() < 1e-9);
    assert!((v[2].unwrap() - 0.977).abs() < 0.005);
    assert!(r.messages[0].starts_with("peak: theta = 0.785398"));
}

#[test]
fn degenerate_comparison() {
    let cfg = parse("[compare]\nepsilon_weak = 1.5\n").unwrap();
    let r = execute(Cmd::Compare, &cfg, 0, 1).unwrap();
    assert_eq!(r.table.column("n_star").unwrap()[0], Field::Int(1));
    let ratio = reals(r.table.column("ratio").unwrap())[0].unwrap();
    assert!((ratio - 1.0).abs() < 1e-12);
}

#[test]
fn cold_thermal_pointer_is_close_to_vacuum() {
    let cfg = parse(
        "[thermal]\nbeta_omega = 10.0\nepsilon = [0.3, 0.8, 1.5]\nalpha_bar = [0.5, 1.0]\n",
    )
    .unwrap();
    let t = execute(Cmd::Thermal, &cfg, 0, 2).unwrap().table;
    for (v, th) in [("xi_vacuum", "xi_thermal"), ("eta_vacuum", "eta_thermal")] {
        let a = reals(t.column(v).unwrap());
        let b = reals(t.column(th).unwrap());
        for (a, b) in a.iter().zip(&b) {
            let (a, b) = (a.unwrap(), b.unwrap());
            assert!((a - b).abs() <= 0.02 * a.abs(), "{v}: {a} vs {b}");
        }
    }
}

#[test]
fn checked_in_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            qmeter::config::load(&path).unwrap();
            n += 1;
        }
    }
    assert!(n >= 10);
}
