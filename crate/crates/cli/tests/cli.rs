use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab")).args(args).current_dir(cwd).output().expect("lab runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL_PW: &str = r#"experiment = "pw_equivalence"
[pw_equivalence]
sinc_combinations = 2
kernel_combinations = 2
"#;

#[test]
fn list_names_every_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["list"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in dbfock::experiments::EXPERIMENTS {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
}

#[test]
fn run_writes_tables_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "pw.toml", SMALL_PW);
    let out = lab(&["run", "pw_equivalence", "--config", &cfg, "--out", "res"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(dir.path().join("res/summary.csv")).unwrap();
    assert!(summary.starts_with("experiment,model,parameters,statistic,value,relation,threshold,passed"));
    assert!(summary.contains("ratio_spread"));
    assert!(dir.path().join("res/ratios.csv").exists());
    assert!(String::from_utf8(out.stdout).unwrap().contains("pw_equivalence: passed"));
}

#[test]
fn failed_check_sets_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "pw.toml", &format!("{SMALL_PW}max_spread = 1.0\n"));
    let out = lab(&["run", "pw_equivalence", "--config", &cfg, "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(fs::read_to_string(dir.path().join("res/summary.txt")).unwrap().contains("FAIL"));
}

#[test]
fn bad_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lab(&["run", "no_such_experiment"], dir.path()).status.code(), Some(2));
    let cfg = write(dir.path(), "pw.toml", SMALL_PW);
    assert_eq!(lab(&["run", "spectral", "--config", &cfg], dir.path()).status.code(), Some(2));
    let model = write(dir.path(), "m.toml", "[model]\nkind = \"power\"\nalpha = 1.5\n");
    assert_eq!(lab(&["run", "thm1_necessity", "--model", &model], dir.path()).status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "pw.toml", SMALL_PW);
    for out in ["a", "b"] {
        assert!(lab(&["run", "pw_equivalence", "--config", &cfg, "--out", out], dir.path()).status.success());
    }
    for f in ["ratios.csv", "summary.csv", "summary.txt"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn baseline_update_records_measured_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "lev.toml",
        "experiment = \"lev_bounds\"\n[lev_bounds]\nproducts = 3\nmax_zeros = 4\nfamily_samples = 3\n",
    );
    let out = lab(&["baseline", "update", "lev_bounds", "--config", &cfg, "--baselines", "b.toml"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let b = dbfock::experiments::Baselines::load(&dir.path().join("b.toml")).unwrap();
    let v = b.get("lev_bounds", "random_product_ratio_spread").unwrap();
    assert!(v >= 1.0 && v.is_finite());
    // A rerun against the fresh baseline passes its own regression check.
    let out = lab(&["run", "lev_bounds", "--config", &cfg, "--baselines", "b.toml", "--out", "res"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn model_override_replaces_the_default_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "m.toml", "[model]\nkind = \"pw\"\na = 6.283185307179586\n");
    let cfg = write(dir.path(), "pw.toml", SMALL_PW);
    let out = lab(&["run", "pw_equivalence", "--config", &cfg, "--model", &model, "--out", "res"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(fs::read_to_string(dir.path().join("res/summary.csv")).unwrap().contains("pw(a=6.28"));
}

#[test]
fn levelset_and_weights_dump_csv() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "m.toml", "[model]\nkind = \"finite\"\nzeros = [[0.0, 1.0], [2.0, 0.5]]\n");
    let out = lab(&["levelset", "--model", &model, "--window=-4,4,0,2", "--step", "0.5", "--out", "ls"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["curve.csv", "distance.csv", "ratios.csv"] {
        let body = fs::read_to_string(dir.path().join("ls").join(f)).unwrap();
        assert!(body.lines().count() > 2, "{f}");
    }
    let raster = fs::read_to_string(dir.path().join("ls/distance.csv")).unwrap();
    assert_eq!(raster.lines().count(), 1 + 17 * 5);

    let out = lab(&["weights", "--model", &model, "--kind", "W_tilde", "--range", "3", "--window=-4,4,0,2", "--step", "0.5", "--out", "w"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cover = fs::read_to_string(dir.path().join("w/cover.csv")).unwrap();
    assert!(cover.starts_with("a,b,dist"));
    let weights = fs::read_to_string(dir.path().join("w/weights.csv")).unwrap();
    for line in weights.lines().skip(1) {
        let w: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(w > 0.0 && w.is_finite());
    }
}
