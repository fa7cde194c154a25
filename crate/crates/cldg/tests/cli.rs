use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cldg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cldg")).args(args).output().expect("spawn cldg")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

const SHORT_SOLITON: &str = "experiment=soliton\ntheta=1\nk=2\nn_cells=50\ndomain=-25,25\ntau=0.002\nT=0.1\nx0=10\nsnapshot_times=0,0.05,0.1\n";

#[test]
fn soliton_run_writes_stamped_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "s.cfg", SHORT_SOLITON);
    let out = tmp.path().join("out");
    let o = cldg(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["status"], "PASS");
    assert_eq!(summary["steps"], 50);
    assert!(summary["final_l2_error"].as_f64().unwrap() > 0.0);

    for name in ["snapshot_t0.csv", "snapshot_t0.05.csv", "snapshot_t0.1.csv", "charge.csv"] {
        let text = fs::read_to_string(out.join(name)).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# cldg experiment=soliton"), "{name}");
        let header = lines.next().unwrap();
        if name == "charge.csv" {
            assert_eq!(header, "t,charge,drift,relative_drift");
            assert_eq!(lines.count(), 51);
        } else {
            assert_eq!(header, "x,r,s,abs");
            assert_eq!(lines.count(), 50 * 4);
        }
    }
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "s.cfg", SHORT_SOLITON);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        assert!(cldg(&["run", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]).status.success());
    }
    for name in ["snapshot_t0.1.csv", "charge.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn converge_subcommand_forces_the_study() {
    let tmp = tempfile::tempdir().unwrap();
    // experiment key is overridden by the subcommand
    let cfg = write_config(tmp.path(), "c.cfg", "experiment=soliton\ntheta=1,0.4\nk=1\nn_list=20,40\ntau=0.01\nT=0.05\n");
    let out = tmp.path().join("out");
    let o = cldg(&["converge", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("convergence.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("1,1,20,") && rows[0].ends_with(','), "first row has no order: {}", rows[0]);
    assert!(rows[1].starts_with("1,1,40,") && !rows[1].ends_with(','));
    assert!(rows[2].starts_with("0.4,1,20,"));
    let table = fs::read_to_string(out.join("convergence.txt")).unwrap();
    assert!(table.contains("L2-error") && table.contains("Order"));
}

#[test]
fn project_study_marks_singular_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "p.cfg", "theta=0.5\nk=1\nn_list=8,16\nprojection=P\n");
    let out = tmp.path().join("out");
    let o = cldg(&["project-study", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    // theta = 1/2 carries no slope expectation, so singular rows do not fail the run
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("projection_study_P.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("# failed: theta=0.5 k=1 N=8")), "{csv}");
}

#[test]
fn config_errors_exit_one_and_name_the_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("experiment=soliton\ntheta=1\nk=2\nn_cells=50\nT=1\n", "tau"),
        ("experiment=soliton\ntheta=1.5\nk=2\nn_cells=50\ntau=0.1\nT=1\n", "theta"),
        ("experiment=soliton\nbogus=1\n", "line 2"),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let cfg = write_config(tmp.path(), &format!("bad{i}.cfg"), text);
        let o = cldg(&["run", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(1));
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains("stage config") && err.contains(needle), "{err}");
    }
    let o = cldg(&["run", tmp.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failed_drift_check_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{SHORT_SOLITON}drift_tolerance=1e-30\n");
    let cfg = write_config(tmp.path(), "d.cfg", &text);
    let o = cldg(&["run", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["status"], "FAIL");
}

#[test]
fn solver_failure_names_the_stage() {
    let tmp = tempfile::tempdir().unwrap();
    // far beyond the fixed-point stability limit on h = 0.1
    let cfg = write_config(tmp.path(), "f.cfg", "experiment=soliton\nn_cells=500\ntau=0.5\nT=1\nmax_iterations=20\n");
    let o = cldg(&["run", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("stage evolve"), "{err}");
}

#[test]
fn fixtures_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        cldg::config::RunConfig::parse(&text, None).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        seen += 1;
    }
    assert!(seen >= 9);
}
