use std::path::Path;
use std::process::{Command, Output};

fn knlab(args: &[&str], config: Option<&str>) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_knlab"));
    if let Some(text) = config {
        let path = dir.path().join("run.toml");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    let out = cmd.args(args).env_remove("KNLAB_JOBS").output().unwrap();
    (out, dir)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn classical_verify_passes() {
    let (o, _d) = knlab(&["verify", "--window", "4"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("all checks passed"));
}

#[test]
fn injected_fault_fails_the_gamma_v_check() {
    let (o, _d) = knlab(&["verify", "--window", "4"], Some("fault = \"gamma_v_sign\"\ntasks = [\"geometric\"]\n[surface]\nin = [\"0\"]\n"));
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let failed: Vec<&str> = text.lines().filter(|l| l.starts_with("[FAIL]")).collect();
    assert_eq!(failed.len(), 1, "{text}");
    assert!(failed[0].contains("gamma_v cocycle identity on L"));
}

#[test]
fn three_point_gl2_passes() {
    let cfg = "window = 3\n[surface]\nin = [\"0\", \"1\", \"2\"]\n[lie]\nalgebra = \"gl(2)\"\n";
    let (o, _d) = knlab(&["verify"], Some(cfg));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn invalid_configurations_exit_with_2() {
    for bad in [
        "[surface]\nin = [\"0\", \"0\"]\n",
        "[surface]\nin = [0.5]\n",
        "window = 40\n[surface]\nin = [\"0\"]\n",
        "[surface\n",
        "tasks = [\"nonsense\"]\n[surface]\nin = [\"0\"]\n",
    ] {
        let (o, _d) = knlab(&["verify"], Some(bad));
        assert_eq!(o.status.code(), Some(2), "{bad}");
        assert!(!o.stderr.is_empty());
    }
    let (o, _d) = knlab(&["verify", "--window", "0"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn two_point_basis_lists_the_partition() {
    let cfg = "lambdas = [0]\nwindow = 1\n[surface]\nin = [\"0\", \"1\"]\n";
    let (o, _d) = knlab(&["basis", "--format", "csv"], Some(cfg));
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let sections: Vec<String> = text
        .lines()
        .filter_map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            (cols.len() == 5 && cols[1] == "0").then(|| cols[3].to_string())
        })
        .collect();
    assert_eq!(sections.len(), 2, "{text}");
    assert!(sections.iter().any(|s| s == "-z + 1"), "{sections:?}");
    assert!(sections.iter().any(|s| s == "z"), "{sections:?}");
}

#[test]
fn h2loc_reaches_expected_dimensions() {
    let cfg = "[surface]\nin = [\"0\", \"1\"]\n[lie]\nalgebra = \"gl(2)\"\n[h2loc]\ntargets = [\"D1\", \"sl(2)-current\", \"gl(2)-D1\", \"abelian(2)-current\"]\nwindow = 4\n";
    let (o, _d) = knlab(&["h2loc", "--format", "json"], Some(cfg));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let details: Vec<&str> = v["records"].as_array().unwrap().iter().map(|r| r["detail"].as_str().unwrap()).collect();
    assert!(details[0].contains("certified lower bound 3"), "{details:?}");
    assert!(details[1].contains("certified lower bound 1"), "{details:?}");
    assert!(details[2].contains("certified lower bound 4"), "{details:?}");
    assert!(details[3].contains("expected dimension 3; certified lower bound 3"), "{details:?}");
}

#[test]
fn reports_are_reproducible_and_written_to_out() {
    let cfg = "[surface]\nin = [\"0\", \"1\"]\n";
    let run = |jobs: &str| {
        let (o, _d) = knlab(&["cocycle", "--window", "2", "--format", "json", "--jobs", jobs], Some(cfg));
        assert_eq!(o.status.code(), Some(0));
        o.stdout
    };
    assert_eq!(run("1"), run("4"));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reports");
    let (o, _d) = knlab(&["verify", "--window", "2", "--format", "csv", "--out", out.to_str().unwrap()], Some(cfg));
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.starts_with("task,passed,detail"));
    assert!(Path::new(&out.join("gamma_f_cocycle_identity_on_a.csv")).exists());
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let o = Command::new(env!("CARGO_BIN_EXE_knlab"))
            .args(["basis", "--window", "1", "--config"])
            .arg(&path)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 2);
}
