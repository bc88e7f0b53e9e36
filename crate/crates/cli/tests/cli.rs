use std::fs;
use std::process::{Command, Output};

fn yamabe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_yamabe"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn summary_field(line: &str, key: &str) -> f64 {
    line.split_whitespace()
        .find_map(|w| w.strip_prefix(&format!("{key}=")))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn run_double_tetrahedron_csv() {
    let o = yamabe(&[
        "run",
        "--preset",
        "double_tetrahedron",
        "--t-end",
        "1",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("t,vertex,r,K"));
    for line in lines {
        assert_eq!(line.split(',').count(), 4, "{line}");
    }
    // the artifact took stdout, so the summary is on stderr
    let line = stderr(&o);
    assert!(line.contains("termination=reached_t_end"));
    assert!(summary_field(&line, "k_spread") < 1e-6);
    assert_eq!(summary_field(&line, "t_final"), 1.0);
}

#[test]
fn run_perturbed_simplex_converges_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.json");
    let o = yamabe(&[
        "run",
        "--preset",
        "boundary_4_simplex",
        "--radius",
        "5=3",
        "--format",
        "json",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let line = stdout(&o);
    assert!(line.contains("termination=reached_t_end"));
    assert!(summary_field(&line, "k_spread") < 1e-6);
    let json = fs::read_to_string(&path).unwrap();
    assert!(json.contains("\"termination\": \"reached_t_end\""));
}

#[test]
fn run_from_file_with_radius_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dt.txt");
    fs::write(
        &path,
        "# glued pair\ntet 1 2 3 4\ntet 1 2 3 4\nradius 4 2.0\n",
    )
    .unwrap();
    let o = yamabe(&[
        "run",
        path.to_str().unwrap(),
        "--radius",
        "4=1.5",
        "--t-end",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first_row_v4 = stdout(&o).lines().nth(4).unwrap().to_string();
    assert!(first_row_v4.starts_with("0.0000000000000000e0,4,1.5000000000000000e0,"));
}

#[test]
fn run_input_errors_exit_one() {
    let o = yamabe(&["run", "badfile.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("badfile.txt"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.txt");
    fs::write(&path, "tet 1 2 3 4\ntet 1 2 3\n").unwrap();
    let o = yamabe(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    for args in [
        &["run", "--preset", "octahedron"][..],
        &["run", "--preset", "double_tetrahedron", "--radius", "9=1"],
        &["run", "--preset", "double_tetrahedron", "--radius", "1=-2"],
        &[
            "run",
            "--preset",
            "double_tetrahedron",
            "--dt-min",
            "1",
            "--dt-init",
            "0.1",
        ],
        &["run", "--preset", "double_tetrahedron", "--radius", "4=0.1"],
        &["run"],
        &["frobnicate"],
    ] {
        assert_eq!(yamabe(args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn run_degeneracy_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("unbalanced.txt");
    fs::write(&path, "tet 1 2 3 4\ntet 1 2 3 5\n").unwrap();
    // this gluing is not closed, so the file is rejected outright
    assert_eq!(
        yamabe(&["run", path.to_str().unwrap()]).status.code(),
        Some(1)
    );

    let o = yamabe(&[
        "run",
        "--preset",
        "double_tetrahedron",
        "--rel-tol",
        "1e-30",
        "--dt-min",
        "5e-4",
        "--t-end",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("termination=step_underflow"));
}

#[test]
fn check_default_audit_passes() {
    let o = yamabe(&["check", "--samples", "1000", "--seed", "42"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("\"all_passed\": true"));
    assert!(out.contains("double_tetrahedron with r4 = 2"));
    assert!(out.contains("boundary_4_simplex with r5 = 3"));
}

#[test]
fn check_counterexample_tetra() {
    let o = yamabe(&["check", "--tetra", "1,1,1,0.2", "--samples", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("\"parabolic\": false"));
    assert!(out.contains("\"negative_omega\": [\n"));
    assert!(out.contains("\"claim\": \"input_spectrum\""));
}

#[test]
fn check_tetra_with_small_q() {
    let o = yamabe(&["check", "--tetra", "1,1,10,10", "--samples", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("\"all_passed\": true"));
}

#[test]
fn check_input_errors_exit_one() {
    for args in [
        &["check", "--tetra", "1,1,1,0.1"][..],
        &["check", "--tetra", "1,1,1"],
        &[
            "check",
            "--tetra",
            "1,1,1,1",
            "--preset",
            "double_tetrahedron",
        ],
        &["check", "--radius", "1=2"],
        &["check", "--preset", "octahedron"],
    ] {
        assert_eq!(yamabe(args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn check_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let o = yamabe(&[
            "check",
            "--preset",
            "boundary_4_simplex",
            "--radius",
            "5=3",
            "--samples",
            "200",
            "--seed",
            "7",
            "-o",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        let n = fs::read_to_string(path)
            .unwrap()
            .matches("\"claim\":")
            .count();
        assert_eq!(stdout(&o).trim(), format!("{n} of {n} claims passed"));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn run_traces_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = yamabe(&[
            "run",
            "--preset",
            "double_tetrahedron",
            "--radius",
            "4=2",
            "--t-end",
            "2",
            "-o",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn spectrum_regular() {
    let o = yamabe(&["spectrum", "--tetra", "1,1,1,1"]);
    assert_eq!(o.status.code(), Some(0));
    let values = eigenvalues(&stdout(&o));
    for v in &values[..3] {
        assert!((v + 0.9428090415820634).abs() < 1e-9, "{v}");
    }
    assert!(values[3].abs() < 1e-12);
}

#[test]
fn spectrum_counterexample() {
    let o = yamabe(&["spectrum", "--tetra", "1,1,1,0.2"]);
    assert_eq!(o.status.code(), Some(0));
    let values = eigenvalues(&stdout(&o));
    assert!(values[..3].iter().all(|&v| v < -1e-3));
    assert!(values[3].abs() < 1e-12);
    assert!(stdout(&o).contains("minor_error"));
}

#[test]
fn spectrum_rejects_bad_weights() {
    assert_eq!(
        yamabe(&["spectrum", "--tetra", "1,1,-1,1"]).status.code(),
        Some(1)
    );
    assert_eq!(
        yamabe(&["spectrum", "--tetra", "1,1,1,0.1"]).status.code(),
        Some(1)
    );
    assert_eq!(yamabe(&["spectrum"]).status.code(), Some(1));
}

#[test]
fn presets_listing() {
    let o = yamabe(&["presets"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("double_tetrahedron   4 vertices, 6 edges, 4 faces, 2 tetrahedra"));
    assert!(out.contains("boundary_4_simplex   5 vertices, 10 edges, 10 faces, 5 tetrahedra"));
}

fn eigenvalues(table: &str) -> Vec<f64> {
    table
        .lines()
        .filter(|l| l.starts_with("eigenvalue["))
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect()
}
