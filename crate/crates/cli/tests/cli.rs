use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn saddle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_saddle"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn problems_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems")
}

fn problem_files(dir: &Path, out: &mut Vec<PathBuf>) {
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            problem_files(&path, out);
        } else if path.extension().is_some_and(|e| e == "json") {
            out.push(path);
        }
    }
    out.sort();
}

/// The command a problem file is meant for: `genfun`, `verify` with a ladder, else `expand`.
fn primary_command(json: &serde_json::Value) -> &'static str {
    if json.get("v1").is_some() {
        "genfun"
    } else if json
        .get("lambdas")
        .is_some_and(|l| l.as_array().is_some_and(|a| !a.is_empty()))
    {
        "verify"
    } else {
        "expand"
    }
}

#[test]
fn example_problems_meet_their_expectations() {
    let mut files = Vec::new();
    problem_files(&problems_dir(), &mut files);
    assert!(files.len() >= 10);
    for path in files {
        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        let want = json["expect"]["exit_code"].as_i64().unwrap_or(0) as i32;
        let cmd = primary_command(&json);
        let out = saddle(&[cmd, path.to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(want),
            "{} {}: stdout {} stderr {}",
            cmd,
            path.display(),
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        );
        if want == 0 && cmd == "verify" {
            let text =
                String::from_utf8(saddle(&["expand", path.to_str().unwrap()]).stdout).unwrap();
            assert!(!text.contains("MISMATCH"), "{}", path.display());
        }
    }
}

#[test]
fn output_is_deterministic() {
    for (cmd, file) in [
        ("expand", "two_points.json"),
        ("verify", "complex_cubic.json"),
        ("genfun", "genfun_edges.json"),
    ] {
        let path = problems_dir().join(file);
        let a = saddle(&[cmd, path.to_str().unwrap()]);
        let b = saddle(&[cmd, path.to_str().unwrap()]);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{cmd} {file}");
    }
}

#[test]
fn expand_report_contents() {
    let path = problems_dir().join("two_points.json");
    let out = saddle(&["expand", path.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("dimension 1, order 4, 2 stationary points\n"));
    assert!(text.contains("point 1: x = -1.00000000000e0 (interior)"));
    assert!(text.contains("phi(x)            = 0.00000000000e0 + 6.66666666667e-1i"));
    assert!(text.contains("point 2: x = 1.00000000000e0 (interior)"));

    let half = problems_dir().join("halfspace.json");
    let text = String::from_utf8(saddle(&["expand", half.to_str().unwrap()]).stdout).unwrap();
    assert!(text.contains("boundary face x = lower bound, half-space"));
    assert!(text.contains("* half-space terms beyond the leading one are extrapolated"));
}

#[test]
fn overrides_apply() {
    let path = problems_dir().join("gaussian_1d.json");
    let out = saddle(&["expand", path.to_str().unwrap(), "--order", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("dimension 1, order 1,"));
    // c_2 expectation now has no coefficient to match
    assert_eq!(out.status.code(), Some(1));

    let out = saddle(&["expand", path.to_str().unwrap(), "--seed", "x=0.7"]);
    assert!(out.status.success());
    let out = saddle(&["expand", path.to_str().unwrap(), "--seed", "y=0.7"]);
    assert_eq!(out.status.code(), Some(2));
    let out = saddle(&["verify", path.to_str().unwrap(), "--tol", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let path = problems_dir().join("complex_cubic.json");
    let out = saddle(&[
        "verify",
        path.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "lambda,N,quadrature_re,quadrature_im,partial_sum_re,partial_sum_im,abs_error,fitted_slope_per_N"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4 * 3);
    assert!(rows.iter().all(|r| r.split(',').count() == 8));
    assert!(rows[0].starts_with("4.00000000000e2,1,"));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.matches("PASS").count(), 3);
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ \"dimension\": 1, ").unwrap();
    assert_eq!(
        saddle(&["expand", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(
        saddle(&["expand", dir.path().join("missing.json").to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );

    let empty = dir.path().join("empty_ladder.json");
    fs::write(
        &empty,
        r#"{"dimension": 1, "variables": ["x"], "phase": "x^2", "domain": [[-1, 1]], "lambdas": []}"#,
    )
    .unwrap();
    assert_eq!(
        saddle(&["verify", empty.to_str().unwrap()]).status.code(),
        Some(2)
    );

    let syntax = dir.path().join("syntax.json");
    fs::write(
        &syntax,
        r#"{"dimension": 1, "variables": ["x"], "phase": "x +", "domain": [[-1, 1]]}"#,
    )
    .unwrap();
    let out = saddle(&["expand", syntax.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("offset 3"));

    assert_eq!(saddle(&["frobnicate"]).status.code(), Some(2));
}
