use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fps_core::phasepoint::build_phase_point_set;
use fps_core::radon::marginal_simple_odd;
use fps_core::reconstruct::process_matrix_forward;
use fps_core::{ComplexMatrix, Sl2Matrix, Superoperator, Variant};
use num_complex::Complex64;
use serde_json::{json, Value};
use tempfile::TempDir;

fn fps(args: &[&str]) -> Output {
    fps_env(args, &[])
}

fn fps_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fps"));
    cmd.args(args).env_remove("FPS_TOLERANCE");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("run fps")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn ok(o: &Output) -> String {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn p(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn write_state(path: &Path, re: Vec<Vec<f64>>, im: Vec<Vec<f64>>) {
    let v = json!({ "format": 1, "dim": re.len(), "re": re, "im": im });
    fs::write(path, v.to_string()).unwrap();
}

fn matrix_of(v: &Value) -> ComplexMatrix {
    let n = v["re"].as_array().unwrap().len();
    ComplexMatrix::from_fn(n, |i, j| Complex64::new(v["re"][i][j].as_f64().unwrap(), v["im"][i][j].as_f64().unwrap()))
}

fn diag_state(n: usize, k: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut re = vec![vec![0.0; n]; n];
    re[k][k] = 1.0;
    (re, vec![vec![0.0; n]; n])
}

fn read_csv(path: &Path) -> Vec<(usize, usize, f64)> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,z,w"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

fn error_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("stderr {text:?} is not json: {e}"))
}

fn plan_matrices(n: usize) -> Vec<String> {
    let out = ok(&fps(&["plan", "--dim", &n.to_string()]));
    let v: Value = serde_json::from_str(&out).unwrap();
    v["lines"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["M"].as_array().unwrap().iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","))
        .collect()
}

fn write_marginals(dir: &Path, state: &Path, n: usize, extra: &[&str]) -> usize {
    fs::create_dir_all(dir).unwrap();
    let ms = plan_matrices(n);
    for (i, m) in ms.iter().enumerate() {
        let out = dir.join(format!("m{i:02}.json"));
        let seed = i.to_string();
        let mut args = vec!["marginal", "--state", s(state), "--M", m, "--out", s(&out), "--seed", &seed];
        args.extend_from_slice(extra);
        ok(&fps(&args));
    }
    ms.len()
}

// ---- gen ----

#[test]
fn gen_dim3_odd_writes_nine_operators_and_passing_report() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "set.json");
    ok(&fps(&["gen", "--dim", "3", "--variant", "odd", "--out", s(&out)]));
    let set = read(&out);
    assert_eq!(set["format"], 1);
    assert_eq!(set["operators"].as_array().unwrap().len(), 9);
    let report = read(&p(&dir, "set.json.report.json"));
    assert_eq!(report["pass"], true);
    for key in ["hermiticity", "orthogonality", "completeness", "diagonal"] {
        assert!(report[key].as_f64().unwrap() < 1e-12, "{key}");
    }
}

#[test]
fn gen_rejects_variant_dimension_mismatch() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "set.json");
    assert_eq!(code(&fps(&["gen", "--dim", "4", "--variant", "odd", "--out", s(&out)])), 2);
    assert_eq!(code(&fps(&["gen", "--dim", "6", "--variant", "qubit-w1", "--out", s(&out)])), 2);
    assert!(!out.exists());
}

#[test]
fn gen_reports_invariant_violation_under_tiny_tolerance() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "set.json");
    let o = fps_env(
        &["--json-errors", "gen", "--dim", "5", "--variant", "odd", "--out", s(&out)],
        &[("FPS_TOLERANCE", "1e-30")],
    );
    assert_eq!(code(&o), 3);
    assert_eq!(error_json(&o)["error"]["kind"], "invariant-violation");
}

#[test]
fn gen_qubit_and_even_variants() {
    let dir = TempDir::new().unwrap();
    for (n, v) in [("4", "qubit-w1"), ("4", "even-nu"), ("6", "even-nu")] {
        let out = p(&dir, &format!("{v}{n}.json"));
        ok(&fps(&["gen", "--dim", n, "--variant", v, "--out", s(&out)]));
        assert_eq!(read(&sidecar(&out))["pass"], true);
    }
}

fn sidecar(out: &Path) -> PathBuf {
    PathBuf::from(format!("{}.report.json", out.display()))
}

// ---- wigner ----

#[test]
fn wigner_of_maximally_mixed_is_flat() {
    let dir = TempDir::new().unwrap();
    let state = p(&dir, "mixed.json");
    let third = 1.0 / 3.0;
    let re = (0..3).map(|i| (0..3).map(|j| if i == j { third } else { 0.0 }).collect()).collect();
    write_state(&state, re, vec![vec![0.0; 3]; 3]);
    let out = p(&dir, "w.csv");
    ok(&fps(&["wigner", "--state", s(&state), "--variant", "odd", "--out", s(&out)]));
    let rows = read_csv(&out);
    assert_eq!(rows.len(), 9);
    for (_, _, w) in rows {
        assert!((w - 1.0 / 9.0).abs() < 1e-15);
    }
}

#[test]
fn wigner_of_ground_state_odd() {
    let dir = TempDir::new().unwrap();
    let state = p(&dir, "zero.json");
    let (re, im) = diag_state(3, 0);
    write_state(&state, re, im);
    let out = p(&dir, "w.csv");
    ok(&fps(&["wigner", "--state", s(&state), "--out", s(&out)]));
    let rows = read_csv(&out);
    let order: Vec<(usize, usize)> = rows.iter().map(|r| (r.0, r.1)).collect();
    let want: Vec<(usize, usize)> = (0..3).flat_map(|x| (0..3).map(move |z| (x, z))).collect();
    assert_eq!(order, want);
    for (_, z, w) in rows {
        let expect = if z == 0 { 1.0 / 3.0 } else { 0.0 };
        assert!((w - expect).abs() < 1e-15, "z={z} w={w}");
    }
}

#[test]
fn wigner_csv_uses_seventeen_significant_digits_and_sums_to_one() {
    let dir = TempDir::new().unwrap();
    let state = p(&dir, "r.json");
    ok(&fps(&["random-state", "--dim", "8", "--seed", "11", "--out", s(&state)]));
    let out = p(&dir, "w.csv");
    ok(&fps(&["wigner", "--state", s(&state), "--variant", "qubit-w1", "--out", s(&out)]));
    let text = fs::read_to_string(&out).unwrap();
    let first = text.lines().nth(1).unwrap().split(',').nth(2).unwrap();
    let mantissa = first.trim_start_matches('-').split('e').next().unwrap();
    assert_eq!(mantissa.replace('.', "").len(), 17);
    let total: f64 = read_csv(&out).iter().map(|r| r.2).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn wigner_rejects_non_density_unless_raw() {
    let dir = TempDir::new().unwrap();
    let state = p(&dir, "bad.json");
    // hermitian, trace 1, eigenvalues 1.5 and -0.5
    write_state(&state, vec![vec![0.5, 1.0], vec![1.0, 0.5]], vec![vec![0.0; 2]; 2]);
    let out = p(&dir, "w.csv");
    let o = fps(&["--json-errors", "wigner", "--state", s(&state), "--out", s(&out)]);
    assert_eq!(code(&o), 4);
    assert_eq!(error_json(&o)["error"]["code"], 4);
    ok(&fps(&["wigner", "--state", s(&state), "--raw", "--out", s(&out)]));
    assert_eq!(read_csv(&out).len(), 4);
}

// ---- marginal ----

#[test]
fn marginal_identity_gives_diagonal() {
    let dir = TempDir::new().unwrap();
    let state = p(&dir, "r.json");
    ok(&fps(&["random-state", "--dim", "5", "--seed", "2", "--out", s(&state)]));
    let out = p(&dir, "m.json");
    ok(&fps(&["marginal", "--state", s(&state), "--M", "1,0,0,1", "--out", s(&out)]));
    let rho = matrix_of(&read(&state));
    let m = read(&out);
    for (k, pk) in m["probs"].as_array().unwrap().iter().enumerate() {
        assert!((pk.as_f64().unwrap() - rho[(k, k)].re).abs() < 1e-12);
    }
    assert!(m.get("counts").is_none() && m.get("shots").is_none());
}

#[test]
fn marginal_sampling_is_byte_identical_for_fixed_seed() {
    let dir = TempDir::new().unwrap();
    let state = p(&dir, "r.json");
    ok(&fps(&["random-state", "--dim", "7", "--seed", "5", "--out", s(&state)]));
    let (a, b) = (p(&dir, "a.json"), p(&dir, "b.json"));
    for out in [&a, &b] {
        ok(&fps(&[
            "marginal",
            "--state",
            s(&state),
            "--M",
            "2,3,1,2",
            "--shots",
            "5000",
            "--seed",
            "9",
            "--out",
            s(out),
        ]));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let v = read(&a);
    let counts: u64 = v["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum();
    assert_eq!(counts, 5000);
    assert_eq!(v["shots"], 5000);
    assert_eq!(v["seed"], 9);
}

#[test]
fn marginal_n7_matches_library() {
    let dir = TempDir::new().unwrap();
    let state = p(&dir, "r.json");
    ok(&fps(&["random-state", "--dim", "7", "--seed", "3", "--out", s(&state)]));
    let rho = matrix_of(&read(&state));
    let set = build_phase_point_set(Variant::Odd, 7).unwrap();
    for (a, b, c, d) in [(2, 1, 3, 2), (0, 6, 1, 0), (5, 2, 2, 1)] {
        let m = Sl2Matrix::new(a, b, c, d, 7).unwrap();
        let out = p(&dir, "m.json");
        ok(&fps(&["marginal", "--state", s(&state), "--M", &format!("{a},{b},{c},{d}"), "--out", s(&out)]));
        let oracle = marginal_simple_odd(&rho, &m, &set).unwrap();
        let got = read(&out);
        assert_eq!(got["source"], "born-shift");
        for (g, w) in got["probs"].as_array().unwrap().iter().zip(&oracle.probs) {
            assert!((g.as_f64().unwrap() - w).abs() < 1e-12);
        }
    }
}

#[test]
fn marginal_error_codes() {
    let dir = TempDir::new().unwrap();
    let (s5, s4) = (p(&dir, "r5.json"), p(&dir, "r4.json"));
    ok(&fps(&["random-state", "--dim", "5", "--out", s(&s5)]));
    ok(&fps(&["random-state", "--dim", "4", "--out", s(&s4)]));
    let out = p(&dir, "m.json");
    let o = fps(&["--json-errors", "marginal", "--state", s(&s5), "--M", "1,1,1,1", "--out", s(&out)]);
    assert_eq!(code(&o), 5);
    assert_eq!(error_json(&o)["error"]["kind"], "not-sl2");
    // the inverse (2 3; 3 1) mod 4 has no 1 in its first row
    let o = fps(&["--json-errors", "marginal", "--state", s(&s4), "--M", "1,1,1,2", "--out", s(&out)]);
    assert_eq!(code(&o), 6);
    assert_eq!(error_json(&o)["error"]["kind"], "not-in-l1");
    // the identity has u = N for EvenNu
    let o = fps(&["marginal", "--state", s(&s4), "--variant", "even-nu", "--M", "1,0,0,1", "--out", s(&out)]);
    assert_eq!(code(&o), 6);
    // the general kernel has no precondition
    ok(&fps(&["marginal", "--state", s(&s4), "--M", "1,1,1,2", "--kernel", "--out", s(&out)]));
    assert_eq!(read(&out)["source"], "kernel");
}

// ---- reconstruct ----

#[test]
fn reconstruct_exact_round_trip_n5() {
    let dir = TempDir::new().unwrap();
    let state = p(&dir, "r.json");
    ok(&fps(&["random-state", "--dim", "5", "--seed", "17", "--out", s(&state)]));
    let mdir = p(&dir, "marg");
    write_marginals(&mdir, &state, 5, &[]);
    let (out, rep) = (p(&dir, "rho.json"), p(&dir, "rep.json"));
    ok(&fps(&["reconstruct", "--marginals", s(&mdir), "--out", s(&out), "--report", s(&rep), "--truth", s(&state)]));
    let report = read(&rep);
    assert!(report["frobenius_error"].as_f64().unwrap() < 1e-8);
    assert!(report["imaginary_residue"].as_f64().unwrap() < 1e-12);
    assert_eq!(report["plan"].as_array().unwrap().len(), 6);
    let diff = &matrix_of(&read(&out)) - &matrix_of(&read(&state));
    assert!(diff.frobenius_norm() < 1e-8);
}

#[test]
fn reconstruct_exact_round_trip_qubit_w1() {
    let dir = TempDir::new().unwrap();
    let state = p(&dir, "r.json");
    ok(&fps(&["random-state", "--dim", "8", "--seed", "4", "--pure", "--out", s(&state)]));
    let mdir = p(&dir, "marg");
    write_marginals(&mdir, &state, 8, &[]);
    let rep = p(&dir, "rep.json");
    let out = p(&dir, "rho.json");
    ok(&fps(&["reconstruct", "--marginals", s(&mdir), "--out", s(&out), "--report", s(&rep), "--truth", s(&state)]));
    let report = read(&rep);
    assert_eq!(report["variant"], "qubit-w1");
    assert!(report["frobenius_error"].as_f64().unwrap() < 1e-8);
}

#[test]
fn reconstruct_missing_file_names_missing_line() {
    let dir = TempDir::new().unwrap();
    let state = p(&dir, "r.json");
    ok(&fps(&["random-state", "--dim", "5", "--out", s(&state)]));
    let mdir = p(&dir, "marg");
    write_marginals(&mdir, &state, 5, &[]);
    let removed = mdir.join("m00.json");
    let line = read(&removed);
    fs::remove_file(&removed).unwrap();
    let o = fps(&["--json-errors", "reconstruct", "--marginals", s(&mdir), "--out", s(&p(&dir, "rho.json"))]);
    assert_eq!(code(&o), 7);
    let err = error_json(&o);
    let missing = err["error"]["missing_lines"].as_array().unwrap();
    let (a, c) = (line["M"][0].as_u64().unwrap(), line["M"][2].as_u64().unwrap());
    assert_eq!(missing, &vec![json!([a, c])]);
}

#[test]
fn reconstruct_sampled_n3_reports_fidelity_and_physical_state() {
    let dir = TempDir::new().unwrap();
    let state = p(&dir, "r.json");
    ok(&fps(&["random-state", "--dim", "3", "--seed", "8", "--out", s(&state)]));
    let mdir = p(&dir, "marg");
    write_marginals(&mdir, &state, 3, &["--shots", "100000"]);
    let (out, rep) = (p(&dir, "rho.json"), p(&dir, "rep.json"));
    ok(&fps(&["reconstruct", "--marginals", s(&mdir), "--out", s(&out), "--report", s(&rep), "--truth", s(&state)]));
    let report = read(&rep);
    assert_eq!(report["sampled"], true);
    let f = report["fidelity"].as_f64().unwrap();
    assert!(f > 0.99 && f <= 1.0 + 1e-9, "fidelity {f}");
    let rho = matrix_of(&read(&out));
    assert!(rho.is_density(1e-9));

    // --exact ignores the counts and recovers the state to round-off
    ok(&fps(&[
        "reconstruct",
        "--marginals",
        s(&mdir),
        "--exact",
        "--out",
        s(&out),
        "--report",
        s(&rep),
        "--truth",
        s(&state),
    ]));
    assert!(read(&rep)["frobenius_error"].as_f64().unwrap() < 1e-8);
}

#[test]
fn reconstruct_rejects_bad_distribution() {
    let dir = TempDir::new().unwrap();
    let state = p(&dir, "r.json");
    ok(&fps(&["random-state", "--dim", "3", "--out", s(&state)]));
    let mdir = p(&dir, "marg");
    write_marginals(&mdir, &state, 3, &[]);
    let f = mdir.join("m01.json");
    let mut v = read(&f);
    v["probs"][0] = json!(v["probs"][0].as_f64().unwrap() + 0.1);
    fs::write(&f, v.to_string()).unwrap();
    let o = fps(&["--json-errors", "reconstruct", "--marginals", s(&mdir), "--out", s(&p(&dir, "rho.json"))]);
    assert_eq!(code(&o), 9);
}

// ---- process ----

#[test]
fn process_identity_channel_gives_identity() {
    let dir = TempDir::new().unwrap();
    let ch = p(&dir, "id.json");
    ok(&fps(&["channel", "--kind", "identity", "--dim", "3", "--out", s(&ch)]));
    let out = p(&dir, "t.json");
    let stdout =
        ok(&fps(&["process", "--channel", s(&ch), "--variant", "odd", "--out", s(&out), "--check", "1,0,0,1:1,0,0,1"]));
    let t = read(&out);
    for (r, row) in t["values"].as_array().unwrap().iter().enumerate() {
        for (c, v) in row.as_array().unwrap().iter().enumerate() {
            let want = if r == c { 1.0 } else { 0.0 };
            assert!((v.as_f64().unwrap() - want).abs() < 1e-12);
        }
    }
    let dev: f64 = stdout.rsplit("deviation ").next().unwrap().trim().parse().unwrap();
    assert!(dev < 1e-10);
}

#[test]
fn process_x_conjugation_matches_library() {
    let dir = TempDir::new().unwrap();
    let ch = p(&dir, "x.json");
    ok(&fps(&["channel", "--kind", "unitary-x", "--dim", "3", "--out", s(&ch)]));
    let out = p(&dir, "t.json");
    ok(&fps(&["process", "--channel", s(&ch), "--out", s(&out)]));
    let set = build_phase_point_set(Variant::Odd, 3).unwrap();
    let oracle = process_matrix_forward(&Superoperator::unitary(&fps_core::heisenberg::rep_x(3)), &set).unwrap();
    let t = read(&out);
    for r in 0..9 {
        for c in 0..9 {
            assert!((t["values"][r][c].as_f64().unwrap() - oracle.values[r * 9 + c]).abs() < 1e-12);
        }
    }
}

#[test]
fn process_rejects_bad_shape() {
    let dir = TempDir::new().unwrap();
    let ch = p(&dir, "bad.json");
    fs::write(&ch, json!({"format": 1, "dim": 3, "re": [[1.0]], "im": [[0.0]]}).to_string()).unwrap();
    let o = fps(&["--json-errors", "process", "--channel", s(&ch), "--out", s(&p(&dir, "t.json"))]);
    assert_eq!(code(&o), 8);
    let col = p(&dir, "col.json");
    let mut v = read(&data("phase_gate_channel.json"));
    v["vectorization"] = json!("column-major");
    fs::write(&col, v.to_string()).unwrap();
    assert_eq!(code(&fps(&["process", "--channel", s(&col), "--out", s(&p(&dir, "t.json"))])), 8);
}

#[test]
fn vectorization_self_test_vector() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "o.json");
    let ch = data("phase_gate_channel.json");
    let input = data("offdiag_input.json");
    ok(&fps(&["apply", "--channel", s(&ch), "--state", s(&input), "--raw", "--out", s(&out)]));
    let got = matrix_of(&read(&out));
    let want = matrix_of(&read(&data("offdiag_expected.json")));
    assert!(got.max_abs_diff(&want) < 1e-15);

    // the same superoperator as the library builds it from U = diag(1, i)
    let u = ComplexMatrix::from_diagonal(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
    assert!(Superoperator::unitary(&u).matrix.max_abs_diff(&matrix_of(&read(&ch))) < 1e-15);
}

// ---- misc ----

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(code(&fps(&["gen", "--dim", "three", "--variant", "odd", "--out", "x"])), 2);
    let o = fps(&["--json-errors", "frobnicate"]);
    assert_eq!(code(&o), 2);
    assert_eq!(error_json(&o)["error"]["code"], 2);
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "s.json");
    assert_eq!(
        code(&fps_env(&["gen", "--dim", "3", "--variant", "odd", "--out", s(&out)], &[("FPS_TOLERANCE", "abc")])),
        2
    );
}

#[test]
fn missing_input_is_io_error() {
    let o = fps(&["--json-errors", "wigner", "--state", "/nonexistent/state.json", "--out", "/tmp/never.csv"]);
    assert_eq!(code(&o), 1);
    assert_eq!(error_json(&o)["error"]["kind"], "io");
}

#[test]
fn help_documents_exit_codes_and_vectorization() {
    let top = ok(&fps(&["--help"]));
    assert!(top.contains("FPS_TOLERANCE") && top.contains("incomplete cover"));
    let process = ok(&fps(&["process", "--help"]));
    assert!(process.contains("row-major"));
}
