use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn model() -> PathBuf {
    repo().join("models/watertank.dhcsp")
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn dhcsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dhcsp")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn line<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix(" = "))
}

#[test]
fn exit_codes() {
    let dir = scratch("exit_codes");
    let m = model();
    let m = m.to_str().unwrap();
    assert_eq!(code(&dhcsp(&["check", m])), 0);

    let broken = dir.join("broken.dhcsp");
    fs::write(&broken, "system S { A: x := ; }").unwrap();
    assert_eq!(code(&dhcsp(&["check", broken.to_str().unwrap()])), 3);

    let invalid = dir.join("invalid.dhcsp");
    fs::write(&invalid, "system S { A: c!1 || B: skip }").unwrap();
    assert_eq!(code(&dhcsp(&["check", invalid.to_str().unwrap()])), 3);

    let plain = dir.join("plain.dhcsp");
    fs::write(&plain, "system S { A: x := 1; wait 1 || B: y := 2 }").unwrap();
    assert_eq!(code(&dhcsp(&["stepsize", plain.to_str().unwrap()])), 3);

    assert_eq!(code(&dhcsp(&["check", "/nonexistent/model.dhcsp"])), 3);
    assert_eq!(code(&dhcsp(&["check", "-c", "/nonexistent/run.cfg"])), 2);
    assert_eq!(code(&dhcsp(&["check"])), 2);
    assert_eq!(code(&dhcsp(&["stepsize", m, "--eps", "0"])), 2);
    assert_eq!(code(&dhcsp(&["check", m, "--colour"])), 2);
    let strict = dir.join("strict.cfg");
    fs::write(&strict, "eps_dde = 1e-9\nmax_halvings = 2\n").unwrap();
    assert_eq!(code(&dhcsp(&["stepsize", m, "-c", strict.to_str().unwrap()])), 4);

    let stress = dhcsp(&["pipeline", m, "--eps", "1e-6", "--robustness-runs", "0", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&stress), 4);
    assert!(String::from_utf8_lossy(&stress.stderr).contains("no valid step size"));
}

#[test]
fn flags_override_the_configuration_file() {
    let cfg = repo().join("models/watertank.cfg");
    let cfg = cfg.to_str().unwrap();
    let from_file = stdout(&dhcsp(&["stepsize", "-c", cfg, "--out", scratch("cfg_a").to_str().unwrap()]));
    assert_eq!(line(&from_file, "h"), Some("0.0125"));
    assert_eq!(line(&from_file, "eps_dde"), Some("0.1"));

    let dir = scratch("cfg_b");
    let out = dhcsp(&["stepsize", "-c", cfg, "--eps-dde", "0.15", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(line(&text, "h"), Some("0.025"));
    let csv = fs::read_to_string(dir.join("stepsize_d.csv")).unwrap();
    assert!(csv.starts_with("t,d,bound\n"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let m = model();
    let run = |name: &str| {
        let dir = scratch(name);
        let out = dhcsp(&[
            "pipeline",
            m.to_str().unwrap(),
            "--robustness-runs",
            "2",
            "--seed",
            "3",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        dir
    };
    let (a, b) = (run("det_a"), run("det_b"));
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    for must in ["WTS.h", "main.cpp", "discrete.dhcsp", "report.txt", "stepsize_d.csv"] {
        assert!(names.iter().any(|n| n == must), "{must} missing from {names:?}");
    }
    for n in &names {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap(), "{n:?} differs");
    }
    let report = fs::read_to_string(a.join("report.txt")).unwrap();
    assert_eq!(line(&report, "bisimulation"), Some("accepted"));
    assert_eq!(line(&report, "systemc_readback"), Some("matches"));
}

#[test]
fn emitted_discrete_models_check_and_bisimulate() {
    let dir = scratch("emit_discrete");
    let m = model();
    let m = m.to_str().unwrap();
    let out = dhcsp(&["discretize", m, "--h", "0.025", "--emit-discrete"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("system WTS"));
    let discrete = dir.join("discrete.dhcsp");
    fs::write(&discrete, &text).unwrap();
    assert_eq!(code(&dhcsp(&["check", discrete.to_str().unwrap()])), 0);

    let accepted = dhcsp(&["bisim", m, "--h", "0.025", "--against", discrete.to_str().unwrap()]);
    assert_eq!(code(&accepted), 0);
    assert_eq!(line(&stdout(&accepted), "bisimulation"), Some("accepted"));

    let moved = dir.join("moved.dhcsp");
    fs::write(&moved, text.replacen("d := 4.5", "d := 5", 1)).unwrap();
    let rejected = dhcsp(&[
        "bisim",
        m,
        "--h",
        "0.025",
        "--against",
        moved.to_str().unwrap(),
        "--dump-ts",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&rejected), 1);
    let text = stdout(&rejected);
    assert_eq!(line(&text, "bisimulation"), Some("rejected"));
    assert_eq!(line(&text, "counterexample_time"), Some("0"));
    let cex = fs::read_to_string(dir.join("counterexample.csv")).unwrap();
    assert!(cex.starts_with("t,left,right,violation\n") && cex.lines().count() > 1);
}
