use std::path::PathBuf;
use std::process::{Command, Output};

fn f4sp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_f4sp")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("f4sp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn gen_then_gb() {
    let sys = scratch("k2.txt");
    let basis = scratch("k2.basis");
    let o = f4sp(&["gen", "--family", "katsura", "--n", "2", "--p", "32003", "--out", sys.to_str().unwrap()]);
    assert!(o.status.success());
    let o = f4sp(&["gb", sys.to_str().unwrap(), "--basis-out", basis.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f4 = std::fs::read_to_string(&basis).unwrap();
    assert!(f4.starts_with("p 32003\n"));

    let o = f4sp(&["gb", sys.to_str().unwrap(), "--engine", "buchberger", "--backend", "montgomery"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), f4);

    for numeric in ["dense", "wiedemann"] {
        let o = f4sp(&["gb", sys.to_str().unwrap(), "--numeric", numeric, "--panel-width", "2"]);
        assert!(o.status.success(), "{numeric}");
        assert_eq!(stdout(&o), f4, "{numeric}");
    }
}

#[test]
fn bench_writes_both_reports() {
    let report = scratch("bench.txt");
    let o = f4sp(&["bench", "--family", "cyclic", "--n", "3", "--report", report.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&report).unwrap();
    assert_eq!(text, stdout(&o));
    let flat = std::fs::read_to_string(report.with_extension("txt.kv")).unwrap();
    assert!(flat.contains("instance.family=cyclic\n"));
    assert!(flat.contains("config.engine=f4\n"));
}

#[test]
fn verify_and_microbench() {
    let sys = scratch("c3.txt");
    f4sp(&["gen", "--family", "cyclic", "--n", "3", "--out", sys.to_str().unwrap()]);
    let o = f4sp(&["verify", sys.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));

    for kind in ["dict_build", "row_assemble", "mod_fma"] {
        let o = f4sp(&["microbench", "--kind", kind, "--size", "5000", "--workers", "3"]);
        assert!(o.status.success(), "{kind}");
        assert!(stdout(&o).contains("validated=true"));
    }
}

#[test]
fn exit_codes() {
    let bad = scratch("bad.txt");
    std::fs::write(&bad, "p 101\nvars x y\norder grevlex\nx + w\n").unwrap();
    assert_eq!(f4sp(&["gb", bad.to_str().unwrap()]).status.code(), Some(2));

    let not_prime = scratch("np.txt");
    std::fs::write(&not_prime, "p 100\nvars x\norder lex\nx\n").unwrap();
    assert_eq!(f4sp(&["gb", not_prime.to_str().unwrap()]).status.code(), Some(2));

    assert_eq!(f4sp(&["gb", "/nonexistent/system.txt"]).status.code(), Some(2));

    let sys = scratch("c4.txt");
    f4sp(&["gen", "--family", "cyclic", "--n", "4", "--out", sys.to_str().unwrap()]);
    assert_eq!(f4sp(&["gb", sys.to_str().unwrap(), "--max-steps", "1"]).status.code(), Some(3));
}
