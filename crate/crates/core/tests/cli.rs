use std::path::PathBuf;
use std::process::Command;

fn data(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel).to_string_lossy().into_owned()
}

fn louvre(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_louvre")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn schedule_prints_golden_tables() {
    for (scheme, golden) in [("regular", "regular_bb18"), ("l7", "l7_bb18"), ("l8", "l8_bb18")] {
        let (code, out, _) = louvre(&["schedule", "--code", &data("codes/bb18.code"), "--scheme", scheme]);
        assert_eq!(code, 0);
        assert_eq!(out, std::fs::read_to_string(data(&format!("tables/{golden}.table"))).unwrap());
    }
}

#[test]
fn metrics_line() {
    let (code, out, _) = louvre(&["metrics", "--code", &data("codes/bb72.code"), "--scheme", "l8"]);
    assert_eq!((code, out.as_str()), (0, "4, 12\n"));
}

#[test]
fn metrics_matrix_lists_builders() {
    let (code, out, _) = louvre(&["metrics", "--code", &data("codes/bb18.code")]);
    assert_eq!(code, 0);
    assert_eq!(out, "Scheme | Degree | Distance\nRegular | 6 | 10\nLouvre-7 | 4.5 | 7.5\nLouvre-8 | 4 | 6\n");
}

#[test]
fn routed_scheme_without_table_is_input_error() {
    let (code, _, err) = louvre(&["verify", "--code", &data("codes/bb18.code"), "--scheme", "l8r"]);
    assert_eq!(code, 2);
    assert!(err.contains("--table") && err.contains("--search"), "{err}");
}

#[test]
fn verify_passes_and_fails_with_exit_codes() {
    let (code, out, _) = louvre(&["verify", "--code", &data("codes/bb18.code"), "--scheme", "l7"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.ends_with("PASS\n"));
    let (code, out, _) = louvre(&[
        "verify",
        "--code",
        &data("codes/bb18.code"),
        "--scheme",
        "l7",
        "--absent",
        "L(1,1)",
        "--strategy",
        "extra-couplers",
    ]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("determinism: FAIL"));
}

#[test]
fn table_and_search_inputs() {
    let (code, out, _) = louvre(&[
        "verify",
        "--code",
        &data("codes/lacross72.code"),
        "--table",
        &data("tables/l8r_cxswap_lacross72.table"),
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["passed"], true);
    let (code, out, _) =
        louvre(&["schedule", "--code", &data("codes/lacross72.code"), "--scheme", "l7r", "--search"]);
    assert_eq!(code, 0);
    assert_eq!(out, std::fs::read_to_string(data("tables/l7r_lacross72.table")).unwrap());
}

#[test]
fn bad_inputs_exit_two() {
    assert_eq!(louvre(&["build", "--code", "/nonexistent.code"]).0, 2);
    assert_eq!(louvre(&["schedule", "--code", &data("codes/bb18.code"), "--scheme", "l9"]).0, 2);
    assert_eq!(louvre(&["emit", "--code", &data("codes/bb18.code"), "--scheme", "l7", "--p", "2"]).0, 2);
}

#[test]
fn build_reports_parameters() {
    let (code, out, _) = louvre(&["build", "--code", &data("codes/bb18.code"), "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!((v["n"].as_u64(), v["k"].as_u64(), v["d"].as_u64()), (Some(18), Some(4), Some(4)));
    let (_, out, _) = louvre(&["build", "--code", &data("codes/lacross72.code")]);
    assert!(out.contains("hypergraph product of [6,2]: n=72 k=8"), "{out}");
}

#[test]
fn route_and_emit_write_outputs() {
    let (code, out, _) = louvre(&["route", "--code", &data("codes/bb18.code"), "--scheme", "l7", "--seed", "4"]);
    assert_eq!(code, 0);
    assert!(out.contains("Tiers | Length | Bumps | TSVs"));
    let path = std::env::temp_dir().join(format!("louvre-emit-{}.txt", std::process::id()));
    let p = path.to_string_lossy().into_owned();
    let (code, _, err) =
        louvre(&["emit", "--code", &data("codes/bb18.code"), "--scheme", "l7", "--rounds", "4", "--out", &p]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(text.starts_with("# schema=1"));
    assert_eq!(text.lines().filter(|l| l.starts_with("DETECTOR")).count(), 4 * 18);
}
