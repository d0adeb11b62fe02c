use std::path::Path;
use std::process::{Command, Output};

use semiquant::harness::table::{parse_report_json, parse_table_csv};
use semiquant::harness::{parse_comparison_csv, Cell};

fn semiquant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semiquant")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn log_schrodinger_spectrum_has_21_rows() {
    let text = stdout(&semiquant(&["spectrum", "--potential", "log", "--method", "schrodinger", "--nmax", "6", "--format", "csv"]));
    let table = parse_table_csv(&text).unwrap();
    assert_eq!(table.columns, ["n", "l", "E_schr"]);
    assert_eq!(table.rows.len(), 21);
    assert_eq!(table.rows[1], vec![Cell::Int(2), Cell::Int(1), Cell::Float(1.29457)]);
}

#[test]
fn log_comparison_matches_table_digits() {
    let text = stdout(&semiquant(&["compare", "--potential", "log", "--nmax", "6"]));
    assert!(text.starts_with("n,l,E_schr,E_oq_shifted,discrepancy\n1,0,0.697759,0.706894,0.009135\n"), "{text}");
    let rows = parse_comparison_csv(&text).unwrap();
    let r = rows.iter().find(|r| r.n == 2 && r.ell == 1).unwrap();
    assert_eq!((r.e_schr.value(), r.e_oq_shifted.value()), (1.29457, 1.29659));
    assert!((r.discrepancy() - 0.00202).abs() < 1e-9);
}

#[test]
fn yukawa_ground_row() {
    let text = stdout(&semiquant(&["compare", "--potential", "yukawa", "--lambda", "100", "--nmax", "1"]));
    assert_eq!(text, "n,l,E_schr,E_oq_shifted,discrepancy\n1,0,-0.980149,-0.980137,0.0000122092\n");
}

#[test]
fn critical_values_as_json() {
    let text = stdout(&semiquant(&["critical", "--potential", "yukawa", "--lambda", "100", "--format", "json"]));
    let report = parse_report_json(&text).unwrap();
    let col = |name: &str| report.table.rows[0][report.table.column(name).unwrap()].as_f64().unwrap();
    assert!((col("nu_star") - 8.57763).abs() < 1e-5);
    assert!((col("nr_star") - 11.28379).abs() < 1e-5);
    assert!((col("nu_star_star") - 9.164945).abs() < 1e-5);
    assert_eq!(report.metadata.units, "E_R");
    assert_eq!(report.to_json().unwrap(), text);
}

#[test]
fn counts() {
    let text = stdout(&semiquant(&["count", "--potential", "coulomb", "--nmax", "3", "--policy", "integer"]));
    assert_eq!(text, "n,states\n1,2\n2,3\n3,4\n");
    let golden = "n,states\n1,1\n2,2\n3,3\n4,4\n5,5\n6,6\n7,7\n8,8\n9,8\n10,5\n11,2\n12,0\n";
    let oq = stdout(&semiquant(&["count", "--potential", "yukawa", "--lambda", "100", "--policy", "ebk"]));
    assert_eq!(oq, golden);
    let exact = stdout(&semiquant(&["count", "--potential", "yukawa", "--lambda", "100", "--method", "schrodinger"]));
    assert_eq!(exact, golden);
}

#[test]
fn exit_statuses() {
    assert_eq!(semiquant(&["spectrum", "--potential", "log", "--all-bound"]).status.code(), Some(2));
    assert_eq!(semiquant(&["spectrum", "--potential", "yukawa"]).status.code(), Some(2));
    assert_eq!(semiquant(&["compare", "--potential", "nope"]).status.code(), Some(2));
    assert_eq!(semiquant(&["critical", "--potential", "coulomb"]).status.code(), Some(2));
    assert_eq!(semiquant(&["count", "--potential", "log", "-o", "/nonexistent/dir/out.csv"]).status.code(), Some(5));
    // a coarse cross-check tolerance is still an argument; an impossible one is a consistency failure
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.toml");
    std::fs::write(&cfg, "[settings]\ncross_check_tol = 1e-15\n").unwrap();
    let out = semiquant(&["spectrum", "--potential", "log", "--method", "schrodinger", "--nmax", "1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cross-check"));
}

#[test]
fn outputs_are_deterministic_and_atomic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = semiquant(&["spectrum", "--potential", "log", "--nmax", "4", "--format", "json", "-o", path.to_str().unwrap()]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(entries.len(), 2, "stray files: {entries:?}");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "potential = \"coulomb\"\nnmax = 5\npolicy = \"integer\"\n").unwrap();
    let path = cfg.to_str().unwrap();
    let text = stdout(&semiquant(&["count", "--config", path]));
    assert_eq!(text.lines().count(), 6);
    let text = stdout(&semiquant(&["count", "--config", path, "--nmax", "2", "--policy", "ebk"]));
    assert_eq!(text, "n,states\n1,1\n2,2\n");
    std::fs::write(&cfg, "potential = \"coulomb\"\nunknown_key = 1\n").unwrap();
    assert_eq!(semiquant(&["count", "--config", path]).status.code(), Some(2));
}

#[test]
fn plotdata_writes_one_file_per_series() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("plots");
    let out = semiquant(&["plotdata", "--potential", "yukawa", "--lambda", "10", "--nmax", "4", "-o", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut names: Vec<String> =
        std::fs::read_dir(&out_dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert!(names.contains(&"hydrogen_yukawa_lambda_10.0.csv".to_string()), "{names:?}");
    assert_eq!(names.iter().filter(|n| n.starts_with("ueff")).count(), 3);
    let ueff = names.iter().find(|n| n.starts_with("ueff")).unwrap();
    let text = std::fs::read_to_string(Path::new(&out_dir).join(ueff)).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# ueff yukawa lambda=10.0 ptheta="));
    assert_eq!(lines.next().unwrap(), "rho,U_eff");
    assert_eq!(lines.count(), 400);
}
