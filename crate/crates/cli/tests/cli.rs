use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn subdual(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subdual"))
        .args(args)
        .env_remove("SUBDUAL_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .display()
        .to_string()
}

/// Header and rows of CSV output as column → value maps.
fn csv_rows(text: &str) -> Vec<Vec<(String, String)>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    r.records()
        .map(|rec| {
            header
                .iter()
                .cloned()
                .zip(rec.unwrap().iter().map(String::from))
                .collect()
        })
        .collect()
}

fn field<'a>(row: &'a [(String, String)], name: &str) -> &'a str {
    &row.iter().find(|(k, _)| k == name).unwrap_or_else(|| panic!("no column {name}")).1
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_gap_instance_selected_methods() {
    let o = subdual(&["solve", "--instance", &data("gap.cov"), "--k", "2", "--methods", "pd,bqs3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(field(&rows[0], "bqs3"), "4");
    assert_eq!(field(&rows[0], "pd"), "4");
    assert!(!field(&rows[0], "pd_dual").is_empty());
    assert_eq!(field(&rows[0], "greedy"), "");
}

#[test]
fn solve_generated_with_verification() {
    let o = subdual(&["solve", "--gen", "model=er n=40 p=0.1 seed=1", "--k", "5", "--verify"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(field(&rows[0], "cert_check"), "ok");
    assert_eq!(field(&rows[0], "opt"), "");
    assert!(stderr(&o).contains("opt skipped"));
}

#[test]
fn solve_budget_sweep_and_json() {
    let o = subdual(&["solve", "--instance", &data("abc.cov"), "--k", "1..3", "--json", "--verify"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1]["greedy"], 7.0);
    assert_eq!(lines[1]["pd"], 6.0);
    assert_eq!(lines[1]["opt"], 7.0);
    assert_eq!(lines[2]["cert_check"], "ok");

    let csv = subdual(&["solve", "--instance", &data("abc.cov"), "--k", "1"]);
    let header: Vec<String> = stdout(&csv).lines().next().unwrap().split(',').map(String::from).collect();
    let keys: Vec<String> = lines[0].as_object().unwrap().keys().cloned().collect();
    assert_eq!(header, keys);
}

#[test]
fn missing_and_malformed_files_exit_two() {
    let o = subdual(&["solve", "--instance", "/no/such/file.cov", "--k", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/no/such/file.cov"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cov");
    std::fs::write(&bad, "coverage 2 3\n0 1 1\n1 x 1\n").unwrap();
    let o = subdual(&["solve", "--instance", path_str(&bad), "--k", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = subdual(&["solve", "--instance", &data("gap.cov"), "--k", "2", "--methods", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn emitted_certificate_verifies_and_corruption_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("abc.cert");
    let trace = dir.path().join("abc.trace.csv");
    let o = subdual(&[
        "solve",
        "--instance",
        &data("abc.cov"),
        "--k",
        "2",
        "--methods",
        "greedy",
        "--emit-cert",
        path_str(&cert),
        "--trace",
        path_str(&trace),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(std::fs::read_to_string(&trace).unwrap().starts_with("round,event,t,leader,entrant,alpha,gamma,dual"));

    let o = subdual(&["verify", "--instance", &data("abc.cov"), "--k", "2", "--cert", path_str(&cert)]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("feasible"));

    // Point mass on the empty set with alpha below the largest singleton (4).
    std::fs::write(&cert, "dual k 2 alpha 3.5\ntau 1 :\n").unwrap();
    let o = subdual(&["verify", "--instance", &data("abc.cov"), "--k", "2", "--cert", path_str(&cert)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("violating element 0"), "{}", stdout(&o));
}

#[test]
fn verify_reports_and_caps() {
    let o = subdual(&["verify", "--instance", &data("gap.cov"), "--k", "1..3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("opt     4"));
    assert!(text.ends_with("verify: ok\n"));

    let o = subdual(&["verify", "--gen", "model=ba n=30 m=2", "--k", "4"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("exhaustive opt skipped"));
    assert!(stdout(&o).contains("check certificate pd: ok"));
}

#[test]
fn gen_writes_loadable_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ws.cov");
    let o = subdual(&["gen", "--gen", "model=ws n=30 degree=4 rewire=0.1", "--seed", "3", "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("coverage 30 30\n"));

    let o = subdual(&["gen", "--named", "gap"]);
    assert_eq!(stdout(&o), std::fs::read_to_string(data("gap.cov")).unwrap());

    let o = subdual(&["gen", "--named", "worstcase", "--k", "3", "--x", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_ws_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ws.csv");
    let o = subdual(&[
        "bench",
        "--gen",
        "model=ws n=500 degree=10 rewire=0.1",
        "--k",
        "10..40:10",
        "--trials",
        "5",
        "--seed",
        "1",
        "--methods",
        "greedy",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&std::fs::read_to_string(&out).unwrap());
    // 5 seeds × 4 budgets × {greedy, pd, pd_dual}, then one summary row per method
    assert_eq!(rows.len(), 60 + 3);
    let summary = rows
        .iter()
        .find(|r| field(r, "seed") == "all" && field(r, "method") == "greedy")
        .unwrap();
    let ratio: f64 = field(summary, "ratio_vs_pd_dual").parse().unwrap();
    assert!(ratio >= 0.90, "mean ratio {ratio}");
}

#[test]
fn bench_is_deterministic_across_worker_counts() {
    let run = |jobs: &str| {
        let o = subdual(&[
            "bench", "--n", "60", "--degree", "4", "--k", "3,6", "--trials", "2", "--jobs", jobs,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        csv_rows(&stdout(&o))
            .into_iter()
            .map(|r| r.into_iter().filter(|(k, _)| k != "ms").collect::<Vec<_>>())
            .collect::<Vec<_>>()
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    // 4 models × 2 seeds × 2 budgets × 8 rows, then 4 × 8 summaries
    assert_eq!(one.len(), 4 * 2 * 2 * 8 + 4 * 8);
}

#[test]
fn bench_input_and_output_errors() {
    let o = subdual(&["bench", "--n", "40", "--k", "5..3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty budget range"));

    let o = subdual(&["bench", "--n", "40", "--k", "3", "--out", "/no/such/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/no/such/dir/out.csv"));
}
