use std::path::PathBuf;
use std::process::{Command, Output};

use gibbs_core::prior::m_prior_pmf;
use gibbs_core::{GibbsModel, PrecisionPolicy};
use serde_json::Value;

fn gibbs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gibbs")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gibbs-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

/// Rows of a TSV table keyed by header.
fn tsv(o: &Output) -> Vec<std::collections::HashMap<String, String>> {
    let text = stdout(o);
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split('\t').map(String::from).collect();
    lines
        .map(|l| header.iter().cloned().zip(l.split('\t').map(String::from)).collect())
        .collect()
}

#[test]
fn fit_tomato() {
    let o = gibbs(&["--json", "fit", "tomato"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let r = &v["result"];
    assert!((0.60..=0.62).contains(&r["sigma"].as_f64().unwrap()));
    assert!((700.0..=800.0).contains(&r["theta"].as_f64().unwrap()));
    assert_eq!(r["n"], 2586);
    assert_eq!(r["j"], 1825);
    assert!(v["version"].is_string());
    assert!(String::from_utf8_lossy(&o.stderr).contains("n = 2586, j = 1825"));
}

#[test]
fn fit_dirichlet_fixes_sigma() {
    let o = gibbs(&["--json", "fit", "tomato", "--model", "dp"]);
    assert_eq!(o.status.code(), Some(0));
    let r = &json(&o)["result"];
    assert_eq!(r["sigma"].as_f64(), Some(0.0));
    assert!(r["theta"].as_f64().unwrap() > 0.0);
}

#[test]
fn malformed_input_reports_line() {
    let p = temp_file("bad.tsv", "# counts\n1\t3\n2\tx\n");
    let o = gibbs(&["fit", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let o = gibbs(&["fit", "/nonexistent/file.tsv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn degenerate_data_exits_2() {
    let p = temp_file("singletons.tsv", "1\t7\n");
    assert_eq!(gibbs(&["fit", p.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn estimate_reproduces_published_cells() {
    let o = gibbs(&["estimate", "tomato", "--model", "pd", "--sigma", "0.612", "--theta", "741", "-m", "750,1000", "--tau", "3,5"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = tsv(&o);
    let cell = |m: &str, tau: &str, col: &str| -> i64 {
        rows.iter().find(|r| r["m"] == m && r["tau"] == tau).unwrap()[col].parse().unwrap()
    };
    for (m, tau, want) in [("750", "5", [1787, 403, 2189]), ("1000", "3", [1700, 529, 2229])] {
        for (col, w) in ["O_rounded", "N_rounded", "M_rounded"].iter().zip(want) {
            assert!((cell(m, tau, col) - w).abs() <= 1, "m={} tau={} {}", m, tau, col);
        }
    }
    for r in &rows {
        let (o, n, mm): (f64, f64, f64) = (r["O"].parse().unwrap(), r["N"].parse().unwrap(), r["M"].parse().unwrap());
        assert!((o + n - mm).abs() <= 1e-9 * mm);
    }
}

#[test]
fn estimate_with_no_new_draws_counts_observed() {
    let o = gibbs(&["estimate", "tomato", "--sigma", "0.612", "--theta", "741", "-m", "0", "--tau", "1,2,3"]);
    let rows = tsv(&o);
    let m: Vec<&str> = rows.iter().map(|r| r["M_rounded"].as_str()).collect();
    assert_eq!(m, ["1434", "1687", "1758"]);
}

#[test]
fn per_l_rows_sum_to_tau_rows() {
    let base = ["--json", "estimate", "tomato", "--sigma", "0.5", "--theta", "100", "-m", "300", "--tau", "4"];
    let total = json(&gibbs(&base))["rows"][0]["M"].as_f64().unwrap();
    let mut per = base.to_vec();
    per.push("--per-l");
    let v = json(&gibbs(&per));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let sum: f64 = rows.iter().map(|r| r["M"].as_f64().unwrap()).sum();
    assert!((sum - total).abs() < 1e-9 * total);
}

#[test]
fn estimate_rejects_invalid_parameters() {
    let o = gibbs(&["estimate", "tomato", "--sigma", "1.5", "--theta", "1", "-m", "10"]);
    assert_eq!(o.status.code(), Some(1));
    let o = gibbs(&["estimate", "tomato", "--model", "gnedin", "-m", "10"]);
    assert_eq!(o.status.code(), Some(1));
    let o = gibbs(&["--precision-bits", "8", "estimate", "tomato", "--sigma", "0.5", "--theta", "1", "-m", "10"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exact_and_float_estimates_agree() {
    let p = temp_file("small.tsv", "1\t3\n2\t1\n4\t1\n");
    let path = p.to_str().unwrap();
    let args = ["estimate", path, "--model", "gnedin", "--gamma", "0.5", "-m", "6", "--tau", "2"];
    let exact = tsv(&gibbs(&[&["--exact"][..], &args[..]].concat()));
    let float = tsv(&gibbs(&args));
    for col in ["O", "N", "M"] {
        let a: f64 = exact[0][col].parse().unwrap();
        let b: f64 = float[0][col].parse().unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}

#[test]
fn raw_labels_match_counts() {
    let raw = temp_file("labels.txt", "a\nb\na\nc\nd\nd\nd\ne\n# comment\n");
    let counts = temp_file("counts.tsv", "1\t3\n2\t1\n3\t1\n");
    let run = |extra: &[&str]| {
        let mut a = vec!["estimate", "--sigma", "0.4", "--theta", "2", "-m", "5"];
        a.extend_from_slice(extra);
        stdout(&gibbs(&a))
    };
    assert_eq!(run(&[raw.to_str().unwrap(), "--raw"]), run(&[counts.to_str().unwrap()]));
}

#[test]
fn simulate_single_block() {
    let args = [
        "simulate", "--prior", "--model", "pd", "--sigma", "0.5", "--theta", "1", "-n", "3", "-R", "100000", "--stat", "single-block",
        "--seed", "7",
    ];
    let a = gibbs(&args);
    assert_eq!(a.status.code(), Some(0));
    let v = json(&a);
    let (mean, se) = (v["result"]["mean"].as_f64().unwrap(), v["result"]["se"].as_f64().unwrap());
    assert!((mean - 0.125).abs() <= 3.0 * se, "{} ± {}", mean, se);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["model"]["params"]["sigma"], 0.5);
    assert_eq!(a.stdout, gibbs(&args).stdout);
}

#[test]
fn simulate_m_l_matches_prior_pmf() {
    let o = gibbs(&[
        "simulate", "--prior", "--model", "pd", "--sigma", "0.5", "--theta", "1", "-n", "50", "-R", "20000", "--stat", "M_l", "-l", "1",
    ]);
    let v = json(&o);
    let emp: Vec<f64> = v["result"]["pmf"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let model = GibbsModel::pitman_yor(0.5, 1.0).unwrap();
    let exact = m_prior_pmf(&model, 50, 1, &PrecisionPolicy::default()).unwrap().to_f64();
    let r = 20000.0;
    for (x, p) in exact.iter().enumerate() {
        let se = (p * (1.0 - p) / r).sqrt().max(1.0 / r);
        let e = emp.get(x).copied().unwrap_or(0.0);
        assert!((e - p).abs() <= 3.0 * se, "x={} emp={} exact={}", x, e, p);
    }
}

#[test]
fn simulate_continuation_needs_m() {
    assert_eq!(gibbs(&["simulate", "tomato", "--sigma", "0.5", "--theta", "1"]).status.code(), Some(1));
    let o = gibbs(&["simulate", "tomato", "--sigma", "0.612", "--theta", "741", "-m", "100", "-R", "200", "--stat", "N_l"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["result"]["n_observed"], 2586);
}

#[test]
fn validate_suites_pass() {
    for suite in ["recursion", "table2", "normalization"] {
        let o = gibbs(&["validate", "--suite", suite]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        assert!(!stdout(&o).contains("FAIL"));
    }
}

#[test]
fn crossval_is_reproducible() {
    let args = ["crossval", "tomato", "--folds", "2", "--seed", "3", "--tau", "3"];
    let a = gibbs(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, gibbs(&args).stdout);
    let rows = tsv(&a);
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["true_M"] == "1758"));
    assert_eq!(gibbs(&["crossval", "tomato", "--subsample-size", "5000"]).status.code(), Some(1));
}
