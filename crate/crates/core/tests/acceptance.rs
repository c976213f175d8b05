//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 1-8 run the verification suites on the default window; 9 runs
//! the binary twice and compares every output byte for byte. The process
//! fails if any criterion fails, except criterion 4 failing in exactly the
//! known way: `b^2 = a^2 v1^4` is false in Ext over A(1) while every other
//! listed relation and the corrected `b^2` hold.

use std::path::Path;
use std::process::Command as Process;
use std::time::{Duration, Instant};

use motivic_ext::chartcli::{run, Check, Command, RunConfig, Suite};

struct Outcome {
    pass: bool,
    summary: String,
}

fn suite(s: Suite) -> (Vec<Check>, Duration, String) {
    let cfg = RunConfig { suite: s, ..RunConfig::default() };
    let t = Instant::now();
    let out = run(Command::Verify, &cfg).unwrap_or_else(|e| panic!("{}: {e}", s.name()));
    let elapsed = t.elapsed();
    let report: serde_json::Value = serde_json::from_str(&out.text).expect("verify writes JSON");
    let checks = serde_json::from_value::<Vec<serde_json::Value>>(report["checks"].clone())
        .expect("checks")
        .into_iter()
        .map(|c| Check {
            suite: c["suite"].as_str().unwrap().to_string(),
            name: c["name"].as_str().unwrap().to_string(),
            pass: c["pass"].as_bool().unwrap(),
            detail: c["detail"].as_array().unwrap().iter().map(|d| d.as_str().unwrap().to_string()).collect(),
        })
        .collect();
    (checks, elapsed, out.text)
}

fn from_checks(checks: &[Check], elapsed: Duration, budget: Option<Duration>) -> Outcome {
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let mut summary = format!("{} checks in {:.1} s", checks.len(), elapsed.as_secs_f64());
    if let Some(b) = budget {
        summary += &format!(" (budget {} s)", b.as_secs());
    }
    if !failed.is_empty() {
        summary += &format!("; failed: {}", failed.join("; "));
    }
    Outcome { pass: failed.is_empty() && in_time && !checks.is_empty(), summary }
}

fn binary_outputs(dir: &Path, tag: &str) -> Vec<(String, Vec<u8>)> {
    let bin = env!("CARGO_BIN_EXE_motivic-ext");
    let runs: &[(&str, &[&str])] = &[
        ("ext-e1.json", &["ext", "--algebra", "E1"]),
        ("ext-a1.json", &["ext", "--algebra", "A1"]),
        ("ext-a1c.json", &["ext", "--algebra", "A1", "--complex-point"]),
        ("bockstein-e2.json", &["bockstein", "--algebra", "E2"]),
        ("bockstein-a1.json", &["bockstein", "--algebra", "A1"]),
        ("chart-e1.svg", &["chart", "--algebra", "E1", "--format", "svg"]),
        ("chart-a1.svg", &["chart", "--algebra", "A1", "--format", "svg", "--hide-rho-torsion"]),
        ("chart-a1.json", &["chart", "--algebra", "A1"]),
        ("verify-massey.json", &["verify", "--suite", "massey"]),
    ];
    let mut out = Vec::new();
    for (name, args) in runs {
        let path = dir.join(format!("{tag}-{name}"));
        let status = Process::new(bin).args(*args).arg("--out").arg(&path).status().expect("binary runs");
        assert!(status.success(), "{name}: {status}");
        out.push((name.to_string(), std::fs::read(&path).expect("output written")));
    }
    out
}

fn main() {
    let mut lines: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut verify_texts = Vec::new();

    let budgets = [
        (1, "E(1) theorem", Suite::E1Theorem, Some(60)),
        (2, "E(n) differential pattern", Suite::EnDifferentials, Some(120)),
        (3, "A(1) page by page", Suite::A1Pages, None),
        (4, "relations in Ext over A(1)", Suite::A1Relations, None),
        (5, "Massey products", Suite::Massey, None),
        (6, "change of rings", Suite::ChangeOfRings, None),
        (7, "structural gates", Suite::Structural, None),
        (8, "collapse", Suite::Collapse, None),
    ];
    let mut relations = Vec::new();
    for (n, title, s, budget) in budgets {
        let (checks, elapsed, text) = suite(s);
        lines.push((n, title, from_checks(&checks, elapsed, budget.map(Duration::from_secs))));
        verify_texts.push((s, text));
        if s == Suite::A1Relations {
            relations = checks;
        }
    }

    // Criterion 4 also runs the five hidden extensions on their own suite.
    let (hidden, elapsed, _) = suite(Suite::A1HiddenExtensions);
    let hidden = from_checks(&hidden, elapsed, None);
    lines[3].2.summary += &format!("; hidden extensions: {}", if hidden.pass { "all hold" } else { &hidden.summary });

    // Criterion 9: every command twice through the binary, and the suites
    // above once more in process.
    let dir = std::env::temp_dir().join(format!("motivic-ext-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let (a, b) = (binary_outputs(&dir, "first"), binary_outputs(&dir, "second"));
    let mut differ: Vec<String> = a.iter().zip(&b).filter(|(x, y)| x.1 != y.1).map(|(x, _)| x.0.clone()).collect();
    for (s, text) in &verify_texts {
        let again = run(Command::Verify, &RunConfig { suite: *s, ..RunConfig::default() }).expect("second run");
        if &again.text != text {
            differ.push(format!("verify {}", s.name()));
        }
    }
    std::fs::remove_dir_all(&dir).ok();
    let n = a.len() + verify_texts.len();
    let summary = if differ.is_empty() {
        format!("{n} outputs identical across two runs")
    } else {
        format!("outputs differ: {}", differ.join(", "))
    };
    lines.push((9, "determinism", Outcome { pass: differ.is_empty(), summary }));

    println!();
    println!("acceptance criteria");
    for (n, title, o) in &lines {
        println!("criterion {n} ({title}): {} - {}", if o.pass { "PASS" } else { "FAIL" }, o.summary);
    }

    // The one expected failure: only the stated b^2 relation, with the
    // corrected form holding.
    let known = |c: &Check| c.name == "b^2 = a^2*v1^4";
    let corrected = relations.iter().any(|c| c.name == "b^2 = a^2*v1^4 + rho^2*tau^4*eta^2*v1^4" && c.pass);
    let others_hold = relations.iter().filter(|c| !known(c)).all(|c| c.pass);
    let c4_as_known = !lines[3].2.pass && corrected && others_hold && hidden.pass;
    let unexpected: Vec<u32> = lines.iter().filter(|(n, _, o)| !o.pass && !(*n == 4 && c4_as_known)).map(|l| l.0).collect();
    let passed = lines.iter().filter(|l| l.2.pass).count();
    println!("{passed} of {} criteria pass", lines.len());
    if c4_as_known {
        println!("criterion 4 fails only on b^2 = a^2*v1^4, which is false in Ext over A(1); the corrected relation holds");
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
