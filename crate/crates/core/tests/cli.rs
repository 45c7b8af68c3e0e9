//! End-to-end tests of the command-line interface: output formats, exit
//! codes, and agreement between the human and JSON renderings.

use std::path::PathBuf;

use nmp::cli::run_cli;

fn testdata(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("testdata")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["nmp".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let code = run_cli(&argv, &mut stdout, &mut stderr);
    (
        code,
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

fn write_temp(name: &str, contents: &str) -> String {
    let path = std::env::temp_dir().join(format!("nmp-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path.display().to_string()
}

/// Pull `key=value` or `key(...) = value` numbers out of the human output.
fn extract_number(text: &str, prefix: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.trim_start().starts_with(prefix))
        .unwrap_or_else(|| panic!("no line starting with `{prefix}` in:\n{text}"));
    let value = line.split('=').next_back().unwrap().trim();
    value
        .parse()
        .unwrap_or_else(|_| panic!("unparsable number in line `{line}`"))
}

#[test]
fn check_accepts_a_valid_kb() {
    let (code, out, err) = run(&["check", &testdata("zadeh_binary.nmp")]);
    assert_eq!(code, 0, "stderr: {err}");
    assert_eq!(out.trim(), "ok: 1 statements, 2 sources, 1 queries");
}

#[test]
fn check_rejects_bad_input_with_exit_1() {
    let bad = write_temp("bad.nmp", "statement b\nevidence e for b yes=0.7 no=0.4\n");
    let (code, _, err) = run(&["check", &bad]);
    assert_eq!(code, 1);
    assert!(err.contains("line 2"), "stderr: {err}");

    let (code, _, err) = run(&["check", "/no/such/file.nmp"]);
    assert_eq!(code, 1);
    assert!(err.contains("cannot read"), "stderr: {err}");

    let cyclic = write_temp(
        "cycle.nmp",
        "statement a\nstatement b\nrule r1 if a then b yes=1 no=0\nrule r2 if b then a yes=1 no=0\n",
    );
    let (code, _, err) = run(&["check", &cyclic]);
    assert_eq!(code, 1);
    assert!(err.contains("cycle"), "stderr: {err}");
}

#[test]
fn infer_prints_the_belief_table_and_conflict() {
    let (code, out, err) = run(&["infer", &testdata("zadeh_binary.nmp")]);
    assert_eq!(code, 0, "stderr: {err}");
    assert!(out.contains("statement"), "missing header in: {out}");
    assert!(out.contains("building"));
    let conflict = extract_number(&out, "conflict(building)");
    assert!((conflict - 0.7960).abs() < 5e-4);
}

#[test]
fn infer_json_agrees_with_the_human_table() {
    let path = testdata("zadeh_binary.nmp");
    let (code, human, _) = run(&["infer", &path]);
    assert_eq!(code, 0);
    let (code, json, _) = run(&["infer", &path, "--json"]);
    assert_eq!(code, 0);

    let records: Vec<serde_json::Value> = json
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 2);
    let stmt = &records[0];
    assert_eq!(stmt["record"], "statement");
    assert_eq!(stmt["id"], "building");
    for key in ["bel", "pl", "theta"] {
        let rounded = format!("{:.4}", stmt[key].as_f64().unwrap());
        assert!(
            human.contains(&rounded),
            "human output lacks {key} = {rounded}: {human}"
        );
    }
    let conflict = &records[1];
    assert_eq!(conflict["record"], "conflict");
    let rounded = format!("{:.4}", conflict["mu_conflict"].as_f64().unwrap());
    assert!(human.contains(&rounded));
}

#[test]
fn infer_total_conflict_exits_2() {
    let contradictory = write_temp(
        "contradiction.nmp",
        "statement b\nevidence e1 for b yes=1 no=0\nevidence e2 for b yes=0 no=1\n",
    );
    let (code, _, err) = run(&["infer", &contradictory]);
    assert_eq!(code, 2);
    assert!(err.contains("total conflict"), "stderr: {err}");
}

#[test]
fn combine_raw_reports_gives_exclusive_support() {
    let (code, out, err) = run(&[
        "combine",
        &testdata("zadeh_a_raw.mass"),
        &testdata("zadeh_b_raw.mass"),
    ]);
    assert_eq!(code, 0, "stderr: {err}");
    assert!(out.contains("m({H2}) = 1.0000"), "output: {out}");
}

#[test]
fn combine_discounted_reports_matches_the_bimodal_masses() {
    let (code, out, err) = run(&[
        "combine",
        &testdata("zadeh_a.mass"),
        &testdata("zadeh_b.mass"),
    ]);
    assert_eq!(code, 0, "stderr: {err}");
    for (subset, expected) in [
        ("{H1}", 0.656),
        ("{H2}", 0.013),
        ("{H3}", 0.325),
        ("{H1,H2,H3}", 0.007),
    ] {
        let value = extract_number(&out, &format!("m({subset})"));
        assert!(
            (value - expected).abs() <= 1e-3,
            "m({subset}) printed {value}, expected {expected} +- .001"
        );
    }
    // Belief table and binary-partition conflicts for the 3-label frame.
    assert!(out.contains("bel({H2,H3})"));
    let c = extract_number(&out, "conflict({H1} | {H2,H3})");
    assert!((c - 0.6753).abs() < 5e-4);

    let (code, json, _) = run(&[
        "combine",
        &testdata("zadeh_a.mass"),
        &testdata("zadeh_b.mass"),
        "--json",
    ]);
    assert_eq!(code, 0);
    let records: Vec<serde_json::Value> = json
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records[0]["record"], "frame");
    let masses: Vec<&serde_json::Value> =
        records.iter().filter(|r| r["record"] == "mass").collect();
    assert_eq!(masses.len(), 4);
    let partitions: Vec<&serde_json::Value> = records
        .iter()
        .filter(|r| r["record"] == "conflict")
        .collect();
    assert_eq!(partitions.len(), 3);
    // The JSON numbers agree with the printed table to printed precision.
    for rec in masses.iter().chain(&partitions) {
        let key = if rec["record"] == "mass" {
            "value"
        } else {
            "mu_conflict"
        };
        let rounded = format!("{:.4}", rec[key].as_f64().unwrap());
        assert!(out.contains(&rounded), "human output lacks {rounded}");
    }
}

#[test]
fn combine_error_paths() {
    let other_frame = write_temp("other.mass", "frame A B\nmass {A}=1\n");
    let (code, _, err) = run(&["combine", &testdata("zadeh_a.mass"), &other_frame]);
    assert_eq!(code, 1);
    assert!(err.contains("frames differ"), "stderr: {err}");

    let m1 = write_temp("cat1.mass", "frame A B\nmass {A}=1\n");
    let m2 = write_temp("cat2.mass", "frame A B\nmass {B}=1\n");
    let (code, _, err) = run(&["combine", &m1, &m2]);
    assert_eq!(code, 2);
    assert!(err.contains("total conflict"), "stderr: {err}");

    let (code, _, _) = run(&["combine"]);
    assert_eq!(code, 1);
}

#[test]
fn resolve_traces_and_lowers_the_conflict() {
    let (code, out, err) = run(&["resolve", &testdata("zadeh_binary.nmp"), "--trace"]);
    assert_eq!(code, 0, "stderr: {err}");
    let trace_lines: Vec<&str> = out.lines().filter(|l| l.starts_with("iter=")).collect();
    assert!(!trace_lines.is_empty());
    assert!(trace_lines[0].contains("culprit=photo"));
    assert!(trace_lines[0].contains("gate=pass"));

    let first_conflict = extract_number(
        out.lines()
            .find(|l| l.starts_with("iter="))
            .unwrap()
            .split_whitespace()
            .find(|tok| tok.starts_with("conflict="))
            .unwrap(),
        "conflict",
    );
    let final_conflict = extract_number(&out, "conflict(building)");
    assert!(
        final_conflict < first_conflict,
        "final {final_conflict} not below initial {first_conflict}"
    );
    assert!(out.contains("stopped=max-iterations"));
}

#[test]
fn resolve_flags_override_kb_params() {
    let (code, out, _) = run(&[
        "resolve",
        &testdata("zadeh_binary.nmp"),
        "--max-iter",
        "2",
        "--delta",
        "0.5",
        "--trace",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("iterations=2 revisions=2"));
    // Delta .5 lifts the first discount from .01 to .505.
    assert!(out.contains("theta=0.0100->0.5050"), "output: {out}");

    let (code, _, err) = run(&["resolve", &testdata("zadeh_binary.nmp"), "--gamma", "0"]);
    assert_eq!(code, 1);
    assert!(err.contains("gamma"), "stderr: {err}");
}

#[test]
fn resolve_json_matches_the_human_trace() {
    let path = testdata("zadeh_binary.nmp");
    let (code, human, _) = run(&["resolve", &path, "--max-iter", "3", "--trace"]);
    assert_eq!(code, 0);
    let (code, json, _) = run(&["resolve", &path, "--max-iter", "3", "--trace", "--json"]);
    assert_eq!(code, 0);

    let records: Vec<serde_json::Value> = json
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let trace: Vec<&serde_json::Value> =
        records.iter().filter(|r| r["record"] == "trace").collect();
    assert_eq!(trace.len(), 3);
    for rec in &trace {
        let line = human
            .lines()
            .find(|l| l.starts_with(&format!("iter={}", rec["iteration"])))
            .unwrap();
        for (key, field) in [
            ("conflict=", "mu_conflict"),
            ("signif=", "mu_signif"),
            ("supposition=", "mu_supposition"),
        ] {
            let rounded = format!("{}{:.4}", key, rec[field].as_f64().unwrap());
            assert!(line.contains(&rounded), "line `{line}` lacks `{rounded}`");
        }
    }
    let result = records.iter().find(|r| r["record"] == "result").unwrap();
    assert_eq!(result["iterations"], 3);
    assert_eq!(result["revisions"], 3);
    assert_eq!(result["stopped"], "max-iterations");
}

#[test]
fn resolve_total_conflict_exits_2() {
    let contradictory = write_temp(
        "contradiction-resolve.nmp",
        "statement b\nevidence e1 for b yes=1 no=0\nevidence e2 for b yes=0 no=1\n",
    );
    let (code, _, err) = run(&["resolve", &contradictory, "--trace"]);
    assert_eq!(code, 2);
    assert!(err.contains("total conflict"), "stderr: {err}");
}

#[test]
fn resolve_reports_no_conflict_without_revising() {
    let calm = write_temp(
        "calm.nmp",
        "statement a\nevidence e for a yes=1 no=0\nquery a\n",
    );
    let (code, out, _) = run(&["resolve", &calm, "--trace"]);
    assert_eq!(code, 0);
    assert!(out.contains("stopped=no-conflict"));
    assert!(out.contains("revisions=0"));
}

#[test]
fn imagery_kb_checks_and_resolves() {
    let path = testdata("imagery.nmp");
    let (code, out, _) = run(&["check", &path]);
    assert_eq!(code, 0);
    assert!(out.contains("3 statements"));

    let (code, out, err) = run(&["resolve", &path, "--trace"]);
    assert_eq!(code, 0, "stderr: {err}");
    assert!(out.lines().any(|l| l.starts_with("iter=")));
}

#[test]
fn help_and_usage_errors() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("check"));
    assert!(out.contains("combine"));

    let (code, _, err) = run(&["frobnicate"]);
    assert_eq!(code, 1);
    assert!(!err.is_empty());
}
