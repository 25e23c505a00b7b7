//! End-to-end tests of the command-line binary: JSON output, exit codes,
//! byte stability, and SVG well-formedness.

use std::process::{Command, Output};

fn phaseport(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phaseport"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

#[test]
fn analyze_attractor_report() {
    let out = phaseport(&["analyze", "--field", "F", "--grid", "80"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(report["spectral"]["field_class"], "HurwitzAe");
    assert_eq!(report["singularities"]["trichotomy_class"], "OnePoint");
    assert_eq!(
        report["verdicts"]["theorem_a"]["conclusion"],
        "GloballyAsymptoticallyStable"
    );
    assert!(report.get("wall_time_ms").is_none());
}

#[test]
fn analyze_center_report() {
    let out = phaseport(&["analyze", "--field", "X2", "--grid", "80"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(
        report["verdicts"]["theorem_c"]["conclusion"],
        "GlobalCenter"
    );
    assert_eq!(
        report["verdicts"]["corollaries"]["conclusion"],
        "GlobalCenter"
    );
}

#[test]
fn analyze_inline_expanding_field() {
    let out = phaseport(&["analyze", "--fx", "x", "--fy", "y", "--grid", "60"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(
        report["verdicts"]["theorem_a"]["conclusion"],
        "Inconclusive"
    );
    assert_eq!(report["spectral"]["field_class"], "Mixed");
    assert_eq!(report["spectral"]["counts"]["expanding"], 60 * 60);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = [
        "analyze",
        "--field",
        "Z2",
        "--region",
        "-1.5,1.5,-1.5,1.5",
        "--grid",
        "70",
        "--seed",
        "7",
    ];
    let a = phaseport(&args);
    let b = phaseport(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn parse_error_exits_2() {
    let out = phaseport(&["analyze", "--fx", "x +", "--fy", "y"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("syntax error"), "{}", err);

    let out = phaseport(&["analyze", "--field", "no_such_field"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn domain_only_analysis_exits_3() {
    // undefined everywhere: every survey sample is a domain error
    let out = phaseport(&["analyze", "--fx", "1/(x-x)", "--fy", "y", "--grid", "40"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn index_subcommand() {
    let out = phaseport(&[
        "index", "--field", "F", "--center", "0,0", "--radius", "0.5",
    ]);
    assert!(out.status.success());
    let result: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(result["index"], 1);

    // circle through a singularity is a computation error
    let out = phaseport(&[
        "index", "--field", "radial", "--center", "0.5,0", "--radius", "0.5",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("vanishes"));
}

#[test]
fn index_domain_error_exits_3() {
    // the atan field is undefined on x = 0; the theta = 0 sample of this
    // circle lands exactly on that line
    let out = phaseport(&[
        "index", "--field", "H", "--center", "-0.5,2", "--radius", "0.5",
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn green_subcommand_closed_form() {
    let out = phaseport(&[
        "green",
        "--field",
        "radial",
        "--p1",
        "0,1",
        "--flow-time",
        "0.6931471805599453",
        "--transversal-time",
        "1.5707963267948966",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let result: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let residual = result["green"]["residual"].as_f64().unwrap();
    assert!(residual <= 1e-6, "residual {}", residual);
    let lhs =
        result["green"]["l_out"].as_f64().unwrap() - result["green"]["l_in"].as_f64().unwrap();
    assert!((lhs + 3.0 * std::f64::consts::PI / 8.0).abs() <= 1e-6);
}

#[test]
fn green_degenerate_rectangle_exits_4() {
    let out = phaseport(&[
        "green",
        "--field",
        "radial",
        "--p1",
        "0,1",
        "--flow-time",
        "0",
        "--transversal-time",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn portrait_svg_well_formed() {
    let out = phaseport(&["portrait", "--field", "X2", "--seeds", "5", "--t-span", "6"]);
    assert!(out.status.success());
    let svg = stdout_str(&out);
    assert_xml_well_formed(&svg);
    assert!(svg.contains("viewBox=\"0 0 "));
    assert!(svg.contains("<circle"));
}

#[test]
fn corpus_runs_clean() {
    let out = phaseport(&["corpus", "--oracle-points", "200"]);
    assert!(out.status.success(), "{}", stdout_str(&out));
    let text = stdout_str(&out);
    for entry in phaseport::corpus::CORPUS {
        assert!(text.contains(entry.name), "missing row for {}", entry.name);
    }
    assert!(!text.contains("FAIL"));
}

#[test]
fn corpus_filter() {
    let out = phaseport(&["corpus", "--filter", "F", "--oracle-points", "100"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert!(text.contains('F'));
    assert!(!text.contains("radial"));

    let out = phaseport(&["corpus", "--filter", "zzz"]);
    assert_eq!(out.status.code(), Some(1));
}

/// Minimal XML well-formedness check: single root element, properly
/// nested tags, quoted attributes consumed by the tag scanner.
fn assert_xml_well_formed(text: &str) {
    let mut stack: Vec<String> = Vec::new();
    let mut roots = 0usize;
    let bytes = text.as_bytes();
    let mut i = 0usize;
    while i < bytes.len() {
        if bytes[i] != b'<' {
            i += 1;
            continue;
        }
        let close = text[i..].find('>').map(|k| i + k).expect("unclosed tag");
        let inner = &text[i + 1..close];
        if let Some(name) = inner.strip_prefix('/') {
            let open = stack
                .pop()
                .unwrap_or_else(|| panic!("stray closer {}", name));
            assert_eq!(open, name.trim(), "mismatched tags");
            if stack.is_empty() {
                roots += 1;
            }
        } else if inner.starts_with('?') || inner.starts_with('!') {
            // declaration or comment
        } else {
            let name: String = inner
                .split_whitespace()
                .next()
                .unwrap_or("")
                .trim_end_matches('/')
                .to_string();
            assert!(!name.is_empty(), "empty tag name");
            if !inner.ends_with('/') {
                stack.push(name);
            } else if stack.is_empty() {
                roots += 1;
            }
        }
        i = close + 1;
    }
    assert!(stack.is_empty(), "unclosed tags: {:?}", stack);
    assert_eq!(roots, 1, "expected exactly one root element");
}
