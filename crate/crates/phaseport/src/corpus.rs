//! Built-in example fields with closed-form trace/determinant oracles.
//!
//! Each entry records the component sources, independent expressions for
//! trace(DX) and det(DX), a natural analysis region, and the expected
//! analysis outcome. The oracles make the exact-derivative machinery
//! falsifiable: automatic differentiation must reproduce them pointwise.

use serde::Serialize;

use crate::expr::{parse_field, FieldExpr};
use crate::geom::{Point, Rect};
use crate::rng::SplitMix64;
use crate::singular::TrichotomyClass;
use crate::spectral::FieldClass;
use crate::verdict::{
    check_theorem_a_with, check_theorem_b_with, check_theorem_c_with, gather_evidence,
    AnalyzeParams, Conclusion,
};

/// Expected portrait-level outcome for a corpus entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExpectedVerdict {
    GloballyAsymptoticallyStable,
    GlobalCenter,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub fx: &'static str,
    pub fy: &'static str,
    /// Closed-form trace of the Jacobian.
    pub oracle_trace: &'static str,
    /// Closed-form determinant of the Jacobian.
    pub oracle_det: &'static str,
    pub region: Rect,
    pub expected_field_class: FieldClass,
    pub expected_trichotomy: TrichotomyClass,
    /// Isolated singularities the search must find (empty when the
    /// singular set is empty or a curve).
    pub expected_singularities: &'static [(f64, f64)],
    pub expected_verdict: ExpectedVerdict,
}

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub const CORPUS: &[CorpusEntry] = &[
    CorpusEntry {
        name: "F",
        fx: "-(x+1)^3+1",
        fy: "-(x+1)^2*(y+1)+1",
        oracle_trace: "-4*(x+1)^2",
        oracle_det: "3*(x+1)^4",
        region: Rect {
            xmin: -3.0,
            xmax: 3.0,
            ymin: -3.0,
            ymax: 3.0,
        },
        expected_field_class: FieldClass::HurwitzAe,
        expected_trichotomy: TrichotomyClass::OnePoint,
        expected_singularities: &[(0.0, 0.0)],
        expected_verdict: ExpectedVerdict::GloballyAsymptoticallyStable,
    },
    CorpusEntry {
        name: "G",
        fx: "(-x^3)/(1+x^2)",
        fy: "(-y*x^2)/(1+x^2)",
        oracle_trace: "(-2*x^2*(2+x^2))/(1+x^2)^2",
        oracle_det: "(x^4*(3+x^2))/(1+x^2)^3",
        region: Rect {
            xmin: -3.0,
            xmax: 3.0,
            ymin: -3.0,
            ymax: 3.0,
        },
        expected_field_class: FieldClass::HurwitzAe,
        expected_trichotomy: TrichotomyClass::NonDiscreteSuspected,
        expected_singularities: &[],
        expected_verdict: ExpectedVerdict::Inconclusive,
    },
    CorpusEntry {
        name: "H",
        fx: "(-1+(2/pi)*atan(y/x))*x",
        fy: "(-1+(2/pi)*atan(y/x))*y",
        oracle_trace: "-2+(4/pi)*atan(y/x)",
        oracle_det: "(pi-2*atan(y/x))^2/pi^2",
        region: Rect {
            xmin: -3.0,
            xmax: 3.0,
            ymin: -3.0,
            ymax: 3.0,
        },
        expected_field_class: FieldClass::HurwitzAe,
        // the field norm decays to zero toward the positive y axis (the
        // singular ray of the continuous extension); the search flags the
        // resulting chain of numerical zeros
        expected_trichotomy: TrichotomyClass::NonDiscreteSuspected,
        expected_singularities: &[],
        expected_verdict: ExpectedVerdict::Inconclusive,
    },
    CorpusEntry {
        name: "X2",
        fx: "-(y-1)^3-1",
        fy: "(x-1)^3+1",
        oracle_trace: "0",
        oracle_det: "9*(x-1)^2*(y-1)^2",
        region: Rect {
            xmin: -3.0,
            xmax: 3.0,
            ymin: -3.0,
            ymax: 3.0,
        },
        expected_field_class: FieldClass::PurelyImaginaryAe,
        expected_trichotomy: TrichotomyClass::OnePoint,
        expected_singularities: &[(0.0, 0.0)],
        expected_verdict: ExpectedVerdict::GlobalCenter,
    },
    CorpusEntry {
        name: "Y2",
        fx: "-2*exp(-(x^2+y^2))*x*y",
        fy: "(2*x^2-1)*exp(-(x^2+y^2))",
        oracle_trace: "0",
        oracle_det: "-4*(2*x^4+y^2+x^2*(-3+2*y^2))*exp(-2*(x^2+y^2))",
        region: Rect {
            xmin: -2.0,
            xmax: 2.0,
            ymin: -2.0,
            ymax: 2.0,
        },
        expected_field_class: FieldClass::Mixed,
        expected_trichotomy: TrichotomyClass::MultipleIsolated,
        expected_singularities: &[(-INV_SQRT2, 0.0), (INV_SQRT2, 0.0)],
        expected_verdict: ExpectedVerdict::Inconclusive,
    },
    CorpusEntry {
        name: "Z2",
        fx: "-2*y+4*y^3",
        fy: "-2*x+4*x^3",
        oracle_trace: "0",
        oracle_det: "-4*(-1+6*x^2)*(-1+6*y^2)",
        region: Rect {
            xmin: -1.5,
            xmax: 1.5,
            ymin: -1.5,
            ymax: 1.5,
        },
        expected_field_class: FieldClass::Mixed,
        expected_trichotomy: TrichotomyClass::MultipleIsolated,
        expected_singularities: &[
            (-INV_SQRT2, -INV_SQRT2),
            (-INV_SQRT2, 0.0),
            (-INV_SQRT2, INV_SQRT2),
            (0.0, -INV_SQRT2),
            (0.0, 0.0),
            (0.0, INV_SQRT2),
            (INV_SQRT2, -INV_SQRT2),
            (INV_SQRT2, 0.0),
            (INV_SQRT2, INV_SQRT2),
        ],
        expected_verdict: ExpectedVerdict::Inconclusive,
    },
    CorpusEntry {
        name: "Y_line",
        fx: "-x^3",
        fy: "-x^2*y",
        oracle_trace: "-4*x^2",
        oracle_det: "3*x^4",
        region: Rect {
            xmin: -2.0,
            xmax: 2.0,
            ymin: -2.0,
            ymax: 2.0,
        },
        expected_field_class: FieldClass::HurwitzAe,
        expected_trichotomy: TrichotomyClass::NonDiscreteSuspected,
        expected_singularities: &[],
        expected_verdict: ExpectedVerdict::Inconclusive,
    },
    CorpusEntry {
        name: "radial",
        fx: "-x",
        fy: "-y",
        oracle_trace: "-2",
        oracle_det: "1",
        region: Rect {
            xmin: -3.0,
            xmax: 3.0,
            ymin: -3.0,
            ymax: 3.0,
        },
        expected_field_class: FieldClass::HurwitzAe,
        expected_trichotomy: TrichotomyClass::OnePoint,
        expected_singularities: &[(0.0, 0.0)],
        expected_verdict: ExpectedVerdict::GloballyAsymptoticallyStable,
    },
    CorpusEntry {
        name: "gradient_3x2",
        fx: "3*x^2",
        fy: "-3*y^2",
        oracle_trace: "6*x-6*y",
        oracle_det: "-36*x*y",
        region: Rect {
            xmin: -1.5,
            xmax: 1.5,
            ymin: -1.5,
            ymax: 1.5,
        },
        expected_field_class: FieldClass::Mixed,
        expected_trichotomy: TrichotomyClass::OnePoint,
        expected_singularities: &[(0.0, 0.0)],
        expected_verdict: ExpectedVerdict::Inconclusive,
    },
];

pub fn find(name: &str) -> Option<&'static CorpusEntry> {
    CORPUS.iter().find(|e| e.name.eq_ignore_ascii_case(name))
}

pub fn parse_entry(entry: &CorpusEntry) -> FieldExpr {
    parse_field(entry.fx, entry.fy).expect("corpus sources parse")
}

/// Compares AD trace and determinant against the entry's closed forms at
/// `points` seeded random points of the region. Points where either side
/// hits a domain error are skipped (and counted).
pub fn check_oracles(entry: &CorpusEntry, points: usize, seed: u64) -> Result<OracleCheck, String> {
    let field = parse_field(entry.fx, entry.fy).map_err(|e| format!("{}: {}", entry.name, e))?;
    let trace_oracle = crate::expr::parse_field(entry.oracle_trace, "0")
        .map_err(|e| format!("{} trace oracle: {}", entry.name, e))?;
    let det_oracle = crate::expr::parse_field(entry.oracle_det, "0")
        .map_err(|e| format!("{} det oracle: {}", entry.name, e))?;

    let mut rng = SplitMix64::stream(seed, 0x0bac1e);
    let mut checked = 0usize;
    let mut skipped = 0usize;
    let mut worst_rel = 0.0f64;
    for _ in 0..points {
        let p = Point::new(
            rng.range(entry.region.xmin, entry.region.xmax),
            rng.range(entry.region.ymin, entry.region.ymax),
        );
        let jac = match field.jacobian(p) {
            Ok(j) => j,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let t_ref = match trace_oracle.component_x().eval(p) {
            Ok(v) => v,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let d_ref = match det_oracle.component_x().eval(p) {
            Ok(v) => v,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let t_rel = (jac.trace() - t_ref).abs() / (1.0 + t_ref.abs());
        let d_rel = (jac.det() - d_ref).abs() / (1.0 + d_ref.abs());
        worst_rel = worst_rel.max(t_rel).max(d_rel);
        if t_rel > 1e-9 {
            return Err(format!(
                "{}: trace mismatch at {}: ad {} vs oracle {}",
                entry.name,
                p,
                jac.trace(),
                t_ref
            ));
        }
        if d_rel > 1e-9 {
            return Err(format!(
                "{}: det mismatch at {}: ad {} vs oracle {}",
                entry.name,
                p,
                jac.det(),
                d_ref
            ));
        }
        checked += 1;
    }
    if checked == 0 {
        return Err(format!("{}: no valid oracle sample points", entry.name));
    }
    Ok(OracleCheck {
        checked,
        skipped,
        worst_rel,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OracleCheck {
    pub checked: usize,
    pub skipped: usize,
    pub worst_rel: f64,
}

/// Result of running one corpus entry end to end.
#[derive(Debug, Clone, Serialize)]
pub struct EntryResult {
    pub name: &'static str,
    pub passed: bool,
    pub failures: Vec<String>,
    pub oracle: Option<OracleCheck>,
}

/// Runs an entry: oracle comparison, survey class, trichotomy and
/// singularity locations, and the expected verdict.
pub fn run_entry(entry: &CorpusEntry, oracle_points: usize, seed: u64) -> EntryResult {
    let mut failures: Vec<String> = Vec::new();

    let oracle = match check_oracles(entry, oracle_points, seed) {
        Ok(check) => Some(check),
        Err(e) => {
            failures.push(format!("oracle: {}", e));
            None
        }
    };

    let field = parse_entry(entry);
    let params = AnalyzeParams {
        region: entry.region,
        grid_n: 100,
        seed,
        ..AnalyzeParams::default()
    };
    let evidence = gather_evidence(&field, &params);

    if evidence.survey.field_class != entry.expected_field_class {
        failures.push(format!(
            "field class: expected {:?}, got {:?}",
            entry.expected_field_class, evidence.survey.field_class
        ));
    }
    if evidence.singularities.trichotomy_class != entry.expected_trichotomy {
        failures.push(format!(
            "trichotomy: expected {:?}, got {:?}",
            entry.expected_trichotomy, evidence.singularities.trichotomy_class
        ));
    }
    if evidence.singularities.isolated.len() != entry.expected_singularities.len() {
        failures.push(format!(
            "singularities: expected {}, found {}",
            entry.expected_singularities.len(),
            evidence.singularities.isolated.len()
        ));
    } else {
        // degenerate zeros localize only to about sqrt(tol_root)
        for &(ex, ey) in entry.expected_singularities {
            let target = Point::new(ex, ey);
            if !evidence
                .singularities
                .isolated
                .iter()
                .any(|s| s.location.dist(target) <= 2e-5)
            {
                failures.push(format!("missing singularity near {}", target));
            }
        }
    }

    let verdict_a = check_theorem_a_with(&field, &params, &evidence);
    let verdict_b = check_theorem_b_with(&field, &params, &evidence);
    let verdict_c = check_theorem_c_with(&field, &params, &evidence);

    if let Some(v) = &verdict_b.violation {
        failures.push(format!("trichotomy violation: {}", v));
    }

    let got = if verdict_a.conclusion == Conclusion::GloballyAsymptoticallyStable {
        ExpectedVerdict::GloballyAsymptoticallyStable
    } else if verdict_c.conclusion == Conclusion::GlobalCenter {
        ExpectedVerdict::GlobalCenter
    } else {
        ExpectedVerdict::Inconclusive
    };
    if got != entry.expected_verdict {
        failures.push(format!(
            "verdict: expected {:?}, got {:?}",
            entry.expected_verdict, got
        ));
    }

    EntryResult {
        name: entry.name,
        passed: failures.is_empty(),
        failures,
        oracle,
    }
}

/// Runs the whole corpus (optionally filtered by substring).
pub fn run_corpus(filter: Option<&str>, oracle_points: usize, seed: u64) -> Vec<EntryResult> {
    CORPUS
        .iter()
        .filter(|e| {
            filter
                .map(|f| {
                    e.name
                        .to_ascii_lowercase()
                        .contains(&f.to_ascii_lowercase())
                })
                .unwrap_or(true)
        })
        .map(|e| run_entry(e, oracle_points, seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_sources_and_oracles_parse() {
        for entry in CORPUS {
            parse_entry(entry);
            assert!(
                crate::expr::parse_field(entry.oracle_trace, entry.oracle_det).is_ok(),
                "{} oracles",
                entry.name
            );
        }
    }

    #[test]
    fn oracles_match_ad() {
        for entry in CORPUS {
            let check = check_oracles(entry, 300, 42).unwrap();
            assert!(check.checked > 0, "{}", entry.name);
            assert!(
                check.worst_rel <= 1e-9,
                "{}: {}",
                entry.name,
                check.worst_rel
            );
        }
    }

    #[test]
    fn classification_agrees_with_oracle_signs() {
        use crate::spectral::{classify_point, classify_trace_det};
        for entry in CORPUS {
            let field = parse_entry(entry);
            let trace_oracle = crate::expr::parse_field(entry.oracle_trace, "0").unwrap();
            let det_oracle = crate::expr::parse_field(entry.oracle_det, "0").unwrap();
            let mut rng = SplitMix64::stream(17, 0x51);
            for _ in 0..200 {
                let p = Point::new(
                    rng.range(entry.region.xmin, entry.region.xmax),
                    rng.range(entry.region.ymin, entry.region.ymax),
                );
                let (Ok(sample), Ok(t_ref), Ok(d_ref)) = (
                    classify_point(&field, p, 1e-9),
                    trace_oracle.component_x().eval(p),
                    det_oracle.component_x().eval(p),
                ) else {
                    continue;
                };
                assert_eq!(
                    sample.class,
                    classify_trace_det(t_ref, d_ref, 1e-9),
                    "{} at {}",
                    entry.name,
                    p
                );
            }
        }
    }

    #[test]
    fn wrong_oracle_detected() {
        // negative control: corrupt the determinant formula
        let mut entry = *find("F").unwrap();
        entry.oracle_det = "3*(x+1)^4+0.001";
        assert!(check_oracles(&entry, 100, 42).is_err());
    }

    #[test]
    fn find_is_case_insensitive() {
        assert!(find("f").is_some());
        assert!(find("y_LINE").is_some());
        assert!(find("nope").is_none());
    }

    #[test]
    fn names_are_unique() {
        let mut names: Vec<&str> = CORPUS.iter().map(|e| e.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), CORPUS.len());
    }
}
