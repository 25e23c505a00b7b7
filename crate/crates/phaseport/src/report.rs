//! Full analysis pipeline and its JSON report.
//!
//! `analyze` gathers the shared evidence once (spectral survey,
//! singularity search, structure detection), computes a Poincaré index on
//! a small circle around each isolated singularity, and runs every
//! verdict. The report serializes with a stable field order and no
//! timestamps, so identical inputs give byte-identical JSON; wall time is
//! attached only on request.

use serde::Serialize;

use crate::expr::FieldExpr;
use crate::flow::StructureReport;
use crate::geom::Point;
use crate::singular::SingularityReport;
use crate::spectral::FieldSpectralReport;
use crate::topo::{poincare_index, CircleSpec};
use crate::verdict::{
    check_corollaries_with, check_theorem_a_with, check_theorem_b_with, check_theorem_c_with,
    gather_evidence, AnalyzeParams, Verdict,
};

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldInfo {
    pub fx: String,
    pub fy: String,
}

/// Index of the field along a small circle around one singularity.
#[derive(Debug, Clone, Serialize)]
pub struct IndexEntry {
    pub center: Point,
    pub radius: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdicts {
    pub theorem_a: Verdict,
    pub theorem_b: Verdict,
    pub theorem_c: Verdict,
    pub corollaries: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub tool: ToolInfo,
    pub field: FieldInfo,
    pub params: AnalyzeParams,
    pub spectral: FieldSpectralReport,
    pub singularities: SingularityReport,
    pub structure: StructureReport,
    pub indices: Vec<IndexEntry>,
    pub verdicts: Verdicts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs the whole pipeline: survey, singularities, structure, indices,
/// verdicts.
pub fn analyze(field: &FieldExpr, params: &AnalyzeParams) -> AnalysisReport {
    let evidence = gather_evidence(field, params);

    let mut indices = Vec::new();
    let singular_locations: Vec<Point> = evidence
        .singularities
        .isolated
        .iter()
        .map(|s| s.location)
        .collect();
    for (i, &center) in singular_locations.iter().enumerate() {
        let mut radius = 0.1 * params.region.width().min(params.region.height()) * 0.5;
        // keep other singularities outside the circle
        for (j, &other) in singular_locations.iter().enumerate() {
            if i != j {
                radius = radius.min(0.45 * center.dist(other));
            }
        }
        if radius <= 0.0 {
            continue;
        }
        let entry = match CircleSpec::at(center, radius) {
            Some(circle) => match poincare_index(field, &circle, params.tol_zero) {
                Ok(r) => IndexEntry {
                    center,
                    radius,
                    index: Some(r.index),
                    error: None,
                },
                Err(e) => IndexEntry {
                    center,
                    radius,
                    index: None,
                    error: Some(e.to_string()),
                },
            },
            None => continue,
        };
        indices.push(entry);
    }

    let verdicts = Verdicts {
        theorem_a: check_theorem_a_with(field, params, &evidence),
        theorem_b: check_theorem_b_with(field, params, &evidence),
        theorem_c: check_theorem_c_with(field, params, &evidence),
        corollaries: check_corollaries_with(field, params, &evidence),
    };

    let (fx, fy) = field.sources();
    AnalysisReport {
        tool: ToolInfo {
            name: "phaseport",
            version: env!("CARGO_PKG_VERSION"),
        },
        field: FieldInfo {
            fx: fx.to_string(),
            fy: fy.to_string(),
        },
        params: *params,
        spectral: evidence.survey,
        singularities: evidence.singularities,
        structure: evidence.structure,
        indices,
        verdicts,
        wall_time_ms: None,
    }
}
