//! Theorem-backed conclusions with explicit hypothesis checklists.
//!
//! Each check matches one classification criterion:
//!
//! - criterion A: Jacobian Hurwitz almost everywhere + a hyperbolic
//!   singularity => globally asymptotically stable (topologically a
//!   radial sink);
//! - criterion B: Hurwitz almost everywhere => the singular set is empty,
//!   a single point, or non-discrete (never several isolated points);
//! - criterion C: purely imaginary spectrum almost everywhere + a simple
//!   singularity => global center;
//! - corollary 5.1 / 5.2: the Hamiltonian and gradient specializations
//!   with positive Jacobian determinant almost everywhere.
//!
//! Almost-everywhere hypotheses can only be corroborated by sampling, so
//! the corresponding checklist entries carry the status `numerical` and
//! every positive conclusion is a classification with evidence, not a
//! proof.

use serde::Serialize;

use crate::expr::FieldExpr;
use crate::flow::{detect_structure, integrate, IntegrateParams, StructureReport, Terminal};
use crate::geom::{Point, Rect};
use crate::rng::SplitMix64;
use crate::singular::{
    find_singularities, SingularParams, Singularity, SingularityReport, TrichotomyClass,
};
use crate::spectral::{spectral_survey, FieldClass, FieldSpectralReport};
use crate::topo::{poincare_index, CircleSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Theorem {
    TheoremA,
    TheoremB,
    TheoremC,
    #[serde(rename = "Corollary5_1")]
    Corollary51,
    #[serde(rename = "Corollary5_2")]
    Corollary52,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisStatus {
    /// Decided by a pointwise computation.
    Pass,
    Fail,
    /// Holds on every sample but concerns an almost-everywhere or
    /// limit property that sampling cannot certify.
    Numerical,
}

#[derive(Debug, Clone, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub status: HypothesisStatus,
    pub evidence: String,
}

impl Hypothesis {
    fn ok(&self) -> bool {
        matches!(
            self.status,
            HypothesisStatus::Pass | HypothesisStatus::Numerical
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Conclusion {
    GloballyAsymptoticallyStable,
    GlobalCenter,
    Trichotomy(TrichotomyClass),
    Inconclusive,
}

/// Outcome counts of the corroborating trajectory batch.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct CorroborationSummary {
    pub trajectories: usize,
    pub converged: usize,
    pub periodic: usize,
    pub escaped: usize,
    pub undetermined: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub theorem: Theorem,
    pub hypotheses: Vec<Hypothesis>,
    pub conclusion: Conclusion,
    pub corroboration: Option<CorroborationSummary>,
    /// Set when numerical evidence contradicts a theorem; this marks the
    /// run as failed.
    pub violation: Option<String>,
}

impl Verdict {
    fn inconclusive(theorem: Theorem, hypotheses: Vec<Hypothesis>) -> Verdict {
        Verdict {
            theorem,
            hypotheses,
            conclusion: Conclusion::Inconclusive,
            corroboration: None,
            violation: None,
        }
    }
}

/// Shared knobs for the whole analysis pipeline.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AnalyzeParams {
    pub region: Rect,
    pub grid_n: usize,
    pub tau_ae: f64,
    pub tol_zero: f64,
    pub seed: u64,
    /// Corroborating trajectories per verdict.
    pub k_traj: usize,
    /// Time budget per corroborating trajectory.
    pub traj_t_max: f64,
    pub singular: SingularParams,
    pub integrate: IntegrateParams,
}

impl Default for AnalyzeParams {
    fn default() -> Self {
        AnalyzeParams {
            region: Rect::centered(3.0),
            grid_n: 200,
            tau_ae: 0.01,
            tol_zero: 1e-9,
            seed: 42,
            k_traj: 20,
            traj_t_max: 200.0,
            singular: SingularParams::default(),
            integrate: IntegrateParams::default(),
        }
    }
}

/// Evidence shared by all verdicts; gathered once per analysis.
#[derive(Debug, Clone, Serialize)]
pub struct Evidence {
    pub survey: FieldSpectralReport,
    pub singularities: SingularityReport,
    pub structure: StructureReport,
}

pub fn gather_evidence(field: &FieldExpr, params: &AnalyzeParams) -> Evidence {
    Evidence {
        survey: spectral_survey(
            field,
            params.region,
            params.grid_n,
            params.tau_ae,
            params.tol_zero,
        ),
        singularities: find_singularities(
            field,
            params.region,
            params.grid_n.max(8),
            &params.singular,
        ),
        structure: detect_structure(
            field,
            params.region,
            params.grid_n,
            params.tau_ae,
            params.tol_zero,
        ),
    }
}

fn hurwitz_hypothesis(survey: &FieldSpectralReport) -> Hypothesis {
    let holds = survey.field_class == FieldClass::HurwitzAe;
    Hypothesis {
        name: "Jacobian is Hurwitz almost everywhere".to_string(),
        status: if holds {
            HypothesisStatus::Numerical
        } else {
            HypothesisStatus::Fail
        },
        evidence: format!(
            "class {:?}, failing fraction {:.3e} over {} samples ({} unknown)",
            survey.field_class,
            survey.failing_fraction,
            survey.counts.total(),
            survey.unknown
        ),
    }
}

fn unique_singularity(sing: &SingularityReport) -> (Hypothesis, Option<&Singularity>) {
    match (sing.trichotomy_class, sing.isolated.first()) {
        (TrichotomyClass::OnePoint, Some(s)) => (
            Hypothesis {
                name: "the singular set is a single point".to_string(),
                status: HypothesisStatus::Pass,
                evidence: format!("singularity at {}", s.location),
            },
            Some(s),
        ),
        _ => (
            Hypothesis {
                name: "the singular set is a single point".to_string(),
                status: HypothesisStatus::Fail,
                evidence: format!(
                    "trichotomy {:?}, {} isolated",
                    sing.trichotomy_class,
                    sing.isolated.len()
                ),
            },
            None,
        ),
    }
}

/// Ring of trajectory seeds around a center, radii interleaved between
/// the two given values, angles jittered deterministically.
fn ring_seeds(center: Point, radii: (f64, f64), k: usize, seed: u64) -> Vec<Point> {
    let mut rng = SplitMix64::stream(seed, 0x5eed);
    (0..k)
        .map(|i| {
            let r = if i % 2 == 0 { radii.0 } else { radii.1 };
            let theta = i as f64 / k as f64 * std::f64::consts::TAU + rng.range(0.0, 0.1);
            Point::new(center.x + r * theta.cos(), center.y + r * theta.sin())
        })
        .collect()
}

/// Largest radius around `center` that stays inside the region.
fn margin(center: Point, region: Rect) -> f64 {
    (center.x - region.xmin)
        .min(region.xmax - center.x)
        .min(center.y - region.ymin)
        .min(region.ymax - center.y)
        .max(region.diameter() * 1e-3)
}

/// Criterion A: Hurwitz almost everywhere plus a hyperbolic singularity
/// implies a global attractor. The singularity need not sit at the
/// origin; the hypotheses are translation invariant.
pub fn check_theorem_a(field: &FieldExpr, params: &AnalyzeParams) -> Verdict {
    let evidence = gather_evidence(field, params);
    check_theorem_a_with(field, params, &evidence)
}

pub fn check_theorem_a_with(
    field: &FieldExpr,
    params: &AnalyzeParams,
    evidence: &Evidence,
) -> Verdict {
    let mut hypotheses = vec![hurwitz_hypothesis(&evidence.survey)];
    let (unique_h, singularity) = unique_singularity(&evidence.singularities);
    hypotheses.push(unique_h);

    let hyperbolic = singularity.map(|s| s.local_class.is_hyperbolic());
    hypotheses.push(match (singularity, hyperbolic) {
        (Some(s), Some(true)) => Hypothesis {
            name: "the singularity is hyperbolic".to_string(),
            status: HypothesisStatus::Pass,
            evidence: format!(
                "{:?}, eigenvalues {} and {}",
                s.local_class, s.eigenvalues[0], s.eigenvalues[1]
            ),
        },
        (Some(s), _) => Hypothesis {
            name: "the singularity is hyperbolic".to_string(),
            status: HypothesisStatus::Fail,
            evidence: format!("{:?}", s.local_class),
        },
        (None, _) => Hypothesis {
            name: "the singularity is hyperbolic".to_string(),
            status: HypothesisStatus::Fail,
            evidence: "no unique singularity".to_string(),
        },
    });

    if !hypotheses.iter().all(Hypothesis::ok) {
        return Verdict::inconclusive(Theorem::TheoremA, hypotheses);
    }
    let target = singularity.expect("unique singularity checked").location;

    // corroboration: every seeded trajectory must fall into the target
    let m = margin(target, params.region);
    let seeds = ring_seeds(target, (0.4 * m, 0.8 * m), params.k_traj, params.seed);
    let mut summary = CorroborationSummary::default();
    let mut all_converged = true;
    for seed in seeds {
        summary.trajectories += 1;
        let traj = integrate(field, seed, params.traj_t_max, &params.integrate);
        match traj.terminal {
            Terminal::ConvergedToPoint(q) if q.dist(target) <= 1e-6 * (1.0 + target.norm()) => {
                summary.converged += 1;
            }
            Terminal::ConvergedToPoint(_) | Terminal::PeriodicReturn { .. } => {
                summary.periodic += 1;
                all_converged = false;
            }
            Terminal::Escaped { .. } => {
                summary.escaped += 1;
                all_converged = false;
            }
            _ => {
                summary.undetermined += 1;
                all_converged = false;
            }
        }
    }
    hypotheses.push(Hypothesis {
        name: "seeded trajectories all converge to the singularity".to_string(),
        status: if all_converged {
            HypothesisStatus::Numerical
        } else {
            HypothesisStatus::Fail
        },
        evidence: format!("{}/{} converged", summary.converged, summary.trajectories),
    });

    let conclusion = if all_converged {
        Conclusion::GloballyAsymptoticallyStable
    } else {
        Conclusion::Inconclusive
    };
    Verdict {
        theorem: Theorem::TheoremA,
        hypotheses,
        conclusion,
        corroboration: Some(summary),
        violation: None,
    }
}

/// Criterion B: under the Hurwitz-almost-everywhere hypothesis the
/// singular set is empty, one point, or non-discrete. The verdict always
/// reports the observed class; seeing several isolated zeros under a
/// Hurwitz-a.e. survey is flagged as a contradiction (a numerical
/// artifact by necessity) and fails the run.
pub fn check_theorem_b(field: &FieldExpr, params: &AnalyzeParams) -> Verdict {
    let evidence = gather_evidence(field, params);
    check_theorem_b_with(field, params, &evidence)
}

pub fn check_theorem_b_with(
    _field: &FieldExpr,
    _params: &AnalyzeParams,
    evidence: &Evidence,
) -> Verdict {
    let hurwitz = hurwitz_hypothesis(&evidence.survey);
    let hurwitz_holds = hurwitz.ok();
    let class = evidence.singularities.trichotomy_class;

    let mut hypotheses = vec![hurwitz];
    if !hurwitz_holds && class == TrichotomyClass::MultipleIsolated {
        hypotheses.push(Hypothesis {
            name: "several isolated singularities".to_string(),
            status: HypothesisStatus::Pass,
            evidence: "therefore the Jacobian cannot be Hurwitz almost everywhere".to_string(),
        });
    }

    let violation = if hurwitz_holds && class == TrichotomyClass::MultipleIsolated {
        Some(format!(
            "survey says Hurwitz a.e. but {} isolated singularities were found; \
             one of the two computations is wrong",
            evidence.singularities.isolated.len()
        ))
    } else {
        None
    };

    Verdict {
        theorem: Theorem::TheoremB,
        hypotheses,
        conclusion: Conclusion::Trichotomy(class),
        corroboration: None,
        violation,
    }
}

/// Criterion C: purely imaginary spectrum almost everywhere plus a simple
/// singularity implies a global center.
pub fn check_theorem_c(field: &FieldExpr, params: &AnalyzeParams) -> Verdict {
    let evidence = gather_evidence(field, params);
    check_theorem_c_with(field, params, &evidence)
}

pub fn check_theorem_c_with(
    field: &FieldExpr,
    params: &AnalyzeParams,
    evidence: &Evidence,
) -> Verdict {
    let survey = &evidence.survey;
    let imaginary = survey.field_class == FieldClass::PurelyImaginaryAe;
    let mut hypotheses = vec![Hypothesis {
        name: "spectrum is purely imaginary almost everywhere".to_string(),
        status: if imaginary {
            HypothesisStatus::Numerical
        } else {
            HypothesisStatus::Fail
        },
        evidence: format!(
            "class {:?}, failing fraction {:.3e}",
            survey.field_class, survey.failing_fraction
        ),
    }];

    let (unique_h, singularity) = unique_singularity(&evidence.singularities);
    hypotheses.push(unique_h);

    hypotheses.push(match singularity {
        Some(s) if s.jacobian.det() > params.tol_zero => Hypothesis {
            name: "the singularity is simple with positive determinant".to_string(),
            status: HypothesisStatus::Pass,
            evidence: format!("det {}", s.jacobian.det()),
        },
        Some(s) => Hypothesis {
            name: "the singularity is simple with positive determinant".to_string(),
            status: HypothesisStatus::Fail,
            evidence: format!("det {}", s.jacobian.det()),
        },
        None => Hypothesis {
            name: "the singularity is simple with positive determinant".to_string(),
            status: HypothesisStatus::Fail,
            evidence: "no unique singularity".to_string(),
        },
    });

    if !hypotheses.iter().all(Hypothesis::ok) {
        return Verdict::inconclusive(Theorem::TheoremC, hypotheses);
    }
    let target = singularity.expect("unique singularity checked").location;
    let m = margin(target, params.region);

    // index on a small circle around the singularity
    let circle = CircleSpec::at(target, 0.1 * m).expect("valid probe circle");
    let index_h = match poincare_index(field, &circle, params.tol_zero) {
        Ok(r) if r.index == 1 => Hypothesis {
            name: "index +1 on a small circle".to_string(),
            status: HypothesisStatus::Pass,
            evidence: format!("index {} at radius {}", r.index, circle.radius),
        },
        Ok(r) => Hypothesis {
            name: "index +1 on a small circle".to_string(),
            status: HypothesisStatus::Fail,
            evidence: format!("index {} at radius {}", r.index, circle.radius),
        },
        Err(e) => Hypothesis {
            name: "index +1 on a small circle".to_string(),
            status: HypothesisStatus::Fail,
            evidence: e.to_string(),
        },
    };
    let index_ok = index_h.ok();
    hypotheses.push(index_h);
    if !index_ok {
        return Verdict::inconclusive(Theorem::TheoremC, hypotheses);
    }

    // corroboration: periodic returns at increasing radii
    let mut rng = SplitMix64::stream(params.seed, 0xc1c);
    let mut summary = CorroborationSummary::default();
    let mut all_periodic = true;
    for i in 0..params.k_traj {
        let frac = (i + 1) as f64 / params.k_traj as f64;
        let r = (0.15 + 0.7 * frac) * m;
        let theta = rng.range(0.0, std::f64::consts::TAU);
        let p0 = Point::new(target.x + r * theta.cos(), target.y + r * theta.sin());
        summary.trajectories += 1;
        let traj = integrate(field, p0, params.traj_t_max, &params.integrate);
        match traj.terminal {
            Terminal::PeriodicReturn { .. } => summary.periodic += 1,
            Terminal::ConvergedToPoint(_) => {
                summary.converged += 1;
                all_periodic = false;
            }
            Terminal::Escaped { .. } => {
                summary.escaped += 1;
                all_periodic = false;
            }
            _ => {
                summary.undetermined += 1;
                all_periodic = false;
            }
        }
    }
    hypotheses.push(Hypothesis {
        name: "orbits at increasing radii all return".to_string(),
        status: if all_periodic {
            HypothesisStatus::Numerical
        } else {
            HypothesisStatus::Fail
        },
        evidence: format!("{}/{} periodic", summary.periodic, summary.trajectories),
    });

    let conclusion = if all_periodic {
        Conclusion::GlobalCenter
    } else {
        Conclusion::Inconclusive
    };
    Verdict {
        theorem: Theorem::TheoremC,
        hypotheses,
        conclusion,
        corroboration: Some(summary),
        violation: None,
    }
}

/// Corollary checks for structured fields: Hamiltonian fields with
/// positive determinant a.e. and a simple singularity are global centers;
/// gradient fields with positive determinant a.e. and a hyperbolic
/// singularity are global attractors.
pub fn check_corollaries(field: &FieldExpr, params: &AnalyzeParams) -> Verdict {
    let evidence = gather_evidence(field, params);
    check_corollaries_with(field, params, &evidence)
}

pub fn check_corollaries_with(
    field: &FieldExpr,
    params: &AnalyzeParams,
    evidence: &Evidence,
) -> Verdict {
    let structure = &evidence.structure;
    let det_positive = evidence.survey.det_positive_fraction >= 1.0 - params.tau_ae;
    let det_h = Hypothesis {
        name: "Jacobian determinant positive almost everywhere".to_string(),
        status: if det_positive {
            HypothesisStatus::Numerical
        } else {
            HypothesisStatus::Fail
        },
        evidence: format!(
            "det > 0 on {:.4} of samples",
            evidence.survey.det_positive_fraction
        ),
    };
    let (unique_h, singularity) = unique_singularity(&evidence.singularities);

    if structure.hamiltonian {
        let mut hypotheses = vec![
            Hypothesis {
                name: "field is Hamiltonian (trace vanishes on samples)".to_string(),
                status: HypothesisStatus::Numerical,
                evidence: format!(
                    "trace zero on {:.4} of samples",
                    structure.trace_zero_fraction
                ),
            },
            det_h,
            unique_h,
        ];
        hypotheses.push(match singularity {
            Some(s) if s.local_class.is_simple() => Hypothesis {
                name: "the singularity is simple".to_string(),
                status: HypothesisStatus::Pass,
                evidence: format!("det {}", s.jacobian.det()),
            },
            Some(s) => Hypothesis {
                name: "the singularity is simple".to_string(),
                status: HypothesisStatus::Fail,
                evidence: format!("{:?}", s.local_class),
            },
            None => Hypothesis {
                name: "the singularity is simple".to_string(),
                status: HypothesisStatus::Fail,
                evidence: "no unique singularity".to_string(),
            },
        });
        let conclusion = if hypotheses.iter().all(Hypothesis::ok) {
            Conclusion::GlobalCenter
        } else {
            Conclusion::Inconclusive
        };
        return Verdict {
            theorem: Theorem::Corollary51,
            hypotheses,
            conclusion,
            corroboration: None,
            violation: None,
        };
    }

    if structure.gradient {
        // cross-check: rotating a gradient field must hand the
        // Hamiltonian detector a trace-free field
        let rotated = field.rotated();
        let rotated_structure = detect_structure(
            &rotated,
            params.region,
            params.grid_n,
            params.tau_ae,
            params.tol_zero,
        );
        let mut hypotheses = vec![
            Hypothesis {
                name: "field is a gradient (symmetric Jacobian on samples)".to_string(),
                status: HypothesisStatus::Numerical,
                evidence: format!(
                    "symmetric on {:.4} of samples",
                    structure.symmetric_fraction
                ),
            },
            Hypothesis {
                name: "rotated field is Hamiltonian".to_string(),
                status: if rotated_structure.hamiltonian {
                    HypothesisStatus::Numerical
                } else {
                    HypothesisStatus::Fail
                },
                evidence: format!(
                    "trace zero on {:.4} of rotated samples",
                    rotated_structure.trace_zero_fraction
                ),
            },
            det_h,
            unique_h,
        ];
        hypotheses.push(match singularity {
            Some(s) if s.local_class.is_hyperbolic() => Hypothesis {
                name: "the singularity is hyperbolic".to_string(),
                status: HypothesisStatus::Pass,
                evidence: format!("{:?}", s.local_class),
            },
            Some(s) => Hypothesis {
                name: "the singularity is hyperbolic".to_string(),
                status: HypothesisStatus::Fail,
                evidence: format!("{:?}", s.local_class),
            },
            None => Hypothesis {
                name: "the singularity is hyperbolic".to_string(),
                status: HypothesisStatus::Fail,
                evidence: "no unique singularity".to_string(),
            },
        });
        let conclusion = if hypotheses.iter().all(Hypothesis::ok) {
            Conclusion::GloballyAsymptoticallyStable
        } else {
            Conclusion::Inconclusive
        };
        return Verdict {
            theorem: Theorem::Corollary52,
            hypotheses,
            conclusion,
            corroboration: None,
            violation: None,
        };
    }

    Verdict::inconclusive(
        Theorem::None,
        vec![Hypothesis {
            name: "field is Hamiltonian or gradient".to_string(),
            status: HypothesisStatus::Fail,
            evidence: format!(
                "trace zero fraction {:.4}, symmetric fraction {:.4}",
                structure.trace_zero_fraction, structure.symmetric_fraction
            ),
        }],
    )
}
