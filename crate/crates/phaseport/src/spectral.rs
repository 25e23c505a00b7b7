//! Jacobian spectrum sampling and whole-field spectral classification.
//!
//! For a 2x2 Jacobian the eigenvalue configuration is a function of
//! (trace, det) alone: both eigenvalues have negative real part (Hurwitz)
//! iff trace < 0 and det > 0, and the spectrum is purely imaginary iff
//! trace = 0 and det > 0. Sampling those two numbers over an offset
//! lattice is enough to classify a field up to the "almost everywhere"
//! caveat, which no finite computation can certify; reports therefore
//! carry the failing fraction and the threshold used.

use serde::Serialize;

use crate::expr::{DomainError, FieldExpr};
use crate::geom::{Complex, Point, Rect};
use crate::rng::SplitMix64;

/// Eigenvalue configuration of a single Jacobian, decided from
/// (trace, det) with a zero tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpectralClass {
    /// trace < 0 and det > 0: both eigenvalues in the open left half plane.
    Hurwitz,
    /// trace = 0 and det > 0: eigenvalues +- i sqrt(det).
    PurelyImaginary,
    /// det < 0: real eigenvalues of opposite signs.
    SaddleType,
    /// trace > 0 and det > 0: both eigenvalues in the right half plane.
    Expanding,
    /// det = 0 (within tolerance): at least one eigenvalue at zero.
    Degenerate,
}

/// Spectrum of DX at one point.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralSample {
    pub p: Point,
    pub trace: f64,
    pub det: f64,
    pub eigenvalues: [Complex; 2],
    pub class: SpectralClass,
}

/// Classifies the Jacobian spectrum at a point.
pub fn classify_point(
    field: &FieldExpr,
    p: Point,
    tol_zero: f64,
) -> Result<SpectralSample, DomainError> {
    let jac = field.jacobian(p)?;
    let trace = jac.trace();
    let det = jac.det();
    Ok(SpectralSample {
        p,
        trace,
        det,
        eigenvalues: jac.eigenvalues(),
        class: classify_trace_det(trace, det, tol_zero),
    })
}

pub fn classify_trace_det(trace: f64, det: f64, tol_zero: f64) -> SpectralClass {
    if det < -tol_zero {
        SpectralClass::SaddleType
    } else if det > tol_zero {
        if trace < -tol_zero {
            SpectralClass::Hurwitz
        } else if trace > tol_zero {
            SpectralClass::Expanding
        } else {
            SpectralClass::PurelyImaginary
        }
    } else {
        SpectralClass::Degenerate
    }
}

/// Whole-field classification produced by [`spectral_survey`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FieldClass {
    /// All but at most a tau_ae fraction of valid samples are Hurwitz.
    HurwitzAe,
    /// All but at most a tau_ae fraction have purely imaginary spectrum.
    PurelyImaginaryAe,
    Mixed,
}

/// Per-class sample counts over the survey lattice.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ClassCounts {
    pub hurwitz: usize,
    pub purely_imaginary: usize,
    pub saddle: usize,
    pub expanding: usize,
    pub degenerate: usize,
}

impl ClassCounts {
    fn bump(&mut self, class: SpectralClass) {
        match class {
            SpectralClass::Hurwitz => self.hurwitz += 1,
            SpectralClass::PurelyImaginary => self.purely_imaginary += 1,
            SpectralClass::SaddleType => self.saddle += 1,
            SpectralClass::Expanding => self.expanding += 1,
            SpectralClass::Degenerate => self.degenerate += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.hurwitz + self.purely_imaginary + self.saddle + self.expanding + self.degenerate
    }
}

/// Survey of the Jacobian spectrum over an N x N offset (midpoint)
/// lattice. Midpoints generically miss the measure-zero lines where exact
/// sign conditions degenerate, which is the point: the survey estimates
/// almost-everywhere behaviour.
#[derive(Debug, Clone, Serialize)]
pub struct FieldSpectralReport {
    pub region: Rect,
    pub grid_n: usize,
    pub counts: ClassCounts,
    /// Lattice points where evaluation hit a domain error; excluded from
    /// the conformance denominator.
    pub unknown: usize,
    /// Fraction of valid samples not conforming to the assigned class
    /// hypothesis (non-Hurwitz for HurwitzAe, and so on). For Mixed it is
    /// the smaller of the two candidate failure fractions.
    pub failing_fraction: f64,
    /// Bounding boxes of connected groups of non-conforming lattice cells.
    pub failing_boxes: Vec<Rect>,
    pub field_class: FieldClass,
    /// Fraction of valid samples with det > tol_zero; used by the
    /// positive-Jacobian hypotheses downstream.
    pub det_positive_fraction: f64,
    pub tau_ae: f64,
    pub tol_zero: f64,
}

/// Samples the Jacobian spectrum over the midpoint lattice of `region`.
///
/// Domain errors are counted separately as unknown samples and excluded
/// from the denominator, so fields with excluded curves can still be
/// surveyed.
///
/// # Panics
/// Panics if `n < 2` or if the region is degenerate.
pub fn spectral_survey(
    field: &FieldExpr,
    region: Rect,
    n: usize,
    tau_ae: f64,
    tol_zero: f64,
) -> FieldSpectralReport {
    assert!(n >= 2, "survey needs at least a 2x2 lattice");
    assert!(region.is_valid(), "survey region is degenerate");

    let dx = region.width() / n as f64;
    let dy = region.height() / n as f64;
    let mut counts = ClassCounts::default();
    let mut unknown = 0usize;
    let mut det_positive = 0usize;
    // class of each lattice cell, row-major; None for unknown
    let mut classes: Vec<Option<SpectralClass>> = Vec::with_capacity(n * n);

    for j in 0..n {
        let y = region.ymin + (j as f64 + 0.5) * dy;
        for i in 0..n {
            let x = region.xmin + (i as f64 + 0.5) * dx;
            match field.jacobian(Point::new(x, y)) {
                Ok(jac) => {
                    let class = classify_trace_det(jac.trace(), jac.det(), tol_zero);
                    counts.bump(class);
                    if jac.det() > tol_zero {
                        det_positive += 1;
                    }
                    classes.push(Some(class));
                }
                Err(_) => {
                    unknown += 1;
                    classes.push(None);
                }
            }
        }
    }

    let valid = counts.total();
    let frac = |count: usize| {
        if valid == 0 {
            1.0
        } else {
            1.0 - count as f64 / valid as f64
        }
    };
    let fail_hurwitz = frac(counts.hurwitz);
    let fail_imaginary = frac(counts.purely_imaginary);

    let (field_class, failing_fraction, conforming) = if valid > 0 && fail_hurwitz <= tau_ae {
        (
            FieldClass::HurwitzAe,
            fail_hurwitz,
            Some(SpectralClass::Hurwitz),
        )
    } else if valid > 0 && fail_imaginary <= tau_ae {
        (
            FieldClass::PurelyImaginaryAe,
            fail_imaginary,
            Some(SpectralClass::PurelyImaginary),
        )
    } else if fail_hurwitz <= fail_imaginary {
        (
            FieldClass::Mixed,
            fail_hurwitz,
            Some(SpectralClass::Hurwitz),
        )
    } else {
        (
            FieldClass::Mixed,
            fail_imaginary,
            Some(SpectralClass::PurelyImaginary),
        )
    };

    let failing: Vec<bool> = classes
        .iter()
        .map(|c| matches!(c, Some(class) if Some(*class) != conforming))
        .collect();
    let failing_boxes = merge_cells(&failing, n, region, dx, dy);

    FieldSpectralReport {
        region,
        grid_n: n,
        counts,
        unknown,
        failing_fraction,
        failing_boxes,
        field_class,
        det_positive_fraction: if valid == 0 {
            0.0
        } else {
            det_positive as f64 / valid as f64
        },
        tau_ae,
        tol_zero,
    }
}

/// Bounding boxes of 4-connected components of flagged lattice cells.
pub(crate) fn merge_cells(flags: &[bool], n: usize, region: Rect, dx: f64, dy: f64) -> Vec<Rect> {
    let mut seen = vec![false; flags.len()];
    let mut boxes = Vec::new();
    for start in 0..flags.len() {
        if !flags[start] || seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let (mut imin, mut imax, mut jmin, mut jmax) = (start % n, start % n, start / n, start / n);
        while let Some(idx) = stack.pop() {
            let (i, j) = (idx % n, idx / n);
            imin = imin.min(i);
            imax = imax.max(i);
            jmin = jmin.min(j);
            jmax = jmax.max(j);
            let mut push = |ni: usize, nj: usize| {
                let nidx = nj * n + ni;
                if flags[nidx] && !seen[nidx] {
                    seen[nidx] = true;
                    stack.push(nidx);
                }
            };
            if i > 0 {
                push(i - 1, j);
            }
            if i + 1 < n {
                push(i + 1, j);
            }
            if j > 0 {
                push(i, j - 1);
            }
            if j + 1 < n {
                push(i, j + 1);
            }
        }
        boxes.push(Rect {
            xmin: region.xmin + imin as f64 * dx,
            xmax: region.xmin + (imax + 1) as f64 * dx,
            ymin: region.ymin + jmin as f64 * dy,
            ymax: region.ymin + (jmax + 1) as f64 * dy,
        });
    }
    boxes
}

/// Estimates inf { ||X(p)|| : rho <= ||p|| <= r_max } by sampling the
/// annulus and refining each sample with a damped descent on ||X||^2
/// (Gauss-Newton direction where the Jacobian allows, steepest descent
/// otherwise), projecting iterates back into the annulus.
///
/// Samples hitting domain errors are skipped. Returns the smallest refined
/// value; `f64::INFINITY` if every sample failed.
///
/// # Panics
/// Panics unless 0 < rho < r_max.
pub fn norm_infimum(field: &FieldExpr, rho: f64, r_max: f64, m_samples: usize, seed: u64) -> f64 {
    assert!(rho > 0.0 && rho < r_max, "need 0 < rho < r_max");
    let mut rng = SplitMix64::stream(seed, 0x6e72); // norm-refinement stream
    let mut best = f64::INFINITY;

    let project = |p: Point| -> Point {
        let r = p.norm();
        if r < rho {
            if r == 0.0 {
                Point::new(rho, 0.0)
            } else {
                p * (rho / r)
            }
        } else if r > r_max {
            p * (r_max / r)
        } else {
            p
        }
    };

    for _ in 0..m_samples {
        // area-uniform radius, uniform angle
        let r = (rng.range(rho * rho, r_max * r_max)).sqrt();
        let theta = rng.range(0.0, std::f64::consts::TAU);
        let mut p = Point::new(r * theta.cos(), r * theta.sin());

        let Ok(v0) = field.eval(p) else { continue };
        let mut fval = v0.norm_sq();
        best = best.min(v0.norm());

        for _ in 0..200 {
            let Ok((v, jac)) = field.eval_with_jacobian(p) else {
                break;
            };
            fval = v.norm_sq();
            if fval <= 1e-32 {
                break;
            }
            // Try the Gauss-Newton direction first, then a scaled gradient
            // direction. The projection can cancel a Newton step that
            // points out of the annulus; the gradient attempt keeps the
            // descent moving along the boundary in that case.
            let mut dirs: [Option<Point>; 2] = [jac.solve(-v), None];
            let g = jac.transpose().mul_vec(v) * 2.0;
            let gn = g.norm();
            if gn > 0.0 {
                dirs[1] = Some(-g * ((1.0 + p.norm()) / gn * 0.5));
            }
            let mut accepted = false;
            for dir in dirs.into_iter().flatten() {
                let mut t = 1.0;
                for _ in 0..40 {
                    let cand = project(p + dir * t);
                    if cand.dist(p) == 0.0 {
                        break;
                    }
                    if let Ok(vc) = field.eval(cand) {
                        if vc.norm_sq() < fval * (1.0 - 1e-4 * t) {
                            p = cand;
                            fval = vc.norm_sq();
                            accepted = true;
                            break;
                        }
                    }
                    t *= 0.5;
                }
                if accepted {
                    break;
                }
            }
            if !accepted {
                break;
            }
        }
        best = best.min(fval.sqrt());
    }
    best
}
