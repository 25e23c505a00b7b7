//! Poincaré index along circles and constant perturbations.
//!
//! The index of a field along a circle is the winding number of the field
//! direction over one counterclockwise turn. Samples are doubled until
//! every consecutive angle step stays below pi/2, which pins the discrete
//! winding number to the continuous one; with the closed sample loop the
//! accumulated angle is an exact multiple of 2 pi up to rounding.

use serde::Serialize;

use crate::expr::{DomainError, FieldExpr};
use crate::geom::Point;

/// A round circle with a starting sample count.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CircleSpec {
    pub center: Point,
    pub radius: f64,
    pub samples: usize,
}

impl CircleSpec {
    /// Requires radius > 0 and samples >= 16.
    pub fn new(center: Point, radius: f64, samples: usize) -> Option<CircleSpec> {
        if radius > 0.0 && radius.is_finite() && samples >= 16 {
            Some(CircleSpec {
                center,
                radius,
                samples,
            })
        } else {
            None
        }
    }

    pub fn at(center: Point, radius: f64) -> Option<CircleSpec> {
        CircleSpec::new(center, radius, 64)
    }

    fn point(&self, theta: f64) -> Point {
        Point::new(
            self.center.x + self.radius * theta.cos(),
            self.center.y + self.radius * theta.sin(),
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexResult {
    pub index: i64,
    /// Accumulated direction angle over one turn, in radians.
    pub total_angle: f64,
    pub min_norm_on_circle: f64,
    pub samples_used: usize,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum IndexError {
    /// The field norm fell to the zero tolerance at a sample; the index is
    /// undefined on circles through singularities.
    #[error("field vanishes on the circle near {point} (norm {norm})")]
    ZeroOnCircle { point: Point, norm: f64 },
    /// Angle steps stayed >= pi/2 even at the sample budget.
    #[error("winding did not resolve at {samples} samples")]
    NonConvergent { samples: usize },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

const MAX_SAMPLES: usize = 1 << 20;

/// Winding number of the field direction along the circle, counted
/// counterclockwise.
pub fn poincare_index(
    field: &FieldExpr,
    circle: &CircleSpec,
    tol_zero: f64,
) -> Result<IndexResult, IndexError> {
    let mut n = circle.samples.max(16);
    loop {
        match try_winding(field, circle, n, tol_zero)? {
            Some(result) => return Ok(result),
            None => {
                if n >= MAX_SAMPLES {
                    return Err(IndexError::NonConvergent { samples: n });
                }
                n *= 2;
            }
        }
    }
}

/// One winding pass at a fixed sample count; None means an angle step hit
/// pi/2 and the caller should refine.
fn try_winding(
    field: &FieldExpr,
    circle: &CircleSpec,
    n: usize,
    tol_zero: f64,
) -> Result<Option<IndexResult>, IndexError> {
    let mut total = 0.0f64;
    let mut min_norm = f64::INFINITY;

    let first = sample_angle(field, circle, 0, n, tol_zero, &mut min_norm)?;
    let mut prev = first;
    for k in 1..=n {
        let angle = if k == n {
            first
        } else {
            sample_angle(field, circle, k, n, tol_zero, &mut min_norm)?
        };
        let mut step = angle - prev;
        while step > std::f64::consts::PI {
            step -= std::f64::consts::TAU;
        }
        while step <= -std::f64::consts::PI {
            step += std::f64::consts::TAU;
        }
        if step.abs() >= std::f64::consts::FRAC_PI_2 {
            return Ok(None);
        }
        total += step;
        prev = angle;
    }

    let index = (total / std::f64::consts::TAU).round() as i64;
    Ok(Some(IndexResult {
        index,
        total_angle: total,
        min_norm_on_circle: min_norm,
        samples_used: n,
    }))
}

fn sample_angle(
    field: &FieldExpr,
    circle: &CircleSpec,
    k: usize,
    n: usize,
    tol_zero: f64,
    min_norm: &mut f64,
) -> Result<f64, IndexError> {
    let theta = k as f64 / n as f64 * std::f64::consts::TAU;
    let p = circle.point(theta);
    let v = field.eval(p)?;
    let norm = v.norm();
    if norm <= tol_zero {
        return Err(IndexError::ZeroOnCircle { point: p, norm });
    }
    *min_norm = min_norm.min(norm);
    Ok(v.y.atan2(v.x))
}

/// The constant-perturbed field p -> X(p) - w; its Jacobian equals the
/// Jacobian of X at every point.
pub fn perturb_constant(field: &FieldExpr, w: Point) -> FieldExpr {
    field.perturbed(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_field;
    use crate::rng::SplitMix64;

    const TOL: f64 = 1e-9;

    fn index_of(field: &FieldExpr, center: Point, radius: f64) -> i64 {
        let circle = CircleSpec::at(center, radius).unwrap();
        poincare_index(field, &circle, TOL).unwrap().index
    }

    #[test]
    fn radial_unit_circle() {
        let radial = parse_field("-x", "-y").unwrap();
        let circle = CircleSpec::at(Point::ORIGIN, 1.0).unwrap();
        let r = poincare_index(&radial, &circle, TOL).unwrap();
        assert_eq!(r.index, 1);
        assert!((r.total_angle - std::f64::consts::TAU).abs() < 1e-9);
        assert!((r.min_norm_on_circle - 1.0).abs() < 1e-12);
    }

    #[test]
    fn saddle_has_index_minus_one() {
        let z = parse_field("-2*y+4*y^3", "-2*x+4*x^3").unwrap();
        assert_eq!(index_of(&z, Point::ORIGIN, 0.3), -1);
    }

    #[test]
    fn sink_has_index_one() {
        let f = parse_field("-(x+1)^3+1", "-(x+1)^2*(y+1)+1").unwrap();
        assert_eq!(index_of(&f, Point::ORIGIN, 0.5), 1);
    }

    #[test]
    fn index_additivity_on_saddle_center_lattice() {
        let z = parse_field("-2*y+4*y^3", "-2*x+4*x^3").unwrap();
        let big = index_of(&z, Point::ORIGIN, 2.0);
        assert_eq!(big, -1);

        // five saddles (origin and corners) and four center-type zeros
        let r = 0.5f64.sqrt();
        let mut sum = 0i64;
        let coords = [-r, 0.0, r];
        for &x in &coords {
            for &y in &coords {
                sum += index_of(&z, Point::new(x, y), 0.15);
            }
        }
        assert_eq!(sum, big);

        // the local values themselves
        assert_eq!(index_of(&z, Point::ORIGIN, 0.15), -1);
        assert_eq!(index_of(&z, Point::new(r, r), 0.15), -1);
        assert_eq!(index_of(&z, Point::new(0.0, r), 0.15), 1);
        assert_eq!(index_of(&z, Point::new(r, 0.0), 0.15), 1);
    }

    #[test]
    fn index_vanishes_in_singularity_free_disk() {
        let radial = parse_field("-x", "-y").unwrap();
        assert_eq!(index_of(&radial, Point::new(2.0, 2.0), 0.5), 0);
        let f = parse_field("-(x+1)^3+1", "-(x+1)^2*(y+1)+1").unwrap();
        assert_eq!(index_of(&f, Point::new(1.5, 1.5), 0.4), 0);
    }

    #[test]
    fn zero_on_circle_detected() {
        let radial = parse_field("-x", "-y").unwrap();
        // circle through the origin where the field vanishes
        let circle = CircleSpec::at(Point::new(0.5, 0.0), 0.5).unwrap();
        match poincare_index(&radial, &circle, TOL) {
            Err(IndexError::ZeroOnCircle { .. }) => {}
            other => panic!("expected ZeroOnCircle, got {:?}", other.map(|r| r.index)),
        }
    }

    #[test]
    fn index_stable_under_small_constant_perturbation() {
        let f = parse_field("-(x+1)^3+1", "-(x+1)^2*(y+1)+1").unwrap();
        let circle = CircleSpec::at(Point::ORIGIN, 0.5).unwrap();
        let base = poincare_index(&f, &circle, TOL).unwrap().index;
        let mut rng = SplitMix64::new(11);
        for _ in 0..10 {
            let theta = rng.range(0.0, std::f64::consts::TAU);
            let mag = rng.range(0.0, 0.01);
            let w = Point::new(mag * theta.cos(), mag * theta.sin());
            let fk = perturb_constant(&f, w);
            assert_eq!(poincare_index(&fk, &circle, TOL).unwrap().index, base);
        }
    }

    #[test]
    fn perturbation_keeps_jacobian() {
        let f = parse_field("-(x+1)^3+1", "-(x+1)^2*(y+1)+1").unwrap();
        let fk = perturb_constant(&f, Point::new(0.3, -0.6));
        let mut rng = SplitMix64::new(5);
        for _ in 0..10 {
            let p = Point::new(rng.range(-2.0, 2.0), rng.range(-2.0, 2.0));
            let a = f.jacobian(p).unwrap();
            let b = fk.jacobian(p).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn circle_spec_validation() {
        assert!(CircleSpec::new(Point::ORIGIN, 0.0, 64).is_none());
        assert!(CircleSpec::new(Point::ORIGIN, -1.0, 64).is_none());
        assert!(CircleSpec::new(Point::ORIGIN, 1.0, 8).is_none());
        assert!(CircleSpec::new(Point::ORIGIN, 1.0, 16).is_some());
    }

    #[test]
    fn total_angle_is_near_multiple_of_tau() {
        let fields = [
            parse_field("-x", "-y").unwrap(),
            parse_field("-2*y+4*y^3", "-2*x+4*x^3").unwrap(),
            parse_field("-(y-1)^3-1", "(x-1)^3+1").unwrap(),
        ];
        for field in &fields {
            let circle = CircleSpec::at(Point::new(0.05, -0.02), 0.7).unwrap();
            let r = poincare_index(field, &circle, TOL).unwrap();
            let nearest = r.index as f64 * std::f64::consts::TAU;
            assert!(
                (r.total_angle - nearest).abs() < std::f64::consts::FRAC_PI_4,
                "angle {} vs {}",
                r.total_angle,
                nearest
            );
        }
    }
}
