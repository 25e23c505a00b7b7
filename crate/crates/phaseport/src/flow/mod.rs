//! Flow-side analysis: trajectory integration, omega-limit evidence, flow
//! rectangles with the boundary/area identity, and structural detectors
//! for Hamiltonian and gradient fields.

mod green;
mod integrate;
mod rectangle;

pub use green::{green_check, GreenCheckResult};
pub use integrate::{
    classify_omega_limit, integrate, integrate_dir, Direction, IntegrateParams, OmegaLimit,
    Terminal, TrajState, Trajectory,
};
pub use rectangle::{build_rectangle, Arc, ArcNode, BuildParams, FlowRectangle, RectangleError};

use serde::Serialize;

use crate::expr::FieldExpr;
use crate::geom::{Point, Rect};

/// The orthogonal field X* = (-g, f): perpendicular to X = (f, g) with the
/// same norm everywhere. Its trajectories are the transversal sides of
/// flow rectangles.
pub fn orthogonal_field(field: &FieldExpr) -> FieldExpr {
    field.orthogonal()
}

/// The field rotated by a quarter turn, p -> (-g(p), f(p)). Pointwise the
/// same construction as [`orthogonal_field`]; gradient-field analysis uses
/// it to hand a gradient system to the Hamiltonian machinery.
pub fn rotate_field(field: &FieldExpr) -> FieldExpr {
    field.rotated()
}

/// Sampled detection of Hamiltonian structure (trace of DX vanishes) and
/// gradient structure (DX symmetric).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StructureReport {
    pub hamiltonian: bool,
    pub gradient: bool,
    /// Fraction of valid samples with |trace DX| <= tol_zero.
    pub trace_zero_fraction: f64,
    /// Fraction of valid samples with |f_y - g_x| <= tol_zero.
    pub symmetric_fraction: f64,
    pub samples_valid: usize,
    pub unknown: usize,
}

/// Samples the Jacobian on the midpoint lattice and reports Hamiltonian /
/// gradient structure when the respective identity holds on at least a
/// (1 - tau_ae) fraction of valid samples.
pub fn detect_structure(
    field: &FieldExpr,
    region: Rect,
    n: usize,
    tau_ae: f64,
    tol_zero: f64,
) -> StructureReport {
    assert!(n >= 2 && region.is_valid());
    let dx = region.width() / n as f64;
    let dy = region.height() / n as f64;
    let mut trace_zero = 0usize;
    let mut symmetric = 0usize;
    let mut valid = 0usize;
    let mut unknown = 0usize;
    for j in 0..n {
        let y = region.ymin + (j as f64 + 0.5) * dy;
        for i in 0..n {
            let x = region.xmin + (i as f64 + 0.5) * dx;
            match field.jacobian(Point::new(x, y)) {
                Ok(jac) => {
                    valid += 1;
                    if jac.trace().abs() <= tol_zero {
                        trace_zero += 1;
                    }
                    if (jac.b - jac.c).abs() <= tol_zero {
                        symmetric += 1;
                    }
                }
                Err(_) => unknown += 1,
            }
        }
    }
    let fraction = |count: usize| {
        if valid == 0 {
            0.0
        } else {
            count as f64 / valid as f64
        }
    };
    let trace_zero_fraction = fraction(trace_zero);
    let symmetric_fraction = fraction(symmetric);
    StructureReport {
        hamiltonian: valid > 0 && trace_zero_fraction >= 1.0 - tau_ae,
        gradient: valid > 0 && symmetric_fraction >= 1.0 - tau_ae,
        trace_zero_fraction,
        symmetric_fraction,
        samples_valid: valid,
        unknown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_field;
    use crate::rng::SplitMix64;

    #[test]
    fn orthogonality_identities() {
        let f = parse_field("-(x+1)^3+1", "-(x+1)^2*(y+1)+1").unwrap();
        let star = orthogonal_field(&f);
        let mut rng = SplitMix64::new(9);
        for _ in 0..100 {
            let p = Point::new(rng.range(-3.0, 3.0), rng.range(-3.0, 3.0));
            let v = f.eval(p).unwrap();
            let w = star.eval(p).unwrap();
            assert!(v.dot(w).abs() <= 1e-12 * (1.0 + v.norm_sq()));
            assert_eq!(v.norm(), w.norm());
        }
    }

    #[test]
    fn radial_orthogonal() {
        let radial = parse_field("-x", "-y").unwrap();
        let star = orthogonal_field(&radial);
        assert_eq!(
            star.eval(Point::new(1.0, 0.0)).unwrap(),
            Point::new(0.0, -1.0)
        );
        assert_eq!(
            rotate_field(&radial).eval(Point::new(1.0, 0.0)).unwrap(),
            Point::new(0.0, -1.0)
        );
    }

    #[test]
    fn hamiltonian_detected() {
        let x2 = parse_field("-(y-1)^3-1", "(x-1)^3+1").unwrap();
        let rep = detect_structure(&x2, Rect::centered(3.0), 60, 0.01, 1e-9);
        assert!(rep.hamiltonian);
        assert!(!rep.gradient);
        assert_eq!(rep.trace_zero_fraction, 1.0);
    }

    #[test]
    fn gradient_detected() {
        let g = parse_field("3*x^2", "-3*y^2").unwrap();
        let rep = detect_structure(&g, Rect::centered(2.0), 60, 0.01, 1e-9);
        assert!(rep.gradient);
        assert!(!rep.hamiltonian);

        let radial = parse_field("-x", "-y").unwrap();
        let rep = detect_structure(&radial, Rect::centered(3.0), 60, 0.01, 1e-9);
        assert!(rep.gradient);
        assert!(!rep.hamiltonian);
    }

    #[test]
    fn rotated_gradient_is_hamiltonian() {
        let radial = parse_field("-x", "-y").unwrap();
        let rotated = rotate_field(&radial);
        let rep = detect_structure(&rotated, Rect::centered(3.0), 60, 0.01, 1e-9);
        assert!(rep.hamiltonian);
    }
}
