//! Adaptive trajectory integration.
//!
//! Embedded Dormand-Prince 5(4) pair with FSAL and standard step control.
//! Each accepted step is screened for terminal events: convergence onto a
//! (Newton-polished) zero, escape, a Poincaré-section return near the
//! starting point, domain errors, and budget exhaustion.

use serde::Serialize;

use crate::expr::FieldExpr;
use crate::geom::Point;
use crate::geom::Rect;
use crate::singular::{newton_refine, SingularParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Forward,
    Backward,
}

/// Why the integration stopped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Terminal {
    /// The orbit settled onto the zero `q`; the final state is within
    /// `conv_radius` of it and ||X(q)|| <= tol_root.
    ConvergedToPoint(Point),
    /// ||p|| reached the escape radius.
    Escaped { radius: f64 },
    /// The orbit recrossed the transversal through the start point within
    /// `return_radius` of it, in the starting direction.
    PeriodicReturn { period: f64 },
    /// Time or step budget ran out without another event.
    BudgetExhausted,
    /// Evaluation left the field's domain near `point`.
    DomainError { point: Point, detail: String },
}

/// One accepted integrator state: time, position, and the integrated
/// derivative dp/dt there (sign included for backward runs).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajState {
    pub t: f64,
    pub p: Point,
    pub v: Point,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub states: Vec<TrajState>,
    pub direction: Direction,
    pub terminal: Terminal,
}

impl Trajectory {
    pub fn start(&self) -> Point {
        self.states.first().expect("trajectory has a start").p
    }

    pub fn end(&self) -> Point {
        self.states.last().expect("trajectory has an end").p
    }

    pub fn duration(&self) -> f64 {
        self.states.last().map(|s| s.t).unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntegrateParams {
    pub rtol: f64,
    pub atol: f64,
    /// Escape radius for "omega limit empty (numerical)" evidence.
    pub r_escape: f64,
    /// Final state must land this close to the polished zero.
    pub conv_radius: f64,
    /// Field norm below which the zero polish is attempted.
    pub conv_norm_trigger: f64,
    /// Section-return acceptance distance from the start point.
    pub return_radius: f64,
    pub max_steps: usize,
    pub h_max: f64,
    /// Residual bound for the polished zero.
    pub tol_root: f64,
    /// Whether to watch the Poincaré section through the start point.
    pub detect_return: bool,
}

impl Default for IntegrateParams {
    fn default() -> Self {
        IntegrateParams {
            rtol: 1e-8,
            atol: 1e-10,
            r_escape: 1e3,
            conv_radius: 1e-6,
            conv_norm_trigger: 1e-5,
            return_radius: 1e-4,
            max_steps: 1_000_000,
            h_max: f64::INFINITY,
            tol_root: 1e-10,
            detect_return: true,
        }
    }
}

// Dormand-Prince 5(4) tableau
pub(crate) const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// error coefficients: 5th-order weights minus the embedded 4th-order ones
pub(crate) const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates the orbit of X through p0 forward in time for up to t_max.
pub fn integrate(field: &FieldExpr, p0: Point, t_max: f64, params: &IntegrateParams) -> Trajectory {
    integrate_dir(field, p0, t_max, Direction::Forward, params)
}

/// Integrates forward or backward; the recorded time is always the
/// non-negative integration time.
pub fn integrate_dir(
    field: &FieldExpr,
    p0: Point,
    t_max: f64,
    direction: Direction,
    params: &IntegrateParams,
) -> Trajectory {
    let sign = match direction {
        Direction::Forward => 1.0,
        Direction::Backward => -1.0,
    };
    let rhs =
        |p: Point| -> Result<Point, crate::expr::DomainError> { field.eval(p).map(|v| v * sign) };

    let mut states: Vec<TrajState> = Vec::new();
    let v0 = match rhs(p0) {
        Ok(v) => v,
        Err(e) => {
            return Trajectory {
                states: vec![TrajState {
                    t: 0.0,
                    p: p0,
                    v: Point::ORIGIN,
                }],
                direction,
                terminal: Terminal::DomainError {
                    point: e.point,
                    detail: e.to_string(),
                },
            }
        }
    };
    states.push(TrajState {
        t: 0.0,
        p: p0,
        v: v0,
    });

    // Poincaré section through p0, normal along the initial velocity.
    let section_normal = {
        let n = v0.norm();
        if n > 0.0 {
            Some(v0 * (1.0 / n))
        } else {
            None
        }
    };
    let mut left_start_ball = false;

    let mut t = 0.0f64;
    let mut p = p0;
    let mut k1 = v0;
    let mut h = initial_step(p0, v0, t_max, params);

    let newton_params = SingularParams {
        tol_root: params.tol_root,
        ..SingularParams::default()
    };
    // zero polishing may roam anywhere
    let wide = Rect::new(
        -params.r_escape * 2.0,
        params.r_escape * 2.0,
        -params.r_escape * 2.0,
        params.r_escape * 2.0,
    )
    .expect("escape bounds");

    let mut steps = 0usize;
    let terminal = loop {
        if steps >= params.max_steps {
            break Terminal::BudgetExhausted;
        }
        if t >= t_max {
            break Terminal::BudgetExhausted;
        }
        h = h.min(params.h_max).min(t_max - t);
        if h <= f64::EPSILON * t.abs().max(1.0) {
            break Terminal::BudgetExhausted;
        }

        // stages
        let mut k = [Point::ORIGIN; 7];
        k[0] = k1;
        let mut stage_err = None;
        for s in 1..7 {
            let mut acc = Point::ORIGIN;
            for (j, kj) in k.iter().enumerate().take(s) {
                acc = acc + *kj * A[s][j];
            }
            let ps = p + acc * h;
            match rhs(ps) {
                Ok(v) => k[s] = v,
                Err(e) => {
                    stage_err = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = stage_err {
            // try shrinking toward the domain boundary before giving up
            if h > 1e-12 {
                h *= 0.25;
                steps += 1;
                continue;
            }
            break Terminal::DomainError {
                point: e.point,
                detail: e.to_string(),
            };
        }

        // 5th-order solution is the a7 row; k[6] is f at the new point (FSAL)
        let y1 = p
            + (k[0] * A[6][0] + k[2] * A[6][2] + k[3] * A[6][3] + k[4] * A[6][4] + k[5] * A[6][5])
                * h;
        let k_new = k[6];

        // error estimate
        let err_vec =
            (k[0] * E[0] + k[2] * E[2] + k[3] * E[3] + k[4] * E[4] + k[5] * E[5] + k[6] * E[6]) * h;
        let sk_x = params.atol + params.rtol * p.x.abs().max(y1.x.abs());
        let sk_y = params.atol + params.rtol * p.y.abs().max(y1.y.abs());
        let err = ((err_vec.x / sk_x).powi(2) + (err_vec.y / sk_y).powi(2)) * 0.5;
        let err = err.sqrt();

        steps += 1;
        if err > 1.0 {
            // rejected: shrink and retry
            let factor = (0.9 * err.powf(-0.2)).max(0.2);
            h *= factor;
            continue;
        }

        let t_new = t + h;
        let prev_p = p;
        let prev_v = k[0];
        let prev_t = t;
        p = y1;
        t = t_new;
        k1 = k_new;
        states.push(TrajState { t, p, v: k_new });

        // events
        if p.norm() >= params.r_escape {
            break Terminal::Escaped { radius: p.norm() };
        }

        if let Some(normal) = section_normal {
            let d = p.dist(p0);
            if d > 4.0 * params.return_radius {
                left_start_ball = true;
            }
            if params.detect_return && left_start_ball {
                let s_prev = (prev_p - p0).dot(normal);
                let s_new = (p - p0).dot(normal);
                if s_prev < 0.0 && s_new >= 0.0 {
                    let (t_cross, p_cross) =
                        refine_crossing(prev_t, prev_p, prev_v, t, p, k_new, p0, normal);
                    if p_cross.dist(p0) <= params.return_radius {
                        if let Ok(vc) = rhs(p_cross) {
                            if vc.dot(normal) > 0.0 {
                                // end the trajectory on the section
                                states.pop();
                                states.push(TrajState {
                                    t: t_cross,
                                    p: p_cross,
                                    v: vc,
                                });
                                break Terminal::PeriodicReturn { period: t_cross };
                            }
                        }
                    }
                }
            }
        }

        // convergence onto a zero
        if k_new.norm() <= params.conv_norm_trigger {
            if let Some(q) = newton_refine(field, p, wide, &newton_params) {
                if p.dist(q) <= params.conv_radius {
                    break Terminal::ConvergedToPoint(q);
                }
            }
        }

        // step growth
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    };

    Trajectory {
        states,
        direction,
        terminal,
    }
}

fn initial_step(p0: Point, v0: Point, t_max: f64, params: &IntegrateParams) -> f64 {
    let scale = (1.0 + p0.norm()) / (1.0 + v0.norm());
    (0.01 * scale).min(t_max * 0.1).min(params.h_max).max(1e-10)
}

/// Cubic Hermite interpolation of the step [t0, t1].
fn hermite(t0: f64, p0: Point, v0: Point, t1: f64, p1: Point, v1: Point, t: f64) -> Point {
    let dt = t1 - t0;
    let s = (t - t0) / dt;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    p0 * h00 + v0 * (h10 * dt) + p1 * h01 + v1 * (h11 * dt)
}

/// Bisection on the Hermite interpolant for the section crossing inside
/// one accepted step.
#[allow(clippy::too_many_arguments)]
fn refine_crossing(
    t0: f64,
    p0: Point,
    v0: Point,
    t1: f64,
    p1: Point,
    v1: Point,
    origin: Point,
    normal: Point,
) -> (f64, Point) {
    let s_at = |t: f64| (hermite(t0, p0, v0, t1, p1, v1, t) - origin).dot(normal);
    let (mut lo, mut hi) = (t0, t1);
    // the step was accepted with s(lo) < 0 <= s(hi)
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if s_at(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, hermite(t0, p0, v0, t1, p1, v1, t))
}

/// Omega-limit classification backed by one forward integration. All
/// outcomes are numerical evidence, not proofs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum OmegaLimit {
    /// The orbit accumulates on the single zero `q`.
    FixedPoint(Point),
    /// The orbit escaped every bounded set the run could see.
    Empty,
    /// The orbit returned to its Poincaré section start.
    PeriodicOrbit {
        period: f64,
    },
    Undetermined,
}

pub fn classify_omega_limit(
    field: &FieldExpr,
    p0: Point,
    t_max: f64,
    params: &IntegrateParams,
) -> (OmegaLimit, Trajectory) {
    let traj = integrate(field, p0, t_max, params);
    let omega = match &traj.terminal {
        Terminal::ConvergedToPoint(q) => OmegaLimit::FixedPoint(*q),
        Terminal::Escaped { .. } => OmegaLimit::Empty,
        Terminal::PeriodicReturn { period } => OmegaLimit::PeriodicOrbit { period: *period },
        Terminal::BudgetExhausted | Terminal::DomainError { .. } => OmegaLimit::Undetermined,
    };
    (omega, traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_field;

    #[test]
    fn radial_converges_to_origin() {
        let radial = parse_field("-x", "-y").unwrap();
        let traj = integrate(
            &radial,
            Point::new(1.0, 1.0),
            40.0,
            &IntegrateParams::default(),
        );
        match traj.terminal {
            Terminal::ConvergedToPoint(q) => {
                assert!(q.norm() <= 1e-9, "converged to {}", q);
                assert!(traj.end().dist(q) <= 1e-6);
            }
            other => panic!("expected convergence, got {:?}", other),
        }
        // explicit solution e^{-t} (1,1) along the way
        for s in traj.states.iter().take_while(|s| s.t < 5.0) {
            let expect = Point::new((-s.t).exp(), (-s.t).exp());
            assert!(s.p.dist(expect) <= 1e-6 * (1.0 + expect.norm()));
        }
    }

    #[test]
    fn times_strictly_increase() {
        let radial = parse_field("-x", "-y").unwrap();
        let traj = integrate(
            &radial,
            Point::new(1.0, -2.0),
            10.0,
            &IntegrateParams::default(),
        );
        for w in traj.states.windows(2) {
            assert!(w[1].t > w[0].t);
        }
    }

    #[test]
    fn center_orbit_returns() {
        let x2 = parse_field("-(y-1)^3-1", "(x-1)^3+1").unwrap();
        let traj = integrate(
            &x2,
            Point::new(0.5, 0.0),
            100.0,
            &IntegrateParams::default(),
        );
        match traj.terminal {
            Terminal::PeriodicReturn { period } => assert!(period > 0.0),
            other => panic!("expected periodic return, got {:?}", other),
        }
        // trajectory ends on the section, within the return radius
        assert!(traj.end().dist(Point::new(0.5, 0.0)) <= 1e-4);
    }

    #[test]
    fn outward_field_escapes() {
        let outward = parse_field("x", "y").unwrap();
        let traj = integrate(
            &outward,
            Point::new(1.0, 0.0),
            50.0,
            &IntegrateParams::default(),
        );
        match traj.terminal {
            Terminal::Escaped { radius } => assert!(radius >= 1e3),
            other => panic!("expected escape, got {:?}", other),
        }
    }

    #[test]
    fn algebraic_decay_to_degenerate_zero() {
        // x' = -x^3 on the x axis decays like t^{-1/2}; a relaxed
        // convergence radius is needed at this slow approach
        let y_line = parse_field("-x^3", "-x^2*y").unwrap();
        let params = IntegrateParams {
            conv_radius: 1e-2,
            ..IntegrateParams::default()
        };
        let traj = integrate(&y_line, Point::new(1.0, 0.0), 1e4, &params);
        match traj.terminal {
            Terminal::ConvergedToPoint(q) => {
                assert!(q.norm() <= 1e-2, "polished zero at {}", q);
            }
            other => panic!("expected convergence, got {:?}", other),
        }
    }

    #[test]
    fn domain_error_terminal() {
        let h = parse_field("(-1 + (2/pi)*atan(y/x))*x", "(-1 + (2/pi)*atan(y/x))*y").unwrap();
        let traj = integrate(&h, Point::new(0.0, 1.0), 10.0, &IntegrateParams::default());
        assert!(matches!(traj.terminal, Terminal::DomainError { .. }));
    }

    #[test]
    fn omega_limit_classification() {
        let f = parse_field("-(x+1)^3+1", "-(x+1)^2*(y+1)+1").unwrap();
        let (omega, _) =
            classify_omega_limit(&f, Point::new(2.0, 2.0), 200.0, &IntegrateParams::default());
        match omega {
            OmegaLimit::FixedPoint(q) => assert!(q.norm() <= 1e-8),
            other => panic!("expected fixed point, got {:?}", other),
        }

        let outward = parse_field("x", "y").unwrap();
        let (omega, _) = classify_omega_limit(
            &outward,
            Point::new(1.0, 0.0),
            50.0,
            &IntegrateParams::default(),
        );
        assert_eq!(omega, OmegaLimit::Empty);

        let x2 = parse_field("-(y-1)^3-1", "(x-1)^3+1").unwrap();
        let (omega, _) = classify_omega_limit(
            &x2,
            Point::new(0.5, 0.0),
            100.0,
            &IntegrateParams::default(),
        );
        assert!(matches!(omega, OmegaLimit::PeriodicOrbit { .. }));

        // the saddle/center lattice conserves h = y^2 - y^4 - x^2 + x^4;
        // (0.1, 0.1) sits exactly on the h = 0 diagonal, the stable
        // separatrix of the saddle at the origin
        let z2 = parse_field("-2*y+4*y^3", "-2*x+4*x^3").unwrap();
        let (omega, _) = classify_omega_limit(
            &z2,
            Point::new(0.1, 0.1),
            100.0,
            &IntegrateParams::default(),
        );
        match omega {
            OmegaLimit::FixedPoint(q) => assert!(q.norm() <= 1e-6, "{:?}", q),
            OmegaLimit::Undetermined => {}
            other => panic!(
                "expected the separatrix to reach the saddle, got {:?}",
                other
            ),
        }

        // a level set enclosing only the center at (0, 1/sqrt 2) is closed
        let (omega, _) = classify_omega_limit(
            &z2,
            Point::new(0.05, 0.6),
            100.0,
            &IntegrateParams::default(),
        );
        assert!(
            matches!(omega, OmegaLimit::PeriodicOrbit { .. }),
            "got {:?}",
            omega
        );
    }

    #[test]
    fn backward_integration_reverses() {
        let radial = parse_field("-x", "-y").unwrap();
        let params = IntegrateParams {
            detect_return: false,
            r_escape: 50.0,
            ..IntegrateParams::default()
        };
        let traj = integrate_dir(
            &radial,
            Point::new(0.5, 0.0),
            10.0,
            Direction::Backward,
            &params,
        );
        // backward flow of a sink blows outward
        assert!(matches!(traj.terminal, Terminal::Escaped { .. }));
    }

    #[test]
    fn budget_exhausted_on_tiny_t_max() {
        let x2 = parse_field("-(y-1)^3-1", "(x-1)^3+1").unwrap();
        let traj = integrate(&x2, Point::new(0.5, 0.0), 0.01, &IntegrateParams::default());
        assert_eq!(traj.terminal, Terminal::BudgetExhausted);
    }
}
