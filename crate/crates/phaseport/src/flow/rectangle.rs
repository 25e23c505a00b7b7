//! Flow rectangles: compact regions bounded by two trajectory arcs of X
//! and two trajectory arcs of the orthogonal field X*.
//!
//! The flow of X enters through the first X*-arc and leaves through the
//! second one. The fourth corner is found by integrating X* from the end
//! of the entry-side X-arc until it crosses the X-trajectory through the
//! other entry corner; the crossing is polished by a two-parameter Newton
//! iteration on the pair of interpolated curves.
//!
//! Arc nodes carry position, velocity and acceleration, so quintic
//! Hermite resampling keeps the geometric error far below the quadrature
//! error of the checks run on these arcs.

use serde::Serialize;

use crate::expr::FieldExpr;
use crate::geom::{Mat2, Point};

/// One node of a refined arc: arc time, position, velocity dp/dt and
/// acceleration d2p/dt2 (= DX.X for a field arc, sign-independent).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ArcNode {
    pub t: f64,
    pub p: Point,
    pub v: Point,
    pub a: Point,
}

/// A trajectory arc stored densely enough for quintic Hermite resampling.
#[derive(Debug, Clone, Serialize)]
pub struct Arc {
    pub nodes: Vec<ArcNode>,
}

impl Arc {
    pub fn start(&self) -> Point {
        self.nodes.first().expect("arc start").p
    }

    pub fn end(&self) -> Point {
        self.nodes.last().expect("arc end").p
    }

    pub fn duration(&self) -> f64 {
        self.nodes.last().map(|n| n.t).unwrap_or(0.0)
    }

    fn segment(&self, t: f64) -> (&ArcNode, &ArcNode) {
        let nodes = &self.nodes;
        let idx = match nodes.binary_search_by(|n| n.t.total_cmp(&t)) {
            Ok(i) => i.min(nodes.len() - 2),
            Err(i) => (i.max(1) - 1).min(nodes.len() - 2),
        };
        (&nodes[idx], &nodes[idx + 1])
    }

    /// Position at arc time `t` by quintic Hermite interpolation.
    pub fn position(&self, t: f64) -> Point {
        let nodes = &self.nodes;
        if t <= nodes[0].t {
            return nodes[0].p;
        }
        if t >= nodes[nodes.len() - 1].t {
            return nodes[nodes.len() - 1].p;
        }
        let (a, b) = self.segment(t);
        quintic(a, b, t)
    }

    /// Velocity at arc time `t` (derivative of the interpolant).
    pub fn velocity(&self, t: f64) -> Point {
        let nodes = &self.nodes;
        if t <= nodes[0].t {
            return nodes[0].v;
        }
        if t >= nodes[nodes.len() - 1].t {
            return nodes[nodes.len() - 1].v;
        }
        let (a, b) = self.segment(t);
        quintic_deriv(a, b, t)
    }

    /// n+1 points uniformly spaced in arc time.
    pub fn resample(&self, n: usize) -> Vec<Point> {
        let t0 = self.nodes[0].t;
        let t1 = self.nodes[self.nodes.len() - 1].t;
        (0..=n)
            .map(|k| self.position(t0 + (t1 - t0) * k as f64 / n as f64))
            .collect()
    }

    /// Truncates the arc at time `t` with an exact end node.
    fn truncated(&self, t: f64, end: ArcNode) -> Arc {
        let mut nodes: Vec<ArcNode> = self.nodes.iter().copied().take_while(|n| n.t < t).collect();
        nodes.push(end);
        Arc { nodes }
    }
}

fn quintic(a: &ArcNode, b: &ArcNode, t: f64) -> Point {
    let dt = b.t - a.t;
    let s = (t - a.t) / dt;
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let h00 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h10 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h20 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
    let h01 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    let h11 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let h21 = 0.5 * s3 - s4 + 0.5 * s5;
    a.p * h00
        + a.v * (h10 * dt)
        + a.a * (h20 * dt * dt)
        + b.p * h01
        + b.v * (h11 * dt)
        + b.a * (h21 * dt * dt)
}

fn quintic_deriv(a: &ArcNode, b: &ArcNode, t: f64) -> Point {
    let dt = b.t - a.t;
    let s = (t - a.t) / dt;
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let dh00 = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
    let dh10 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
    let dh20 = s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4;
    let dh01 = 30.0 * s2 - 60.0 * s3 + 30.0 * s4;
    let dh11 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
    let dh21 = 1.5 * s2 - 4.0 * s3 + 2.5 * s4;
    (a.p * dh00
        + a.v * (dh10 * dt)
        + a.a * (dh20 * dt * dt)
        + b.p * dh01
        + b.v * (dh11 * dt)
        + b.a * (dh21 * dt * dt))
        * (1.0 / dt)
}

/// A compact rectangle R(p1, p2; q1, q2): bottom and top are X-arcs
/// [p1, p2] and [q1, q2], entry and exit are X*-arcs [p1, q1] and
/// [p2, q2]. The flow of X enters through the entry arc and leaves
/// through the exit arc.
#[derive(Debug, Clone, Serialize)]
pub struct FlowRectangle {
    pub p1: Point,
    pub p2: Point,
    pub q1: Point,
    pub q2: Point,
    /// X-arc from p1 to p2.
    pub bottom: Arc,
    /// X-arc from q1 to q2.
    pub top: Arc,
    /// X*-arc from p1 to q1 (flow enters here).
    pub entry: Arc,
    /// X*-arc from p2 to q2 (flow leaves here).
    pub exit: Arc,
    /// Worst corner mismatch over the four arc endpoints.
    pub corner_residual: f64,
}

impl FlowRectangle {
    /// Diameter of the rectangle's bounding box.
    pub fn diameter(&self) -> f64 {
        let mut xmin = f64::INFINITY;
        let mut xmax = f64::NEG_INFINITY;
        let mut ymin = f64::INFINITY;
        let mut ymax = f64::NEG_INFINITY;
        for arc in [&self.bottom, &self.top, &self.entry, &self.exit] {
            for n in &arc.nodes {
                xmin = xmin.min(n.p.x);
                xmax = xmax.max(n.p.x);
                ymin = ymin.min(n.p.y);
                ymax = ymax.max(n.p.y);
            }
        }
        (xmax - xmin).hypot(ymax - ymin)
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum RectangleError {
    #[error("degenerate rectangle: flow_time must be positive and transversal_time nonzero")]
    Degenerate,
    #[error("field norm fell to {norm} near {point}; rectangle needs ||X|| bounded away from 0")]
    ZeroNorm { point: Point, norm: f64 },
    #[error("exit arc failed to reach the top trajectory: {detail}")]
    FailedToClose { detail: String },
    #[error("domain error while building rectangle: {0}")]
    Domain(#[from] crate::expr::DomainError),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BuildParams {
    pub rtol: f64,
    pub atol: f64,
    /// Arcs must keep ||X|| at or above this.
    pub min_norm: f64,
    /// The top trajectory is integrated this many times longer than
    /// flow_time to give the exit arc something to hit.
    pub top_margin: f64,
    /// Exit-arc time budget as a multiple of |transversal_time|.
    pub exit_margin: f64,
    /// Corner mismatch bound as a fraction of the rectangle diameter.
    pub corner_tol_factor: f64,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams {
            rtol: 1e-10,
            atol: 1e-12,
            min_norm: 1e-6,
            top_margin: 4.0,
            exit_margin: 16.0,
            corner_tol_factor: 1e-8,
        }
    }
}

/// Full node data at a point of a (signed) field arc.
fn node_at(
    field: &FieldExpr,
    t: f64,
    p: Point,
    sign: f64,
) -> Result<ArcNode, crate::expr::DomainError> {
    let (x_val, jac) = field.eval_with_jacobian(p)?;
    Ok(ArcNode {
        t,
        p,
        v: x_val * sign,
        a: jac.mul_vec(x_val),
    })
}

/// Integrates dp/dt = sign * X(p) for exactly `duration`, recording dense
/// nodes; fails if the field norm drops below `min_norm` on the way.
fn flow_arc(
    field: &FieldExpr,
    p0: Point,
    duration: f64,
    sign: f64,
    params: &BuildParams,
) -> Result<Arc, RectangleError> {
    let first = node_at(field, 0.0, p0, sign)?;
    check_norm(&first, params)?;
    let mut nodes: Vec<ArcNode> = vec![first];

    let mut t = 0.0f64;
    let mut p = p0;
    let mut k1 = first.v;
    let mut h = (duration * 1e-3).clamp(1e-12, 0.01);

    let rhs = |p: Point| -> Result<Point, RectangleError> {
        let v = field.eval(p)?;
        Ok(v * sign)
    };

    let mut guard = 0usize;
    while t < duration {
        guard += 1;
        if guard > 2_000_000 {
            return Err(RectangleError::FailedToClose {
                detail: "arc integration stalled".to_string(),
            });
        }
        h = h.min(duration - t);
        let (y1, _k_new, err) = dopri_step(&rhs, p, k1, h, params)?;
        if err > 1.0 {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            continue;
        }
        t += h;
        p = y1;
        let node = node_at(field, t, p, sign)?;
        check_norm(&node, params)?;
        k1 = node.v;
        nodes.push(node);
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Ok(Arc { nodes })
}

fn check_norm(node: &ArcNode, params: &BuildParams) -> Result<(), RectangleError> {
    let norm = node.v.norm();
    if norm < params.min_norm {
        Err(RectangleError::ZeroNorm {
            point: node.p,
            norm,
        })
    } else {
        Ok(())
    }
}

/// One Dormand-Prince step returning (y1, FSAL derivative, scaled error).
fn dopri_step<F>(
    rhs: &F,
    p: Point,
    k1: Point,
    h: f64,
    params: &BuildParams,
) -> Result<(Point, Point, f64), RectangleError>
where
    F: Fn(Point) -> Result<Point, RectangleError>,
{
    use super::integrate::{A, E};
    let mut k = [Point::ORIGIN; 7];
    k[0] = k1;
    for s in 1..7 {
        let mut acc = Point::ORIGIN;
        for (j, kj) in k.iter().enumerate().take(s) {
            acc = acc + *kj * A[s][j];
        }
        k[s] = rhs(p + acc * h)?;
    }
    let y1 = p
        + (k[0] * A[6][0] + k[2] * A[6][2] + k[3] * A[6][3] + k[4] * A[6][4] + k[5] * A[6][5]) * h;
    let err_vec =
        (k[0] * E[0] + k[2] * E[2] + k[3] * E[3] + k[4] * E[4] + k[5] * E[5] + k[6] * E[6]) * h;
    let sk_x = params.atol + params.rtol * p.x.abs().max(y1.x.abs());
    let sk_y = params.atol + params.rtol * p.y.abs().max(y1.y.abs());
    let err = (((err_vec.x / sk_x).powi(2) + (err_vec.y / sk_y).powi(2)) * 0.5).sqrt();
    Ok((y1, k[6], err))
}

/// Builds the rectangle spanned by flowing p1 along X for `flow_time` and
/// along X* for `transversal_time` (sign selects the side). The exit arc
/// is integrated from p2 until it crosses the X-trajectory through q1.
pub fn build_rectangle(
    field: &FieldExpr,
    p1: Point,
    flow_time: f64,
    transversal_time: f64,
    params: &BuildParams,
) -> Result<FlowRectangle, RectangleError> {
    if flow_time <= 0.0 || transversal_time == 0.0 {
        return Err(RectangleError::Degenerate);
    }
    let star = field.orthogonal();
    let t_sign = transversal_time.signum();

    let entry = flow_arc(&star, p1, transversal_time.abs(), t_sign, params)?;
    let q1 = entry.end();
    let bottom = flow_arc(field, p1, flow_time, 1.0, params)?;
    let p2 = bottom.end();
    let top_full = flow_arc(field, q1, flow_time * params.top_margin, 1.0, params)?;

    // march an X*-arc from p2 until it crosses the top trajectory
    let (exit, q2, top_time) = march_exit(&star, p2, &top_full, transversal_time, params)?;
    let top_end = node_at(field, top_time, q2, 1.0)?;
    let top = top_full.truncated(top_time, top_end);

    let rect = FlowRectangle {
        p1,
        p2,
        q1,
        q2,
        corner_residual: {
            let exit_end = exit.end();
            let top_end = top.end();
            exit_end.dist(q2).max(top_end.dist(q2))
        },
        bottom,
        top,
        entry,
        exit,
    };
    let tol = params.corner_tol_factor * rect.diameter();
    if rect.corner_residual > tol {
        return Err(RectangleError::FailedToClose {
            detail: format!("corner residual {} exceeds {}", rect.corner_residual, tol),
        });
    }
    Ok(rect)
}

/// Integrates X* from p2 step by step, watching for an intersection with
/// the (densely stored) top trajectory, and polishes the crossing with a
/// Newton iteration on the two interpolants.
fn march_exit(
    star: &FieldExpr,
    p2: Point,
    top: &Arc,
    transversal_time: f64,
    params: &BuildParams,
) -> Result<(Arc, Point, f64), RectangleError> {
    let sign = transversal_time.signum();
    let budget = transversal_time.abs() * params.exit_margin;
    let grid = SegmentGrid::new(top);

    let rhs = |p: Point| -> Result<Point, RectangleError> {
        let v = star.eval(p)?;
        Ok(v * sign)
    };

    let first = node_at(star, 0.0, p2, sign)?;
    check_norm(&first, params)?;
    let mut nodes = vec![first];
    let mut t = 0.0f64;
    let mut p = p2;
    let mut k1 = first.v;
    let mut h = (transversal_time.abs() * 1e-3).clamp(1e-12, 0.01);

    let mut guard = 0usize;
    while t < budget {
        guard += 1;
        if guard > 2_000_000 {
            break;
        }
        h = h.min(budget - t);
        let (y1, _k_new, err) = dopri_step(&rhs, p, k1, h, params)?;
        if err > 1.0 {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            continue;
        }
        let step_start = p;
        let t_new = t + h;
        let node = node_at(star, t_new, y1, sign)?;
        check_norm(&node, params)?;
        nodes.push(node);

        // scan the top trajectory for a crossing with this step segment
        if let Some(seg_idx) = grid.first_hit(top, step_start, y1) {
            let exit_arc = Arc {
                nodes: nodes.clone(),
            };
            let s0 = 0.5 * (t + t_new);
            let u0 = 0.5 * (top.nodes[seg_idx].t + top.nodes[seg_idx + 1].t);
            if let Some((s, u)) = polish_crossing(&exit_arc, top, s0, u0) {
                // guard against grazing the start corner q1 itself
                if u > 1e-12 {
                    let q2 = top.position(u);
                    let exit_end = node_at(star, s, q2, sign)?;
                    let exit_cut = exit_arc.truncated(s, exit_end);
                    return Ok((exit_cut, q2, u));
                }
            }
        }

        t = t_new;
        p = y1;
        k1 = node.v;
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Err(RectangleError::FailedToClose {
        detail: format!("no crossing within X*-time {}", budget),
    })
}

/// Newton iteration for E(s) = T(u) on the two interpolated arcs.
fn polish_crossing(exit: &Arc, top: &Arc, s0: f64, u0: f64) -> Option<(f64, f64)> {
    let mut s = s0;
    let mut u = u0;
    let scale = 1.0 + exit.start().norm().max(top.start().norm());
    for _ in 0..30 {
        let e = exit.position(s);
        let tp = top.position(u);
        let f = e - tp;
        if f.norm() <= 1e-14 * scale {
            return Some((s, u));
        }
        let de = exit.velocity(s);
        let dt = top.velocity(u);
        // solve [de, -dt] (ds, du)^T = -f
        let m = Mat2::new(de.x, -dt.x, de.y, -dt.y);
        let delta = m.solve(-f)?;
        s += delta.x;
        u += delta.y;
        if !s.is_finite() || !u.is_finite() {
            return None;
        }
    }
    let residual = (exit.position(s) - top.position(u)).norm();
    if residual <= 1e-10 * scale {
        Some((s, u))
    } else {
        None
    }
}

/// Uniform-grid spatial index over the segments of an arc.
struct SegmentGrid {
    xmin: f64,
    ymin: f64,
    inv_cell: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

impl SegmentGrid {
    fn new(arc: &Arc) -> SegmentGrid {
        let mut xmin = f64::INFINITY;
        let mut xmax = f64::NEG_INFINITY;
        let mut ymin = f64::INFINITY;
        let mut ymax = f64::NEG_INFINITY;
        for n in &arc.nodes {
            xmin = xmin.min(n.p.x);
            xmax = xmax.max(n.p.x);
            ymin = ymin.min(n.p.y);
            ymax = ymax.max(n.p.y);
        }
        let pad = 1e-9 + 1e-9 * (xmax - xmin).max(ymax - ymin);
        xmin -= pad;
        ymin -= pad;
        xmax += pad;
        ymax += pad;
        let n_cells = 64usize;
        let cell = ((xmax - xmin).max(ymax - ymin) / n_cells as f64).max(1e-300);
        let nx = (((xmax - xmin) / cell).ceil() as usize + 1).max(1);
        let ny = (((ymax - ymin) / cell).ceil() as usize + 1).max(1);
        let mut cells = vec![Vec::new(); nx * ny];
        for (idx, w) in arc.nodes.windows(2).enumerate() {
            let (a, b) = (w[0].p, w[1].p);
            let i0 = (((a.x.min(b.x) - xmin) / cell).floor() as usize).min(nx - 1);
            let i1 = (((a.x.max(b.x) - xmin) / cell).floor() as usize).min(nx - 1);
            let j0 = (((a.y.min(b.y) - ymin) / cell).floor() as usize).min(ny - 1);
            let j1 = (((a.y.max(b.y) - ymin) / cell).floor() as usize).min(ny - 1);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    cells[j * nx + i].push(idx as u32);
                }
            }
        }
        SegmentGrid {
            xmin,
            ymin,
            inv_cell: 1.0 / cell,
            nx,
            ny,
            cells,
        }
    }

    /// First arc segment crossed by [a, b], if any.
    fn first_hit(&self, arc: &Arc, a: Point, b: Point) -> Option<usize> {
        let i0 = (((a.x.min(b.x) - self.xmin) * self.inv_cell)
            .floor()
            .max(0.0) as usize)
            .min(self.nx - 1);
        let i1 = (((a.x.max(b.x) - self.xmin) * self.inv_cell)
            .floor()
            .max(0.0) as usize)
            .min(self.nx - 1);
        let j0 = (((a.y.min(b.y) - self.ymin) * self.inv_cell)
            .floor()
            .max(0.0) as usize)
            .min(self.ny - 1);
        let j1 = (((a.y.max(b.y) - self.ymin) * self.inv_cell)
            .floor()
            .max(0.0) as usize)
            .min(self.ny - 1);
        let mut best: Option<usize> = None;
        for j in j0..=j1 {
            for i in i0..=i1 {
                for &seg in &self.cells[j * self.nx + i] {
                    let seg = seg as usize;
                    let (c, d) = (arc.nodes[seg].p, arc.nodes[seg + 1].p);
                    if segments_intersect(a, b, c, d) {
                        best = Some(best.map_or(seg, |cur: usize| cur.min(seg)));
                    }
                }
            }
        }
        best
    }
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let r = b - a;
    let s = d - c;
    let denom = r.cross(s);
    if denom == 0.0 {
        return false;
    }
    let t = (c - a).cross(s) / denom;
    let u = (c - a).cross(r) / denom;
    (-1e-12..=1.0 + 1e-12).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&u)
}
