//! Singularity location and classification.
//!
//! Singularities are zeros of the field. They are hunted with Newton
//! iterations seeded from grid cells where both components change sign or
//! where ||X|| dips below a threshold at a directional local minimum, then
//! deduplicated. An isolation probe around each converged root separates
//! genuinely isolated zeros from zero curves: on a small circle around an
//! isolated zero the field norm stays comparable to its maximum, while a
//! zero curve drags the minimum to (numerical) zero. Curves can only be
//! reported as "suspected" non-discrete sets; no finite computation
//! certifies a continuum of zeros.

use serde::Serialize;

use crate::expr::FieldExpr;
use crate::geom::{Complex, Mat2, Point, Rect};
use crate::spectral::merge_cells;

/// Local type of an isolated singularity, decided from the Jacobian
/// eigenvalues with tolerance `tol_zero`: hyperbolic kinds have both real
/// parts away from zero, the center type has vanishing trace with positive
/// determinant, and degenerate means the determinant itself vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LocalClass {
    HyperbolicSink,
    HyperbolicSource,
    HyperbolicSaddle,
    /// trace = 0, det > 0: simple singularity with purely imaginary
    /// spectrum; a center of the linearization.
    SimpleCenterType,
    /// det != 0 but not matching any case above (kept for completeness;
    /// unreachable for 2x2 real Jacobians classified by trace/det).
    SimpleOther,
    /// det = 0 within tolerance.
    Degenerate,
}

impl LocalClass {
    pub fn is_hyperbolic(self) -> bool {
        matches!(
            self,
            LocalClass::HyperbolicSink
                | LocalClass::HyperbolicSource
                | LocalClass::HyperbolicSaddle
        )
    }

    /// Simple means the Jacobian determinant does not vanish.
    pub fn is_simple(self) -> bool {
        !matches!(self, LocalClass::Degenerate)
    }
}

/// An isolated zero of the field together with its local data.
#[derive(Debug, Clone, Serialize)]
pub struct Singularity {
    pub location: Point,
    pub jacobian: Mat2,
    pub eigenvalues: [Complex; 2],
    pub local_class: LocalClass,
    /// ||X(location)|| after Newton refinement.
    pub newton_residual: f64,
}

/// Cardinality class of the singular set as far as the search can tell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TrichotomyClass {
    Empty,
    OnePoint,
    NonDiscreteSuspected,
    MultipleIsolated,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularityReport {
    pub isolated: Vec<Singularity>,
    pub nondiscrete_suspected: bool,
    /// Bounding boxes of connected low-norm cell chains backing the
    /// non-discreteness suspicion.
    pub nondiscrete_evidence: Vec<Rect>,
    pub trichotomy_class: TrichotomyClass,
    pub seeds_tried: usize,
    pub seeds_failed: usize,
}

/// Tunables for the singularity search.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SingularParams {
    /// A refined root must satisfy ||X(z)|| <= tol_root.
    pub tol_root: f64,
    pub max_newton_iter: usize,
    /// Roots closer than dedupe_radius_factor * diam(region) are merged.
    pub dedupe_radius_factor: f64,
    /// Cells whose center norm is below seed_threshold_factor * median
    /// grid norm become candidate seeds and low-norm chain members.
    pub seed_threshold_factor: f64,
    /// Minimum size of a connected low-norm cell component to count as a
    /// chain when paired with non-isolation evidence.
    pub chain_min: usize,
    /// Sign tolerance for the point classifier.
    pub tol_zero: f64,
}

impl Default for SingularParams {
    fn default() -> Self {
        SingularParams {
            tol_root: 1e-10,
            max_newton_iter: 50,
            dedupe_radius_factor: 1e-6,
            seed_threshold_factor: 0.1,
            chain_min: 8,
            tol_zero: 1e-9,
        }
    }
}

/// Error from [`classify_singularity`] when the point is not a zero.
#[derive(Debug, Clone, thiserror::Error)]
#[error("not a singularity: ||X({point})|| = {norm} exceeds {tol_root}")]
pub struct NotARoot {
    pub point: Point,
    pub norm: f64,
    pub tol_root: f64,
}

/// Classifies a point already known to be a zero of the field.
pub fn classify_singularity(
    field: &FieldExpr,
    z: Point,
    params: &SingularParams,
) -> Result<Singularity, NotARoot> {
    let v = field.eval(z).map_err(|_| NotARoot {
        point: z,
        norm: f64::INFINITY,
        tol_root: params.tol_root,
    })?;
    let norm = v.norm();
    if norm > params.tol_root {
        return Err(NotARoot {
            point: z,
            norm,
            tol_root: params.tol_root,
        });
    }
    let jac = field.jacobian(z).map_err(|_| NotARoot {
        point: z,
        norm: f64::INFINITY,
        tol_root: params.tol_root,
    })?;
    Ok(make_singularity(z, jac, norm, params.tol_zero))
}

fn make_singularity(z: Point, jac: Mat2, residual: f64, tol_zero: f64) -> Singularity {
    let trace = jac.trace();
    let det = jac.det();
    let local_class = if det < -tol_zero {
        LocalClass::HyperbolicSaddle
    } else if det > tol_zero {
        if trace < -tol_zero {
            LocalClass::HyperbolicSink
        } else if trace > tol_zero {
            LocalClass::HyperbolicSource
        } else {
            LocalClass::SimpleCenterType
        }
    } else {
        LocalClass::Degenerate
    };
    Singularity {
        location: z,
        jacobian: jac,
        eigenvalues: jac.eigenvalues(),
        local_class,
        newton_residual: residual,
    }
}

/// Damped Newton iteration for X(p) = 0 with a gradient fallback on
/// ||X||^2 where the Jacobian degenerates. Returns the refined point when
/// the residual meets tol_root.
pub(crate) fn newton_refine(
    field: &FieldExpr,
    start: Point,
    bounds: Rect,
    params: &SingularParams,
) -> Option<Point> {
    let mut p = start;
    let Ok(v0) = field.eval(p) else { return None };
    let mut fnorm = v0.norm();
    for _ in 0..params.max_newton_iter {
        if fnorm <= params.tol_root {
            return Some(p);
        }
        let Ok((v, jac)) = field.eval_with_jacobian(p) else {
            return None;
        };
        fnorm = v.norm();
        if fnorm <= params.tol_root {
            return Some(p);
        }
        let newton_dir = jac.solve(-v);
        let dir = match newton_dir {
            Some(d) => d,
            None => {
                // descend on ||X||^2
                let g = jac.transpose().mul_vec(v) * 2.0;
                let gn = g.norm();
                if gn == 0.0 {
                    return None;
                }
                -g * (fnorm / gn / gn.max(1.0))
            }
        };
        // damping: halve the step until the residual drops
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let cand = p + dir * t;
            if !bounds.contains(cand) {
                t *= 0.5;
                continue;
            }
            if let Ok(vc) = field.eval(cand) {
                if vc.norm() < fnorm {
                    p = cand;
                    fnorm = vc.norm();
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            return None;
        }
    }
    if fnorm <= params.tol_root {
        Some(p)
    } else {
        None
    }
}

/// Probes a circle around a converged root. Returns true when the root
/// looks isolated: the field norm on the circle never collapses relative
/// to its maximum there. A zero curve passing through the circle drives
/// the ratio to zero.
fn isolation_probe(field: &FieldExpr, z: Point, radius: f64) -> bool {
    let samples = 64;
    let mut min_norm = f64::INFINITY;
    let mut max_norm: f64 = 0.0;
    let mut valid = 0;
    for k in 0..samples {
        let theta = k as f64 / samples as f64 * std::f64::consts::TAU;
        let p = Point::new(z.x + radius * theta.cos(), z.y + radius * theta.sin());
        if let Ok(v) = field.eval(p) {
            let n = v.norm();
            min_norm = min_norm.min(n);
            max_norm = max_norm.max(n);
            valid += 1;
        }
    }
    if valid < samples / 2 || max_norm == 0.0 {
        return false;
    }
    min_norm > 1e-3 * max_norm
}

/// Locates the singular set of the field inside `region` on an n x n cell
/// grid (n >= 8): Newton runs from sign-change and low-norm seeds,
/// deduplication, isolation probes, and low-norm chain assembly.
pub fn find_singularities(
    field: &FieldExpr,
    region: Rect,
    n: usize,
    params: &SingularParams,
) -> SingularityReport {
    assert!(n >= 8, "singularity grid needs n >= 8");
    assert!(region.is_valid(), "singularity region is degenerate");

    let dx = region.width() / n as f64;
    let dy = region.height() / n as f64;

    // field values at the (n+1) x (n+1) cell corners
    let corner =
        |i: usize, j: usize| Point::new(region.xmin + i as f64 * dx, region.ymin + j as f64 * dy);
    let mut corners: Vec<Option<Point>> = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            corners.push(field.eval(corner(i, j)).ok());
        }
    }
    let corner_val = |i: usize, j: usize| corners[j * (n + 1) + i];

    // ||X|| at cell centers
    let center = |i: usize, j: usize| {
        Point::new(
            region.xmin + (i as f64 + 0.5) * dx,
            region.ymin + (j as f64 + 0.5) * dy,
        )
    };
    let mut center_norms: Vec<Option<f64>> = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            center_norms.push(field.eval(center(i, j)).ok().map(Point::norm));
        }
    }
    let norm_at = |i: usize, j: usize| center_norms[j * n + i];

    let mut valid_norms: Vec<f64> = center_norms.iter().flatten().copied().collect();
    valid_norms.sort_by(|a, b| a.total_cmp(b));
    let median = valid_norms
        .get(valid_norms.len() / 2)
        .copied()
        .unwrap_or(0.0);
    let seed_threshold = params.seed_threshold_factor * median;

    // seed selection
    let mut seeds: Vec<Point> = Vec::new();
    let mut low_cells = vec![false; n * n];
    for j in 0..n {
        for i in 0..n {
            let vals = [
                corner_val(i, j),
                corner_val(i + 1, j),
                corner_val(i, j + 1),
                corner_val(i + 1, j + 1),
            ];
            let sign_change = {
                let mut fx_pos = false;
                let mut fx_neg = false;
                let mut fy_pos = false;
                let mut fy_neg = false;
                let mut all_valid = true;
                for v in vals.iter() {
                    match v {
                        Some(v) => {
                            fx_pos |= v.x >= 0.0;
                            fx_neg |= v.x <= 0.0;
                            fy_pos |= v.y >= 0.0;
                            fy_neg |= v.y <= 0.0;
                        }
                        None => all_valid = false,
                    }
                }
                all_valid && fx_pos && fx_neg && fy_pos && fy_neg
            };

            let low_norm = matches!(norm_at(i, j), Some(nv) if nv <= seed_threshold);
            if low_norm {
                low_cells[j * n + i] = true;
            }
            // a directional local minimum catches valley lines that a full
            // 2d local-minimum test misses
            let dir_min = low_norm
                && match norm_at(i, j) {
                    Some(nv) => {
                        let le = |o: Option<f64>| o.map(|v| nv <= v).unwrap_or(true);
                        let min_x = (i == 0 || le(norm_at(i - 1, j)))
                            && (i + 1 >= n || le(norm_at(i + 1, j)));
                        let min_y = (j == 0 || le(norm_at(i, j - 1)))
                            && (j + 1 >= n || le(norm_at(i, j + 1)));
                        min_x || min_y
                    }
                    None => false,
                };

            if sign_change || dir_min {
                seeds.push(center(i, j));
            }
        }
    }

    // Newton from every seed, inside a slightly padded region
    let bounds = region.scaled(1.2);
    let mut converged: Vec<Point> = Vec::new();
    let mut seeds_failed = 0usize;
    for &seed in &seeds {
        match newton_refine(field, seed, bounds, params) {
            Some(root) => converged.push(root),
            None => seeds_failed += 1,
        }
    }

    // dedupe
    let dedupe_radius = params.dedupe_radius_factor * region.diameter();
    let mut roots: Vec<Point> = Vec::new();
    for &root in &converged {
        if !roots.iter().any(|r| r.dist(root) <= dedupe_radius) {
            roots.push(root);
        }
    }

    // Degenerate zeros stop Newton at slightly different points from
    // different seeds. Within one grid cell, two copies of the same zero
    // keep the field numerically zero at their midpoint; between distinct
    // zeros it rises. Structure below grid resolution is unresolvable
    // anyway, so the cell size bounds the merge.
    let merge_tol = 100.0 * params.tol_root;
    let cluster_radius = dx.max(dy);
    let mut merged = true;
    while merged {
        merged = false;
        'pairs: for i in 0..roots.len() {
            for j in (i + 1)..roots.len() {
                if roots[i].dist(roots[j]) > cluster_radius {
                    continue;
                }
                let mid = (roots[i] + roots[j]) * 0.5;
                let Ok(vm) = field.eval(mid) else { continue };
                if vm.norm() <= merge_tol {
                    let ri = field
                        .eval(roots[i])
                        .map(|v| v.norm())
                        .unwrap_or(f64::INFINITY);
                    let rj = field
                        .eval(roots[j])
                        .map(|v| v.norm())
                        .unwrap_or(f64::INFINITY);
                    if rj < ri {
                        roots[i] = roots[j];
                    }
                    roots.remove(j);
                    merged = true;
                    break 'pairs;
                }
            }
        }
    }

    // isolation probe per deduped root
    let cell = dx.max(dy);
    let probe_radius = 2.0 * cell;
    let mut isolated_roots: Vec<Point> = Vec::new();
    let mut nonisolated_roots: Vec<Point> = Vec::new();
    for &root in &roots {
        if isolation_probe(field, root, probe_radius) {
            isolated_roots.push(root);
        } else {
            nonisolated_roots.push(root);
        }
    }

    // low-norm chains: connected components of low cells that are big
    // enough and carry non-isolation evidence
    let chains = chain_components(&low_cells, n, params.chain_min);
    let cell_of = |p: Point| -> Option<usize> {
        let i = ((p.x - region.xmin) / dx).floor() as isize;
        let j = ((p.y - region.ymin) / dy).floor() as isize;
        if i < 0 || j < 0 || i >= n as isize || j >= n as isize {
            None
        } else {
            Some(j as usize * n + i as usize)
        }
    };
    let mut chain_cells = vec![false; n * n];
    let mut nondiscrete_suspected = false;
    for component in &chains {
        let has_nonisolated = nonisolated_roots
            .iter()
            .any(|&r| cell_of(r).map(|c| component.contains(&c)).unwrap_or(false));
        let distinct_roots_inside = roots
            .iter()
            .filter(|&&r| cell_of(r).map(|c| component.contains(&c)).unwrap_or(false))
            .count();
        if has_nonisolated || distinct_roots_inside >= params.chain_min {
            nondiscrete_suspected = true;
            for &c in component {
                chain_cells[c] = true;
            }
        }
    }
    // non-isolated roots are evidence on their own, chain or not
    if !nonisolated_roots.is_empty() {
        nondiscrete_suspected = true;
        for &r in &nonisolated_roots {
            if let Some(c) = cell_of(r) {
                chain_cells[c] = true;
            }
        }
    }
    let nondiscrete_evidence = merge_cells(&chain_cells, n, region, dx, dy);

    // classify the survivors
    let mut isolated: Vec<Singularity> = Vec::new();
    for &root in &isolated_roots {
        if let Ok((v, jac)) = field.eval_with_jacobian(root) {
            isolated.push(make_singularity(root, jac, v.norm(), params.tol_zero));
        }
    }
    isolated.sort_by(|a, b| {
        (a.location.x, a.location.y)
            .partial_cmp(&(b.location.x, b.location.y))
            .unwrap()
    });

    let trichotomy_class = if nondiscrete_suspected {
        TrichotomyClass::NonDiscreteSuspected
    } else {
        match isolated.len() {
            0 => TrichotomyClass::Empty,
            1 => TrichotomyClass::OnePoint,
            _ => TrichotomyClass::MultipleIsolated,
        }
    };

    SingularityReport {
        isolated,
        nondiscrete_suspected,
        nondiscrete_evidence,
        trichotomy_class,
        seeds_tried: seeds.len(),
        seeds_failed,
    }
}

/// Connected components (8-connectivity) of flagged cells with at least
/// `min_size` members, as cell index sets.
fn chain_components(flags: &[bool], n: usize, min_size: usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; flags.len()];
    let mut out = Vec::new();
    for start in 0..flags.len() {
        if !flags[start] || seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut comp = Vec::new();
        while let Some(idx) = stack.pop() {
            comp.push(idx);
            let (i, j) = ((idx % n) as isize, (idx / n) as isize);
            for dj in -1..=1 {
                for di in -1..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i + di, j + dj);
                    if ni < 0 || nj < 0 || ni >= n as isize || nj >= n as isize {
                        continue;
                    }
                    let nidx = nj as usize * n + ni as usize;
                    if flags[nidx] && !seen[nidx] {
                        seen[nidx] = true;
                        stack.push(nidx);
                    }
                }
            }
        }
        if comp.len() >= min_size {
            out.push(comp);
        }
    }
    out
}
