//! Phase-portrait rendering to SVG.
//!
//! Streamlines are integrated polylines from an offset seed grid, run in
//! both time directions and clipped to a slightly padded view of the
//! region. Output is pure vector data: one root svg element with a
//! declared viewBox, paths for streamlines, and filled circles for
//! singularities colored by local class.

use std::fmt::Write as _;

use crate::expr::FieldExpr;
use crate::flow::{integrate_dir, Direction, IntegrateParams};
use crate::geom::{Point, Rect};
use crate::singular::{LocalClass, Singularity};

#[derive(Debug, Clone, Copy)]
pub struct PortraitOptions {
    /// Seeds per axis for the streamline grid.
    pub seeds_per_axis: usize,
    /// Time budget per direction per streamline.
    pub t_span: f64,
    /// Pixel width of the output; height follows the region aspect.
    pub width: u32,
    /// Upper bound on points kept per polyline.
    pub max_points: usize,
}

impl Default for PortraitOptions {
    fn default() -> Self {
        PortraitOptions {
            seeds_per_axis: 10,
            t_span: 20.0,
            width: 640,
            max_points: 600,
        }
    }
}

fn class_color(class: LocalClass) -> &'static str {
    match class {
        LocalClass::HyperbolicSink => "#1f77b4",
        LocalClass::HyperbolicSource => "#d62728",
        LocalClass::HyperbolicSaddle => "#ff7f0e",
        LocalClass::SimpleCenterType => "#2ca02c",
        LocalClass::SimpleOther => "#9467bd",
        LocalClass::Degenerate => "#7f7f7f",
    }
}

/// Renders streamlines and singularity markers into an SVG document
/// string.
pub fn render_portrait(
    field: &FieldExpr,
    region: Rect,
    singularities: &[Singularity],
    opts: &PortraitOptions,
) -> String {
    let width = opts.width.max(64) as f64;
    let height = (width * region.height() / region.width()).max(64.0);
    let to_px = |p: Point| -> (f64, f64) {
        (
            (p.x - region.xmin) / region.width() * width,
            height - (p.y - region.ymin) / region.height() * height,
        )
    };
    let view = region.scaled(1.05);

    let params = IntegrateParams {
        rtol: 1e-6,
        atol: 1e-9,
        r_escape: 20.0 * (1.0 + region.diameter()),
        max_steps: 20_000,
        detect_return: false,
        ..IntegrateParams::default()
    };

    let mut polylines: Vec<Vec<Point>> = Vec::new();
    let n = opts.seeds_per_axis.max(2);
    for j in 0..n {
        for i in 0..n {
            let seed = Point::new(
                region.xmin + (i as f64 + 0.5) * region.width() / n as f64,
                region.ymin + (j as f64 + 0.5) * region.height() / n as f64,
            );
            for direction in [Direction::Forward, Direction::Backward] {
                let traj = integrate_dir(field, seed, opts.t_span, direction, &params);
                let mut line: Vec<Point> = Vec::new();
                for state in &traj.states {
                    line.push(state.p);
                    if !view.contains(state.p) {
                        break;
                    }
                }
                if line.len() >= 2 {
                    polylines.push(decimate(line, opts.max_points));
                }
            }
        }
    }

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {:.0} {:.0}\" \
         width=\"{:.0}\" height=\"{:.0}\">",
        width, height, width, height
    );
    let _ = writeln!(
        svg,
        "<rect x=\"0\" y=\"0\" width=\"{:.0}\" height=\"{:.0}\" fill=\"white\"/>",
        width, height
    );
    for line in &polylines {
        let mut d = String::new();
        for (k, &p) in line.iter().enumerate() {
            let (x, y) = to_px(p);
            let _ = write!(d, "{}{:.2} {:.2}", if k == 0 { "M" } else { " L" }, x, y);
        }
        let _ = writeln!(
            svg,
            "<path d=\"{}\" fill=\"none\" stroke=\"#556\" stroke-width=\"1\" \
             stroke-opacity=\"0.75\"/>",
            d
        );
    }
    for s in singularities {
        if !region.contains(s.location) {
            continue;
        }
        let (cx, cy) = to_px(s.location);
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{}\" stroke=\"black\" \
             stroke-width=\"0.8\"/>",
            cx,
            cy,
            class_color(s.local_class)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Keeps at most `max_points` points, always retaining the endpoints.
fn decimate(line: Vec<Point>, max_points: usize) -> Vec<Point> {
    if line.len() <= max_points.max(2) {
        return line;
    }
    let last = line.len() - 1;
    let stride = (line.len() as f64 / (max_points - 1) as f64).ceil() as usize;
    let mut out: Vec<Point> = line.iter().copied().step_by(stride.max(1)).collect();
    if out.last().map(|p| p.dist(line[last]) > 0.0).unwrap_or(true) {
        out.push(line[last]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_field;
    use crate::singular::{find_singularities, SingularParams};

    #[test]
    fn portrait_is_single_rooted_svg() {
        let radial = parse_field("-x", "-y").unwrap();
        let region = Rect::centered(2.0);
        let report = find_singularities(&radial, region, 32, &SingularParams::default());
        let svg = render_portrait(
            &radial,
            region,
            &report.isolated,
            &PortraitOptions {
                seeds_per_axis: 4,
                t_span: 5.0,
                ..PortraitOptions::default()
            },
        );
        assert!(svg.starts_with("<svg "));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("viewBox=\"0 0 "));
        assert_eq!(svg.matches("<svg ").count(), 1);
        assert!(svg.contains("<circle"));
        assert!(svg.contains("<path"));
    }

    #[test]
    fn portrait_is_deterministic() {
        let z = parse_field("-2*y+4*y^3", "-2*x+4*x^3").unwrap();
        let region = Rect::centered(1.5);
        let opts = PortraitOptions {
            seeds_per_axis: 4,
            t_span: 4.0,
            ..PortraitOptions::default()
        };
        let a = render_portrait(&z, region, &[], &opts);
        let b = render_portrait(&z, region, &[], &opts);
        assert_eq!(a, b);
    }

    #[test]
    fn decimation_bounds_points() {
        let line: Vec<Point> = (0..5000)
            .map(|i| Point::new(i as f64, (i as f64).sin()))
            .collect();
        let out = decimate(line.clone(), 100);
        assert!(out.len() <= 102);
        assert_eq!(out[0], line[0]);
        assert_eq!(*out.last().unwrap(), *line.last().unwrap());
    }
}
