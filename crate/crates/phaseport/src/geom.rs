//! Small planar geometry types shared by every module: points, rectangles,
//! 2x2 matrices and complex eigenvalue pairs.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product, useful for orientation tests.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Axis-aligned rectangle used as an analysis region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Rect {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Option<Rect> {
        let r = Rect {
            xmin,
            xmax,
            ymin,
            ymax,
        };
        if r.is_valid() {
            Some(r)
        } else {
            None
        }
    }

    /// Square region [-h, h] x [-h, h].
    pub fn centered(h: f64) -> Rect {
        Rect {
            xmin: -h,
            xmax: h,
            ymin: -h,
            ymax: h,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.xmin.is_finite()
            && self.xmax.is_finite()
            && self.ymin.is_finite()
            && self.ymax.is_finite()
            && self.xmin < self.xmax
            && self.ymin < self.ymax
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    /// Rectangle scaled about its center by `factor`.
    pub fn scaled(&self, factor: f64) -> Rect {
        let c = self.center();
        let hw = 0.5 * self.width() * factor;
        let hh = 0.5 * self.height() * factor;
        Rect {
            xmin: c.x - hw,
            xmax: c.x + hw,
            ymin: c.y - hh,
            ymax: c.y + hh,
        }
    }
}

impl FromStr for Rect {
    type Err = String;

    /// Parses "xmin,xmax,ymin,ymax".
    fn from_str(s: &str) -> Result<Rect, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(format!(
                "expected 4 comma-separated numbers, got {}",
                parts.len()
            ));
        }
        let mut vals = [0.0f64; 4];
        for (i, part) in parts.iter().enumerate() {
            vals[i] = part
                .parse::<f64>()
                .map_err(|e| format!("bad number {:?}: {}", part, e))?;
        }
        Rect::new(vals[0], vals[1], vals[2], vals[3])
            .ok_or_else(|| "degenerate region: need xmin < xmax and ymin < ymax".to_string())
    }
}

/// 2x2 real matrix, row major: [[a, b], [c, d]].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Mat2 {
        Mat2 { a, b, c, d }
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul_vec(&self, v: Point) -> Point {
        Point::new(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a, self.c, self.b, self.d)
    }

    /// Largest absolute entry, used as a scale for singularity thresholds.
    pub fn max_abs(&self) -> f64 {
        self.a
            .abs()
            .max(self.b.abs())
            .max(self.c.abs())
            .max(self.d.abs())
    }

    /// Solves M x = rhs. Returns None when the determinant is negligible
    /// relative to the matrix scale.
    pub fn solve(&self, rhs: Point) -> Option<Point> {
        let det = self.det();
        let scale = self.max_abs();
        if det.abs() <= 1e-14 * scale * scale || det == 0.0 {
            return None;
        }
        Some(Point::new(
            (rhs.x * self.d - rhs.y * self.b) / det,
            (self.a * rhs.y - self.c * rhs.x) / det,
        ))
    }

    /// Eigenvalues from the characteristic polynomial `l^2 - tr l + det`.
    pub fn eigenvalues(&self) -> [Complex; 2] {
        let t = self.trace();
        let d = self.det();
        let disc = t * t - 4.0 * d;
        if disc >= 0.0 {
            let s = disc.sqrt();
            [
                Complex::new(0.5 * (t - s), 0.0),
                Complex::new(0.5 * (t + s), 0.0),
            ]
        } else {
            let s = (-disc).sqrt();
            [
                Complex::new(0.5 * t, -0.5 * s),
                Complex::new(0.5 * t, 0.5 * s),
            ]
        }
    }
}

/// A complex number; only used to report eigenvalue pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub fn new(re: f64, im: f64) -> Complex {
        Complex { re, im }
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im == 0.0 {
            write!(f, "{}", self.re)
        } else if self.im < 0.0 {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rect_parse() {
        let r: Rect = "-3,3,-2,2".parse().unwrap();
        assert_eq!(r, Rect::new(-3.0, 3.0, -2.0, 2.0).unwrap());
        assert!("1,0,0,1".parse::<Rect>().is_err());
        assert!("1,2,3".parse::<Rect>().is_err());
    }

    #[test]
    fn mat2_solve_and_eigen() {
        let m = Mat2::new(2.0, 1.0, 1.0, 3.0);
        let x = m.solve(Point::new(3.0, 5.0)).unwrap();
        let back = m.mul_vec(x);
        assert!((back.x - 3.0).abs() < 1e-12);
        assert!((back.y - 5.0).abs() < 1e-12);

        // trace -4, det 3 -> eigenvalues -3, -1
        let m = Mat2::new(-3.0, 0.0, -2.0, -1.0);
        let [l1, l2] = m.eigenvalues();
        assert!((l1.re + 3.0).abs() < 1e-12 && l1.im == 0.0);
        assert!((l2.re + 1.0).abs() < 1e-12 && l2.im == 0.0);

        // trace 0, det 9 -> +-3i
        let m = Mat2::new(0.0, -3.0, 3.0, 0.0);
        let [l1, l2] = m.eigenvalues();
        assert!(l1.re.abs() < 1e-12 && (l1.im + 3.0).abs() < 1e-12);
        assert!(l2.re.abs() < 1e-12 && (l2.im - 3.0).abs() < 1e-12);
    }

    #[test]
    fn singular_solve_is_none() {
        let m = Mat2::new(1.0, 2.0, 2.0, 4.0);
        assert!(m.solve(Point::new(1.0, 1.0)).is_none());
    }
}
