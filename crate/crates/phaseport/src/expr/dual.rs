//! Forward-mode dual numbers carrying both partial derivatives at once.
//!
//! Evaluating a component expression with `Dual2::var_x` / `Dual2::var_y`
//! seeds yields the value together with its exact d/dx and d/dy, which is
//! all a 2x2 Jacobian needs.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual2 {
    /// Value.
    pub v: f64,
    /// Partial derivative with respect to x.
    pub dx: f64,
    /// Partial derivative with respect to y.
    pub dy: f64,
}

impl Dual2 {
    pub fn constant(v: f64) -> Dual2 {
        Dual2 {
            v,
            dx: 0.0,
            dy: 0.0,
        }
    }

    /// The x coordinate as a seeded variable at value `v`.
    pub fn var_x(v: f64) -> Dual2 {
        Dual2 {
            v,
            dx: 1.0,
            dy: 0.0,
        }
    }

    /// The y coordinate as a seeded variable at value `v`.
    pub fn var_y(v: f64) -> Dual2 {
        Dual2 {
            v,
            dx: 0.0,
            dy: 1.0,
        }
    }

    pub fn exp(self) -> Dual2 {
        let e = self.v.exp();
        Dual2 {
            v: e,
            dx: e * self.dx,
            dy: e * self.dy,
        }
    }

    pub fn sin(self) -> Dual2 {
        let (s, c) = self.v.sin_cos();
        Dual2 {
            v: s,
            dx: c * self.dx,
            dy: c * self.dy,
        }
    }

    pub fn cos(self) -> Dual2 {
        let (s, c) = self.v.sin_cos();
        Dual2 {
            v: c,
            dx: -s * self.dx,
            dy: -s * self.dy,
        }
    }

    pub fn atan(self) -> Dual2 {
        let d = 1.0 / (1.0 + self.v * self.v);
        Dual2 {
            v: self.v.atan(),
            dx: d * self.dx,
            dy: d * self.dy,
        }
    }

    /// Two-argument arctangent; `self` is the y argument. Caller must rule
    /// out (0, 0), where the angle (and its derivative) is undefined.
    pub fn atan2(self, x: Dual2) -> Dual2 {
        let denom = x.v * x.v + self.v * self.v;
        Dual2 {
            v: self.v.atan2(x.v),
            dx: (x.v * self.dx - self.v * x.dx) / denom,
            dy: (x.v * self.dy - self.v * x.dy) / denom,
        }
    }

    /// Caller must rule out negative values.
    pub fn sqrt(self) -> Dual2 {
        let s = self.v.sqrt();
        let d = 0.5 / s;
        Dual2 {
            v: s,
            dx: d * self.dx,
            dy: d * self.dy,
        }
    }

    /// Integer power by repeated multiplication, so derivatives fall out of
    /// the product rule exactly. Caller must rule out v == 0 for n < 0.
    pub fn powi(self, n: i32) -> Dual2 {
        if n == 0 {
            return Dual2::constant(1.0);
        }
        let mut base = if n < 0 {
            Dual2::constant(1.0) / self
        } else {
            self
        };
        let mut k = n.unsigned_abs();
        let mut acc = Dual2::constant(1.0);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            k >>= 1;
            if k > 0 {
                base = base * base;
            }
        }
        acc
    }

    /// Real power with constant exponent. Caller must rule out v <= 0.
    pub fn powf(self, a: f64) -> Dual2 {
        let p = self.v.powf(a);
        let d = a * self.v.powf(a - 1.0);
        Dual2 {
            v: p,
            dx: d * self.dx,
            dy: d * self.dy,
        }
    }

    /// General power u^e = exp(e ln u). Caller must rule out u.v <= 0.
    pub fn pow_general(self, e: Dual2) -> Dual2 {
        let ln_u = self.v.ln();
        let p = (e.v * ln_u).exp();
        let factor_u = e.v / self.v;
        Dual2 {
            v: p,
            dx: p * (e.dx * ln_u + factor_u * self.dx),
            dy: p * (e.dy * ln_u + factor_u * self.dy),
        }
    }
}

impl Add for Dual2 {
    type Output = Dual2;
    fn add(self, o: Dual2) -> Dual2 {
        Dual2 {
            v: self.v + o.v,
            dx: self.dx + o.dx,
            dy: self.dy + o.dy,
        }
    }
}

impl Sub for Dual2 {
    type Output = Dual2;
    fn sub(self, o: Dual2) -> Dual2 {
        Dual2 {
            v: self.v - o.v,
            dx: self.dx - o.dx,
            dy: self.dy - o.dy,
        }
    }
}

impl Mul for Dual2 {
    type Output = Dual2;
    fn mul(self, o: Dual2) -> Dual2 {
        Dual2 {
            v: self.v * o.v,
            dx: self.dx * o.v + self.v * o.dx,
            dy: self.dy * o.v + self.v * o.dy,
        }
    }
}

impl Div for Dual2 {
    type Output = Dual2;
    fn div(self, o: Dual2) -> Dual2 {
        let q = self.v / o.v;
        Dual2 {
            v: q,
            dx: (self.dx - q * o.dx) / o.v,
            dy: (self.dy - q * o.dy) / o.v,
        }
    }
}

impl Neg for Dual2 {
    type Output = Dual2;
    fn neg(self) -> Dual2 {
        Dual2 {
            v: -self.v,
            dx: -self.dx,
            dy: -self.dy,
        }
    }
}
