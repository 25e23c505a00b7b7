//! Expression ASTs for vector-field components.
//!
//! A field X = (f, g) is a pair of expressions over the variables x, y.
//! Expressions evaluate over plain `f64` or over [`Dual2`], which makes the
//! Jacobian exact up to floating-point rounding; no symbolic
//! differentiation is involved.

mod dual;
mod parse;

pub use dual::Dual2;
pub use parse::ParseError;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::geom::{Mat2, Point};

/// Expression AST. Constructed by [`parse_field`] or by the field
/// combinators below; immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Y,
    Pi,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
    Sqrt(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Atan(Box<Expr>),
    Atan2(Box<Expr>, Box<Expr>),
}

/// What went wrong while evaluating a subexpression, before the evaluation
/// point is attached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DomainViolation {
    DivisionByZero,
    Atan2AtOrigin,
    SqrtOfNegative,
    PowOfNonPositive,
    NonFinite,
}

impl fmt::Display for DomainViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainViolation::DivisionByZero => write!(f, "division by zero"),
            DomainViolation::Atan2AtOrigin => write!(f, "atan2 undefined at (0, 0)"),
            DomainViolation::SqrtOfNegative => write!(f, "square root of a negative value"),
            DomainViolation::PowOfNonPositive => {
                write!(f, "power with non-integer exponent needs a positive base")
            }
            DomainViolation::NonFinite => write!(f, "evaluation produced a non-finite value"),
        }
    }
}

/// Evaluation failure at a concrete point: which point, which
/// subexpression, and why.
#[derive(Debug, Clone, Error, Serialize)]
#[error("domain error at {point}: {violation} in `{subexpr}`")]
pub struct DomainError {
    pub point: Point,
    pub subexpr: String,
    pub violation: DomainViolation,
}

struct EvalError {
    subexpr: String,
    violation: DomainViolation,
}

/// Scalar abstraction so the same evaluator serves f64 and dual numbers.
trait Num: Copy {
    fn constant(c: f64) -> Self;
    fn re(self) -> f64;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn div(self, o: Self) -> Self;
    fn neg(self) -> Self;
    fn exp(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn atan(self) -> Self;
    fn atan2(self, x: Self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn pow_general(self, e: Self) -> Self;
}

impl Num for f64 {
    fn constant(c: f64) -> f64 {
        c
    }
    fn re(self) -> f64 {
        self
    }
    fn add(self, o: f64) -> f64 {
        self + o
    }
    fn sub(self, o: f64) -> f64 {
        self - o
    }
    fn mul(self, o: f64) -> f64 {
        self * o
    }
    fn div(self, o: f64) -> f64 {
        self / o
    }
    fn neg(self) -> f64 {
        -self
    }
    fn exp(self) -> f64 {
        f64::exp(self)
    }
    fn sin(self) -> f64 {
        f64::sin(self)
    }
    fn cos(self) -> f64 {
        f64::cos(self)
    }
    fn atan(self) -> f64 {
        f64::atan(self)
    }
    fn atan2(self, x: f64) -> f64 {
        f64::atan2(self, x)
    }
    fn sqrt(self) -> f64 {
        f64::sqrt(self)
    }
    fn powi(self, n: i32) -> f64 {
        // mirror the dual-number product chain so values agree bitwise
        if n == 0 {
            return 1.0;
        }
        let mut base = if n < 0 { 1.0 / self } else { self };
        let mut k = n.unsigned_abs();
        let mut acc = 1.0;
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            k >>= 1;
            if k > 0 {
                base *= base;
            }
        }
        acc
    }
    fn pow_general(self, e: f64) -> f64 {
        self.powf(e)
    }
}

impl Num for Dual2 {
    fn constant(c: f64) -> Dual2 {
        Dual2::constant(c)
    }
    fn re(self) -> f64 {
        self.v
    }
    fn add(self, o: Dual2) -> Dual2 {
        self + o
    }
    fn sub(self, o: Dual2) -> Dual2 {
        self - o
    }
    fn mul(self, o: Dual2) -> Dual2 {
        self * o
    }
    fn div(self, o: Dual2) -> Dual2 {
        self / o
    }
    fn neg(self) -> Dual2 {
        -self
    }
    fn exp(self) -> Dual2 {
        Dual2::exp(self)
    }
    fn sin(self) -> Dual2 {
        Dual2::sin(self)
    }
    fn cos(self) -> Dual2 {
        Dual2::cos(self)
    }
    fn atan(self) -> Dual2 {
        Dual2::atan(self)
    }
    fn atan2(self, x: Dual2) -> Dual2 {
        Dual2::atan2(self, x)
    }
    fn sqrt(self) -> Dual2 {
        Dual2::sqrt(self)
    }
    fn powi(self, n: i32) -> Dual2 {
        Dual2::powi(self, n)
    }
    fn pow_general(self, e: Dual2) -> Dual2 {
        Dual2::pow_general(self, e)
    }
}

impl Expr {
    /// Recognizes an exponent that is a literal integer (possibly negated),
    /// which is then evaluated by repeated multiplication.
    fn as_const_int(&self) -> Option<i32> {
        match self {
            Expr::Num(v) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => Some(*v as i32),
            Expr::Neg(inner) => inner.as_const_int().map(|n| -n),
            _ => None,
        }
    }

    fn eval_num<T: Num>(&self, x: T, y: T) -> Result<T, EvalError> {
        let fail = |violation: DomainViolation, node: &Expr| EvalError {
            subexpr: node.to_string(),
            violation,
        };
        let out = match self {
            Expr::Num(v) => T::constant(*v),
            Expr::X => x,
            Expr::Y => y,
            Expr::Pi => T::constant(std::f64::consts::PI),
            Expr::Neg(e) => e.eval_num(x, y)?.neg(),
            Expr::Add(a, b) => a.eval_num(x, y)?.add(b.eval_num(x, y)?),
            Expr::Sub(a, b) => a.eval_num(x, y)?.sub(b.eval_num(x, y)?),
            Expr::Mul(a, b) => a.eval_num(x, y)?.mul(b.eval_num(x, y)?),
            Expr::Div(a, b) => {
                let num = a.eval_num(x, y)?;
                let den = b.eval_num(x, y)?;
                if den.re() == 0.0 {
                    return Err(fail(DomainViolation::DivisionByZero, self));
                }
                num.div(den)
            }
            Expr::Pow(base, exponent) => {
                let u = base.eval_num(x, y)?;
                if let Some(n) = exponent.as_const_int() {
                    if n < 0 && u.re() == 0.0 {
                        return Err(fail(DomainViolation::DivisionByZero, self));
                    }
                    u.powi(n)
                } else {
                    let e = exponent.eval_num(x, y)?;
                    if u.re() <= 0.0 {
                        return Err(fail(DomainViolation::PowOfNonPositive, self));
                    }
                    u.pow_general(e)
                }
            }
            Expr::Exp(e) => e.eval_num(x, y)?.exp(),
            Expr::Sqrt(e) => {
                let u = e.eval_num(x, y)?;
                if u.re() < 0.0 {
                    return Err(fail(DomainViolation::SqrtOfNegative, self));
                }
                u.sqrt()
            }
            Expr::Sin(e) => e.eval_num(x, y)?.sin(),
            Expr::Cos(e) => e.eval_num(x, y)?.cos(),
            Expr::Atan(e) => e.eval_num(x, y)?.atan(),
            Expr::Atan2(a, b) => {
                let ya = a.eval_num(x, y)?;
                let xb = b.eval_num(x, y)?;
                if ya.re() == 0.0 && xb.re() == 0.0 {
                    return Err(fail(DomainViolation::Atan2AtOrigin, self));
                }
                ya.atan2(xb)
            }
        };
        if !out.re().is_finite() {
            return Err(fail(DomainViolation::NonFinite, self));
        }
        Ok(out)
    }

    /// Value at (x, y).
    pub fn eval(&self, p: Point) -> Result<f64, DomainError> {
        self.eval_num(p.x, p.y).map_err(|e| DomainError {
            point: p,
            subexpr: e.subexpr,
            violation: e.violation,
        })
    }

    /// Value plus both first partials at (x, y).
    pub fn eval_dual(&self, p: Point) -> Result<Dual2, DomainError> {
        self.eval_num(Dual2::var_x(p.x), Dual2::var_y(p.y))
            .map_err(|e| DomainError {
                point: p,
                subexpr: e.subexpr,
                violation: e.violation,
            })
    }

    /// Replaces the variables x and y by the given expressions.
    pub fn substitute(&self, x_repl: &Expr, y_repl: &Expr) -> Expr {
        match self {
            Expr::Num(v) => Expr::Num(*v),
            Expr::X => x_repl.clone(),
            Expr::Y => y_repl.clone(),
            Expr::Pi => Expr::Pi,
            Expr::Neg(e) => Expr::Neg(Box::new(e.substitute(x_repl, y_repl))),
            Expr::Add(a, b) => Expr::Add(
                Box::new(a.substitute(x_repl, y_repl)),
                Box::new(b.substitute(x_repl, y_repl)),
            ),
            Expr::Sub(a, b) => Expr::Sub(
                Box::new(a.substitute(x_repl, y_repl)),
                Box::new(b.substitute(x_repl, y_repl)),
            ),
            Expr::Mul(a, b) => Expr::Mul(
                Box::new(a.substitute(x_repl, y_repl)),
                Box::new(b.substitute(x_repl, y_repl)),
            ),
            Expr::Div(a, b) => Expr::Div(
                Box::new(a.substitute(x_repl, y_repl)),
                Box::new(b.substitute(x_repl, y_repl)),
            ),
            Expr::Pow(a, b) => Expr::Pow(
                Box::new(a.substitute(x_repl, y_repl)),
                Box::new(b.substitute(x_repl, y_repl)),
            ),
            Expr::Exp(e) => Expr::Exp(Box::new(e.substitute(x_repl, y_repl))),
            Expr::Sqrt(e) => Expr::Sqrt(Box::new(e.substitute(x_repl, y_repl))),
            Expr::Sin(e) => Expr::Sin(Box::new(e.substitute(x_repl, y_repl))),
            Expr::Cos(e) => Expr::Cos(Box::new(e.substitute(x_repl, y_repl))),
            Expr::Atan(e) => Expr::Atan(Box::new(e.substitute(x_repl, y_repl))),
            Expr::Atan2(a, b) => Expr::Atan2(
                Box::new(a.substitute(x_repl, y_repl)),
                Box::new(b.substitute(x_repl, y_repl)),
            ),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let prec = self.precedence();
        let parens = prec < min_prec;
        if parens {
            write!(f, "(")?;
        }
        match self {
            Expr::Num(v) => write!(f, "{}", v)?,
            Expr::X => write!(f, "x")?,
            Expr::Y => write!(f, "y")?,
            Expr::Pi => write!(f, "pi")?,
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_prec(f, 3)?;
            }
            Expr::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, "+")?;
                b.fmt_prec(f, 2)?;
            }
            Expr::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, "-")?;
                b.fmt_prec(f, 2)?;
            }
            Expr::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)?;
            }
            Expr::Div(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "/")?;
                b.fmt_prec(f, 3)?;
            }
            Expr::Pow(a, b) => {
                // left side must be an atom; right side is a factor
                a.fmt_prec(f, 5)?;
                write!(f, "^")?;
                b.fmt_prec(f, 3)?;
            }
            Expr::Exp(e) => write!(f, "exp({})", e)?,
            Expr::Sqrt(e) => write!(f, "sqrt({})", e)?,
            Expr::Sin(e) => write!(f, "sin({})", e)?,
            Expr::Cos(e) => write!(f, "cos({})", e)?,
            Expr::Atan(e) => write!(f, "atan({})", e)?,
            Expr::Atan2(a, b) => write!(f, "atan2({},{})", a, b)?,
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Subtracts a constant from an expression, keeping literals non-negative
/// so the printed form round-trips structurally.
fn minus_const(e: &Expr, c: f64) -> Expr {
    if c == 0.0 {
        e.clone()
    } else if c > 0.0 {
        Expr::Sub(Box::new(e.clone()), Box::new(Expr::Num(c)))
    } else {
        Expr::Add(Box::new(e.clone()), Box::new(Expr::Num(-c)))
    }
}

/// A planar vector field X = (f, g) given by two component expressions.
/// Immutable after construction; evaluation is pure, so values may be
/// shared freely across threads.
#[derive(Debug, Clone)]
pub struct FieldExpr {
    fx: Expr,
    fy: Expr,
    src_x: String,
    src_y: String,
}

impl FieldExpr {
    /// Parses the two component source strings.
    pub fn parse(fx_src: &str, fy_src: &str) -> Result<FieldExpr, ParseError> {
        let fx = parse::parse_expr(fx_src).map_err(|e| e.component("fx"))?;
        let fy = parse::parse_expr(fy_src).map_err(|e| e.component("fy"))?;
        Ok(FieldExpr {
            fx,
            fy,
            src_x: fx_src.to_string(),
            src_y: fy_src.to_string(),
        })
    }

    pub fn from_exprs(fx: Expr, fy: Expr) -> FieldExpr {
        let src_x = fx.to_string();
        let src_y = fy.to_string();
        FieldExpr {
            fx,
            fy,
            src_x,
            src_y,
        }
    }

    pub fn component_x(&self) -> &Expr {
        &self.fx
    }

    pub fn component_y(&self) -> &Expr {
        &self.fy
    }

    pub fn sources(&self) -> (&str, &str) {
        (&self.src_x, &self.src_y)
    }

    /// X(p) = (f(p), g(p)).
    pub fn eval(&self, p: Point) -> Result<Point, DomainError> {
        Ok(Point::new(self.fx.eval(p)?, self.fy.eval(p)?))
    }

    /// The Jacobian DX(p) = [[f_x, f_y], [g_x, g_y]], exact forward-mode
    /// derivatives up to rounding.
    pub fn jacobian(&self, p: Point) -> Result<Mat2, DomainError> {
        let (_, jac) = self.eval_with_jacobian(p)?;
        Ok(jac)
    }

    /// One pass computing both X(p) and DX(p).
    pub fn eval_with_jacobian(&self, p: Point) -> Result<(Point, Mat2), DomainError> {
        let f = self.fx.eval_dual(p)?;
        let g = self.fy.eval_dual(p)?;
        Ok((Point::new(f.v, g.v), Mat2::new(f.dx, f.dy, g.dx, g.dy)))
    }

    /// The constant-perturbed field p -> X(p) - w. Its Jacobian is the
    /// Jacobian of X everywhere.
    pub fn perturbed(&self, w: Point) -> FieldExpr {
        if w.x == 0.0 && w.y == 0.0 {
            return self.clone();
        }
        FieldExpr::from_exprs(minus_const(&self.fx, w.x), minus_const(&self.fy, w.y))
    }

    /// The orthogonal field X* = (-g, f); perpendicular to X with the same
    /// norm at every point.
    pub fn orthogonal(&self) -> FieldExpr {
        FieldExpr::from_exprs(Expr::Neg(Box::new(self.fy.clone())), self.fx.clone())
    }

    /// The field rotated a quarter turn, p -> R X(p) with R(x,y) = (-y,x).
    /// Identical to [`FieldExpr::orthogonal`]; kept as a separate entry
    /// point because gradient-field analysis reaches for it by this name.
    pub fn rotated(&self) -> FieldExpr {
        self.orthogonal()
    }

    /// The translated field p -> X(p - c), moving every feature of the
    /// phase portrait by +c.
    pub fn translated(&self, c: Point) -> FieldExpr {
        let x_repl = minus_const(&Expr::X, c.x);
        let y_repl = minus_const(&Expr::Y, c.y);
        FieldExpr::from_exprs(
            self.fx.substitute(&x_repl, &y_repl),
            self.fy.substitute(&x_repl, &y_repl),
        )
    }
}

/// Parses two component sources into a field. Convenience wrapper around
/// [`FieldExpr::parse`].
pub fn parse_field(fx_src: &str, fy_src: &str) -> Result<FieldExpr, ParseError> {
    FieldExpr::parse(fx_src, fy_src)
}
