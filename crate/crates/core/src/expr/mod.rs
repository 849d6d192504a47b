//! Scalar expressions over chart coordinates and named parameters.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

mod chart;
mod frac;
mod linalg;
mod parse;
mod poly;
mod zero;

pub use chart::Chart;
pub use frac::{Assumptions, Frac};
pub use linalg::{nullspace_q, RationalMatrix};
pub use parse::parse;
pub use poly::{Atom, Mono, Poly, Sym, Q};
pub use zero::{is_zero, is_zero_frac, TriState, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
        }
    }

    pub fn apply(self, v: f64) -> f64 {
        match self {
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Abs => v.abs(),
        }
    }
}

/// Immutable expression tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Num(Q),
    Coord(Arc<str>),
    Param(Arc<str>),
    Neg(Box<Expr>),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
    RPow(Box<Expr>, Q),
    Func(Func, Box<Expr>),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Num(Q::from_integer(n.into()))
    }

    pub fn coord(name: &str) -> Expr {
        Expr::Coord(Arc::from(name))
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(Arc::from(name))
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Num(q) if q.is_zero())
    }

    /// Partial derivative computed on the tree, without simplification.
    pub fn diff(&self, var: &str) -> Expr {
        let zero = || Expr::int(0);
        match self {
            Expr::Num(_) | Expr::Param(_) => zero(),
            Expr::Coord(n) => Expr::int(if &**n == var { 1 } else { 0 }),
            Expr::Neg(a) => Expr::Neg(Box::new(a.diff(var))),
            Expr::Add(xs) => Expr::Add(xs.iter().map(|x| x.diff(var)).collect()),
            Expr::Mul(xs) => {
                let mut terms = Vec::with_capacity(xs.len());
                for i in 0..xs.len() {
                    let mut fs = xs.clone();
                    fs[i] = xs[i].diff(var);
                    terms.push(Expr::Mul(fs));
                }
                Expr::Add(terms)
            }
            Expr::Div(a, b) => {
                let num = Expr::Add(vec![
                    Expr::Mul(vec![a.diff(var), (**b).clone()]),
                    Expr::Neg(Box::new(Expr::Mul(vec![(**a).clone(), b.diff(var)]))),
                ]);
                Expr::Div(Box::new(num), Box::new(Expr::Pow(b.clone(), 2)))
            }
            Expr::Pow(b, n) => {
                if *n == 0 {
                    return zero();
                }
                Expr::Mul(vec![
                    Expr::int(*n),
                    Expr::Pow(b.clone(), n - 1),
                    b.diff(var),
                ])
            }
            Expr::RPow(b, q) => Expr::Mul(vec![
                Expr::Num(q.clone()),
                Expr::RPow(b.clone(), q - Q::one()),
                b.diff(var),
            ]),
            Expr::Func(k, a) => {
                let da = a.diff(var);
                let outer = match k {
                    Func::Exp => self.clone(),
                    Func::Log => Expr::Div(Box::new(Expr::int(1)), a.clone()),
                    Func::Sin => Expr::Func(Func::Cos, a.clone()),
                    Func::Cos => Expr::Neg(Box::new(Expr::Func(Func::Sin, a.clone()))),
                    Func::Abs => Expr::Div(Box::new(self.clone()), a.clone()),
                };
                Expr::Mul(vec![outer, da])
            }
        }
    }

    /// IEEE double evaluation. `lookup` resolves coordinate and parameter
    /// names to values.
    pub fn eval(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64> {
        let v = self.eval_inner(lookup)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Eval(format!("non-finite value in {self}")))
        }
    }

    fn eval_inner(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64> {
        Ok(match self {
            Expr::Num(q) => q.to_f64().unwrap_or(f64::NAN),
            Expr::Coord(n) => lookup(n).ok_or_else(|| Error::UnknownIdentifier(n.to_string()))?,
            Expr::Param(n) => lookup(n).ok_or_else(|| Error::UnboundParameter(n.to_string()))?,
            Expr::Neg(a) => -a.eval_inner(lookup)?,
            Expr::Add(xs) => {
                let mut s = 0.0;
                for x in xs {
                    s += x.eval_inner(lookup)?;
                }
                s
            }
            Expr::Mul(xs) => {
                let mut s = 1.0;
                for x in xs {
                    s *= x.eval_inner(lookup)?;
                }
                s
            }
            Expr::Div(a, b) => {
                let d = b.eval_inner(lookup)?;
                if d.abs() < 1e-300 {
                    return Err(Error::Eval(format!("division by zero in {self}")));
                }
                a.eval_inner(lookup)? / d
            }
            Expr::Pow(b, n) => {
                let v = b.eval_inner(lookup)?;
                if *n < 0 && v.abs() < 1e-300 {
                    return Err(Error::Eval(format!("division by zero in {self}")));
                }
                v.powi(*n as i32)
            }
            Expr::RPow(b, q) => {
                let v = b.eval_inner(lookup)?;
                if q.is_negative() && v.abs() < 1e-300 {
                    return Err(Error::Eval(format!("division by zero in {self}")));
                }
                v.powf(q.to_f64().unwrap_or(f64::NAN))
            }
            Expr::Func(k, a) => k.apply(a.eval_inner(lookup)?),
        })
    }

    /// Evaluate against a chart point and parameter bindings.
    pub fn eval_at(&self, chart: &Chart, point: &[f64], params: &[(&str, f64)]) -> Result<f64> {
        if point.len() != chart.dim() {
            return Err(Error::Shape(format!(
                "point has {} entries, chart dimension is {}",
                point.len(),
                chart.dim()
            )));
        }
        self.eval(&|name| {
            chart
                .coord_index(name)
                .map(|i| point[i])
                .or_else(|| params.iter().find(|(n, _)| *n == name).map(|(_, v)| *v))
                .or_else(|| chart.param_value(name).and_then(|q| q.to_f64()))
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(_) => 1,
            Expr::Neg(_) => 2,
            Expr::Mul(_) | Expr::Div(..) => 3,
            Expr::Num(q) if !q.is_integer() || q.is_negative() => 3,
            Expr::Pow(..) | Expr::RPow(..) => 4,
            _ => 5,
        }
    }
}

/// Exact canonical form, printed back as a tree.
pub fn normalize(e: &Expr) -> Result<Expr> {
    Ok(Frac::from_expr(e)?.to_expr())
}

/// Canonical form plus the polynomials assumed nonvanishing on the way.
pub fn normalize_with_assumptions(e: &Expr) -> Result<(Expr, Vec<Expr>)> {
    let mut a = Assumptions::new();
    let f = Frac::from_expr_with(e, &mut a)?;
    Ok((
        f.to_expr(),
        a.into_iter()
            .map(|p| Frac::from_poly(p).to_expr())
            .collect(),
    ))
}

fn fmt_q(q: &Q, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if q.is_integer() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

struct Paren<'a>(&'a Expr, bool);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(q) => fmt_q(q, f),
            Expr::Coord(n) | Expr::Param(n) => write!(f, "{n}"),
            Expr::Neg(a) => write!(f, "-{}", Paren(a, a.precedence() < 4)),
            Expr::Add(xs) => {
                if xs.is_empty() {
                    return write!(f, "0");
                }
                for (i, x) in xs.iter().enumerate() {
                    if i == 0 {
                        write!(f, "{}", Paren(x, matches!(x, Expr::Add(_))))?;
                        continue;
                    }
                    match x {
                        Expr::Neg(a) => write!(f, " - {}", Paren(a, matches!(**a, Expr::Add(_))))?,
                        Expr::Num(q) if q.is_negative() => {
                            write!(f, " - ")?;
                            fmt_q(&-q, f)?;
                        }
                        _ => write!(f, " + {}", Paren(x, matches!(x, Expr::Add(_))))?,
                    }
                }
                Ok(())
            }
            Expr::Mul(xs) => {
                if xs.is_empty() {
                    return write!(f, "1");
                }
                for (i, x) in xs.iter().enumerate() {
                    if i == 0 {
                        let wrap = matches!(x, Expr::Add(_) | Expr::Mul(_));
                        write!(f, "{}", Paren(x, wrap))?;
                    } else {
                        write!(f, "*{}", Paren(x, x.precedence() < 4))?;
                    }
                }
                Ok(())
            }
            Expr::Div(a, b) => {
                let wrap_a = matches!(**a, Expr::Add(_));
                write!(f, "{}/{}", Paren(a, wrap_a), Paren(b, b.precedence() < 4))
            }
            Expr::Pow(b, n) => {
                let wrap = b.precedence() < 5;
                if *n < 0 {
                    write!(f, "{}^({n})", Paren(b, wrap))
                } else {
                    write!(f, "{}^{n}", Paren(b, wrap))
                }
            }
            Expr::RPow(b, q) => {
                write!(f, "{}^(", Paren(b, b.precedence() < 5))?;
                fmt_q(q, f)?;
                write!(f, ")")
            }
            Expr::Func(k, a) => write!(f, "{}({a})", k.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart3() -> Chart {
        Chart::new(&["x", "y", "z"]).unwrap()
    }

    #[test]
    fn tree_diff_agrees_with_canonical_diff() {
        let c = chart3();
        let e = parse("(x^2+y^2)/(x^2+y^2+z^2+1)^2", &c).unwrap();
        let tree = Frac::from_expr(&e.diff("z")).unwrap();
        let canon = Frac::from_expr(&e).unwrap().diff("z");
        assert!(tree.sub(&canon).is_zero());
        let expect = parse("-4*z*(x^2+y^2)/(x^2+y^2+z^2+1)^3", &c).unwrap();
        assert!(canon.sub(&Frac::from_expr(&expect).unwrap()).is_zero());
    }

    #[test]
    fn polynomial_rule() {
        let c = chart3();
        let d = parse("x^2*y", &c).unwrap().diff("x");
        let n = Frac::from_expr(&d).unwrap();
        assert_eq!(n, Frac::from_expr(&parse("2*x*y", &c).unwrap()).unwrap());
    }

    #[test]
    fn constant_kernel_has_zero_derivative() {
        let c = Chart::new(&["x"]).unwrap().with_params(&["a"]).unwrap();
        let e = parse("exp(a)", &c).unwrap();
        assert!(Frac::from_expr(&e).unwrap().diff("x").is_zero());
    }

    #[test]
    fn eval_examples() {
        let c = chart3();
        let e = parse("x*y", &c).unwrap();
        assert_eq!(e.eval_at(&c, &[2.0, 3.0, 0.0], &[]).unwrap(), 6.0);
        let e = parse("(x^2+y^2)/(x^2+y^2+z^2+1)^2", &c).unwrap();
        assert_eq!(e.eval_at(&c, &[1.0, 0.0, 0.0], &[]).unwrap(), 0.25);
        let e = parse("1/x", &c).unwrap();
        assert!(matches!(e.eval_at(&c, &[0.0, 1.0, 1.0], &[]), Err(Error::Eval(_))));
    }

    #[test]
    fn unbound_parameter_is_an_error() {
        let c = chart3().with_params(&["lambda"]).unwrap();
        let e = parse("lambda*x", &c).unwrap();
        assert!(matches!(
            e.eval_at(&c, &[1.0, 1.0, 1.0], &[]),
            Err(Error::UnboundParameter(_))
        ));
        assert_eq!(e.eval_at(&c, &[2.0, 1.0, 1.0], &[("lambda", 3.0)]).unwrap(), 6.0);
    }

    #[test]
    fn normalize_examples() {
        let c = chart3();
        let e = parse("(x+y)^2 - x^2 - 2*x*y - y^2", &c).unwrap();
        assert_eq!(normalize(&e).unwrap(), Expr::int(0));

        let (n, assumed) = normalize_with_assumptions(&parse("x/x", &c).unwrap()).unwrap();
        assert_eq!(n, Expr::int(1));
        assert_eq!(assumed, vec![Expr::coord("x")]);

        let e = parse("sin(x)^2 + cos(x)^2", &c).unwrap();
        let n = normalize(&e).unwrap();
        assert_ne!(n, Expr::int(1));
        assert!(n.to_string().contains("sin(x)"));
    }

    #[test]
    fn normalize_is_idempotent_on_fixtures() {
        let c = chart3().with_params(&["lambda"]).unwrap();
        for s in [
            "(x^2+y^2)/(x^2+y^2+z^2+1)^2",
            "2*x*z + lambda*y",
            "exp(x/(y-1)) + sqrt(x^2+1)/(3*z)",
            "1/(x*y) - 1/(x*y^2) + abs(-x)",
            "log(x^2+y^2)*cos(2*z - 3*x)",
        ] {
            let once = normalize(&parse(s, &c).unwrap()).unwrap();
            let twice = normalize(&once).unwrap();
            assert_eq!(once, twice, "{s}");
        }
    }
}
