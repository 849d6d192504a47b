//! Flatten a [`Frac`] into a fast `f64` evaluator.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::expr::{Atom, Chart, Frac, Func, Poly, Sym};

#[derive(Clone, Debug)]
enum Slot {
    Coord(usize),
    Const(f64),
    Func(Func, Box<Compiled>),
    Pow(Box<Compiled>, f64),
}

type Terms = Vec<(f64, Vec<(usize, i32)>)>;

/// Numerator and denominator polynomials over a shared slot table.
#[derive(Clone, Debug)]
pub struct Compiled {
    slots: Vec<Slot>,
    num: Terms,
    den: Vec<(Terms, i32)>,
}

impl Compiled {
    /// `params` supplies values for parameters not bound on the chart.
    pub fn new(f: &Frac, chart: &Chart, params: &dyn Fn(&str) -> Option<f64>) -> Result<Compiled> {
        let mut index: BTreeMap<Sym, usize> = BTreeMap::new();
        let mut slots = Vec::new();
        let mut poly = |p: &Poly, slots: &mut Vec<Slot>| -> Result<Terms> {
            let mut out = Vec::with_capacity(p.len());
            for (m, c) in p.terms() {
                let mut fs = Vec::with_capacity(m.factors().len());
                for (s, e) in m.factors() {
                    let i = match index.get(s) {
                        Some(i) => *i,
                        None => {
                            slots.push(slot(s, chart, params)?);
                            index.insert(s.clone(), slots.len() - 1);
                            slots.len() - 1
                        }
                    };
                    fs.push((i, *e as i32));
                }
                out.push((c.to_f64().unwrap_or(f64::NAN), fs));
            }
            Ok(out)
        };
        let num = poly(f.num(), &mut slots)?;
        let mut den = Vec::new();
        for (p, k) in f.den() {
            den.push((poly(p, &mut slots)?, *k as i32));
        }
        Ok(Compiled { slots, num, den })
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let mut vals = Vec::with_capacity(self.slots.len());
        for s in &self.slots {
            vals.push(match s {
                Slot::Coord(i) => x[*i],
                Slot::Const(v) => *v,
                Slot::Func(k, c) => k.apply(c.eval(x)?),
                Slot::Pow(c, q) => {
                    let b = c.eval(x)?;
                    if *q < 0.0 && b.abs() < 1e-300 {
                        return Err(Error::Eval("negative power of zero".into()));
                    }
                    b.powf(*q)
                }
            });
        }
        let num = eval_terms(&self.num, &vals);
        let mut den = 1.0;
        for (t, k) in &self.den {
            den *= eval_terms(t, &vals).powi(*k);
        }
        if den.abs() < 1e-300 {
            return Err(Error::Eval("division by zero".into()));
        }
        let v = num / den;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Eval("non-finite value".into()))
        }
    }
}

fn eval_terms(t: &Terms, vals: &[f64]) -> f64 {
    t.iter()
        .map(|(c, fs)| fs.iter().fold(*c, |acc, (i, e)| acc * vals[*i].powi(*e)))
        .sum()
}

fn slot(s: &Sym, chart: &Chart, params: &dyn Fn(&str) -> Option<f64>) -> Result<Slot> {
    Ok(match s {
        Sym::Coord(n) => Slot::Coord(
            chart
                .coord_index(n)
                .ok_or_else(|| Error::UnknownIdentifier(n.to_string()))?,
        ),
        Sym::Param(n) => Slot::Const(
            chart
                .param_value(n)
                .and_then(|q| q.to_f64())
                .or_else(|| params(n))
                .ok_or_else(|| Error::UnboundParameter(n.to_string()))?,
        ),
        Sym::Atom(a) => match &**a {
            Atom::Func(k, u) => Slot::Func(*k, Box::new(Compiled::new(u, chart, params)?)),
            Atom::Pow(b, q) => Slot::Pow(
                Box::new(Compiled::new(b, chart, params)?),
                q.to_f64().unwrap_or(f64::NAN),
            ),
        },
    })
}

/// Parameter values as a lookup closure.
pub fn lookup(values: &[(Arc<str>, f64)]) -> impl Fn(&str) -> Option<f64> + '_ {
    move |n| values.iter().find(|(k, _)| &**k == n).map(|(_, v)| *v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agrees_with_tree_evaluation() {
        let c = Chart::new(&["x", "y", "z"]).unwrap().with_params(&["a"]).unwrap();
        for s in [
            "(x^2+y^2)/(x^2+y^2+z^2+1)^2",
            "exp(a*x)/(1+y^2) - sin(x - z)",
            "sqrt(x^2 + 1)*log(1 + y^2)",
        ] {
            let e = c.parse(s).unwrap();
            let f = Frac::from_expr(&e).unwrap();
            let vals = [(Arc::from("a"), 0.7)];
            let comp = Compiled::new(&f, &c, &lookup(&vals)).unwrap();
            let p = [0.3, -1.1, 0.5];
            let want = e.eval_at(&c, &p, &[("a", 0.7)]).unwrap();
            let got = comp.eval(&p).unwrap();
            assert!((want - got).abs() <= 1e-12 * want.abs().max(1.0), "{s}: {want} vs {got}");
        }
    }

    #[test]
    fn poles_are_errors() {
        let c = Chart::new(&["x"]).unwrap();
        let f = Frac::from_expr(&c.parse("1/x").unwrap()).unwrap();
        let comp = Compiled::new(&f, &c, &|_| None).unwrap();
        assert!(comp.eval(&[0.0]).is_err());
    }
}
