//! Canonical rational functions: an expanded numerator over a product of
//! monic denominator factors.
//!
//! There is no multivariate gcd. Each denominator factor is cancelled against
//! the numerator by exact division only, and every factor that was ever
//! divided out is reported as a nonvanishing assumption. Deciding whether a
//! `Frac` is zero needs nothing more than looking at the numerator.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::{Atom, Mono, Poly, Sym, Q};
use super::{Expr, Func};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Frac {
    num: Poly,
    den: BTreeMap<Poly, u32>,
}

/// Records the polynomials a normalization had to assume nonzero.
pub type Assumptions = BTreeSet<Poly>;

fn qi(n: i64) -> Q {
    Q::from_integer(n.into())
}

/// Split `p^k` into monic content-free factors, returning the scalar that
/// was pulled out.
fn push_factor(den: &mut BTreeMap<Poly, u32>, p: &Poly, k: u32) -> Q {
    let content = p.monomial_content();
    for (s, e) in content.factors() {
        *den.entry(Poly::var(s.clone())).or_insert(0) += e * k;
    }
    let rest = if content.is_one() {
        p.clone()
    } else {
        p.div_mono(&content)
    };
    let (lc, monic) = rest.make_monic();
    if monic.as_constant().is_none() {
        *den.entry(monic).or_insert(0) += k;
    }
    num_traits::pow(lc, k as usize)
}

impl Frac {
    pub fn zero() -> Self {
        Frac::default()
    }

    pub fn one() -> Self {
        Frac::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Frac::from_poly(Poly::constant(c))
    }

    pub fn int(n: i64) -> Self {
        Frac::constant(qi(n))
    }

    pub fn from_poly(p: Poly) -> Self {
        Frac {
            num: p,
            den: BTreeMap::new(),
        }
    }

    pub fn coord(name: &str) -> Self {
        Frac::from_poly(Poly::var(Sym::coord(name)))
    }

    pub fn param(name: &str) -> Self {
        Frac::from_poly(Poly::var(Sym::param(name)))
    }

    fn atom(a: Atom) -> Self {
        Frac::from_poly(Poly::var(Sym::Atom(Arc::new(a))))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &BTreeMap<Poly, u32> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_empty() && self.num.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// True when numerator and denominator are free of opaque kernels.
    pub fn is_rational(&self) -> bool {
        !self.num.has_atoms() && self.den.keys().all(|p| !p.has_atoms())
    }

    /// True when there is no denominator and no kernel.
    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty() && !self.num.has_atoms()
    }

    /// Every top-level variable in numerator or denominator.
    pub fn syms(&self) -> BTreeSet<Sym> {
        let mut s = self.num.syms();
        for p in self.den.keys() {
            s.extend(p.syms());
        }
        s
    }

    /// Names of chart coordinates and parameters anywhere in the expression,
    /// including inside kernel arguments.
    pub fn free_names(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<Arc<str>>) {
        for s in self.syms() {
            match s {
                Sym::Coord(n) | Sym::Param(n) => {
                    out.insert(n);
                }
                Sym::Atom(a) => match &*a {
                    Atom::Func(_, u) | Atom::Pow(u, _) => u.collect_names(out),
                },
            }
        }
    }

    fn build(num: Poly, den: BTreeMap<Poly, u32>) -> Frac {
        if num.is_zero() {
            return Frac::zero();
        }
        let mut num = num;
        let mut kept = BTreeMap::new();
        for (p, k) in den {
            let mut k = k;
            while k > 0 {
                match num.div_exact(&p) {
                    Some(q) => {
                        num = q;
                        k -= 1;
                    }
                    None => break,
                }
            }
            if k > 0 {
                kept.insert(p, k);
            }
        }
        Frac { num, den: kept }
    }

    fn den_product(den: &BTreeMap<Poly, u32>, skip: &BTreeMap<Poly, u32>) -> Poly {
        let mut acc = Poly::one();
        for (p, k) in den {
            let have = skip.get(p).copied().unwrap_or(0);
            if *k > have {
                acc = &acc * &p.pow(k - have);
            }
        }
        acc
    }

    pub fn add(&self, other: &Frac) -> Frac {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            return Frac::build(&self.num + &other.num, self.den.clone());
        }
        let mut lcm = self.den.clone();
        for (p, k) in &other.den {
            let e = lcm.entry(p.clone()).or_insert(0);
            *e = (*e).max(*k);
        }
        let a = &self.num * &Frac::den_product(&lcm, &self.den);
        let b = &other.num * &Frac::den_product(&lcm, &other.den);
        Frac::build(&a + &b, lcm)
    }

    pub fn neg(&self) -> Frac {
        Frac {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Frac) -> Frac {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Q) -> Frac {
        if c.is_zero() {
            return Frac::zero();
        }
        Frac {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Frac) -> Frac {
        if self.is_zero() || other.is_zero() {
            return Frac::zero();
        }
        let mut den = self.den.clone();
        for (p, k) in &other.den {
            *den.entry(p.clone()).or_insert(0) += k;
        }
        let num = &self.num * &other.num;
        if den.is_empty() {
            return Frac { num, den };
        }
        Frac::build(num, den)
    }

    /// `1/self`, recording the new denominator factors in `assume`.
    pub fn recip_with(&self, assume: &mut Assumptions) -> Result<Frac> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut den = BTreeMap::new();
        let lc = push_factor(&mut den, &self.num, 1);
        for p in den.keys() {
            assume.insert(p.clone());
        }
        let num = Frac::den_product(&self.den, &BTreeMap::new()).scale(&lc.recip());
        Ok(Frac::build(num, den))
    }

    pub fn recip(&self) -> Result<Frac> {
        self.recip_with(&mut Assumptions::new())
    }

    pub fn div(&self, other: &Frac) -> Result<Frac> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn powi(&self, n: i64) -> Result<Frac> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let n = n as u32;
        if n == 0 {
            return Ok(Frac::one());
        }
        Ok(Frac {
            num: self.num.pow(n),
            den: self.den.iter().map(|(p, k)| (p.clone(), k * n)).collect(),
        })
    }

    /// Apply an opaque kernel, folding the few exact constant cases.
    pub fn func(kind: Func, arg: &Frac) -> Result<Frac> {
        if let Some(c) = arg.as_constant() {
            match kind {
                Func::Exp if c.is_zero() => return Ok(Frac::one()),
                Func::Log if c.is_one() => return Ok(Frac::zero()),
                Func::Log if !c.is_positive() => {
                    return Err(Error::Eval(format!("log of non-positive constant {c}")))
                }
                Func::Sin if c.is_zero() => return Ok(Frac::zero()),
                Func::Cos if c.is_zero() => return Ok(Frac::one()),
                Func::Abs => return Ok(Frac::constant(c.abs())),
                _ => {}
            }
        }
        let negative = arg.num.leading().is_some_and(|(_, c)| c.is_negative());
        match kind {
            Func::Abs | Func::Cos if negative => Ok(Frac::atom(Atom::Func(kind, arg.neg()))),
            Func::Sin if negative => Ok(Frac::atom(Atom::Func(kind, arg.neg())).neg()),
            _ => Ok(Frac::atom(Atom::Func(kind, arg.clone()))),
        }
    }

    /// `base^q` for rational `q`. The fractional part of the exponent stays
    /// an opaque kernel `base^r` with `0 < r < 1`.
    pub fn rpow(base: &Frac, q: &Q) -> Result<Frac> {
        // (b^r)^q = b^(rq) whenever b^r was defined.
        if base.den.is_empty() && base.num.len() == 1 {
            let (m, c) = base.num.leading().unwrap();
            if c.is_one() {
                if let [(Sym::Atom(a), 1)] = m.factors() {
                    if let Atom::Pow(b, r) = &**a {
                        return Frac::rpow(b, &(r * q));
                    }
                }
            }
        }
        if q.is_integer() {
            let n = q
                .to_integer()
                .to_i64()
                .ok_or_else(|| Error::Unsupported("exponent too large".into()))?;
            return base.powi(n);
        }
        if base.is_zero() {
            return if q.is_positive() {
                Ok(Frac::zero())
            } else {
                Err(Error::DivisionByZero)
            };
        }
        if let Some(c) = base.as_constant() {
            if c.is_one() {
                return Ok(Frac::one());
            }
            if let Some(r) = exact_root(&c, q) {
                return Ok(Frac::constant(r));
            }
        }
        let n = q.floor();
        let r = q - &n;
        let whole = base.powi(n.to_integer().to_i64().unwrap_or(0))?;
        Ok(whole.mul(&Frac::atom(Atom::Pow(base.clone(), r))))
    }

    /// Partial derivative with respect to a chart coordinate.
    pub fn diff(&self, var: &str) -> Frac {
        let dn = poly_deriv(&self.num, var);
        if self.den.is_empty() {
            return dn;
        }
        let mut acc = dn;
        let n = Frac::from_poly(self.num.clone());
        for (p, k) in &self.den {
            let dp = poly_deriv(p, var);
            if dp.is_zero() {
                continue;
            }
            let mut one_over_p = BTreeMap::new();
            one_over_p.insert(p.clone(), 1);
            let term = Frac {
                num: n.num.scale(&Q::from_integer((*k).into())),
                den: one_over_p,
            };
            acc = acc.sub(&term.mul(&dp));
        }
        let inv = Frac {
            num: Poly::one(),
            den: self.den.clone(),
        };
        acc.mul(&inv)
    }

    /// Substitute parameter values and re-normalize.
    pub fn bind_params(&self, values: &BTreeMap<String, Q>) -> Result<Frac> {
        if values.is_empty() {
            return Ok(self.clone());
        }
        self.map_syms(&mut |s| match s {
            Sym::Param(n) => Ok(values.get(&**n).map(|q| Frac::constant(q.clone()))),
            _ => Ok(None),
        })
    }

    /// Rebuild after replacing some variables, recursing into kernels.
    pub fn map_syms(&self, f: &mut dyn FnMut(&Sym) -> Result<Option<Frac>>) -> Result<Frac> {
        let mut cache: BTreeMap<Sym, Frac> = BTreeMap::new();
        let mut lookup = |s: &Sym| -> Result<Frac> {
            if let Some(v) = cache.get(s) {
                return Ok(v.clone());
            }
            let v = match f(s)? {
                Some(v) => v,
                None => match s {
                    Sym::Atom(a) => match &**a {
                        Atom::Func(k, u) => Frac::func(*k, &u.map_syms(f)?)?,
                        Atom::Pow(b, q) => Frac::rpow(&b.map_syms(f)?, q)?,
                    },
                    _ => Frac::from_poly(Poly::var(s.clone())),
                },
            };
            cache.insert(s.clone(), v.clone());
            Ok(v)
        };
        let subst = |p: &Poly, lookup: &mut dyn FnMut(&Sym) -> Result<Frac>| -> Result<Frac> {
            let mut acc = Frac::zero();
            for (m, c) in p.terms() {
                let mut t = Frac::constant(c.clone());
                for (s, e) in m.factors() {
                    t = t.mul(&lookup(s)?.powi(*e as i64)?);
                }
                acc = acc.add(&t);
            }
            Ok(acc)
        };
        let mut out = subst(&self.num, &mut lookup)?;
        for (p, k) in &self.den {
            let v = subst(p, &mut lookup)?;
            out = out.mul(&v.powi(-(*k as i64))?);
        }
        Ok(out)
    }

    pub fn from_expr(e: &Expr) -> Result<Frac> {
        Frac::from_expr_with(e, &mut Assumptions::new())
    }

    /// Normalize an expression tree, collecting every polynomial that had to
    /// be inverted.
    pub fn from_expr_with(e: &Expr, assume: &mut Assumptions) -> Result<Frac> {
        Ok(match e {
            Expr::Num(q) => Frac::constant(q.clone()),
            Expr::Coord(n) => Frac::from_poly(Poly::var(Sym::Coord(n.clone()))),
            Expr::Param(n) => Frac::from_poly(Poly::var(Sym::Param(n.clone()))),
            Expr::Neg(a) => Frac::from_expr_with(a, assume)?.neg(),
            Expr::Add(xs) => {
                let mut acc = Frac::zero();
                for x in xs {
                    acc = acc.add(&Frac::from_expr_with(x, assume)?);
                }
                acc
            }
            Expr::Mul(xs) => {
                let mut acc = Frac::one();
                for x in xs {
                    acc = acc.mul(&Frac::from_expr_with(x, assume)?);
                }
                acc
            }
            Expr::Div(a, b) => {
                let a = Frac::from_expr_with(a, assume)?;
                let b = Frac::inverse_of(b, assume)?;
                a.mul(&b)
            }
            Expr::Pow(b, n) => {
                if *n >= 0 {
                    Frac::from_expr_with(b, assume)?.powi(*n)?
                } else {
                    Frac::inverse_of(b, assume)?.powi(-*n)?
                }
            }
            Expr::RPow(b, q) => {
                let base = Frac::from_expr_with(b, assume)?;
                if q.is_negative() {
                    for p in base.num_factors() {
                        assume.insert(p);
                    }
                }
                Frac::rpow(&base, q)?
            }
            Expr::Func(k, a) => {
                let u = Frac::from_expr_with(a, assume)?;
                if matches!(k, Func::Log) {
                    for p in u.num_factors() {
                        assume.insert(p);
                    }
                }
                Frac::func(*k, &u)?
            }
        })
    }

    /// `1/e`, inverting products factor by factor so that denominators keep
    /// the factorization the expression was written with.
    fn inverse_of(e: &Expr, assume: &mut Assumptions) -> Result<Frac> {
        match e {
            Expr::Mul(xs) => {
                let mut acc = Frac::one();
                for x in xs {
                    acc = acc.mul(&Frac::inverse_of(x, assume)?);
                }
                Ok(acc)
            }
            Expr::Pow(b, n) if *n >= 0 => Frac::inverse_of(b, assume)?.powi(*n),
            Expr::Div(a, b) => {
                let num = Frac::from_expr_with(b, assume)?;
                Ok(num.mul(&Frac::inverse_of(a, assume)?))
            }
            Expr::Neg(a) => Ok(Frac::inverse_of(a, assume)?.neg()),
            _ => Frac::from_expr_with(e, assume)?.recip_with(assume),
        }
    }

    fn num_factors(&self) -> Vec<Poly> {
        let mut den = BTreeMap::new();
        if !self.num.is_zero() {
            push_factor(&mut den, &self.num, 1);
        }
        den.into_keys().collect()
    }

    /// The denominator factors, each assumed nonzero.
    pub fn den_factors(&self) -> impl Iterator<Item = &Poly> {
        self.den.keys()
    }

    pub fn to_expr(&self) -> Expr {
        let num = poly_to_expr(&self.num);
        if self.den.is_empty() {
            return num;
        }
        let mut fs: Vec<Expr> = self
            .den
            .iter()
            .map(|(p, k)| {
                let b = poly_to_expr(p);
                if *k == 1 {
                    b
                } else {
                    Expr::Pow(Box::new(b), *k as i64)
                }
            })
            .collect();
        let den = if fs.len() == 1 {
            fs.pop().unwrap()
        } else {
            Expr::Mul(fs)
        };
        Expr::Div(Box::new(num), Box::new(den))
    }
}

fn exact_root(c: &Q, q: &Q) -> Option<Q> {
    // c^(p/d) is rational iff numerator and denominator are perfect d-th powers.
    let d = q.denom().to_u32()?;
    let p = q.numer().to_i64()?;
    if c.is_negative() {
        return None;
    }
    let root = |n: &BigInt| -> Option<BigInt> {
        let r = n.nth_root(d);
        (num_traits::pow(r.clone(), d as usize) == *n).then_some(r)
    };
    let r = Q::new(root(c.numer())?, root(c.denom())?);
    if p >= 0 {
        Some(num_traits::pow(r, p as usize))
    } else if r.is_zero() {
        None
    } else {
        Some(num_traits::pow(r.recip(), (-p) as usize))
    }
}

fn sym_deriv(s: &Sym, var: &str) -> Frac {
    match s {
        Sym::Coord(n) if &**n == var => Frac::one(),
        Sym::Coord(_) | Sym::Param(_) => Frac::zero(),
        Sym::Atom(a) => {
            let this = Frac::from_poly(Poly::var(s.clone()));
            match &**a {
                Atom::Func(k, u) => {
                    let du = u.diff(var);
                    if du.is_zero() {
                        return Frac::zero();
                    }
                    let inner = match k {
                        Func::Exp => this,
                        Func::Log => u.recip().expect("log argument is nonzero"),
                        Func::Sin => Frac::func(Func::Cos, u).expect("cos"),
                        Func::Cos => Frac::func(Func::Sin, u).expect("sin").neg(),
                        Func::Abs => this.mul(&u.recip().expect("abs argument is nonzero")),
                    };
                    inner.mul(&du)
                }
                Atom::Pow(b, q) => {
                    let db = b.diff(var);
                    if db.is_zero() {
                        return Frac::zero();
                    }
                    this.mul(&db)
                        .mul(&b.recip().expect("power base is nonzero"))
                        .scale(q)
                }
            }
        }
    }
}

fn poly_deriv(p: &Poly, var: &str) -> Frac {
    let mut acc = Frac::zero();
    for s in p.syms() {
        let ds = sym_deriv(&s, var);
        if ds.is_zero() {
            continue;
        }
        acc = acc.add(&Frac::from_poly(p.diff_var(&s)).mul(&ds));
    }
    acc
}

fn sym_to_expr(s: &Sym) -> Expr {
    match s {
        Sym::Coord(n) => Expr::Coord(n.clone()),
        Sym::Param(n) => Expr::Param(n.clone()),
        Sym::Atom(a) => match &**a {
            Atom::Func(k, u) => Expr::Func(*k, Box::new(u.to_expr())),
            Atom::Pow(b, q) => Expr::RPow(Box::new(b.to_expr()), q.clone()),
        },
    }
}

fn mono_to_exprs(m: &Mono) -> Vec<Expr> {
    m.factors()
        .iter()
        .map(|(s, e)| {
            let b = sym_to_expr(s);
            if *e == 1 {
                b
            } else {
                Expr::Pow(Box::new(b), *e as i64)
            }
        })
        .collect()
}

fn poly_to_expr(p: &Poly) -> Expr {
    // Highest terms first reads naturally.
    let mut terms: Vec<Expr> = p
        .terms()
        .rev()
        .map(|(m, c)| {
            let mut fs = mono_to_exprs(m);
            if fs.is_empty() {
                return Expr::Num(c.clone());
            }
            let neg = c.is_negative();
            let a = c.abs();
            if !a.is_one() {
                fs.insert(0, Expr::Num(a));
            }
            let body = if fs.len() == 1 {
                fs.pop().unwrap()
            } else {
                Expr::Mul(fs)
            };
            if neg {
                Expr::Neg(Box::new(body))
            } else {
                body
            }
        })
        .collect();
    match terms.len() {
        0 => Expr::Num(Q::zero()),
        1 => terms.pop().unwrap(),
        _ => Expr::Add(terms),
    }
}
