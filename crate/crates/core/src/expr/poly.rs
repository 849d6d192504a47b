//! Sparse multivariate polynomials over the rationals.
//!
//! Variables are [`Sym`]s: chart coordinates, named parameters, or opaque
//! kernels (`exp(u)`, `sin(u)`, `u^(1/2)`, ...) whose arguments are themselves
//! normalized rational functions. Terms are kept in a `BTreeMap` keyed by
//! monomials under lexicographic order, so the leading term is always the
//! last entry.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::frac::Frac;
use super::Func;

pub type Q = BigRational;

/// A polynomial variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    Coord(Arc<str>),
    Param(Arc<str>),
    Atom(Arc<Atom>),
}

/// An opaque kernel treated as an independent polynomial variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Func(Func, Frac),
    /// `base^exponent` for a non-integer rational exponent.
    Pow(Frac, Q),
}

impl Sym {
    pub fn coord(name: &str) -> Self {
        Sym::Coord(Arc::from(name))
    }

    pub fn param(name: &str) -> Self {
        Sym::Param(Arc::from(name))
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Sym::Atom(_))
    }
}

/// A power product of variables, sorted by variable, exponents positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Mono(Vec<(Sym, u32)>);

impl Mono {
    pub fn one() -> Self {
        Mono(Vec::new())
    }

    pub fn var(s: Sym, exp: u32) -> Self {
        if exp == 0 {
            Mono::one()
        } else {
            Mono(vec![(s, exp)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Sym, u32)] {
        &self.0
    }

    pub fn exponent(&self, s: &Sym) -> u32 {
        self.0
            .binary_search_by(|(v, _)| v.cmp(s))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0.clone(), a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Mono(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn checked_div(&self, other: &Mono) -> Option<Mono> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (s, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 == *s {
                let d = other.0[j].1;
                if d > *e {
                    return None;
                }
                if d < *e {
                    out.push((s.clone(), e - d));
                }
                j += 1;
            } else if j < other.0.len() && other.0[j].0 < *s {
                return None;
            } else {
                out.push((s.clone(), *e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Mono(out))
    }

    /// Componentwise minimum of exponents.
    pub fn gcd(&self, other: &Mono) -> Mono {
        let mut out = Vec::new();
        for (s, e) in &self.0 {
            let f = other.exponent(s);
            if f > 0 {
                out.push((s.clone(), (*e).min(f)));
            }
        }
        Mono(out)
    }

    pub fn pow(&self, n: u32) -> Mono {
        if n == 0 {
            return Mono::one();
        }
        Mono(self.0.iter().map(|(s, e)| (s.clone(), e * n)).collect())
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Pure lexicographic order, variables ranked by their own `Ord`
/// (smaller variable = more significant).
impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((sa, ea)), Some((sb, eb))) => match sa.cmp(sb) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match ea.cmp(eb) {
                        Ordering::Equal => {
                            i += 1;
                            j += 1;
                        }
                        o => return o,
                    },
                },
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Mono, Q>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Mono::one(), c);
        }
        p
    }

    pub fn var(s: Sym) -> Self {
        Poly::monomial(Mono::var(s, 1), Q::one())
    }

    pub fn monomial(m: Mono, c: Q) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &Q)> {
        self.terms.iter()
    }

    /// The constant value, if this polynomial has no variables.
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<(&Mono, &Q)> {
        self.terms.iter().next_back()
    }

    fn add_term(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v * c))
                .collect(),
        }
    }

    pub fn mul_mono(&self, m: &Mono, c: &Q) -> Poly {
        let mut out = Poly::zero();
        for (tm, tc) in &self.terms {
            out.add_term(tm.mul(m), tc * c);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    ///
    /// With a single divisor the lex division remainder is unique, so the
    /// first leading term of the running remainder that `LT(d)` fails to
    /// divide proves non-divisibility.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (dm, dc) = d.leading()?;
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((rm, rc)) = rem.leading() {
            let qm = rm.checked_div(dm)?;
            let qc = rc / dc;
            rem = &rem - &d.mul_mono(&qm, &qc);
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Greatest monomial dividing every term.
    pub fn monomial_content(&self) -> Mono {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Mono::one();
        };
        let mut g = first.clone();
        for m in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    pub fn div_mono(&self, m: &Mono) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(tm, c)| (tm.checked_div(m).expect("monomial divides"), c.clone()))
                .collect(),
        }
    }

    /// Variables appearing at the top level (not inside atom arguments).
    pub fn syms(&self) -> BTreeSet<Sym> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(s, _)| s.clone()))
            .collect()
    }

    pub fn has_atoms(&self) -> bool {
        self.terms.keys().any(|m| m.0.iter().any(|(s, _)| s.is_atom()))
    }

    /// Formal partial derivative with respect to one variable.
    pub fn diff_var(&self, s: &Sym) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(s);
            if e == 0 {
                continue;
            }
            let reduced = m.checked_div(&Mono::var(s.clone(), 1)).unwrap();
            out.add_term(reduced, c * Q::from_integer(e.into()));
        }
        out
    }

    /// Maximum total degree over the given variables.
    pub fn degree_in(&self, pred: impl Fn(&Sym) -> bool) -> u32 {
        self.terms
            .keys()
            .map(|m| m.0.iter().filter(|(s, _)| pred(s)).map(|(_, e)| e).sum())
            .max()
            .unwrap_or(0)
    }

    /// Substitute each variable by a rational function.
    pub fn substitute(&self, f: &mut dyn FnMut(&Sym) -> Frac) -> Frac {
        let mut cache: BTreeMap<Sym, Frac> = BTreeMap::new();
        let mut acc = Frac::zero();
        for (m, c) in &self.terms {
            let mut t = Frac::constant(c.clone());
            for (s, e) in &m.0 {
                let v = cache.entry(s.clone()).or_insert_with(|| f(s)).clone();
                t = t.mul(&v.powi(*e as i64).expect("nonzero"));
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// Leading coefficient made one, returning the removed scalar.
    pub fn make_monic(&self) -> (Q, Poly) {
        match self.leading() {
            None => (Q::one(), Poly::zero()),
            Some((_, lc)) => {
                let lc = lc.clone();
                let inv = lc.recip();
                (lc, self.scale(&inv))
            }
        }
    }

    pub fn max_abs_coeff(&self) -> Q {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Q::zero)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let (big, small) = if self.len() >= rhs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Frac::from_poly(self.clone()).to_expr())
    }
}
