use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{Chart, Expr, Frac, Q};

/// Marker for contravariant tensors (multivector fields).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Contra;

/// Marker for covariant tensors (differential forms).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Co;

pub trait Variance: Clone + fmt::Debug + PartialEq {
    const NAME: &'static str;
}

impl Variance for Contra {
    const NAME: &'static str = "contravariant";
}

impl Variance for Co {
    const NAME: &'static str = "covariant";
}

/// A sparse antisymmetric tensor on a chart. Keys are strictly increasing
/// 0-based index tuples; a missing key is a zero coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedTensor<V: Variance> {
    chart: Arc<Chart>,
    grade: usize,
    coeffs: BTreeMap<Vec<usize>, Frac>,
    _v: PhantomData<V>,
}

pub type MultiVector = GradedTensor<Contra>;
pub type Form = GradedTensor<Co>;

/// Sort `idx` in place, returning the permutation sign, or `None` when an
/// index repeats.
pub(crate) fn sort_sign(idx: &mut [usize]) -> Option<i32> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && idx[j - 1] == idx[j] {
            return None;
        }
    }
    Some(sign)
}

/// Contract the basis element indexed by `inner` into the one indexed by
/// `outer`, last index of `inner` first.
pub(crate) fn contract_basis(inner: &[usize], outer: &[usize]) -> Option<(i32, Vec<usize>)> {
    let mut rest = outer.to_vec();
    let mut sign = 1;
    for t in inner.iter().rev() {
        let p = rest.iter().position(|v| v == t)?;
        if p % 2 == 1 {
            sign = -sign;
        }
        rest.remove(p);
    }
    Some((sign, rest))
}

pub(crate) fn same_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a.compatible(b) {
        Ok(())
    } else {
        Err(Error::ChartMismatch)
    }
}

/// All strictly increasing `k`-subsets of `0..m`.
pub fn index_sets(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= m {
        rec(0, m, k, &mut Vec::new(), &mut out);
    }
    out
}

impl<V: Variance> GradedTensor<V> {
    pub fn zero(chart: &Arc<Chart>, grade: usize) -> Result<Self> {
        if grade > chart.dim() {
            return Err(Error::Grade(format!(
                "grade {grade} exceeds dimension {}",
                chart.dim()
            )));
        }
        Ok(GradedTensor {
            chart: chart.clone(),
            grade,
            coeffs: BTreeMap::new(),
            _v: PhantomData,
        })
    }

    pub fn scalar(chart: &Arc<Chart>, f: Frac) -> Self {
        let mut t = GradedTensor::zero(chart, 0).expect("grade 0");
        t.add_to(vec![], f);
        t
    }

    /// The basis element `∂_I` or `dx^I`; indices may be in any order.
    pub fn basis(chart: &Arc<Chart>, idx: &[usize]) -> Result<Self> {
        GradedTensor::from_entries(chart, idx.len(), vec![(idx.to_vec(), Frac::one())])
    }

    /// Build from `(indices, coefficient)` pairs. Unsorted indices are
    /// sorted with the permutation sign; repeated indices contribute zero.
    pub fn from_entries(
        chart: &Arc<Chart>,
        grade: usize,
        entries: Vec<(Vec<usize>, Frac)>,
    ) -> Result<Self> {
        let mut t = GradedTensor::zero(chart, grade)?;
        for (mut idx, c) in entries {
            if idx.len() != grade {
                return Err(Error::Grade(format!(
                    "index {idx:?} does not have {grade} entries"
                )));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= chart.dim()) {
                return Err(Error::Shape(format!("index {} out of range", bad + 1)));
            }
            if let Some(s) = sort_sign(&mut idx) {
                t.add_to(idx, if s < 0 { c.neg() } else { c });
            }
        }
        Ok(t)
    }

    /// A grade-1 tensor from its components.
    pub fn from_components(chart: &Arc<Chart>, comps: Vec<Frac>) -> Result<Self> {
        if comps.len() != chart.dim() {
            return Err(Error::Shape(format!(
                "{} components for dimension {}",
                comps.len(),
                chart.dim()
            )));
        }
        GradedTensor::from_entries(
            chart,
            1,
            comps.into_iter().enumerate().map(|(i, c)| (vec![i], c)).collect(),
        )
    }

    /// Parse components written over the chart.
    pub fn parse_components(chart: &Arc<Chart>, comps: &[&str]) -> Result<Self> {
        let fs: Result<Vec<Frac>> = comps
            .iter()
            .map(|s| Frac::from_expr(&chart.parse(s)?))
            .collect();
        GradedTensor::from_components(chart, fs?)
    }

    pub(crate) fn add_to(&mut self, idx: Vec<usize>, c: Frac) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(idx) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn get(&self, idx: &[usize]) -> Frac {
        self.coeffs.get(idx).cloned().unwrap_or_default()
    }

    /// Component `i` of a grade-1 tensor.
    pub fn component(&self, i: usize) -> Frac {
        self.get(&[i])
    }

    pub fn components(&self) -> Vec<Frac> {
        (0..self.dim()).map(|i| self.component(i)).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &Frac)> {
        self.coeffs.iter()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = &Frac> {
        self.coeffs.values()
    }

    /// True when every stored coefficient normalized to zero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn as_scalar(&self) -> Result<Frac> {
        if self.grade != 0 {
            return Err(Error::Grade(format!("expected grade 0, got {}", self.grade)));
        }
        Ok(self.get(&[]))
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        same_chart(&self.chart, &other.chart)?;
        if self.grade != other.grade {
            return Err(Error::Grade(format!(
                "cannot add grade {} and grade {}",
                self.grade, other.grade
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (i, c) in &other.coeffs {
            out.add_to(i.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn scale(&self, f: &Frac) -> Self {
        self.map(|c| c.mul(f))
    }

    pub fn scale_q(&self, q: &Q) -> Self {
        self.map(|c| c.scale(q))
    }

    pub fn map(&self, f: impl Fn(&Frac) -> Frac) -> Self {
        let mut out = GradedTensor {
            chart: self.chart.clone(),
            grade: self.grade,
            coeffs: BTreeMap::new(),
            _v: PhantomData,
        };
        for (i, c) in &self.coeffs {
            out.add_to(i.clone(), f(c));
        }
        out
    }

    pub fn try_map(&self, f: impl Fn(&Frac) -> Result<Frac>) -> Result<Self> {
        let mut out = GradedTensor {
            chart: self.chart.clone(),
            grade: self.grade,
            coeffs: BTreeMap::new(),
            _v: PhantomData,
        };
        for (i, c) in &self.coeffs {
            out.add_to(i.clone(), f(c)?);
        }
        Ok(out)
    }

    /// Move to another chart with the same coordinates (for example one
    /// with extra excluded loci).
    pub fn on_chart(&self, chart: &Arc<Chart>) -> Result<Self> {
        same_chart(&self.chart, chart)?;
        let mut out = self.clone();
        out.chart = chart.clone();
        Ok(out)
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        same_chart(&self.chart, &other.chart)?;
        let grade = self.grade + other.grade;
        if grade > self.dim() {
            return Ok(GradedTensor::zero_any(&self.chart, grade));
        }
        let mut out = GradedTensor::zero(&self.chart, grade)?;
        for (i, a) in &self.coeffs {
            for (j, b) in &other.coeffs {
                let mut idx: Vec<usize> = i.iter().chain(j.iter()).copied().collect();
                if let Some(s) = sort_sign(&mut idx) {
                    let c = a.mul(b);
                    out.add_to(idx, if s < 0 { c.neg() } else { c });
                }
            }
        }
        Ok(out)
    }

    /// The zero tensor of any grade, including grades above the dimension
    /// that arise as formal results of wedges and brackets.
    pub(crate) fn zero_any(chart: &Arc<Chart>, grade: usize) -> Self {
        GradedTensor {
            chart: chart.clone(),
            grade,
            coeffs: BTreeMap::new(),
            _v: PhantomData,
        }
    }

    /// Exterior product of several tensors; the empty product is `1`.
    pub fn wedge_all(chart: &Arc<Chart>, items: &[Self]) -> Result<Self> {
        let mut acc = GradedTensor::scalar(chart, Frac::one());
        for t in items {
            acc = acc.wedge(t)?;
        }
        Ok(acc)
    }

    /// Assumed-nonzero denominators of every coefficient.
    pub fn den_factors(&self) -> Vec<Expr> {
        let mut set = std::collections::BTreeSet::new();
        for c in self.coeffs.values() {
            for p in c.den_factors() {
                set.insert(p.clone());
            }
        }
        set.into_iter()
            .map(|p| Frac::from_poly(p).to_expr())
            .collect()
    }

    /// Substitute parameter values in every coefficient.
    pub fn bind_params(&self, values: &BTreeMap<String, Q>) -> Result<Self> {
        self.try_map(|c| c.bind_params(values))
    }
}

impl<V: Variance> fmt::Display for GradedTensor<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let (sym, sep) = if V::NAME == Contra::NAME {
            ("∂", "∧")
        } else {
            ("d", "∧")
        };
        for (n, (idx, c)) in self.coeffs.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})", c.to_expr())?;
            for (k, i) in idx.iter().enumerate() {
                let name = self.chart.coord(*i);
                if k == 0 {
                    write!(f, "·{sym}{name}")?;
                } else {
                    write!(f, "{sep}{sym}{name}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sort_sign_parity() {
        let mut v = vec![2, 0, 1];
        assert_eq!(sort_sign(&mut v), Some(1));
        assert_eq!(v, vec![0, 1, 2]);
        let mut v = vec![1, 0];
        assert_eq!(sort_sign(&mut v), Some(-1));
        assert_eq!(sort_sign(&mut [1, 0, 1]), None);
    }

    #[test]
    fn contraction_signs() {
        // ι_{∂1}(dx1∧dx2) = dx2, ι_{∂2}(dx1∧dx2) = -dx1
        assert_eq!(contract_basis(&[0], &[0, 1]), Some((1, vec![1])));
        assert_eq!(contract_basis(&[1], &[0, 1]), Some((-1, vec![0])));
        // ι_{∂1∧∂2} = ι_{∂1}∘ι_{∂2}
        assert_eq!(contract_basis(&[0, 1], &[0, 1]), Some((-1, vec![])));
        assert_eq!(contract_basis(&[0, 1], &[0, 1, 2]), Some((-1, vec![2])));
        assert_eq!(contract_basis(&[3], &[0, 1]), None);
    }

    #[test]
    fn index_set_counts() {
        assert_eq!(index_sets(4, 2).len(), 6);
        assert_eq!(index_sets(3, 0), vec![Vec::<usize>::new()]);
        assert!(index_sets(2, 3).is_empty());
    }
}
