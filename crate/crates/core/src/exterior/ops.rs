use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::tensor::{contract_basis, index_sets, same_chart, sort_sign, Form, MultiVector};
use super::volume::VolumeForm;
use crate::error::{Error, Result};
use crate::expr::Frac;
use crate::verify::{Compiled, Point};

fn signed(c: Frac, s: i32) -> Frac {
    if s < 0 {
        c.neg()
    } else {
        c
    }
}

/// Exterior derivative.
pub fn d(w: &Form) -> Result<Form> {
    let m = w.dim();
    if w.grade() >= m {
        return Err(Error::Grade(format!(
            "exterior derivative of a {}-form in dimension {m}",
            w.grade()
        )));
    }
    let chart = w.chart().clone();
    let mut out = Form::zero(&chart, w.grade() + 1)?;
    for (idx, c) in w.entries() {
        for j in 0..m {
            if idx.contains(&j) {
                continue;
            }
            let dc = c.diff(chart.coord(j));
            if dc.is_zero() {
                continue;
            }
            let mut k = Vec::with_capacity(idx.len() + 1);
            k.push(j);
            k.extend_from_slice(idx);
            let s = sort_sign(&mut k).expect("distinct");
            out.add_to(k, signed(dc, s));
        }
    }
    Ok(out)
}

/// Differential of a function.
pub fn d_fn(chart: &std::sync::Arc<crate::expr::Chart>, f: &Frac) -> Form {
    let comps = (0..chart.dim()).map(|i| f.diff(chart.coord(i))).collect();
    Form::from_components(chart, comps).expect("dimension matches")
}

/// Interior product `ι_A ω`, with `ι_{∂i}` contracting the first slot and
/// `ι_{A∧B} = ι_A ∘ ι_B`. Zero when `grade(A) > grade(ω)`.
pub fn interior(a: &MultiVector, w: &Form) -> Result<Form> {
    same_chart(a.chart(), w.chart())?;
    if a.grade() > w.grade() {
        return Form::zero(w.chart(), 0);
    }
    let mut out = Form::zero(w.chart(), w.grade() - a.grade())?;
    for (i, x) in a.entries() {
        for (j, c) in w.entries() {
            if let Some((s, rest)) = contract_basis(i, j) {
                out.add_to(rest, signed(x.mul(c), s));
            }
        }
    }
    Ok(out)
}

/// Interior product of a form into a multivector, same slot rule.
pub fn interior_form(w: &Form, a: &MultiVector) -> Result<MultiVector> {
    same_chart(a.chart(), w.chart())?;
    if w.grade() > a.grade() {
        return MultiVector::zero(a.chart(), 0);
    }
    let mut out = MultiVector::zero(a.chart(), a.grade() - w.grade())?;
    for (j, c) in w.entries() {
        for (i, x) in a.entries() {
            if let Some((s, rest)) = contract_basis(j, i) {
                out.add_to(rest, signed(x.mul(c), s));
            }
        }
    }
    Ok(out)
}

/// `π♯α = ι_α π`, i.e. `(π^{ij} α_i) ∂_j`.
pub fn sharp(pi: &MultiVector, alpha: &Form) -> Result<MultiVector> {
    if pi.grade() != 2 || alpha.grade() != 1 {
        return Err(Error::Grade("sharp takes a bivector and a 1-form".into()));
    }
    interior_form(alpha, pi)
}

/// `α(X)` for a 1-form and a vector field.
pub fn pair(alpha: &Form, x: &MultiVector) -> Result<Frac> {
    if alpha.grade() != 1 || x.grade() != 1 {
        return Err(Error::Grade("pairing takes a 1-form and a vector field".into()));
    }
    interior(x, alpha)?.as_scalar()
}

/// Directional derivative `X(f)`.
pub fn apply(x: &MultiVector, f: &Frac) -> Result<Frac> {
    if x.grade() != 1 {
        return Err(Error::Grade("expected a vector field".into()));
    }
    let chart = x.chart();
    Ok(x.entries().fold(Frac::zero(), |acc, (i, c)| {
        acc.add(&c.mul(&f.diff(chart.coord(i[0]))))
    }))
}

/// `[X,Y]^i = X(Y^i) − Y(X^i)`.
pub fn lie_bracket(x: &MultiVector, y: &MultiVector) -> Result<MultiVector> {
    same_chart(x.chart(), y.chart())?;
    if x.grade() != 1 || y.grade() != 1 {
        return Err(Error::Grade("Lie bracket of vector fields".into()));
    }
    let chart = x.chart();
    let mut out = MultiVector::zero(chart, 1)?;
    for i in 0..chart.dim() {
        let c = apply(x, &y.component(i))?.sub(&apply(y, &x.component(i))?);
        out.add_to(vec![i], c);
    }
    Ok(out)
}

/// Gradient cache: coefficient index -> partial derivatives.
struct Grad<'a> {
    t: &'a MultiVector,
    cache: BTreeMap<(Vec<usize>, usize), Frac>,
}

impl Grad<'_> {
    fn get(&mut self, idx: &[usize], c: &Frac, k: usize) -> Frac {
        self.cache
            .entry((idx.to_vec(), k))
            .or_insert_with(|| c.diff(self.t.chart().coord(k)))
            .clone()
    }
}

/// Schouten–Nijenhuis bracket, extended from the Lie bracket by
/// `[X_1∧…∧X_a, Y_1∧…∧Y_b] = Σ (−1)^{p+q} [X_p,Y_q] ∧ X_1…X̂_p…X_a ∧ Y_1…Ŷ_q…Y_b`
/// applied to `f∂_I = (f∂_{i1})∧∂_{i2}∧…`. Against a function,
/// `[A,f] = (−1)^{a−1} ι_{df}A` and `[f,A] = −ι_{df}A`.
pub fn schouten(a: &MultiVector, b: &MultiVector) -> Result<MultiVector> {
    same_chart(a.chart(), b.chart())?;
    match (a.grade(), b.grade()) {
        (0, 0) => return Err(Error::Grade("Schouten bracket of two functions".into())),
        (0, _) => return Ok(interior_form(&d_fn(a.chart(), &a.as_scalar()?), b)?.neg()),
        (k, 0) => {
            let r = interior_form(&d_fn(b.chart(), &b.as_scalar()?), a)?;
            return Ok(if k % 2 == 0 { r.neg() } else { r });
        }
        _ => {}
    }
    let grade = a.grade() + b.grade() - 1;
    let chart = a.chart().clone();
    if grade > chart.dim() {
        return Ok(MultiVector::zero_any(&chart, grade));
    }
    let mut out = MultiVector::zero(&chart, grade)?;
    let mut ga = Grad {
        t: a,
        cache: BTreeMap::new(),
    };
    let mut gb = Grad {
        t: b,
        cache: BTreeMap::new(),
    };
    let mut emit = |k: usize, ai: &[usize], p: usize, bj: &[usize], q: usize, c: Frac| {
        if c.is_zero() {
            return;
        }
        let mut idx = Vec::with_capacity(grade);
        idx.push(k);
        idx.extend(ai.iter().enumerate().filter(|(t, _)| *t != p).map(|(_, v)| *v));
        idx.extend(bj.iter().enumerate().filter(|(t, _)| *t != q).map(|(_, v)| *v));
        if let Some(s) = sort_sign(&mut idx) {
            let s = if (p + q) % 2 == 1 { -s } else { s };
            out.add_to(idx, signed(c, s));
        }
    };
    for (ai, f) in a.entries() {
        for (bj, g) in b.entries() {
            let (i1, j1) = (ai[0], bj[0]);
            // p = q = 1: [f∂_{i1}, g∂_{j1}]
            let c = f.mul(&gb.get(bj, g, i1));
            emit(j1, ai, 0, bj, 0, c);
            let c = g.mul(&ga.get(ai, f, j1)).neg();
            emit(i1, ai, 0, bj, 0, c);
            // p = 1, q > 1: [f∂_{i1}, ∂_{jq}] ∧ (g∂_{j1}) …
            for (q, &jq) in bj.iter().enumerate().skip(1) {
                let c = ga.get(ai, f, jq).mul(g).neg();
                emit(i1, ai, 0, bj, q, c);
            }
            // p > 1, q = 1: [∂_{ip}, g∂_{j1}] ∧ (f∂_{i1}) …
            for (p, &ip) in ai.iter().enumerate().skip(1) {
                let c = gb.get(bj, g, ip).mul(f);
                emit(j1, ai, p, bj, 0, c);
            }
        }
    }
    Ok(out)
}

/// `L_X f = X(f)`.
pub fn lie_derivative_fn(x: &MultiVector, f: &Frac) -> Result<Frac> {
    apply(x, f)
}

/// Cartan's formula `L_X ω = ι_X dω + d ι_X ω`.
pub fn lie_derivative_form(x: &MultiVector, w: &Form) -> Result<Form> {
    if x.grade() != 1 {
        return Err(Error::Grade("expected a vector field".into()));
    }
    let m = w.dim();
    if w.grade() == 0 {
        let f = w.as_scalar()?;
        return Ok(Form::scalar(w.chart(), apply(x, &f)?));
    }
    let second = d(&interior(x, w)?)?;
    if w.grade() == m {
        return Ok(second);
    }
    interior(x, &d(w)?)?.add(&second)
}

/// `L_X T = [X, T]`.
pub fn lie_derivative_mv(x: &MultiVector, t: &MultiVector) -> Result<MultiVector> {
    if x.grade() != 1 {
        return Err(Error::Grade("expected a vector field".into()));
    }
    if t.grade() == 0 {
        let f = t.as_scalar()?;
        return Ok(MultiVector::scalar(t.chart(), apply(x, &f)?));
    }
    schouten(x, t)
}

/// `div_Ω X` with `L_X Ω = (div_Ω X) Ω`, i.e. `(1/ω) Σ ∂_i(ω X^i)`.
pub fn divergence(x: &MultiVector, vol: &VolumeForm) -> Result<Frac> {
    same_chart(x.chart(), vol.chart())?;
    if x.grade() != 1 {
        return Err(Error::Grade("divergence of a vector field".into()));
    }
    let w = vol.coeff();
    let chart = x.chart();
    let mut acc = Frac::zero();
    for (i, c) in x.entries() {
        acc = acc.add(&w.mul(c).diff(chart.coord(i[0])));
    }
    acc.div(w)
}

/// The antisymmetric matrix of a bivector, or of an `(m−2)`-form through
/// `[ϱ_ij] = (−1)^{i+j} ϱ_{1…î…ĵ…m}`.
pub fn bivector_matrix(pi: &MultiVector) -> Result<Vec<Vec<Frac>>> {
    if pi.grade() != 2 {
        return Err(Error::Grade("expected a bivector".into()));
    }
    let m = pi.dim();
    let mut a = vec![vec![Frac::zero(); m]; m];
    for (idx, c) in pi.entries() {
        a[idx[0]][idx[1]] = c.clone();
        a[idx[1]][idx[0]] = c.neg();
    }
    Ok(a)
}

pub fn form_matrix(rho: &Form) -> Result<Vec<Vec<Frac>>> {
    let m = rho.dim();
    if m < 2 || rho.grade() != m - 2 {
        return Err(Error::Grade(format!("expected an {}-form", m.saturating_sub(2))));
    }
    let mut a = vec![vec![Frac::zero(); m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let rest: Vec<usize> = (0..m).filter(|k| *k != i && *k != j).collect();
            let c = rho.get(&rest);
            let c = signed(c, if (i + j) % 2 == 1 { -1 } else { 1 });
            a[j][i] = c.neg();
            a[i][j] = c;
        }
    }
    Ok(a)
}

/// Numeric rank of an antisymmetric coefficient matrix at a point:
/// singular values above `1e-9 · σ_max`.
pub fn numeric_rank(chart: &crate::expr::Chart, a: &[Vec<Frac>], p: &Point) -> Result<usize> {
    let m = a.len();
    let look = p.param_lookup();
    let mut mat = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            if !a[i][j].is_zero() {
                mat[(i, j)] = Compiled::new(&a[i][j], chart, &look)?.eval(&p.x)?;
            }
        }
    }
    let sv = mat.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|s| **s > 1e-9 * max).count())
}

pub fn rank_at_bivector(pi: &MultiVector, p: &Point) -> Result<usize> {
    numeric_rank(pi.chart(), &bivector_matrix(pi)?, p)
}

pub fn rank_at_form(rho: &Form, p: &Point) -> Result<usize> {
    numeric_rank(rho.chart(), &form_matrix(rho)?, p)
}

/// `ι_A Ω` for any grade.
pub fn to_form(vol: &VolumeForm, a: &MultiVector) -> Result<Form> {
    interior(a, &vol.as_form())
}

/// The unique `A` of grade `m − k` with `ι_A Ω = ϱ`.
pub fn from_form(vol: &VolumeForm, rho: &Form) -> Result<MultiVector> {
    same_chart(vol.chart(), rho.chart())?;
    let m = vol.chart().dim();
    let grade = m - rho.grade();
    let all: Vec<usize> = (0..m).collect();
    let inv_w = vol.coeff().recip()?;
    let mut out = MultiVector::zero(vol.chart(), grade)?;
    for idx in index_sets(m, grade) {
        let (s, rest) = contract_basis(&idx, &all).expect("subset");
        let c = rho.get(&rest);
        if !c.is_zero() {
            out.add_to(idx, signed(c.mul(&inv_w), s));
        }
    }
    Ok(out)
}
