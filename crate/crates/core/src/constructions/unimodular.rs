use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;

use super::{form_rank_profile, require, zero_test, HamiltonizationResult};
use crate::conventions::MODULAR_SIGMA;
use crate::error::{Error, Result};
use crate::exterior::{d, from_form, interior, Form, MultiVector, VolumeForm};
use crate::expr::{nullspace_q, Chart, Frac, Mono, Poly, Sym, Q};
use crate::poisson::{
    check_tensor, hamiltonization_check, modular_vf, poisson_vf_check, Certificate,
};
use crate::verify::SamplerConfig;

pub const DEFAULT_DEGREE_BOUND: usize = 4;

fn require_polynomial(w: &Form) -> Result<()> {
    match w.coeffs().find(|c| !c.is_polynomial()) {
        Some(c) => Err(Error::NotPolynomial(c.to_expr().to_string())),
        None => Ok(()),
    }
}

fn coord_degree(m: &Mono, chart: &Chart) -> u32 {
    chart
        .coords()
        .iter()
        .map(|c| m.exponent(&Sym::Coord(c.clone())))
        .sum()
}

fn translate(w: &Form, shift: &[Q]) -> Result<Form> {
    let chart = w.chart().clone();
    w.try_map(|c| {
        c.map_syms(&mut |s| {
            Ok(match s {
                Sym::Coord(name) => chart.coord_index(name).map(|i| {
                    Frac::coord(name).add(&Frac::constant(shift[i].clone()))
                }),
                _ => None,
            })
        })
    })
}

/// Radial homotopy primitive centred at the origin.
fn primitive_at_origin(w: &Form) -> Form {
    let chart = w.chart().clone();
    let k = w.grade();
    let mut out = Form::zero_any(&chart, k - 1);
    for (idx, c) in w.entries() {
        for (mono, coef) in c.num().terms() {
            let deg = coord_degree(mono, &chart) as i64;
            let integrated = coef / Q::from_integer((k as i64 + deg).into());
            let base = Frac::from_poly(Poly::monomial(mono.clone(), integrated));
            for r in 0..k {
                let mut rest = idx.clone();
                let j = rest.remove(r);
                let mut term = base.mul(&Frac::coord(chart.coord(j)));
                if r % 2 == 1 {
                    term = term.neg();
                }
                out.add_to(rest, term);
            }
        }
    }
    out
}

/// A primitive of a closed polynomial form by the radial homotopy operator
/// centred at `base` (the origin when `None`). `d(primitive(ω)) = ω` is
/// checked exactly before returning.
pub fn primitive(w: &Form, base: Option<&[Q]>) -> Result<Form> {
    let chart = w.chart().clone();
    let m = chart.dim();
    if w.grade() == 0 {
        return Err(Error::Grade("a function has no primitive form".into()));
    }
    require_polynomial(w)?;
    if w.grade() < m && !d(w)?.is_zero() {
        return Err(Error::precondition("closed", "dω ≠ 0"));
    }
    let shift: Vec<Q> = match base {
        Some(b) if b.len() != m => {
            return Err(Error::Shape(format!("base point has {} entries, expected {m}", b.len())))
        }
        Some(b) => b.to_vec(),
        None => vec![Q::zero(); m],
    };
    let rho = if shift.iter().all(Zero::is_zero) {
        primitive_at_origin(w)
    } else {
        let moved = translate(w, &shift)?;
        let back: Vec<Q> = shift.iter().map(|q| -q).collect();
        translate(&primitive_at_origin(&moved), &back)?
    };
    if d(&rho)? != *w {
        return Err(Error::Inconsistent);
    }
    Ok(rho)
}

fn monomials(chart: &Chart, bound: usize) -> Vec<Mono> {
    let mut out = vec![Mono::one()];
    for name in chart.coords() {
        let var = Sym::Coord(name.clone());
        let mut next = Vec::new();
        for m in &out {
            let used = m.degree() as usize;
            for e in 0..=bound - used {
                next.push(m.mul(&Mono::var(var.clone(), e as u32)));
            }
        }
        out = next;
    }
    out.sort_by_key(|m| m.degree());
    out
}

/// Basis of the polynomials `a` of degree at most `degree_bound` with
/// `d(aϱ) = 0`, found as the nullspace of an exact linear system in the
/// coefficients of `a`. Each basis element is scaled to leading
/// coefficient one.
pub fn integrating_factor(rho: &Form, degree_bound: usize) -> Result<Vec<Frac>> {
    let chart = rho.chart().clone();
    let rho = rho.bind_params(&chart.bound_params())?;
    require_polynomial(&rho)?;
    if rho.coeffs().any(|c| c.syms().iter().any(|s| matches!(s, Sym::Param(_)))) {
        return Err(Error::Unsupported("integrating factor with unbound parameters".into()));
    }
    let basis = monomials(&chart, degree_bound);
    let mut row_of: BTreeMap<(Vec<usize>, Mono), usize> = BTreeMap::new();
    let mut entries: Vec<(usize, usize, Q)> = Vec::new();
    for (col, mono) in basis.iter().enumerate() {
        let a = Frac::from_poly(Poly::monomial(mono.clone(), Q::from_integer(1.into())));
        let image = d(&rho.scale(&a))?;
        for (idx, c) in image.entries() {
            for (m, q) in c.num().terms() {
                let next = row_of.len();
                let row = *row_of.entry((idx.clone(), m.clone())).or_insert(next);
                entries.push((row, col, q.clone()));
            }
        }
    }
    let mut rows = vec![vec![Q::zero(); basis.len()]; row_of.len()];
    for (r, c, q) in entries {
        rows[r][c] += q;
    }
    Ok(nullspace_q(rows, basis.len())
        .into_iter()
        .map(|v| {
            let p = basis
                .iter()
                .zip(v)
                .fold(Poly::zero(), |acc, (m, q)| &acc + &Poly::monomial(m.clone(), q));
            Frac::from_poly(p.make_monic().1)
        })
        .collect())
}

/// The chart with `f ≠ 0` and every denominator of `f` excluded.
fn excluding(chart: &Arc<Chart>, f: &Frac) -> Arc<Chart> {
    let mut c = (**chart).clone();
    if f.as_constant().is_none() {
        c = c.with_exclude(Frac::from_poly(f.num().clone()).to_expr());
    }
    for p in f.den_factors() {
        c = c.with_exclude(Frac::from_poly(p.clone()).to_expr());
    }
    Arc::new(c)
}

/// `π` with `ι_πΩ = aϱ` and `h = 1/a`, given `ι_XΩ = dϱ` and `d(aϱ) = 0`.
///
/// Also certifies that `π` is unimodular for `Ω` and that the modular field
/// of `π/a` is `σX` for the global sign `σ`.
pub fn unimodularize(
    x: &MultiVector,
    vol: &VolumeForm,
    rho: &Form,
    a: &Frac,
    cfg: &SamplerConfig,
) -> Result<HamiltonizationResult> {
    let m = vol.chart().dim();
    if m < 2 || rho.grade() != m - 2 || x.grade() != 1 {
        return Err(Error::Grade(format!("expected a vector field and an {}-form", m.saturating_sub(2))));
    }
    if a.is_zero() {
        return Err(Error::precondition("integrating_factor", "a = 0"));
    }
    let chart = excluding(vol.chart(), a);
    let vol = VolumeForm::new(&chart, vol.coeff().clone())?;
    let x = x.on_chart(&chart)?;
    let rho = rho.on_chart(&chart)?;

    let mut pre = Certificate::new("unimodularize.preconditions", cfg);
    let lhs = interior(&x, &vol.as_form())?;
    require(&mut pre, "primitive", zero_test(&lhs.sub(&d(&rho)?)?, cfg)?)?;
    let arho = rho.scale(a);
    if arho.grade() < m {
        require(&mut pre, "integrating_factor", zero_test(&d(&arho)?, cfg)?)?;
    }
    let ranks = form_rank_profile(&rho, cfg)?;
    if let Some(&r) = ranks.iter().find(|&&r| r > 2) {
        return Err(Error::precondition("rank", format!("ϱ has rank {r} at a sample")));
    }

    let pi = from_form(&vol, &arho)?;
    let h = a.recip()?;
    let mut out = HamiltonizationResult::new("unimodularize", pi, cfg)?;
    out.jacobi.assume(vol.assumptions());
    out.checks.push(pre);
    let ham = hamiltonization_check(&out.pi, &h, &x, cfg)?;
    out.lambda = ham.lambda;
    out.hamiltonization = Some(ham.certificate);
    out.h = Some(h);

    let mut modular = Certificate::new("modular", cfg);
    check_tensor(&mut modular, "unimodular", &modular_vf(&out.pi, &vol)?, cfg)?;
    let pi0 = from_form(&vol, &rho)?;
    let sigma = Frac::int(MODULAR_SIGMA);
    check_tensor(
        &mut modular,
        "modular_field",
        &modular_vf(&pi0, &vol)?.sub(&x.scale(&sigma))?,
        cfg,
    )?;
    out.checks.push(modular);
    Ok(out)
}

/// `π` with `ι_πΩ = α₁∧…∧α_k∧β`, after certifying
/// `dα_i ∧ α₁∧…∧α̂_i∧…∧α_k = 0` for every `i`.
pub fn foliated_build(
    vol: &VolumeForm,
    alphas: &[Form],
    beta: &Form,
    field: Option<(&MultiVector, Option<&Frac>)>,
    cfg: &SamplerConfig,
) -> Result<HamiltonizationResult> {
    let chart = vol.chart();
    let m = chart.dim();
    if alphas.iter().any(|a| a.grade() != 1) {
        return Err(Error::Grade("each α must be a 1-form".into()));
    }
    if m < 2 || alphas.len() + beta.grade() != m - 2 {
        return Err(Error::Grade(format!(
            "α₁∧…∧α_k∧β must have degree {}",
            m.saturating_sub(2)
        )));
    }
    let mut pre = Certificate::new("foliated_build.preconditions", cfg);
    for i in 0..alphas.len() {
        let others: Vec<Form> = (0..alphas.len()).filter(|&j| j != i).map(|j| alphas[j].clone()).collect();
        let res = d(&alphas[i])?.wedge(&Form::wedge_all(chart, &others)?)?;
        require(&mut pre, &format!("integrability_{}", i + 1), zero_test(&res, cfg)?)?;
    }
    let mut parts = alphas.to_vec();
    parts.push(beta.clone());
    let rho = Form::wedge_all(chart, &parts)?;
    if rho.grade() < m {
        check_tensor(&mut pre, "closed", &d(&rho)?, cfg)?;
    }
    let pi = from_form(vol, &rho)?;
    let mut out = HamiltonizationResult::new("foliated_build", pi, cfg)?;
    out.jacobi.assume(vol.assumptions());
    out.checks.push(pre);
    if let Some((x, h)) = field {
        out.checks.push(poisson_vf_check(&out.pi, x, cfg)?);
        if let Some(h) = h {
            let ham = hamiltonization_check(&out.pi, h, x, cfg)?;
            out.lambda = ham.lambda;
            out.hamiltonization = Some(ham.certificate);
            out.h = Some(h.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::to_form;

    fn frac(c: &Chart, s: &str) -> Frac {
        Frac::from_expr(&c.parse(s).unwrap()).unwrap()
    }

    fn form(c: &Arc<Chart>, grade: usize, entries: &[(&[usize], &str)]) -> Form {
        Form::from_entries(
            c,
            grade,
            entries.iter().map(|(i, s)| (i.to_vec(), frac(c, s))).collect(),
        )
        .unwrap()
    }

    fn cfg() -> SamplerConfig {
        SamplerConfig::default()
    }

    #[test]
    fn planar_area_primitive() {
        let c = Arc::new(Chart::new(&["x", "y"]).unwrap());
        let w = form(&c, 2, &[(&[0, 1], "1")]);
        let rho = primitive(&w, None).unwrap();
        assert_eq!(rho, form(&c, 1, &[(&[0], "-y/2"), (&[1], "x/2")]));
        let zero = Form::zero(&c, 2).unwrap();
        assert!(primitive(&zero, None).unwrap().is_zero());
    }

    #[test]
    fn shifted_base_still_inverts_d() {
        let c = Arc::new(Chart::euclidean(3));
        let w = form(&c, 2, &[(&[0, 1], "x3^2"), (&[1, 2], "-2*x1*x3")]);
        assert!(d(&w).unwrap().is_zero());
        let base = [Q::from_integer(1.into()), Q::new((-1).into(), 2.into()), Q::from_integer(3.into())];
        let rho = primitive(&w, Some(&base)).unwrap();
        assert_eq!(d(&rho).unwrap(), w);
    }

    #[test]
    fn primitive_rejects_bad_input() {
        let c = Arc::new(Chart::new(&["x", "y"]).unwrap());
        assert!(matches!(primitive(&form(&c, 1, &[(&[1], "x*y")]), None), Err(Error::Precondition { .. })));
        assert!(matches!(primitive(&form(&c, 1, &[(&[1], "1/x")]), None), Err(Error::NotPolynomial(_))));
    }

    #[test]
    fn divergence_free_flux_primitive() {
        let c = Arc::new(Chart::new(&["x", "y", "z"]).unwrap());
        let vol = VolumeForm::euclidean(&c);
        let x = MultiVector::parse_components(&c, &["y*z", "x^2 - z", "x*y"]).unwrap();
        let w = interior(&x, &vol.as_form()).unwrap();
        let rho = primitive(&w, None).unwrap();
        assert_eq!(d(&rho).unwrap(), w);
    }

    #[test]
    fn exact_form_admits_constant_factor() {
        let c = Arc::new(Chart::euclidean(3));
        let rho = form(&c, 1, &[(&[0], "2*x1*x2"), (&[1], "x1^2")]);
        let fs = integrating_factor(&rho, 2).unwrap();
        assert!(fs.iter().any(|f| f.is_one()));
    }

    #[test]
    fn plant_and_recover() {
        let c = Arc::new(Chart::new(&["x", "y", "z"]).unwrap());
        let rho = form(&c, 1, &[(&[0], "4*x*y"), (&[1], "1 + x^2")]);
        let fs = integrating_factor(&rho, DEFAULT_DEGREE_BOUND).unwrap();
        assert_eq!(fs, vec![frac(&c, "1 + x^2")]);
        let none = integrating_factor(&form(&c, 1, &[(&[1], "x")]), DEFAULT_DEGREE_BOUND).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn unimodular_hyperbolic_field() {
        let c = Arc::new(Chart::new(&["x", "y", "z"]).unwrap());
        let vol = VolumeForm::euclidean(&c);
        let x = MultiVector::parse_components(&c, &["x", "-y", "0"]).unwrap();
        let rho = primitive(&interior(&x, &vol.as_form()).unwrap(), None).unwrap();
        let r = unimodularize(&x, &vol, &rho, &frac(&c, "1/(x*y*z)"), &cfg()).unwrap();
        assert!(r.verdict().is_zero(), "{:#?}", r.verdict());
        assert_eq!(r.h.as_ref().unwrap(), &frac(&c, "x*y*z"));
    }

    #[test]
    fn unimodular_planted_factor() {
        let c = Arc::new(Chart::new(&["x", "y", "z"]).unwrap());
        let vol = VolumeForm::euclidean(&c);
        let rho = form(&c, 1, &[(&[0], "4*x*y"), (&[1], "1 + x^2")]);
        let x = field_of(&vol, &d(&rho).unwrap());
        let a = integrating_factor(&rho, DEFAULT_DEGREE_BOUND).unwrap().remove(0);
        let r = unimodularize(&x, &vol, &rho, &a, &cfg()).unwrap();
        assert!(r.verdict().is_zero(), "{:#?}", r.verdict());
        assert_eq!(to_form(&vol, &r.pi).unwrap(), rho.scale(&a));
    }

    #[test]
    fn planar_unimodularization() {
        let c = Arc::new(Chart::new(&["x", "y"]).unwrap());
        let vol = VolumeForm::euclidean(&c);
        let rho = Form::scalar(&c, frac(&c, "x^2 + y^2 + 1"));
        let x = field_of(&vol, &d(&rho).unwrap());
        let r = unimodularize(&x, &vol, &rho, &rho.as_scalar().unwrap().recip().unwrap(), &cfg()).unwrap();
        assert!(r.verdict().is_zero(), "{:#?}", r.verdict());
        assert!(matches!(
            unimodularize(&x, &vol, &rho, &Frac::one(), &cfg()),
            Err(Error::Precondition { check, .. }) if check == "integrating_factor"
        ));
    }

    #[test]
    fn rank_four_is_rejected() {
        let c = Arc::new(Chart::euclidean(4));
        let vol = VolumeForm::euclidean(&c);
        let rho = form(&c, 2, &[(&[0, 1], "1"), (&[2, 3], "1")]);
        let x = MultiVector::zero(&c, 1).unwrap();
        assert!(matches!(
            unimodularize(&x, &vol, &rho, &Frac::one(), &cfg()),
            Err(Error::Precondition { check, .. }) if check == "rank"
        ));
    }

    #[test]
    fn foliated_without_alphas_matches_unit_factor() {
        let c = Arc::new(Chart::new(&["x", "y", "z"]).unwrap());
        let vol = VolumeForm::euclidean(&c);
        let beta = form(&c, 1, &[(&[2], "1")]);
        let r = foliated_build(&vol, &[], &beta, None, &cfg()).unwrap();
        assert_eq!(r.pi, from_form(&vol, &beta).unwrap());
        assert!(r.jacobi.verdict().is_zero());
    }

    #[test]
    fn foliated_cylinder_example() {
        let bare = Chart::new(&["x", "y1", "y2", "y3"]).unwrap();
        let s = bare.parse("y1^2 + y2^2").unwrap();
        let c = Arc::new(bare.with_exclude(s));
        let vol = VolumeForm::parse(&c, "1/(y1^2 + y2^2)").unwrap();
        let alpha = form(&c, 1, &[(&[0], "1")]);
        let beta = form(&c, 1, &[(&[1], "y2/(y1^2+y2^2)"), (&[2], "-y1/(y1^2+y2^2)")]);
        let x = MultiVector::parse_components(&c, &["0", "y3*y1", "y3*y2", "y1^2 + y2^2"]).unwrap();
        let h = frac(&c, "-(exp(log(y1^2 + y2^2)) - y3^2)/2");
        let r = foliated_build(&vol, &[alpha.clone()], &beta, Some((&x, Some(&h))), &cfg()).unwrap();
        let e = MultiVector::parse_components(&c, &["0", "y1", "y2", "0"]).unwrap();
        let expected = e.wedge(&MultiVector::basis(&c, &[3]).unwrap()).unwrap().neg();
        assert_eq!(r.pi, expected);
        // exp(log s) stays symbolic, so the best available verdict is Unknown.
        let ham = r.hamiltonization.as_ref().unwrap();
        assert!(matches!(ham.verdict(), crate::expr::TriState::Unknown { .. }), "{:?}", ham.verdict());
        assert!(ham.identities.iter().all(|i| i.residual_max <= 1e-9));
        assert!(r.jacobi.verdict().is_zero());
        assert!(r.lambda.as_ref().unwrap().is_one());
        // With +y3² in place of −y3² the field is not recovered.
        let flipped = frac(&c, "-(exp(log(y1^2 + y2^2)) + y3^2)/2");
        let r = foliated_build(&vol, &[alpha], &beta, Some((&x, Some(&flipped))), &cfg()).unwrap();
        assert!(r.hamiltonization.as_ref().unwrap().verdict().is_nonzero());
    }

    #[test]
    fn foliated_rejects_non_integrable_pair() {
        let c = Arc::new(Chart::euclidean(4));
        let vol = VolumeForm::euclidean(&c);
        let a1 = form(&c, 1, &[(&[0], "1"), (&[1], "x3")]);
        let a2 = form(&c, 1, &[(&[3], "1")]);
        let beta = Form::scalar(&c, Frac::one());
        assert!(matches!(
            foliated_build(&vol, &[a1, a2], &beta, None, &cfg()),
            Err(Error::Precondition { .. })
        ));
    }

    /// `X` with `ι_XΩ = w` for an `(m−1)`-form `w`.
    fn field_of(vol: &VolumeForm, w: &Form) -> MultiVector {
        from_form(vol, w).unwrap()
    }
}
