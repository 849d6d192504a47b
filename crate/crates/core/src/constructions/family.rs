use super::{require, zero_test, HamiltonizationResult};
use crate::error::{Error, Result};
use crate::exterior::{
    d_fn, from_form, lie_derivative_fn, schouten, sharp, Form, MultiVector, VolumeForm,
};
use crate::expr::Frac;
use crate::poisson::{casimir_check, check_tensor, hamiltonization_check, Certificate};
use crate::verify::SamplerConfig;

/// `π` with `ι_πΩ = dc₁ ∧ … ∧ dc_{m−2}`; every `c_i` is a Casimir.
pub fn flaschka_ratiu(vol: &VolumeForm, cs: &[Frac], cfg: &SamplerConfig) -> Result<HamiltonizationResult> {
    let chart = vol.chart();
    let m = chart.dim();
    if m < 2 || cs.len() != m - 2 {
        return Err(Error::Shape(format!(
            "dimension {m} needs {} Casimirs, got {}",
            m.saturating_sub(2),
            cs.len()
        )));
    }
    let dcs: Vec<Form> = cs.iter().map(|c| d_fn(chart, c)).collect();
    let rho = Form::wedge_all(chart, &dcs)?;
    let pi = from_form(vol, &rho)?;
    let mut out = HamiltonizationResult::new("flaschka_ratiu", pi, cfg)?;
    out.jacobi.assume(vol.assumptions());
    for c in cs {
        out.casimirs
            .push(casimir_check(&out.pi, c, Some(vol), cfg)?);
    }
    Ok(out)
}

/// The `m−1` structures `π_i` with `π_i♯dh_j = δ_ij X`.
///
/// `ψ_i` is built from `ι_{ψ_i}Ω = dh₁∧…∧d̂h_i∧…∧dh_{m−1}` and rescaled by
/// the factor `f_i` with `X = f_i ψ_i♯dh_i`.
pub fn integrable_family(
    x: &MultiVector,
    hs: &[Frac],
    vol: &VolumeForm,
    cfg: &SamplerConfig,
) -> Result<Vec<HamiltonizationResult>> {
    let chart = vol.chart();
    let m = chart.dim();
    if x.grade() != 1 {
        return Err(Error::Grade("expected a vector field".into()));
    }
    if m < 2 || hs.len() != m - 1 {
        return Err(Error::Shape(format!(
            "dimension {m} needs {} first integrals, got {}",
            m.saturating_sub(1),
            hs.len()
        )));
    }
    let mut pre = Certificate::new("integrable_family.preconditions", cfg);
    for (j, h) in hs.iter().enumerate() {
        let t = super::zero_test_frac(&lie_derivative_fn(x, h)?, chart, cfg)?;
        require(&mut pre, &format!("first_integral_{}", j + 1), t)?;
    }
    let dh: Vec<Form> = hs.iter().map(|h| d_fn(chart, h)).collect();
    let all = Form::wedge_all(chart, &dh)?;
    if zero_test(&all, cfg)?.is_zero() {
        return Err(Error::precondition("independence", "dh_1 ∧ … ∧ dh_{m-1} vanishes identically"));
    }

    let mut out = Vec::with_capacity(m - 1);
    for i in 0..m - 1 {
        let others: Vec<Form> = (0..m - 1).filter(|&j| j != i).map(|j| dh[j].clone()).collect();
        let psi = from_form(vol, &Form::wedge_all(chart, &others)?)?;
        let s = sharp(&psi, &dh[i])?;
        let f = ratio(x, &s, i)?;
        let mismatch = x.sub(&s.scale(&f))?;
        if zero_test(&mismatch, cfg)?.is_nonzero() {
            return Err(Error::precondition(
                "factor",
                format!("X is not a multiple of ψ_{}♯dh_{}", i + 1, i + 1),
            ));
        }
        let pi = psi.scale(&f);
        let mut r = HamiltonizationResult::new("integrable_family", pi, cfg)?;
        r.family_index = Some(i);
        r.h = Some(hs[i].clone());
        r.checks.push(pre.clone());
        let mut deltas = Certificate::new("kronecker", cfg);
        for (j, dhj) in dh.iter().enumerate() {
            let target = if j == i { x.clone() } else { MultiVector::zero(chart, 1)? };
            let res = sharp(&r.pi, dhj)?.sub(&target)?;
            check_tensor(&mut deltas, &format!("sharp_dh_{}", j + 1), &res, cfg)?;
        }
        r.checks.push(deltas);
        let ham = hamiltonization_check(&r.pi, &hs[i], x, cfg)?;
        r.lambda = ham.lambda;
        r.hamiltonization = Some(ham.certificate);
        out.push(r);
    }
    for i in 0..out.len() {
        let mut compat = Certificate::new("compatibility", cfg);
        for j in 0..out.len() {
            if i != j {
                let b = schouten(&out[i].pi, &out[j].pi)?;
                check_tensor(&mut compat, &format!("schouten_{}_{}", i + 1, j + 1), &b, cfg)?;
            }
        }
        out[i].checks.push(compat);
    }
    Ok(out)
}

/// `f` with `X = f·S`, read off the first component where `S` is nonzero.
fn ratio(x: &MultiVector, s: &MultiVector, i: usize) -> Result<Frac> {
    let k = (0..x.dim())
        .find(|&k| !s.component(k).is_zero() && !x.component(k).is_zero())
        .ok_or_else(|| {
            if s.is_zero() {
                Error::precondition("factor", format!("ψ_{}♯dh_{} vanishes identically", i + 1, i + 1))
            } else {
                Error::precondition("factor", "X and ψ♯dh have disjoint supports")
            }
        })?;
    x.component(k).div(&s.component(k))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::constructions::rank_profile;
    use crate::expr::{Chart, Q};

    fn frac(c: &Chart, s: &str) -> Frac {
        Frac::from_expr(&c.parse(s).unwrap()).unwrap()
    }

    fn cfg() -> SamplerConfig {
        SamplerConfig::default()
    }

    #[test]
    fn fr_rotation_about_z() {
        let c = Arc::new(Chart::new(&["x", "y", "z"]).unwrap());
        let vol = VolumeForm::euclidean(&c);
        let r = flaschka_ratiu(&vol, &[frac(&c, "(x^2+y^2)/2")], &cfg()).unwrap();
        let rot = MultiVector::parse_components(&c, &["-y", "x", "0"]).unwrap();
        let expected = rot.wedge(&MultiVector::basis(&c, &[2]).unwrap()).unwrap();
        assert!(r.pi == expected || r.pi == expected.neg(), "{}", r.pi);
        assert!(r.jacobi.verdict().is_zero());
        assert!(r.casimirs[0].verdict().is_zero());
        assert!(r.certified());
    }

    #[test]
    fn fr_planar_is_inverse_volume() {
        let c = Arc::new(Chart::new(&["x", "y"]).unwrap());
        let r = flaschka_ratiu(&VolumeForm::euclidean(&c), &[], &cfg()).unwrap();
        let e = MultiVector::basis(&c, &[0, 1]).unwrap();
        assert!(r.pi == e || r.pi == e.neg());
        assert!(flaschka_ratiu(&VolumeForm::euclidean(&c), &[Frac::one()], &cfg()).is_err());
    }

    #[test]
    fn fr_four_dimensional_constant() {
        // a = (0,0,2), v = (1,0,0), w = (0,1/2,0): q = (|x|^2 - y^2)/2 would
        // be quadratic; ℓ = w·x − y and φ = a·x are the linear pair.
        let c = Arc::new(Chart::new(&["x1", "x2", "x3", "y"]).unwrap());
        let vol = VolumeForm::euclidean(&c);
        let l = frac(&c, "x2/2 - y");
        let phi = frac(&c, "2*x3");
        let r = flaschka_ratiu(&vol, &[l, phi], &cfg()).unwrap();
        assert!(r.pi.coeffs().all(|f| f.as_constant().is_some()));
        assert!(r.jacobi.verdict().is_zero());
        assert!(r.casimirs.iter().all(|c| c.verdict().is_zero()));
        // Oracle: ι_πΩ = (dx2/2 − dy) ∧ 2dx3 = dx2∧dx3 + 2 dx3∧dy.
        let rho = crate::exterior::to_form(&vol, &r.pi).unwrap();
        assert_eq!(rho.get(&[1, 2]).as_constant(), Some(Q::from_integer(1.into())));
        assert_eq!(rho.get(&[2, 3]).as_constant(), Some(Q::from_integer(2.into())));
        assert_eq!(rho.entries().count(), 2);
    }

    #[test]
    fn fr_rank_is_two_or_zero() {
        let c = Arc::new(Chart::euclidean(4));
        let vol = VolumeForm::euclidean(&c);
        let r = flaschka_ratiu(&vol, &[frac(&c, "x1*x2 + x3"), frac(&c, "x4^2 - x1")], &cfg()).unwrap();
        assert!(rank_profile(&r.pi, &cfg()).unwrap().iter().all(|k| *k == 0 || *k == 2));
    }

    #[test]
    fn planar_family() {
        let c = Arc::new(Chart::new(&["x", "y"]).unwrap());
        let vol = VolumeForm::euclidean(&c);
        // X = π♯dh for π = ∂x∧∂y, h = x^2 y.
        let h = frac(&c, "x^2*y");
        let x = MultiVector::parse_components(&c, &["-x^2", "2*x*y"]).unwrap();
        let fam = integrable_family(&x, &[h], &vol, &cfg()).unwrap();
        assert_eq!(fam.len(), 1);
        let e = MultiVector::basis(&c, &[0, 1]).unwrap();
        assert!(fam[0].pi == e || fam[0].pi == e.neg());
        assert!(fam[0].lambda.as_ref().unwrap().is_one());
    }

    #[test]
    fn rank_one_linear_family() {
        let c = Arc::new(Chart::euclidean(3));
        let vol = VolumeForm::euclidean(&c);
        let x = MultiVector::parse_components(&c, &["x2", "0", "0"]).unwrap();
        let hs = [frac(&c, "x2*x3"), frac(&c, "x3")];
        let fam = integrable_family(&x, &hs, &vol, &cfg()).unwrap();
        assert_eq!(fam.len(), 2);
        for r in &fam {
            assert!(r.verdict().is_zero(), "{:?}", r.verdict());
            assert!(r.lambda.as_ref().unwrap().is_one());
        }
        // Oracle by hand: π_1 = −(1/x3) ∂1∧∂2... check only the defining relations.
        assert!(sharp(&fam[0].pi, &d_fn(&c, &hs[1])).unwrap().is_zero());
        assert_eq!(sharp(&fam[1].pi, &d_fn(&c, &hs[1])).unwrap(), x);
    }

    #[test]
    fn rejects_non_integral() {
        let c = Arc::new(Chart::euclidean(3));
        let vol = VolumeForm::euclidean(&c);
        let x = MultiVector::parse_components(&c, &["x2", "0", "0"]).unwrap();
        let hs = [frac(&c, "x1"), frac(&c, "x3")];
        assert!(matches!(
            integrable_family(&x, &hs, &vol, &cfg()),
            Err(Error::Precondition { .. })
        ));
        let dep = [frac(&c, "x3"), frac(&c, "x3^2")];
        assert!(integrable_family(&x, &dep, &vol, &cfg()).is_err());
    }

    #[test]
    fn nonlinear_family_on_torus_field() {
        let c = Arc::new(Chart::new(&["x", "y", "z"]).unwrap().with_exclude(Chart::new(&["x", "y", "z"]).unwrap().parse("x").unwrap()));
        let vol = VolumeForm::parse(&c, "1/(x^2+y^2+z^2+1)^3").unwrap();
        let x = MultiVector::parse_components(&c, &["2*x*z", "2*y*z", "1 - x^2 - y^2 + z^2"]).unwrap();
        let hs = [frac(&c, "(x^2+y^2)/(x^2+y^2+z^2+1)^2"), frac(&c, "y/x")];
        let fam = integrable_family(&x, &hs, &vol, &cfg()).unwrap();
        for r in &fam {
            assert!(r.verdict().is_zero(), "{:?}", r.verdict());
        }
    }
}
