//! Constants fixed by measurement on reference instances. The tests below
//! recompute each one and fail if the recorded value drifts.

use std::sync::Arc;

use crate::error::Result;
use crate::exterior::{d, from_form, Form, VolumeForm};
use crate::expr::{Chart, Frac, RationalMatrix, Q};
use crate::poisson::modular_vf;
use crate::verify::SamplerConfig;

/// `λ` in `π♯dh = λX` for the linear construction on the rank-one
/// instance `A = E₁₂` (3×3), `P = e₂`, with `h = ½xᵀ(WA)x`.
pub const LINEAR_FR_RANK1_LAMBDA: (i64, i64) = (-1, 2);

/// `σ` in `modular_vf(π₀, Ω) = σX` whenever `ι_{π₀}Ω = ϱ` and `ι_XΩ = dϱ`.
pub const MODULAR_SIGMA: i64 = -1;

/// Recompute [`LINEAR_FR_RANK1_LAMBDA`].
pub fn measure_linear_fr_lambda(cfg: &SamplerConfig) -> Result<Option<Q>> {
    let chart = Arc::new(Chart::euclidean(3));
    let a = RationalMatrix::from_ints(&[&[0, 1, 0], &[0, 0, 0], &[0, 0, 0]]);
    let p = RationalMatrix::from_ints(&[&[0], &[1], &[0]]);
    let out = crate::constructions::linear_fr(&chart, &p, &a, cfg)?;
    Ok(out.result.lambda.and_then(|l| l.as_constant()))
}

/// The constant `s` with `modular_vf(π₀, Ω) = sX`, if there is one.
pub fn measure_modular_sigma(vol: &VolumeForm, rho: &Form) -> Result<Option<Q>> {
    let x = from_form(vol, &d(rho)?)?;
    let m = modular_vf(&from_form(vol, rho)?, vol)?;
    let Some(k) = (0..x.dim()).find(|&k| !x.component(k).is_zero()) else {
        return Ok(None);
    };
    let s = m.component(k).div(&x.component(k))?;
    match s.as_constant() {
        Some(q) if m.sub(&x.scale(&s))?.is_zero() => Ok(Some(q)),
        _ => Ok(None),
    }
}

/// Reference `(Ω, ϱ)` pairs on which `σ` is measured.
pub fn modular_fixtures() -> Result<Vec<(VolumeForm, Form)>> {
    let mut out = Vec::new();
    let c2 = Arc::new(Chart::new(&["x", "y"])?);
    let f = |c: &Chart, s: &str| -> Result<Frac> { Frac::from_expr(&c.parse(s)?) };
    out.push((VolumeForm::euclidean(&c2), Form::scalar(&c2, f(&c2, "x^2 + y^2 + 1")?)));
    let c3 = Arc::new(Chart::new(&["x", "y", "z"])?);
    out.push((
        VolumeForm::euclidean(&c3),
        Form::from_components(&c3, vec![f(&c3, "4*x*y")?, f(&c3, "1 + x^2")?, Frac::zero()])?,
    ));
    out.push((
        VolumeForm::euclidean(&c3),
        Form::from_components(&c3, vec![f(&c3, "-y*z/3")?, f(&c3, "-x*z/3")?, f(&c3, "2*x*y/3")?])?,
    ));
    out.push((
        VolumeForm::parse(&c3, "1/(x^2+y^2+z^2+1)^2")?,
        Form::from_components(&c3, vec![f(&c3, "y*z")?, f(&c3, "x^3")?, f(&c3, "x - y^2")?])?,
    ));
    let c4 = Arc::new(Chart::euclidean(4));
    out.push((
        VolumeForm::euclidean(&c4),
        Form::from_entries(&c4, 2, vec![(vec![0, 1], f(&c4, "x3*x4")?), (vec![1, 2], f(&c4, "x1^2")?)])?,
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_lambda_matches_record() {
        let q = measure_linear_fr_lambda(&SamplerConfig::default()).unwrap().expect("constant λ");
        assert_eq!(q, Q::new(LINEAR_FR_RANK1_LAMBDA.0.into(), LINEAR_FR_RANK1_LAMBDA.1.into()));
    }

    #[test]
    fn modular_sign_is_global() {
        for (vol, rho) in modular_fixtures().unwrap() {
            let s = measure_modular_sigma(&vol, &rho).unwrap().expect("constant ratio");
            assert_eq!(s, Q::from_integer(MODULAR_SIGMA.into()), "ϱ = {rho}");
        }
    }
}
