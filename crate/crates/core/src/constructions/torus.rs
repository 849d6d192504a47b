use std::sync::Arc;

use super::{require, zero_test, HamiltonizationResult};
use crate::error::{Error, Result};
use crate::exterior::{apply, d_fn, lie_bracket, sharp, MultiVector};
use crate::expr::{Chart, Frac, Q, TriState};
use crate::poisson::{check_scalar, check_tensor, Certificate};
use crate::verify::SamplerConfig;

/// A parameter name not already used on the chart.
fn fresh(chart: &Chart, stem: &str) -> String {
    let mut name = stem.to_string();
    while chart.coord_index(&name).is_some() || chart.has_param(&name) {
        name.push('_');
    }
    name
}

fn build(
    x: [&MultiVector; 2],
    h: [&Frac; 2],
    y: [&MultiVector; 2],
    cfg: &SamplerConfig,
    strict: bool,
) -> Result<HamiltonizationResult> {
    for t in x.iter().chain(y.iter()) {
        if t.grade() != 1 {
            return Err(Error::Grade("torus2 takes vector fields".into()));
        }
    }
    let chart = x[0].chart().clone();
    let mut pre = Certificate::new("torus2.preconditions", cfg);
    let record = |cert: &mut Certificate, name: &str, t: TriState| -> Result<()> {
        if strict {
            require(cert, name, t)
        } else {
            cert.push(name, t);
            Ok(())
        }
    };
    record(&mut pre, "commute", zero_test(&lie_bracket(x[0], x[1])?, cfg)?)?;
    for i in 0..2 {
        for j in 0..2 {
            let t = zero_test(&lie_bracket(x[i], y[j])?, cfg)?;
            record(&mut pre, &format!("invariant_x{}_y{}", i + 1, j + 1), t)?;
        }
    }
    for i in 0..2 {
        let mut lhs = MultiVector::zero(&chart, 1)?;
        for j in 0..2 {
            lhs = lhs.add(&x[j].scale(&apply(y[j], h[i])?))?;
        }
        let t = zero_test(&lhs.sub(x[i])?, cfg)?;
        record(&mut pre, &format!("normalized_{}", i + 1), t)?;
    }

    let pi = y[0].wedge(x[0])?.add(&y[1].wedge(x[1])?)?;
    let mut out = HamiltonizationResult::new("torus2", pi, cfg)?;
    out.checks.push(pre);

    let mut cert = Certificate::new("torus2", cfg);
    let yy = lie_bracket(y[0], y[1])?;
    let square = crate::exterior::schouten(&out.pi, &out.pi)?;
    let rhs = yy.wedge(x[0])?.wedge(x[1])?.scale_q(&Q::from_integer(2.into()));
    check_tensor(&mut cert, "schouten_square", &square.sub(&rhs)?, cfg)?;
    for i in 0..2 {
        check_scalar(&mut cert, &format!("dh{}_of_bracket", i + 1), &apply(&yy, h[i])?, &chart, cfg)?;
    }

    // Momentum map with symbolic ξ.
    let xi: Vec<String> = ["xi1", "xi2"].iter().map(|s| fresh(&chart, s)).collect();
    let wide = Arc::new(
        (*chart)
            .clone()
            .with_params(&xi.iter().map(String::as_str).collect::<Vec<_>>())?,
    );
    let pi_w = out.pi.on_chart(&wide)?;
    let h_xi = Frac::param(&xi[0]).mul(h[0]).add(&Frac::param(&xi[1]).mul(h[1]));
    let gen = x[0]
        .on_chart(&wide)?
        .scale(&Frac::param(&xi[0]))
        .add(&x[1].on_chart(&wide)?.scale(&Frac::param(&xi[1])))?;
    let momentum = sharp(&pi_w, &d_fn(&wide, &h_xi))?.sub(&gen)?;
    check_tensor(&mut cert, "momentum", &momentum, cfg)?;
    out.checks.push(cert);
    out.h = Some(h_xi);
    Ok(out)
}

/// `π = Y₁∧X₁ + Y₂∧X₂` for commuting `X_i` with invariant `Y_j`, and
/// `Σ_j dh_i(Y_j)X_j = X_i`. Any precondition witnessed nonzero is an
/// error.
pub fn torus2(
    x: [&MultiVector; 2],
    h: [&Frac; 2],
    y: [&MultiVector; 2],
    cfg: &SamplerConfig,
) -> Result<HamiltonizationResult> {
    build(x, h, y, cfg, true)
}

/// [`torus2`] with preconditions recorded but not enforced.
pub fn torus2_unchecked(
    x: [&MultiVector; 2],
    h: [&Frac; 2],
    y: [&MultiVector; 2],
    cfg: &SamplerConfig,
) -> Result<HamiltonizationResult> {
    build(x, h, y, cfg, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{decomposable, rank_profile};

    fn fields(c: &Arc<Chart>, comps: &[&str]) -> MultiVector {
        MultiVector::parse_components(c, comps).unwrap()
    }

    fn frac(c: &Chart, s: &str) -> Frac {
        Frac::from_expr(&c.parse(s).unwrap()).unwrap()
    }

    fn chart() -> Arc<Chart> {
        let c = Chart::euclidean(4);
        let r1 = c.parse("x1^2 + x2^2").unwrap();
        let r2 = c.parse("x3^2 + x4^2").unwrap();
        Arc::new(c.with_exclude(r1).with_exclude(r2))
    }

    #[test]
    fn birotation() {
        let c = chart();
        let x1 = fields(&c, &["-x2", "x1", "0", "0"]);
        let x2 = fields(&c, &["0", "0", "-x4", "x3"]);
        let h1 = frac(&c, "(x1^2 + x2^2)/2");
        let h2 = frac(&c, "(x3^2 + x4^2)/2");
        let y1 = fields(&c, &["x1/(x1^2+x2^2)", "x2/(x1^2+x2^2)", "0", "0"]);
        let y2 = fields(&c, &["0", "0", "x3/(x3^2+x4^2)", "x4/(x3^2+x4^2)"]);
        let cfg = SamplerConfig::default();
        let r = torus2([&x1, &x2], [&h1, &h2], [&y1, &y2], &cfg).unwrap();
        assert!(r.verdict().is_zero(), "{:#?}", r.verdict());
        assert_eq!(rank_profile(&r.pi, &cfg).unwrap().into_iter().collect::<Vec<_>>(), vec![4]);
    }

    #[test]
    fn planted_transverse_bracket() {
        let c = chart();
        let x1 = fields(&c, &["-x2", "x1", "0", "0"]);
        let x2 = fields(&c, &["0", "0", "-x4", "x3"]);
        let h1 = frac(&c, "(x1^2 + x2^2)/2");
        let h2 = frac(&c, "(x3^2 + x4^2)/2");
        let y1 = fields(&c, &["x1/(x1^2+x2^2)", "x2/(x1^2+x2^2)", "0", "0"]);
        let y2 = fields(&c, &["0", "0", "x3", "x4"])
            .scale(&frac(&c, "1/(x3^2+x4^2) + x1^2 + x2^2"));
        let cfg = SamplerConfig::default();
        assert!(torus2([&x1, &x2], [&h1, &h2], [&y1, &y2], &cfg).is_err());
        let r = torus2_unchecked([&x1, &x2], [&h1, &h2], [&y1, &y2], &cfg).unwrap();
        assert!(r.jacobi.verdict().is_nonzero());
        let cert = r.checks.iter().find(|c| c.claim == "torus2").unwrap();
        assert!(cert.verdict_of("schouten_square").unwrap().is_zero());
    }

    #[test]
    fn single_generator_reduces_to_decomposable() {
        let c = Arc::new(Chart::new(&["x", "y", "z"]).unwrap());
        let x1 = fields(&c, &["1", "0", "0"]);
        let y1 = fields(&c, &["0", "1", "0"]);
        let zero = MultiVector::zero(&c, 1).unwrap();
        let h1 = frac(&c, "y");
        let cfg = SamplerConfig::default();
        let r = torus2([&x1, &zero], [&h1, &Frac::zero()], [&y1, &zero], &cfg).unwrap();
        assert_eq!(r.pi, decomposable(&x1, &y1, &cfg).unwrap().pi);
        assert!(r.verdict().is_zero());
    }
}
