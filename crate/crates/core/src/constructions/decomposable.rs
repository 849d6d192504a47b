use super::{require, require_nonvanishing, zero_test, zero_test_frac, HamiltonizationResult};
use crate::error::{Error, Result};
use crate::exterior::{apply, d_fn, lie_bracket, schouten, Metric, MultiVector};
use crate::expr::{Frac, Q};
use crate::poisson::{check_tensor, hamiltonization_check, Certificate};
use crate::verify::SamplerConfig;

fn vector_field(t: &MultiVector, what: &str) -> Result<()> {
    if t.grade() != 1 {
        return Err(Error::Grade(format!("{what} must be a vector field")));
    }
    Ok(())
}

/// Normalization `dh(Y)X = X`, invariance `[X,Y]∧X∧Y = 0` and the
/// stronger `[X,Y]∧X = 0`, each with its own verdict.
pub fn normal_class_check(
    x: &MultiVector,
    h: &Frac,
    y: &MultiVector,
    cfg: &SamplerConfig,
) -> Result<Certificate> {
    vector_field(x, "X")?;
    vector_field(y, "Y")?;
    let mut cert = Certificate::new("normal_class", cfg);
    cert.assume_tensor(x);
    cert.assume_tensor(y);
    cert.assume_frac(h);
    let dhy = apply(y, h)?;
    check_tensor(&mut cert, "normalized", &x.scale(&dhy).sub(x)?, cfg)?;
    let b = lie_bracket(x, y)?;
    let bx = b.wedge(x)?;
    check_tensor(&mut cert, "invariant", &bx.wedge(y)?, cfg)?;
    check_tensor(&mut cert, "strongly_invariant", &bx, cfg)?;
    Ok(cert)
}

/// `π = Y∧X` with the identity `[π,π] = 2[X,Y]∧X∧Y` certified.
pub fn decomposable(x: &MultiVector, y: &MultiVector, cfg: &SamplerConfig) -> Result<HamiltonizationResult> {
    vector_field(x, "X")?;
    vector_field(y, "Y")?;
    let pi = y.wedge(x)?;
    let mut out = HamiltonizationResult::new("decomposable", pi, cfg)?;
    let mut cert = Certificate::new("decomposable_identity", cfg);
    let lhs = schouten(&out.pi, &out.pi)?;
    let rhs = lie_bracket(x, y)?.wedge(x)?.wedge(y)?.scale_q(&Q::from_integer(2.into()));
    check_tensor(&mut cert, "schouten_square", &lhs.sub(&rhs)?, cfg)?;
    out.checks.push(cert);
    Ok(out)
}

/// `π = Z∧X / dh(Z)` for a first integral `h` and a field `Z` with
/// `[X,Z]∧X∧Z = 0` and `dh(Z)` nowhere zero.
pub fn hojman(x: &MultiVector, h: &Frac, z: &MultiVector, cfg: &SamplerConfig) -> Result<HamiltonizationResult> {
    vector_field(x, "X")?;
    vector_field(z, "Z")?;
    let chart = x.chart();
    let mut pre = Certificate::new("hojman.preconditions", cfg);
    require(&mut pre, "first_integral", zero_test_frac(&apply(x, h)?, chart, cfg)?)?;
    let dhz = apply(z, h)?;
    if dhz.is_zero() {
        return Err(Error::precondition("transversal", "dh(Z) vanishes identically"));
    }
    require_nonvanishing("transversal", &dhz, chart, cfg)?;
    let b = lie_bracket(x, z)?;
    require(&mut pre, "decomposition", zero_test(&b.wedge(x)?.wedge(z)?, cfg)?)?;
    let pi = z.wedge(x)?.scale(&dhz.recip()?);
    let mut out = HamiltonizationResult::new("hojman", pi, cfg)?;
    out.jacobi.assume_frac(&dhz.recip()?);
    out.checks.push(pre);
    let ham = hamiltonization_check(&out.pi, h, x, cfg)?;
    out.lambda = ham.lambda;
    out.hamiltonization = Some(ham.certificate);
    out.h = Some(h.clone());
    Ok(out)
}

/// Output of [`metric_normal`].
#[derive(Clone, Debug)]
pub struct MetricNormal {
    /// `Y₀ = η♯dh / η(dh,dh)`.
    pub y0: MultiVector,
    pub result: HamiltonizationResult,
}

/// The normal field built from the dual metric, and the decomposable
/// structure `Y₀∧X` it induces. Only full invariance `L_X g = 0` is
/// certified.
pub fn metric_normal(x: &MultiVector, h: &Frac, g: &Metric, cfg: &SamplerConfig) -> Result<MetricNormal> {
    vector_field(x, "X")?;
    let chart = x.chart();
    let dh = d_fn(chart, h);
    let norm = g.dual_pair(&dh, &dh)?;
    if norm.is_zero() {
        return Err(Error::precondition("regular", "η(dh,dh) vanishes identically"));
    }
    require_nonvanishing("regular", &norm, chart, cfg)?;
    let y0 = g.dual_sharp(&dh)?.scale(&norm.recip()?);

    let mut cert = Certificate::new("metric_normal", cfg);
    let lg = g.lie_derivative(x)?;
    let entries: Vec<Frac> = (0..lg.rows())
        .flat_map(|i| (0..lg.cols()).map(move |j| (i, j)))
        .map(|(i, j)| lg.get(i, j).clone())
        .collect();
    cert.push("invariant_metric", crate::expr::is_zero_frac(&entries, chart, cfg)?);
    check_tensor(&mut cert, "commutes", &lie_bracket(x, &y0)?, cfg)?;

    let mut result = decomposable(x, &y0, cfg)?;
    result.construction = "metric_normal";
    result.checks.push(cert);
    let ham = hamiltonization_check(&result.pi, h, x, cfg)?;
    result.lambda = ham.lambda;
    result.hamiltonization = Some(ham.certificate);
    result.h = Some(h.clone());
    Ok(MetricNormal { y0, result })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::expr::Chart;

    fn frac(c: &Chart, s: &str) -> Frac {
        Frac::from_expr(&c.parse(s).unwrap()).unwrap()
    }

    fn cfg() -> SamplerConfig {
        SamplerConfig::default()
    }

    fn positive(m: usize) -> SamplerConfig {
        SamplerConfig {
            bounds: vec![(0.1, 2.0); m],
            ..SamplerConfig::default()
        }
    }

    fn homogeneous(c: &Arc<Chart>) -> (MultiVector, Frac) {
        let x = MultiVector::parse_components(c, &["x1*(x2-x3)", "x2*(x3-x1)", "x3*(x1-x2)"]).unwrap();
        (x, frac(c, "x1*x2*x3"))
    }

    #[test]
    fn homogeneous_normal_class() {
        let c = Arc::new(Chart::euclidean(3));
        let (x, h) = homogeneous(&c);
        let y = MultiVector::parse_components(&c, &["x1", "x2", "x3"])
            .unwrap()
            .scale(&h.scale(&Q::from_integer(3.into())).recip().unwrap());
        let cert = normal_class_check(&x, &h, &y, &positive(3)).unwrap();
        assert!(cert.verdict().is_zero(), "{:#?}", cert.identities);
        // Y + gX lies in the same class.
        let y2 = y.add(&x.scale(&frac(&c, "x1 - 2*x3^2"))).unwrap();
        let cert2 = normal_class_check(&x, &h, &y2, &positive(3)).unwrap();
        let labels = |c: &Certificate| c.identities.iter().map(|i| i.verdict).collect::<Vec<_>>();
        assert_eq!(labels(&cert), labels(&cert2));
    }

    #[test]
    fn unnormalized_class() {
        let c = Arc::new(Chart::new(&["x", "y"]).unwrap());
        let dx = MultiVector::basis(&c, &[0]).unwrap();
        let cert = normal_class_check(&dx, &frac(&c, "y"), &dx, &cfg()).unwrap();
        assert!(cert.verdict_of("normalized").unwrap().is_nonzero());
        assert!(cert.verdict_of("invariant").unwrap().is_zero());
    }

    #[test]
    fn decomposable_examples() {
        let c = Arc::new(Chart::new(&["x", "y", "z"]).unwrap());
        let dx = MultiVector::basis(&c, &[0]).unwrap();
        let dy = MultiVector::basis(&c, &[1]).unwrap();
        let r = decomposable(&dx, &dy, &cfg()).unwrap();
        assert_eq!(r.pi, dy.wedge(&dx).unwrap());
        assert!(r.verdict().is_zero());
        // [∂x, x∂y] = ∂y is parallel to Y, so this pair is still Poisson.
        let xdy = MultiVector::parse_components(&c, &["0", "x", "0"]).unwrap();
        assert!(decomposable(&dx, &xdy, &cfg()).unwrap().jacobi.verdict().is_zero());
        // [∂x, ∂y + x∂z] = ∂z is transverse to both.
        let y = MultiVector::parse_components(&c, &["0", "1", "x"]).unwrap();
        let r = decomposable(&dx, &y, &cfg()).unwrap();
        assert!(r.jacobi.verdict().is_nonzero());
        assert!(r.checks[0].verdict().is_zero());
    }

    #[test]
    fn hojman_homogeneous() {
        let c = Arc::new(Chart::euclidean(3));
        let (x, h) = homogeneous(&c);
        let e = MultiVector::parse_components(&c, &["x1", "x2", "x3"]).unwrap();
        let r = hojman(&x, &h, &e, &positive(3)).unwrap();
        assert!(r.verdict().is_zero(), "{:#?}", r.verdict());
        assert!(r.lambda.as_ref().unwrap().is_one());
        assert!(matches!(hojman(&x, &h, &x, &positive(3)), Err(Error::Precondition { .. })));
    }

    #[test]
    fn hojman_euler_diagonal() {
        let c = Arc::new(Chart::euclidean(2));
        let x = MultiVector::parse_components(&c, &["x1", "-x2"]).unwrap();
        let e = MultiVector::parse_components(&c, &["x1", "x2"]).unwrap();
        let r = hojman(&x, &frac(&c, "x1*x2"), &e, &positive(2)).unwrap();
        assert!(r.verdict().is_zero());
        assert!(r.lambda.as_ref().unwrap().is_one());
    }

    #[test]
    fn metric_normal_rotation() {
        let c = Arc::new(Chart::new(&["x", "y"]).unwrap());
        let x = MultiVector::parse_components(&c, &["y", "-x"]).unwrap();
        let g = Metric::euclidean(&c);
        let out = metric_normal(&x, &frac(&c, "(x^2+y^2)/2"), &g, &cfg()).unwrap();
        assert_eq!(out.y0, MultiVector::parse_components(&c, &["x/(x^2+y^2)", "y/(x^2+y^2)"]).unwrap());
        assert!(out.result.verdict().is_zero(), "{:#?}", out.result.verdict());
        assert!(out.result.lambda.as_ref().unwrap().is_one());
    }

    #[test]
    fn metric_normal_trivial_and_critical() {
        let c = Arc::new(Chart::new(&["x", "y"]).unwrap());
        let g = Metric::euclidean(&c);
        let dy = MultiVector::basis(&c, &[1]).unwrap();
        let out = metric_normal(&dy, &frac(&c, "x"), &g, &cfg()).unwrap();
        assert_eq!(out.y0, MultiVector::basis(&c, &[0]).unwrap());
        assert_eq!(out.result.pi, MultiVector::basis(&c, &[0, 1]).unwrap());
        let tiny = SamplerConfig {
            bounds: vec![(-1e-6, 1e-6); 2],
            ..cfg()
        };
        let rot = MultiVector::parse_components(&c, &["y", "-x"]).unwrap();
        assert!(matches!(
            metric_normal(&rot, &frac(&c, "(x^2+y^2)/2"), &g, &tiny),
            Err(Error::Precondition { .. })
        ));
    }
}
