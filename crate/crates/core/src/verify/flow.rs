//! Fixed-step RK4 conservation checks.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::compile::{lookup, Compiled};
use crate::error::{Error, Result};
use crate::exterior::{d_fn, sharp, MultiVector};
use crate::expr::{Chart, Frac};

/// What to integrate and from where.
#[derive(Clone, Debug)]
pub struct FlowSpec {
    pub start: Vec<f64>,
    pub horizon: f64,
    pub dt: f64,
    /// Values for parameters the chart leaves unbound.
    pub params: Vec<(Arc<str>, f64)>,
    /// The trajectory is truncated once it leaves this box.
    pub bounds: Option<Vec<(f64, f64)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowReport {
    pub start: Vec<f64>,
    pub dt: f64,
    pub horizon: f64,
    pub steps: usize,
    /// Per invariant: max over the trajectory of `|c(t) − c(0)|`, divided by
    /// `|c(0)|` when that exceeds `1e-6`.
    pub drift: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub field_deviation: Option<f64>,
    pub truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub truncated_at: Option<f64>,
}

struct Field {
    comps: Vec<Option<Compiled>>,
}

impl Field {
    fn new(x: &MultiVector, chart: &Chart, params: &[(Arc<str>, f64)]) -> Result<Field> {
        let look = lookup(params);
        let comps = x
            .components()
            .iter()
            .map(|c| {
                if c.is_zero() {
                    Ok(None)
                } else {
                    Compiled::new(c, chart, &look).map(Some)
                }
            })
            .collect::<Result<_>>()?;
        Ok(Field { comps })
    }

    fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.comps
            .iter()
            .map(|c| c.as_ref().map_or(Ok(0.0), |c| c.eval(p)))
            .collect()
    }
}

fn axpy(p: &[f64], k: &[f64], h: f64) -> Vec<f64> {
    p.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

fn rk4_step(f: &Field, p: &[f64], dt: f64) -> Result<Vec<f64>> {
    let k1 = f.eval(p)?;
    let k2 = f.eval(&axpy(p, &k1, dt / 2.0))?;
    let k3 = f.eval(&axpy(p, &k2, dt / 2.0))?;
    let k4 = f.eval(&axpy(p, &k3, dt))?;
    Ok((0..p.len())
        .map(|i| p[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Integrate `X` with classical RK4 and track invariants along the way.
///
/// With `pi_h`, also reports the largest pointwise gap between `X` and
/// `π♯dh` seen on the trajectory.
pub fn flow_conservation(
    x: &MultiVector,
    invariants: &[Frac],
    pi_h: Option<(&MultiVector, &Frac)>,
    spec: &FlowSpec,
) -> Result<FlowReport> {
    let chart = x.chart().clone();
    let m = chart.dim();
    if spec.start.len() != m {
        return Err(Error::Shape(format!(
            "start point has {} entries, chart dimension is {m}",
            spec.start.len()
        )));
    }
    if !(spec.dt > 0.0) || !(spec.horizon >= 0.0) {
        return Err(Error::Shape("dt must be positive and horizon non-negative".into()));
    }
    let look = lookup(&spec.params);
    let bound = chart.bound_params();
    for l in chart.exclude() {
        let v = Compiled::new(&Frac::from_expr(l)?.bind_params(&bound)?, &chart, &look)?
            .eval(&spec.start)?;
        if v == 0.0 {
            return Err(Error::Eval("start point lies on an excluded locus".into()));
        }
    }
    let field = Field::new(x, &chart, &spec.params)?;
    let inv: Vec<Compiled> = invariants
        .iter()
        .map(|c| Compiled::new(c, &chart, &look))
        .collect::<Result<_>>()?;
    let reference = match pi_h {
        Some((pi, h)) => Some(Field::new(&sharp(pi, &d_fn(&chart, h))?, &chart, &spec.params)?),
        None => None,
    };
    let c0: Vec<f64> = inv
        .iter()
        .map(|c| c.eval(&spec.start))
        .collect::<Result<_>>()?;
    let mut drift = vec![0.0; inv.len()];
    let mut deviation: Option<f64> = reference.as_ref().map(|_| 0.0);
    let steps = (spec.horizon / spec.dt).round() as usize;
    let mut p = spec.start.clone();
    let mut truncated_at = None;

    let mut observe = |p: &[f64], deviation: &mut Option<f64>| -> Result<()> {
        for (i, c) in inv.iter().enumerate() {
            let v = c.eval(p)?;
            let mut dv = (v - c0[i]).abs();
            if c0[i].abs() > 1e-6 {
                dv /= c0[i].abs();
            }
            drift[i] = f64::max(drift[i], dv);
        }
        if let (Some(r), Some(dev)) = (&reference, deviation.as_mut()) {
            let a = field.eval(p)?;
            let b = r.eval(p)?;
            let gap = a
                .iter()
                .zip(&b)
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max);
            *dev = dev.max(gap);
        }
        Ok(())
    };
    observe(&p, &mut deviation)?;
    for n in 0..steps {
        let next = match rk4_step(&field, &p, spec.dt) {
            Ok(q) => q,
            Err(_) => {
                truncated_at = Some(n as f64 * spec.dt);
                break;
            }
        };
        let outside = spec.bounds.as_ref().is_some_and(|b| {
            next.iter().zip(b).any(|(v, (lo, hi))| *v < *lo || *v > *hi)
        });
        if outside || observe(&next, &mut deviation).is_err() {
            truncated_at = Some(n as f64 * spec.dt);
            break;
        }
        p = next;
    }
    Ok(FlowReport {
        start: spec.start.clone(),
        dt: spec.dt,
        horizon: spec.horizon,
        steps,
        drift,
        field_deviation: deviation,
        truncated: truncated_at.is_some(),
        truncated_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(start: Vec<f64>, horizon: f64, dt: f64) -> FlowSpec {
        FlowSpec {
            start,
            horizon,
            dt,
            params: vec![],
            bounds: None,
        }
    }

    #[test]
    fn zero_field_has_no_drift() {
        let c = Arc::new(Chart::new(&["x", "y"]).unwrap());
        let x = MultiVector::zero(&c, 1).unwrap();
        let inv = Frac::from_expr(&c.parse("x^2 + 3*y").unwrap()).unwrap();
        let r = flow_conservation(&x, &[inv], None, &spec(vec![0.4, 0.1], 1.0, 0.1)).unwrap();
        assert_eq!(r.drift, vec![0.0]);
        assert!(!r.truncated);
    }

    #[test]
    fn rk4_order() {
        // Rotation conserves x^2+y^2; RK4 error should drop ~16x per halving.
        let c = Arc::new(Chart::new(&["x", "y"]).unwrap());
        let x = MultiVector::parse_components(&c, &["-y", "x"]).unwrap();
        let inv = Frac::from_expr(&c.parse("x^2 + y^2").unwrap()).unwrap();
        let a = flow_conservation(&x, &[inv.clone()], None, &spec(vec![1.0, 0.0], 5.0, 0.1)).unwrap();
        let b = flow_conservation(&x, &[inv], None, &spec(vec![1.0, 0.0], 5.0, 0.05)).unwrap();
        let ratio = a.drift[0] / b.drift[0];
        assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn leaving_the_box_truncates() {
        let c = Arc::new(Chart::new(&["x"]).unwrap());
        let x = MultiVector::parse_components(&c, &["1"]).unwrap();
        let mut s = spec(vec![0.0], 10.0, 0.1);
        s.bounds = Some(vec![(-2.0, 2.0)]);
        let r = flow_conservation(&x, &[], None, &s).unwrap();
        assert!(r.truncated);
        assert!(r.truncated_at.unwrap() < 2.1);
    }
}
