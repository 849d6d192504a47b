use serde::{Deserialize, Serialize};

use super::compile::Compiled;
use super::sampler::Point;
use crate::error::{Error, Result};
use crate::expr::{Chart, Frac};

/// Magnitude statistics of a family of coefficients over sample points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub max: f64,
    pub mean: f64,
    /// Index into the point list where `max` was attained.
    pub argmax: Option<usize>,
    pub evaluated: usize,
    pub skipped: usize,
}

/// max/mean of `|c(p)|` over every coefficient `c` and point `p`.
///
/// A point where any coefficient fails to evaluate is skipped; more than half
/// the points skipped is an error.
pub fn residual_stats<'a>(
    coeffs: impl IntoIterator<Item = &'a Frac>,
    chart: &Chart,
    points: &[Point],
) -> Result<Stats> {
    let coeffs: Vec<&Frac> = coeffs.into_iter().filter(|c| !c.is_zero()).collect();
    let mut stats = Stats {
        max: 0.0,
        mean: 0.0,
        argmax: None,
        evaluated: 0,
        skipped: 0,
    };
    if coeffs.is_empty() {
        stats.evaluated = points.len();
        return Ok(stats);
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, p) in points.iter().enumerate() {
        let look = p.param_lookup();
        let vals: Result<Vec<f64>> = coeffs
            .iter()
            .map(|c| Compiled::new(c, chart, &look)?.eval(&p.x))
            .collect();
        match vals {
            Ok(vs) => {
                stats.evaluated += 1;
                for v in vs {
                    let a = v.abs();
                    sum += a;
                    count += 1;
                    if stats.argmax.is_none() || a > stats.max {
                        stats.max = a;
                        stats.argmax = Some(i);
                    }
                }
            }
            Err(Error::UnboundParameter(n)) => return Err(Error::UnboundParameter(n)),
            Err(_) => stats.skipped += 1,
        }
    }
    if stats.skipped * 2 > points.len() {
        return Err(Error::TooManySkipped {
            skipped: stats.skipped,
            total: points.len(),
        });
    }
    stats.mean = if count > 0 { sum / count as f64 } else { 0.0 };
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{sample_points, SamplerConfig};

    #[test]
    fn zero_and_pythagoras() {
        let c = Chart::new(&["x"]).unwrap();
        let pts = sample_points(&c, &SamplerConfig::default()).unwrap();
        let s = residual_stats([&Frac::zero()], &c, &pts).unwrap();
        assert_eq!(s.max, 0.0);
        let e = Frac::from_expr(&c.parse("sin(x)^2 + cos(x)^2 - 1").unwrap()).unwrap();
        let s = residual_stats([&e], &c, &pts).unwrap();
        assert!(s.max <= 1e-12, "{}", s.max);
        assert_eq!(s.evaluated, 64);
    }

    #[test]
    fn poles_are_skipped_then_rejected() {
        let c = Chart::new(&["x"]).unwrap();
        let pts: Vec<Point> = [0.0, 0.0, 1.0]
            .iter()
            .map(|v| Point {
                x: vec![*v],
                params: vec![],
            })
            .collect();
        let e = Frac::from_expr(&c.parse("1/x").unwrap()).unwrap();
        assert!(matches!(
            residual_stats([&e], &c, &pts),
            Err(Error::TooManySkipped { skipped: 2, total: 3 })
        ));
        let s = residual_stats([&e], &c, &pts[1..]).unwrap();
        assert_eq!(s.skipped, 1);
        assert_eq!(s.max, 1.0);
    }
}
