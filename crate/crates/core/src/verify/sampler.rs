use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::compile::{lookup, Compiled};
use crate::error::{Error, Result};
use crate::expr::{Chart, Frac};

/// How admissible points are drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Per-coordinate intervals. Empty means `[-2, 2]` for every coordinate.
    #[serde(rename = "box")]
    pub bounds: Vec<(f64, f64)>,
    #[serde(rename = "count")]
    pub n: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Points with `|locus| < margin` are rejected.
    pub margin: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            bounds: Vec::new(),
            n: 64,
            seed: 42,
            tolerance: 1e-9,
            margin: 1e-3,
        }
    }
}

impl SamplerConfig {
    pub fn bounds_for(&self, m: usize) -> Result<Vec<(f64, f64)>> {
        if self.bounds.is_empty() {
            return Ok(vec![(-2.0, 2.0); m]);
        }
        if self.bounds.len() != m {
            return Err(Error::Shape(format!(
                "sampling box has {} intervals, chart dimension is {m}",
                self.bounds.len()
            )));
        }
        Ok(self.bounds.clone())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Shape("sample count must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Shape("tolerance must be positive".into()));
        }
        if self.bounds.iter().any(|(a, b)| !(a < b)) {
            return Err(Error::Shape("empty sampling interval".into()));
        }
        Ok(())
    }
}

/// One admissible sample: coordinates plus values drawn for every parameter
/// left unbound on the chart.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub x: Vec<f64>,
    pub params: Vec<(Arc<str>, f64)>,
}

impl Point {
    pub fn param_lookup(&self) -> impl Fn(&str) -> Option<f64> + '_ {
        lookup(&self.params)
    }
}

/// Parameters without a binding are sampled from this interval.
pub const PARAM_RANGE: (f64, f64) = (-2.0, 2.0);

pub fn sample_points(chart: &Chart, cfg: &SamplerConfig) -> Result<Vec<Point>> {
    cfg.validate()?;
    let bounds = cfg.bounds_for(chart.dim())?;
    let free = chart.unbound_params();
    let loci: Vec<Frac> = chart
        .exclude()
        .iter()
        .map(Frac::from_expr)
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let attempts_cap = cfg.n.saturating_mul(100);
    let mut out = Vec::with_capacity(cfg.n);
    let mut attempts = 0;
    while out.len() < cfg.n && attempts < attempts_cap {
        attempts += 1;
        let x: Vec<f64> = bounds.iter().map(|(a, b)| rng.random_range(*a..*b)).collect();
        let params: Vec<(Arc<str>, f64)> = free
            .iter()
            .map(|n| (n.clone(), rng.random_range(PARAM_RANGE.0..PARAM_RANGE.1)))
            .collect();
        let ok = loci.iter().all(|l| {
            Compiled::new(l, chart, &lookup(&params))
                .and_then(|c| c.eval(&x))
                .is_ok_and(|v| v.abs() >= cfg.margin)
        });
        if ok {
            out.push(Point { x, params });
        }
    }
    if out.len() < cfg.n {
        return Err(Error::DegenerateSampling {
            accepted: out.len(),
            attempts,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_under_seed() {
        let c = Chart::new(&["x", "y", "z"]).unwrap();
        let cfg = SamplerConfig::default();
        let a = sample_points(&c, &cfg).unwrap();
        let b = sample_points(&c, &cfg).unwrap();
        assert_eq!(a.len(), 64);
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.x.iter().all(|v| (-2.0..2.0).contains(v))));
        let other = sample_points(&c, &SamplerConfig { seed: 7, ..cfg }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn loci_are_avoided() {
        let c = Chart::new(&["x", "y", "z"]).unwrap();
        let c = c.clone().with_exclude(c.parse("x^2+y^2").unwrap());
        let cfg = SamplerConfig {
            n: 500,
            ..Default::default()
        };
        for p in sample_points(&c, &cfg).unwrap() {
            assert!(p.x[0] * p.x[0] + p.x[1] * p.x[1] >= cfg.margin);
        }
    }

    #[test]
    fn box_inside_locus_is_degenerate() {
        let c = Chart::new(&["x"]).unwrap();
        let c = c.clone().with_exclude(c.parse("x").unwrap());
        let cfg = SamplerConfig {
            bounds: vec![(-1e-4, 1e-4)],
            ..Default::default()
        };
        assert!(matches!(
            sample_points(&c, &cfg),
            Err(Error::DegenerateSampling { accepted: 0, .. })
        ));
    }

    #[test]
    fn unbound_parameters_are_drawn() {
        let c = Chart::new(&["x"]).unwrap().with_params(&["a"]).unwrap();
        let pts = sample_points(&c, &SamplerConfig::default()).unwrap();
        assert!(pts.iter().all(|p| p.params.len() == 1));
    }
}
