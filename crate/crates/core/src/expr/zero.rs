use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Chart, Expr, Frac};
use crate::error::Result;
use crate::verify::{residual_stats, sample_points, SamplerConfig};

/// A sample point where an expression was observed to be nonzero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub params: BTreeMap<String, f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum TriState {
    /// Proved identically zero by exact normalization.
    Zero,
    NonZero { witness: Witness },
    /// Every sample was within tolerance but no proof exists.
    Unknown { residual_max: f64, residual_mean: f64, samples: usize },
}

impl TriState {
    pub fn is_zero(&self) -> bool {
        matches!(self, TriState::Zero)
    }

    pub fn is_nonzero(&self) -> bool {
        matches!(self, TriState::NonZero { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            TriState::Zero => "zero",
            TriState::NonZero { .. } => "nonzero",
            TriState::Unknown { .. } => "unknown",
        }
    }

    /// Largest residual observed, zero for exact verdicts.
    pub fn residual_max(&self) -> f64 {
        match self {
            TriState::Zero => 0.0,
            TriState::NonZero { witness } => witness.value.abs(),
            TriState::Unknown { residual_max, .. } => *residual_max,
        }
    }

    /// Combine verdicts of sub-identities: any NonZero wins, then Unknown.
    pub fn and(self, other: TriState) -> TriState {
        match (self, other) {
            (a @ TriState::NonZero { .. }, _) | (_, a @ TriState::NonZero { .. }) => a,
            (
                TriState::Unknown {
                    residual_max: a,
                    residual_mean: ma,
                    samples: na,
                },
                TriState::Unknown {
                    residual_max: b,
                    residual_mean: mb,
                    samples: nb,
                },
            ) => TriState::Unknown {
                residual_max: a.max(b),
                residual_mean: ma.max(mb),
                samples: na.max(nb),
            },
            (u @ TriState::Unknown { .. }, TriState::Zero) | (TriState::Zero, u) => u,
        }
    }
}

pub fn is_zero(e: &Expr, chart: &Chart, cfg: &SamplerConfig) -> Result<TriState> {
    is_zero_frac(&[Frac::from_expr(e)?], chart, cfg)
}

/// Joint zero test of several coefficients.
///
/// Rational coefficients never come back `Unknown`: a nonzero numerator is a
/// proof of nonvanishing, so the largest sample is reported as the witness
/// even when it lies under the tolerance.
pub fn is_zero_frac(coeffs: &[Frac], chart: &Chart, cfg: &SamplerConfig) -> Result<TriState> {
    let bound = chart.bound_params();
    let mut live = Vec::new();
    for c in coeffs {
        let c = c.bind_params(&bound)?;
        if !c.is_zero() {
            live.push(c);
        }
    }
    if live.is_empty() {
        return Ok(TriState::Zero);
    }
    let points = sample_points(chart, cfg)?;
    let stats = residual_stats(live.iter(), chart, &points)?;
    let exact = live.iter().all(Frac::is_rational);
    if stats.max > cfg.tolerance || exact {
        if let Some(i) = stats.argmax {
            let p = &points[i];
            return Ok(TriState::NonZero {
                witness: Witness {
                    point: p.x.clone(),
                    params: p.params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
                    value: signed_value(&live, chart, p, stats.max),
                },
            });
        }
    }
    Ok(TriState::Unknown {
        residual_max: stats.max,
        residual_mean: stats.mean,
        samples: stats.evaluated,
    })
}

fn signed_value(live: &[Frac], chart: &Chart, p: &crate::verify::Point, max: f64) -> f64 {
    let look = p.param_lookup();
    live.iter()
        .filter_map(|c| {
            crate::verify::Compiled::new(c, chart, &look)
                .and_then(|k| k.eval(&p.x))
                .ok()
        })
        .find(|v| v.abs() == max)
        .unwrap_or(max)
}
