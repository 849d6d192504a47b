//! Hamiltonization recipes. Each one builds a bivector and attaches the
//! certificates that justify it.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exterior::{rank_at_bivector, rank_at_form, Form, GradedTensor, MultiVector, Variance};
use crate::expr::{is_zero_frac, Chart, Frac, TriState};
use crate::poisson::{jacobi_check, Certificate};
use crate::verify::{sample_points, Compiled, SamplerConfig};

mod decomposable;
mod family;
mod linear;
mod torus;
mod unimodular;

pub use decomposable::{decomposable, hojman, metric_normal, normal_class_check, MetricNormal};
pub use family::{flaschka_ratiu, integrable_family};
pub use linear::{linear_fr, LinearFr};
pub use torus::{torus2, torus2_unchecked};
pub use unimodular::{foliated_build, integrating_factor, primitive, unimodularize, DEFAULT_DEGREE_BOUND};

/// Task identifiers, in the order the CLI lists them.
pub const CONSTRUCTIONS: [&str; 12] = [
    "flaschka_ratiu",
    "integrable_family",
    "linear_fr",
    "primitive",
    "integrating_factor",
    "unimodularize",
    "foliated_build",
    "normal_class_check",
    "decomposable",
    "hojman",
    "metric_normal",
    "torus2",
];

#[derive(Clone, Debug)]
pub struct HamiltonizationResult {
    pub construction: &'static str,
    pub pi: MultiVector,
    pub h: Option<Frac>,
    pub lambda: Option<Frac>,
    /// Position within a family of structures.
    pub family_index: Option<usize>,
    pub jacobi: Certificate,
    pub hamiltonization: Option<Certificate>,
    pub casimirs: Vec<Certificate>,
    /// Preconditions and construction-specific identities.
    pub checks: Vec<Certificate>,
}

impl HamiltonizationResult {
    pub(crate) fn new(construction: &'static str, pi: MultiVector, cfg: &SamplerConfig) -> Result<Self> {
        let jacobi = jacobi_check(&pi, cfg)?;
        Ok(HamiltonizationResult {
            construction,
            pi,
            h: None,
            lambda: None,
            family_index: None,
            jacobi,
            hamiltonization: None,
            casimirs: Vec::new(),
            checks: Vec::new(),
        })
    }

    /// Jacobi is Zero, or Unknown with every residual under tolerance.
    pub fn certified(&self) -> bool {
        match self.jacobi.verdict() {
            TriState::Zero => true,
            TriState::Unknown { residual_max, .. } => residual_max <= self.jacobi.sampler.tolerance,
            TriState::NonZero { .. } => false,
        }
    }

    pub fn certificates(&self) -> impl Iterator<Item = &Certificate> {
        std::iter::once(&self.jacobi)
            .chain(self.hamiltonization.iter())
            .chain(self.casimirs.iter())
            .chain(self.checks.iter())
    }

    /// Conjunction of every attached certificate.
    pub fn verdict(&self) -> TriState {
        self.certificates()
            .fold(TriState::Zero, |acc, c| acc.and(c.verdict()))
    }
}

/// Record `t` and fail if it was witnessed nonzero.
pub(crate) fn require(cert: &mut Certificate, name: &str, t: TriState) -> Result<()> {
    if let TriState::NonZero { witness } = &t {
        let detail = format!("residual {:e} at {:?}", witness.value, witness.point);
        cert.push(name, t);
        return Err(Error::precondition(name, detail));
    }
    cert.push(name, t);
    Ok(())
}

pub(crate) fn zero_test<V: Variance>(t: &GradedTensor<V>, cfg: &SamplerConfig) -> Result<TriState> {
    let coeffs: Vec<Frac> = t.coeffs().cloned().collect();
    is_zero_frac(&coeffs, t.chart(), cfg)
}

pub(crate) fn zero_test_frac(f: &Frac, chart: &Chart, cfg: &SamplerConfig) -> Result<TriState> {
    is_zero_frac(std::slice::from_ref(f), chart, cfg)
}

/// Fail unless `f` is nonzero at every sample.
pub(crate) fn require_nonvanishing(name: &str, f: &Frac, chart: &Arc<Chart>, cfg: &SamplerConfig) -> Result<()> {
    let pts = sample_points(chart, cfg)?;
    for p in &pts {
        let look = p.param_lookup();
        match Compiled::new(f, chart, &look)?.eval(&p.x) {
            Ok(v) if v.abs() > cfg.tolerance => {}
            Ok(v) => {
                return Err(Error::precondition(
                    name,
                    format!("vanishes at {:?} (value {v:e})", p.x),
                ))
            }
            Err(_) => {
                return Err(Error::precondition(name, format!("undefined at {:?}", p.x)));
            }
        }
    }
    Ok(())
}

/// Distinct numeric ranks of a bivector over the sample set.
pub fn rank_profile(pi: &MultiVector, cfg: &SamplerConfig) -> Result<BTreeSet<usize>> {
    let pts = sample_points(pi.chart(), cfg)?;
    pts.iter().map(|p| rank_at_bivector(pi, p)).collect()
}

/// Distinct numeric ranks of an `(m−2)`-form over the sample set.
pub fn form_rank_profile(rho: &Form, cfg: &SamplerConfig) -> Result<BTreeSet<usize>> {
    let pts = sample_points(rho.chart(), cfg)?;
    pts.iter().map(|p| rank_at_form(rho, p)).collect()
}
