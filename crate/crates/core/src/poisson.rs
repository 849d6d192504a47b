//! Poisson predicates and their certificates.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{
    d_fn, divergence, schouten, sharp, to_form, Form, GradedTensor, MultiVector, TensorJson,
    Variance, VolumeForm,
};
use crate::expr::{is_zero_frac, Chart, Expr, Frac, TriState, Witness, Q};
use crate::verify::{sample_points, Compiled, SamplerConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Zero,
    Nonzero,
    Unknown,
}

impl Verdict {
    pub fn of(t: &TriState) -> Verdict {
        match t {
            TriState::Zero => Verdict::Zero,
            TriState::NonZero { .. } => Verdict::Nonzero,
            TriState::Unknown { .. } => Verdict::Unknown,
        }
    }

    /// Nonzero dominates, then Unknown.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Nonzero, _) | (_, Nonzero) => Nonzero,
            (Unknown, _) | (_, Unknown) => Unknown,
            _ => Zero,
        }
    }
}

/// One certified identity `expr = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Identity {
    pub name: String,
    pub verdict: Verdict,
    pub residual_max: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub residual_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
}

impl Identity {
    pub fn new(name: &str, t: TriState) -> Identity {
        let residual_max = t.residual_max();
        match t {
            TriState::Zero => Identity {
                name: name.into(),
                verdict: Verdict::Zero,
                residual_max,
                residual_mean: None,
                samples: None,
                witness: None,
            },
            TriState::NonZero { witness } => Identity {
                name: name.into(),
                verdict: Verdict::Nonzero,
                residual_max,
                residual_mean: None,
                samples: None,
                witness: Some(witness),
            },
            TriState::Unknown {
                residual_mean,
                samples,
                ..
            } => Identity {
                name: name.into(),
                verdict: Verdict::Unknown,
                residual_max,
                residual_mean: Some(residual_mean),
                samples: Some(samples),
                witness: None,
            },
        }
    }

    pub fn state(&self) -> TriState {
        match self.verdict {
            Verdict::Zero => TriState::Zero,
            Verdict::Nonzero => TriState::NonZero {
                witness: self.witness.clone().unwrap_or(Witness {
                    point: vec![],
                    params: BTreeMap::new(),
                    value: self.residual_max,
                }),
            },
            Verdict::Unknown => TriState::Unknown {
                residual_max: self.residual_max,
                residual_mean: self.residual_mean.unwrap_or(self.residual_max),
                samples: self.samples.unwrap_or(0),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub claim: String,
    pub identities: Vec<Identity>,
    pub sampler: SamplerConfig,
    pub assumptions: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_constant: Option<bool>,
    /// λ came from sampled values rather than exact division.
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub lambda_estimated: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact: Option<bool>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub reported: BTreeMap<String, TensorJson>,
    pub seed: u64,
}

impl Certificate {
    pub fn new(claim: &str, cfg: &SamplerConfig) -> Certificate {
        Certificate {
            claim: claim.into(),
            identities: Vec::new(),
            sampler: cfg.clone(),
            assumptions: Vec::new(),
            lambda: None,
            lambda_constant: None,
            lambda_estimated: false,
            exact: None,
            reported: BTreeMap::new(),
            seed: cfg.seed,
        }
    }

    /// Zero only if every identity is Zero; any NonZero wins over Unknown.
    pub fn verdict(&self) -> TriState {
        self.identities
            .iter()
            .fold(TriState::Zero, |acc, i| acc.and(i.state()))
    }

    pub fn identity(&self, name: &str) -> Option<&Identity> {
        self.identities.iter().find(|i| i.name == name)
    }

    pub fn verdict_of(&self, name: &str) -> Option<TriState> {
        self.identity(name).map(Identity::state)
    }

    pub fn push(&mut self, name: &str, t: TriState) {
        self.identities.push(Identity::new(name, t));
    }

    pub fn assume(&mut self, exprs: impl IntoIterator<Item = Expr>) {
        let mut set: BTreeSet<String> = self.assumptions.drain(..).collect();
        set.extend(exprs.into_iter().map(|e| format!("{e} != 0")));
        self.assumptions = set.into_iter().collect();
    }

    pub fn assume_tensor<V: Variance>(&mut self, t: &GradedTensor<V>) {
        self.assume(t.den_factors());
    }

    pub fn assume_frac(&mut self, f: &Frac) {
        self.assume(
            f.den_factors()
                .map(|p| Frac::from_poly(p.clone()).to_expr())
                .collect::<Vec<_>>(),
        );
    }

    /// Merge another certificate's identities under a name prefix.
    pub fn absorb(&mut self, prefix: &str, other: &Certificate) {
        for i in &other.identities {
            let mut i = i.clone();
            if !prefix.is_empty() {
                i.name = format!("{prefix}.{}", i.name);
            }
            self.identities.push(i);
        }
        let extra: Vec<String> = other.assumptions.clone();
        let mut set: BTreeSet<String> = self.assumptions.drain(..).collect();
        set.extend(extra);
        self.assumptions = set.into_iter().collect();
    }
}

/// Run the zero test on a tensor and record it.
pub fn check_tensor<V: Variance>(
    cert: &mut Certificate,
    name: &str,
    t: &GradedTensor<V>,
    cfg: &SamplerConfig,
) -> Result<TriState> {
    let coeffs: Vec<Frac> = t.coeffs().cloned().collect();
    let v = is_zero_frac(&coeffs, t.chart(), cfg)?;
    cert.push(name, v.clone());
    Ok(v)
}

pub fn check_scalar(
    cert: &mut Certificate,
    name: &str,
    f: &Frac,
    chart: &Chart,
    cfg: &SamplerConfig,
) -> Result<TriState> {
    let v = is_zero_frac(std::slice::from_ref(f), chart, cfg)?;
    cert.push(name, v.clone());
    Ok(v)
}

/// `[π,π] = 0`, coefficient by coefficient.
pub fn jacobi_check(pi: &MultiVector, cfg: &SamplerConfig) -> Result<Certificate> {
    let mut cert = Certificate::new("jacobi", cfg);
    cert.assume_tensor(pi);
    check_tensor(&mut cert, "jacobi", &schouten(pi, pi)?, cfg)?;
    Ok(cert)
}

/// `X_h = π♯dh`.
pub fn hamiltonian_vf(pi: &MultiVector, h: &Frac) -> Result<MultiVector> {
    sharp(pi, &d_fn(pi.chart(), h))
}

/// `π♯dc = 0`, and with `Ω` also `dc ∧ ι_πΩ = 0`.
pub fn casimir_check(
    pi: &MultiVector,
    c: &Frac,
    vol: Option<&VolumeForm>,
    cfg: &SamplerConfig,
) -> Result<Certificate> {
    let mut cert = Certificate::new("casimir", cfg);
    cert.assume_tensor(pi);
    cert.assume_frac(c);
    let dc = d_fn(pi.chart(), c);
    check_tensor(&mut cert, "casimir_sharp", &sharp(pi, &dc)?, cfg)?;
    if let Some(vol) = vol {
        let rho = to_form(vol, pi)?;
        check_tensor(&mut cert, "casimir_wedge", &dc.wedge(&rho)?, cfg)?;
    }
    Ok(cert)
}

/// `L_X π = [X, π] = 0`.
pub fn poisson_vf_check(pi: &MultiVector, x: &MultiVector, cfg: &SamplerConfig) -> Result<Certificate> {
    let mut cert = Certificate::new("poisson_vf", cfg);
    cert.assume_tensor(pi);
    cert.assume_tensor(x);
    check_tensor(&mut cert, "poisson_vf", &schouten(x, pi)?, cfg)?;
    Ok(cert)
}

/// The vector field whose `i`-th component is `div_Ω(π♯dx^i)`.
pub fn modular_vf(pi: &MultiVector, vol: &VolumeForm) -> Result<MultiVector> {
    let chart = pi.chart();
    let mut comps = Vec::with_capacity(chart.dim());
    for i in 0..chart.dim() {
        let dxi = Form::basis(chart, &[i])?;
        comps.push(divergence(&sharp(pi, &dxi)?, vol)?);
    }
    MultiVector::from_components(chart, comps)
}

/// `[fπ, fπ] + 2f π♯df ∧ π = 0` for Poisson `π`, plus Jacobi for `fπ`.
pub fn conformal_identity_check(pi: &MultiVector, f: &Frac, cfg: &SamplerConfig) -> Result<Certificate> {
    let pre = jacobi_check(pi, cfg)?;
    if pre.verdict().is_nonzero() {
        return Err(Error::precondition("jacobi", "π is not a Poisson structure"));
    }
    let mut cert = Certificate::new("conformal_identity", cfg);
    cert.absorb("pre", &pre);
    cert.assume_frac(f);
    let fpi = pi.scale(f);
    let lhs = schouten(&fpi, &fpi)?;
    let rhs = sharp(pi, &d_fn(pi.chart(), f))?.wedge(pi)?.scale(&f.scale(&Q::from_integer(2.into())));
    check_tensor(&mut cert, "conformal_identity", &lhs.add(&rhs)?, cfg)?;
    check_tensor(&mut cert, "jacobi_scaled", &lhs, cfg)?;
    Ok(cert)
}

/// Output of [`hamiltonization_check`].
#[derive(Clone, Debug)]
pub struct Hamiltonization {
    pub certificate: Certificate,
    /// `π♯dh = λ X`; absent when `X = 0`.
    pub lambda: Option<Frac>,
    pub residual: MultiVector,
}

/// Closest rational with a small denominator, if one matches `v` closely.
pub fn recognize_rational(v: f64) -> Option<Q> {
    if !v.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut x = v;
    for _ in 0..20 {
        let a = x.floor();
        if a.abs() > 1e9 {
            break;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > 10_000 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let approx = h1 as f64 / k1 as f64;
        if (approx - v).abs() <= 1e-10 * v.abs().max(1.0) {
            return Some(Q::new(h1.into(), k1.into()));
        }
        let r = x - a as f64;
        if r.abs() < 1e-15 {
            break;
        }
        x = 1.0 / r;
    }
    None
}

/// Recover `λ` with `π♯dh = λX` and certify `π♯dh − λX = 0`.
///
/// `λ` is the ratio at the first component of `X` that is not identically
/// zero. When that ratio keeps opaque kernels it is sampled instead, and a
/// numerically constant value is snapped to a nearby small rational.
pub fn hamiltonization_check(
    pi: &MultiVector,
    h: &Frac,
    x: &MultiVector,
    cfg: &SamplerConfig,
) -> Result<Hamiltonization> {
    let chart = pi.chart().clone();
    let bound = chart.bound_params();
    let mut cert = Certificate::new("hamiltonization", cfg);
    cert.assume_tensor(pi);
    cert.assume_tensor(x);
    cert.assume_frac(h);
    let r = hamiltonian_vf(pi, h)?.bind_params(&bound)?;
    let x = x.bind_params(&bound)?;
    let Some(k) = (0..chart.dim()).find(|&k| !x.component(k).is_zero()) else {
        check_tensor(&mut cert, "hamiltonian_vf_vanishes", &r, cfg)?;
        cert.reported.insert("hamiltonian_vf".into(), r.to_json());
        return Ok(Hamiltonization {
            certificate: cert,
            lambda: None,
            residual: r,
        });
    };
    let ratio = r.component(k).div(&x.component(k))?;
    let (lambda, estimated) = if ratio.is_rational() {
        (ratio, false)
    } else {
        match sampled_constant(&ratio, &chart, cfg)? {
            Some(q) => (Frac::constant(q), true),
            None => (ratio, false),
        }
    };
    let residual = r.sub(&x.scale(&lambda))?;
    check_tensor(&mut cert, "hamiltonian_proportional", &residual, cfg)?;
    let constant = lambda.as_constant();
    cert.lambda = Some(lambda.to_expr().to_string());
    cert.lambda_constant = Some(constant.is_some() || lambda_is_constant(&lambda, &chart));
    cert.lambda_estimated = estimated;
    cert.exact = Some(constant.is_some_and(|c| c.is_one()));
    Ok(Hamiltonization {
        certificate: cert,
        lambda: Some(lambda),
        residual,
    })
}

/// Every coordinate derivative of `λ` vanishes exactly.
fn lambda_is_constant(lambda: &Frac, chart: &Chart) -> bool {
    chart
        .coords()
        .iter()
        .all(|c| lambda.diff(c).is_zero())
}

/// Sample `f`; if it is constant to tolerance and close to a small rational,
/// return that rational.
fn sampled_constant(f: &Frac, chart: &Arc<Chart>, cfg: &SamplerConfig) -> Result<Option<Q>> {
    let pts = sample_points(chart, cfg)?;
    let mut vals = Vec::with_capacity(pts.len());
    for p in &pts {
        let look = p.param_lookup();
        if let Ok(v) = Compiled::new(f, chart, &look)?.eval(&p.x) {
            vals.push(v);
        }
    }
    if vals.len() * 2 < pts.len() {
        return Err(Error::TooManySkipped {
            skipped: pts.len() - vals.len(),
            total: pts.len(),
        });
    }
    let v0 = vals[0];
    let spread = vals.iter().map(|v| (v - v0).abs()).fold(0.0, f64::max);
    if spread > cfg.tolerance * v0.abs().max(1.0) {
        return Ok(None);
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    Ok(recognize_rational(mean))
}

/// Numeric value of a constant `Frac`, for reporting.
pub fn constant_f64(f: &Frac) -> Option<f64> {
    f.as_constant().and_then(|q| q.to_f64())
}

/// `sign(q)` as an integer, `0` for zero.
pub fn sign_of(q: &Q) -> i32 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}
