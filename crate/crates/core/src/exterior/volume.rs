use std::sync::Arc;

use super::tensor::Form;
use crate::error::{Error, Result};
use crate::expr::{Chart, Expr, Frac};
use crate::verify::{residual_stats, sample_points, SamplerConfig};

/// `Ω = ω dx_1∧…∧dx_m` with `ω` not identically zero.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeForm {
    chart: Arc<Chart>,
    coeff: Frac,
}

impl VolumeForm {
    pub fn new(chart: &Arc<Chart>, coeff: Frac) -> Result<Self> {
        if coeff.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(VolumeForm {
            chart: chart.clone(),
            coeff,
        })
    }

    pub fn parse(chart: &Arc<Chart>, text: &str) -> Result<Self> {
        VolumeForm::new(chart, Frac::from_expr(&chart.parse(text)?)?)
    }

    pub fn euclidean(chart: &Arc<Chart>) -> Self {
        VolumeForm::new(chart, Frac::one()).expect("nonzero")
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn coeff(&self) -> &Frac {
        &self.coeff
    }

    pub fn as_form(&self) -> Form {
        let all: Vec<usize> = (0..self.chart.dim()).collect();
        Form::from_entries(&self.chart, all.len(), vec![(all, self.coeff.clone())])
            .expect("top degree")
    }

    /// Polynomials that must not vanish for `Ω` to be a volume form.
    pub fn assumptions(&self) -> Vec<Expr> {
        let mut out: Vec<Expr> = self
            .coeff
            .den_factors()
            .map(|p| Frac::from_poly(p.clone()).to_expr())
            .collect();
        if self.coeff.as_constant().is_none() {
            out.push(Frac::from_poly(self.coeff.num().clone()).to_expr());
        }
        out
    }

    /// Every sample must see `|ω| > tolerance`.
    pub fn certify(&self, cfg: &SamplerConfig) -> Result<()> {
        if self.coeff.as_constant().is_some() {
            return Ok(());
        }
        let pts = sample_points(&self.chart, cfg)?;
        for p in &pts {
            let s = residual_stats([&self.coeff], &self.chart, std::slice::from_ref(p))?;
            if s.evaluated == 1 && s.max <= cfg.tolerance {
                return Err(Error::precondition(
                    "volume_nonvanishing",
                    format!("volume coefficient vanishes near {:?}", p.x),
                ));
            }
        }
        Ok(())
    }
}
