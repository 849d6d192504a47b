use std::sync::Arc;

use super::ops::apply;
use super::tensor::{same_chart, Form, MultiVector};
use crate::error::{Error, Result};
use crate::expr::{Chart, Frac, RationalMatrix};

/// A symmetric coefficient matrix `g` with its exact inverse `η`.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    chart: Arc<Chart>,
    g: RationalMatrix,
    eta: RationalMatrix,
}

impl Metric {
    pub fn new(chart: &Arc<Chart>, g: RationalMatrix) -> Result<Self> {
        let m = chart.dim();
        if g.rows() != m || g.cols() != m {
            return Err(Error::Shape(format!("metric must be {m}x{m}")));
        }
        for i in 0..m {
            for j in i + 1..m {
                if !g.get(i, j).sub(g.get(j, i)).is_zero() {
                    return Err(Error::Shape(format!(
                        "metric is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let eta = g.inverse()?;
        Ok(Metric {
            chart: chart.clone(),
            g,
            eta,
        })
    }

    pub fn euclidean(chart: &Arc<Chart>) -> Self {
        Metric::new(chart, RationalMatrix::identity(chart.dim())).expect("identity")
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn g(&self) -> &RationalMatrix {
        &self.g
    }

    pub fn eta(&self) -> &RationalMatrix {
        &self.eta
    }

    /// `η♯α = (η^{ij} α_j) ∂_i`.
    pub fn dual_sharp(&self, alpha: &Form) -> Result<MultiVector> {
        same_chart(&self.chart, alpha.chart())?;
        let v = self.eta.mul_vec(&alpha.components())?;
        MultiVector::from_components(&self.chart, v)
    }

    /// `η(α, β)`.
    pub fn dual_pair(&self, alpha: &Form, beta: &Form) -> Result<Frac> {
        let v = self.eta.mul_vec(&beta.components())?;
        Ok(alpha
            .components()
            .iter()
            .zip(&v)
            .fold(Frac::zero(), |acc, (a, b)| acc.add(&a.mul(b))))
    }

    /// `(L_X g)_{ij} = X(g_ij) + g_kj ∂_i X^k + g_ik ∂_j X^k`.
    pub fn lie_derivative(&self, x: &MultiVector) -> Result<RationalMatrix> {
        same_chart(&self.chart, x.chart())?;
        let m = self.chart.dim();
        let dx: Vec<Vec<Frac>> = (0..m)
            .map(|k| {
                let c = x.component(k);
                (0..m).map(|i| c.diff(self.chart.coord(i))).collect()
            })
            .collect();
        let mut out = RationalMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                let mut acc = apply(x, self.g.get(i, j))?;
                for (k, dk) in dx.iter().enumerate() {
                    acc = acc
                        .add(&self.g.get(k, j).mul(&dk[i]))
                        .add(&self.g.get(i, k).mul(&dk[j]));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::d_fn;

    #[test]
    fn rotation_preserves_euclidean_metric() {
        let c = Arc::new(Chart::new(&["x", "y"]).unwrap());
        let g = Metric::euclidean(&c);
        let x = MultiVector::parse_components(&c, &["y", "-x"]).unwrap();
        let l = g.lie_derivative(&x).unwrap();
        assert_eq!(l, RationalMatrix::zeros(2, 2));
        let h = Frac::from_expr(&c.parse("(x^2 + y^2)/2").unwrap()).unwrap();
        let grad = g.dual_sharp(&d_fn(&c, &h)).unwrap();
        assert_eq!(grad, MultiVector::parse_components(&c, &["x", "y"]).unwrap());
    }

    #[test]
    fn asymmetric_rejected() {
        let c = Arc::new(Chart::new(&["x", "y"]).unwrap());
        let g = RationalMatrix::from_ints(&[&[1, 1], &[0, 1]]);
        assert!(Metric::new(&c, g).is_err());
    }
}
