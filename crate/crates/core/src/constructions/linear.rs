use std::sync::Arc;

use num_traits::Zero;

use super::HamiltonizationResult;
use crate::error::{Error, Result};
use crate::exterior::{Form, MultiVector};
use crate::expr::{Chart, Frac, RationalMatrix, TriState, Q};
use crate::poisson::{casimir_check, hamiltonization_check, Certificate};
use crate::verify::SamplerConfig;

/// Output of [`linear_fr`].
#[derive(Clone, Debug)]
pub struct LinearFr {
    /// `X = Ax·∂ₓ`.
    pub x: MultiVector,
    /// Leaf-wise symplectic form, `ω_ij dx^i∧dx^j` over `i < j`.
    pub omega: Form,
    pub norm_sq: Q,
    pub result: HamiltonizationResult,
}

fn constant(m: &RationalMatrix, what: &str) -> Result<Vec<Vec<Q>>> {
    (0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .map(|f| {
                    f.as_constant()
                        .ok_or_else(|| Error::Shape(format!("{what} must have constant entries")))
                })
                .collect()
        })
        .collect()
}

fn sign(i: usize, j: usize) -> Q {
    if (i + j) % 2 == 0 {
        Q::from_integer(1.into())
    } else {
        Q::from_integer((-1).into())
    }
}

/// The constant structure of a trace-free linear field `X = Ax·∂ₓ` whose
/// first integrals are `v·x` for the columns `v` of `P`.
///
/// `π = Σ_{i<j} (−1)^{i+j} det P_{[i,j]} ∂_i∧∂_j`, `P_{[i,j]}` being `P`
/// without rows `i` and `j`; `h = ½xᵀ(WA)x` with `W = [ω_ij]`.
pub fn linear_fr(
    chart: &Arc<Chart>,
    p: &RationalMatrix,
    a: &RationalMatrix,
    cfg: &SamplerConfig,
) -> Result<LinearFr> {
    let n = chart.dim();
    if n < 2 || a.rows() != n || a.cols() != n {
        return Err(Error::Shape(format!("A must be {n}×{n}")));
    }
    if p.rows() != n || p.cols() != n - 2 {
        return Err(Error::Shape(format!("P must be {n}×{}", n - 2)));
    }
    let aq = constant(a, "A")?;
    let pq = constant(p, "P")?;
    if p.rank() != n - 2 {
        return Err(Error::precondition("rank", "columns of P are dependent"));
    }
    let trace: Q = (0..n).map(|i| aq[i][i].clone()).sum();
    if !trace.is_zero() {
        return Err(Error::precondition("trace", format!("trace A = {trace}")));
    }
    for k in 0..n - 2 {
        for j in 0..n {
            let s: Q = (0..n).map(|i| &aq[i][j] * &pq[i][k]).sum();
            if !s.is_zero() {
                return Err(Error::precondition(
                    "kernel",
                    format!("column {} of P is not in ker Aᵀ", k + 1),
                ));
            }
        }
    }

    let mut minors = vec![vec![Q::zero(); n]; n];
    let mut norm_sq = Q::zero();
    for i in 0..n {
        for j in i + 1..n {
            let d = p
                .minor_rows(&[i, j])?
                .as_constant()
                .expect("constant matrix");
            norm_sq += &d * &d;
            minors[i][j] = d;
        }
    }
    let mut pi_entries = Vec::new();
    let mut omega_entries = Vec::new();
    let mut w = vec![vec![Q::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = &minors[i][j];
            if d.is_zero() {
                continue;
            }
            pi_entries.push((vec![i, j], Frac::constant(sign(i, j) * d)));
            let o = -sign(i, j) * d / &norm_sq;
            omega_entries.push((vec![i, j], Frac::constant(o.clone())));
            w[j][i] = -o.clone();
            w[i][j] = o;
        }
    }
    let pi = MultiVector::from_entries(chart, 2, pi_entries)?;
    let omega = Form::from_entries(chart, 2, omega_entries)?;

    let xs: Vec<Frac> = (0..n).map(|i| Frac::coord(chart.coord(i))).collect();
    let lin = |row: &[Q]| {
        row.iter()
            .zip(&xs)
            .fold(Frac::zero(), |acc, (c, x)| acc.add(&x.scale(c)))
    };
    let field = MultiVector::from_components(chart, aq.iter().map(|r| lin(r)).collect())?;
    let wa: Vec<Vec<Q>> = (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| &w[i][k] * &aq[k][j]).sum()).collect())
        .collect();
    let h = (0..n)
        .fold(Frac::zero(), |acc, i| acc.add(&xs[i].mul(&lin(&wa[i]))))
        .scale(&Q::new(1.into(), 2.into()));

    let mut pre = Certificate::new("linear_fr.preconditions", cfg);
    for name in ["rank", "trace", "kernel"] {
        pre.push(name, TriState::Zero);
    }
    let mut result = HamiltonizationResult::new("linear_fr", pi, cfg)?;
    result.checks.push(pre);
    for k in 0..n - 2 {
        let col: Vec<Q> = (0..n).map(|i| pq[i][k].clone()).collect();
        result
            .casimirs
            .push(casimir_check(&result.pi, &lin(&col), None, cfg)?);
    }
    let ham = hamiltonization_check(&result.pi, &h, &field, cfg)?;
    result.lambda = ham.lambda;
    result.hamiltonization = Some(ham.certificate);
    result.h = Some(h);
    Ok(LinearFr {
        x: field,
        omega,
        norm_sq,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conventions::LINEAR_FR_RANK1_LAMBDA;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    #[test]
    fn rank_one_instance() {
        let c = Arc::new(Chart::euclidean(3));
        let a = RationalMatrix::from_ints(&[&[0, 1, 0], &[0, 0, 0], &[0, 0, 0]]);
        let p = RationalMatrix::from_ints(&[&[0], &[1], &[0]]);
        let r = linear_fr(&c, &p, &a, &SamplerConfig::default()).unwrap();
        // Minors by hand: only P_[1,3] = (1) survives, sign (−1)^{1+3}.
        assert_eq!(r.result.pi, MultiVector::basis(&c, &[0, 2]).unwrap());
        assert_eq!(r.norm_sq, q(1, 1));
        assert_eq!(r.result.h.as_ref().unwrap(), &Frac::from_expr(&c.parse("x2*x3/2").unwrap()).unwrap());
        let lambda = r.result.lambda.as_ref().unwrap().as_constant().unwrap();
        assert_eq!(lambda, q(LINEAR_FR_RANK1_LAMBDA.0, LINEAR_FR_RANK1_LAMBDA.1));
        assert!(r.result.verdict().is_zero());
    }

    #[test]
    fn planar_instance() {
        let c = Arc::new(Chart::euclidean(2));
        let a = RationalMatrix::from_ints(&[&[0, 1], &[0, 0]]);
        let p = RationalMatrix::empty(2);
        let r = linear_fr(&c, &p, &a, &SamplerConfig::default()).unwrap();
        assert_eq!(r.result.pi, MultiVector::basis(&c, &[0, 1]).unwrap().neg());
        assert_eq!(r.norm_sq, q(1, 1));
        // h = −x2²/2 and π♯dh = −X.
        assert_eq!(r.result.lambda.as_ref().unwrap().as_constant(), Some(q(-1, 1)));
    }

    #[test]
    fn casimirs_in_four_dimensions() {
        let c = Arc::new(Chart::euclidean(4));
        // Rows 3 and 4 vanish, so ker Aᵀ ⊇ span{e3, e4}.
        let a = RationalMatrix::from_ints(&[&[1, 2, 5, 0], &[3, -1, 1, 7], &[0, 0, 0, 0], &[0, 0, 0, 0]]);
        let p = RationalMatrix::from_ints(&[&[0, 0], &[0, 0], &[1, 2], &[1, -1]]);
        let r = linear_fr(&c, &p, &a, &SamplerConfig::default()).unwrap();
        assert!(r.result.casimirs.iter().all(|c| c.verdict().is_zero()));
        assert!(r.result.jacobi.verdict().is_zero());
        // The x3 column of A enters dh with weight ½ but X with weight 1.
        let ham = r.result.hamiltonization.as_ref().unwrap();
        assert!(ham.verdict_of("hamiltonian_proportional").unwrap().is_nonzero());
        assert!(r.result.lambda.as_ref().unwrap().as_constant().is_none());
    }

    #[test]
    fn block_instance_has_constant_lambda() {
        let c = Arc::new(Chart::euclidean(4));
        let a = RationalMatrix::from_ints(&[&[1, 2, 0, 0], &[3, -1, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0]]);
        let p = RationalMatrix::from_ints(&[&[0, 0], &[0, 0], &[1, 2], &[1, -1]]);
        let r = linear_fr(&c, &p, &a, &SamplerConfig::default()).unwrap();
        assert!(r.result.verdict().is_zero(), "{:?}", r.result.verdict());
        assert!(r.result.lambda.as_ref().unwrap().as_constant().is_some());
    }

    #[test]
    fn rejects_bad_input() {
        let c = Arc::new(Chart::euclidean(3));
        let cfg = SamplerConfig::default();
        let a = RationalMatrix::from_ints(&[&[1, 0, 0], &[0, 0, 0], &[0, 0, 0]]);
        let p = RationalMatrix::from_ints(&[&[0], &[1], &[0]]);
        assert!(matches!(linear_fr(&c, &p, &a, &cfg), Err(Error::Precondition { check, .. }) if check == "trace"));
        let a = RationalMatrix::from_ints(&[&[0, 1, 0], &[0, 0, 0], &[0, 0, 0]]);
        let p = RationalMatrix::from_ints(&[&[1], &[0], &[0]]);
        assert!(matches!(linear_fr(&c, &p, &a, &cfg), Err(Error::Precondition { check, .. }) if check == "kernel"));
        let p = RationalMatrix::from_ints(&[&[0], &[0], &[0]]);
        assert!(matches!(linear_fr(&c, &p, &a, &cfg), Err(Error::Precondition { check, .. }) if check == "rank"));
    }
}
