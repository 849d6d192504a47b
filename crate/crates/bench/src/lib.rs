//! Inputs shared by the benchmarks.

use std::sync::Arc;

use hamiltonize_core::{Chart, Expr, Frac, MultiVector, VolumeForm};

/// A rational expression with a nontrivial common denominator.
pub fn rational_expr(chart: &Chart) -> Expr {
    chart
        .parse("(x1^2 + x2*x3)/(x1 - x2)^2 - (x3^3 - 1)/((x1 - x2)*(x2 + 1)) + x1*x2*x3/(x2 + 1)^2")
        .expect("valid expression")
}

/// The homogeneous quadratic field on R^3 and its first integral.
pub fn homogeneous(chart: &Arc<Chart>) -> (MultiVector, Frac) {
    let x = MultiVector::parse_components(chart, &["x1*(x2 - x3)", "x2*(x3 - x1)", "x3*(x1 - x2)"])
        .expect("valid field");
    let h = Frac::from_expr(&chart.parse("x1*x2*x3").expect("valid")).expect("polynomial");
    (x, h)
}

/// A rank-two bivector on R^4 built from two quadratic Casimirs.
pub fn quadratic_casimirs(chart: &Arc<Chart>) -> (VolumeForm, Vec<Frac>) {
    let cs = ["x1*x2 + x3^2", "x4^2 - x1*x3"]
        .iter()
        .map(|s| Frac::from_expr(&chart.parse(s).expect("valid")).expect("polynomial"))
        .collect();
    (VolumeForm::euclidean(chart), cs)
}
