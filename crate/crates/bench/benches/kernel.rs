use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use hamiltonize_bench::{homogeneous, quadratic_casimirs, rational_expr};
use hamiltonize_core::constructions::{flaschka_ratiu, hojman};
use hamiltonize_core::exterior::{schouten, MultiVector};
use hamiltonize_core::poisson::jacobi_check;
use hamiltonize_core::{Chart, Frac, SamplerConfig};

fn normalize(c: &mut Criterion) {
    let chart = Chart::euclidean(3);
    let e = rational_expr(&chart);
    c.bench_function("normalize", |b| b.iter(|| Frac::from_expr(&e).unwrap()));
}

fn schouten_square(c: &mut Criterion) {
    let chart = Arc::new(Chart::euclidean(4));
    let (vol, cs) = quadratic_casimirs(&chart);
    let pi = flaschka_ratiu(&vol, &cs, &SamplerConfig::default()).unwrap().pi;
    c.bench_function("schouten_r4", |b| b.iter(|| schouten(&pi, &pi).unwrap()));
    let y = MultiVector::parse_components(&chart, &["x2", "x3*x1", "1", "x4^2"]).unwrap();
    let x = MultiVector::parse_components(&chart, &["x1^2", "0", "x2*x4", "x3"]).unwrap();
    let dec = y.wedge(&x).unwrap();
    c.bench_function("schouten_decomposable", |b| b.iter(|| schouten(&dec, &dec).unwrap()));
}

fn certificates(c: &mut Criterion) {
    let chart = Arc::new(Chart::euclidean(3));
    let (x, h) = homogeneous(&chart);
    let e = MultiVector::parse_components(&chart, &["x1", "x2", "x3"]).unwrap();
    let cfg = SamplerConfig {
        bounds: vec![(0.1, 2.0); 3],
        ..SamplerConfig::default()
    };
    let pi = hojman(&x, &h, &e, &cfg).unwrap().pi;
    c.bench_function("jacobi_check", |b| b.iter(|| jacobi_check(&pi, &cfg).unwrap()));
    c.bench_function("hojman", |b| b.iter(|| hojman(&x, &h, &e, &cfg).unwrap()));
}

criterion_group!(benches, normalize, schouten_square, certificates);
criterion_main!(benches);
