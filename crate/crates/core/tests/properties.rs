use std::sync::Arc;

use hamiltonize_core::constructions::{flaschka_ratiu, primitive};
use hamiltonize_core::exterior::{
    d, from_form, interior, lie_bracket, lie_derivative_form, schouten, to_form,
};
use hamiltonize_core::poisson::conformal_identity_check;
use hamiltonize_core::{Chart, Form, Frac, MultiVector, SamplerConfig, VolumeForm};
use proptest::prelude::*;

const M: usize = 3;

fn chart() -> Arc<Chart> {
    Arc::new(Chart::euclidean(M))
}

fn term(c: i32, e: &[u32]) -> String {
    let mut s = c.to_string();
    for (i, k) in e.iter().enumerate() {
        if *k > 0 {
            s.push_str(&format!("*x{}^{}", i + 1, k));
        }
    }
    s
}

/// Small random polynomials in `x1..x3`.
fn poly() -> impl Strategy<Value = String> {
    prop::collection::vec((-3i32..=3, prop::collection::vec(0u32..=2, M)), 1..4).prop_map(|ts| {
        ts.iter()
            .map(|(c, e)| format!("({})", term(*c, e)))
            .collect::<Vec<_>>()
            .join(" + ")
    })
}

fn frac(c: &Chart, s: &str) -> Frac {
    Frac::from_expr(&c.parse(s).unwrap()).unwrap()
}

fn index_sets(k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..M {
            cur.push(i);
            go(i + 1, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, k, &mut Vec::new(), &mut out);
    out
}

fn binom(k: usize) -> usize {
    index_sets(k).len()
}

fn coeffs(k: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(poly(), binom(k))
}

fn multivector(c: &Arc<Chart>, k: usize, cs: &[String]) -> MultiVector {
    let entries = index_sets(k).into_iter().zip(cs).map(|(i, s)| (i, frac(c, s))).collect();
    MultiVector::from_entries(c, k, entries).unwrap()
}

fn form(c: &Arc<Chart>, k: usize, cs: &[String]) -> Form {
    let entries = index_sets(k).into_iter().zip(cs).map(|(i, s)| (i, frac(c, s))).collect();
    Form::from_entries(c, k, entries).unwrap()
}

fn graded<S: Strategy<Value = Vec<String>>>(f: impl Fn(usize) -> S) -> impl Strategy<Value = (usize, Vec<String>)> {
    graded_below(M + 1, f)
}

fn graded_below<S: Strategy<Value = Vec<String>>>(
    top: usize,
    f: impl Fn(usize) -> S,
) -> impl Strategy<Value = (usize, Vec<String>)> {
    (0usize..top).prop_flat_map(move |k| (Just(k), f(k)))
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn schouten_is_graded_antisymmetric((a, ca) in graded(coeffs), (b, cb) in graded(coeffs)) {
        prop_assume!(a + b > 0);
        let c = chart();
        let x = multivector(&c, a, &ca);
        let y = multivector(&c, b, &cb);
        let xy = schouten(&x, &y).unwrap();
        let yx = schouten(&y, &x).unwrap();
        let odd = (a + 1) * (b + 1) % 2 == 1;
        let expected = if odd { yx } else { yx.neg() };
        prop_assert_eq!(xy, expected);
    }

    #[test]
    fn schouten_graded_leibniz(
        (a, ca) in graded_below(3, coeffs),
        cb in coeffs(1),
        cc in coeffs(1),
    ) {
        prop_assume!(a > 0);
        let c = chart();
        let x = multivector(&c, a, &ca);
        let y = multivector(&c, 1, &cb);
        let z = multivector(&c, 1, &cc);
        let lhs = schouten(&x, &y.wedge(&z).unwrap()).unwrap();
        let first = schouten(&x, &y).unwrap().wedge(&z).unwrap();
        let second = y.wedge(&schouten(&x, &z).unwrap()).unwrap();
        let second = if (a - 1) % 2 == 1 { second.neg() } else { second };
        prop_assert_eq!(lhs, first.add(&second).unwrap());
    }

    #[test]
    fn d_squared_vanishes((k, cs) in graded_below(M - 1, coeffs)) {
        let c = chart();
        let w = form(&c, k, &cs);
        prop_assert!(d(&d(&w).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn interior_of_wedge_composes(ca in coeffs(1), cb in coeffs(1), (k, cw) in graded(coeffs)) {
        let c = chart();
        let a = multivector(&c, 1, &ca);
        let b = multivector(&c, 1, &cb);
        let w = form(&c, k, &cw);
        let lhs = interior(&a.wedge(&b).unwrap(), &w).unwrap();
        let rhs = interior(&a, &interior(&b, &w).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn cartan_formula(cx in coeffs(1), (k, cw) in (1..M).prop_flat_map(|k| (Just(k), coeffs(k)))) {
        let c = chart();
        let x = multivector(&c, 1, &cx);
        let w = form(&c, k, &cw);
        let lhs = lie_derivative_form(&x, &w).unwrap();
        let rhs = d(&interior(&x, &w).unwrap()).unwrap().add(&interior(&x, &d(&w).unwrap()).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn volume_correspondence_round_trips((k, cs) in graded(coeffs), density in poly()) {
        let c = chart();
        let vol = VolumeForm::parse(&c, &format!("1 + ({density})^2")).unwrap();
        let a = multivector(&c, k, &cs);
        prop_assert_eq!(from_form(&vol, &to_form(&vol, &a).unwrap()).unwrap(), a);
    }

    #[test]
    fn decomposable_square(cx in coeffs(1), cy in coeffs(1)) {
        let c = chart();
        let x = multivector(&c, 1, &cx);
        let y = multivector(&c, 1, &cy);
        let pi = y.wedge(&x).unwrap();
        let rhs = lie_bracket(&x, &y).unwrap().wedge(&x).unwrap().wedge(&y).unwrap();
        prop_assert_eq!(schouten(&pi, &pi).unwrap(), rhs.add(&rhs).unwrap());
    }

    #[test]
    fn lie_bracket_jacobi(cx in coeffs(1), cy in coeffs(1), cz in coeffs(1)) {
        let c = chart();
        let [x, y, z] = [&cx, &cy, &cz].map(|s| multivector(&c, 1, s));
        let br = |a: &MultiVector, b: &MultiVector| lie_bracket(a, b).unwrap();
        let sum = br(&x, &br(&y, &z)).add(&br(&y, &br(&z, &x))).unwrap().add(&br(&z, &br(&x, &y))).unwrap();
        prop_assert!(sum.is_zero());
    }

    #[test]
    fn derivative_obeys_product_and_quotient_rules(f in poly(), g in poly()) {
        let c = chart();
        let f = frac(&c, &f);
        let g = frac(&c, &g).add(&Frac::int(7));
        for v in ["x1", "x2", "x3"] {
            let prod = f.mul(&g).diff(v);
            prop_assert!(prod.sub(&f.diff(v).mul(&g).add(&f.mul(&g.diff(v)))).is_zero());
            let h = g.mul(&g).add(&Frac::one());
            let quot = f.div(&h).unwrap().diff(v);
            let expected = f.diff(v).mul(&h).sub(&f.mul(&h.diff(v))).div(&h.mul(&h)).unwrap();
            prop_assert!(quot.sub(&expected).is_zero(), "{quot:?} vs {expected:?}");
        }
    }

    #[test]
    fn normalization_preserves_values(
        f in poly(),
        g in poly(),
        p in prop::collection::vec(-1.5f64..1.5, M),
    ) {
        let c = chart();
        let text = format!("sin({f}) * ({g}) / (1 + ({g})^2) - exp(({f})/3)");
        let e = c.parse(&text).unwrap();
        let a = e.eval_at(&c, &p, &[]).unwrap();
        let b = Frac::from_expr(&e).unwrap().to_expr().eval_at(&c, &p, &[]).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{a} vs {b}");
    }

    #[test]
    fn primitive_inverts_d_on_exact_forms((k, cs) in graded_below(M, coeffs)) {
        let c = chart();
        let w = d(&form(&c, k, &cs)).unwrap();
        if w.grade() > 0 {
            prop_assert_eq!(d(&primitive(&w, None).unwrap()).unwrap(), w);
        }
    }

    #[test]
    fn flaschka_ratiu_is_poisson(casimir in poly(), density in poly()) {
        let c = chart();
        let vol = VolumeForm::parse(&c, &format!("1/(1 + ({density})^2)")).unwrap();
        let cfg = SamplerConfig::default();
        let r = flaschka_ratiu(&vol, &[frac(&c, &casimir)], &cfg).unwrap();
        prop_assert!(r.jacobi.verdict().is_zero());
        prop_assert!(r.casimirs[0].verdict().is_zero());
    }

    #[test]
    fn conformal_rescaling_stays_poisson(casimir in poly(), f in poly()) {
        let c = chart();
        let cfg = SamplerConfig::default();
        let pi = flaschka_ratiu(&VolumeForm::euclidean(&c), &[frac(&c, &casimir)], &cfg).unwrap().pi;
        let cert = conformal_identity_check(&pi, &frac(&c, &f), &cfg).unwrap();
        prop_assert!(cert.verdict().is_zero(), "{:?}", cert.identities);
    }
}
