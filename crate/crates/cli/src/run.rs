//! Task dispatch.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use hamiltonize_core::constructions::{
    decomposable, flaschka_ratiu, foliated_build, hojman, integrable_family, integrating_factor, linear_fr,
    metric_normal, normal_class_check, primitive, torus2, torus2_unchecked, unimodularize, HamiltonizationResult,
    DEFAULT_DEGREE_BOUND,
};
use hamiltonize_core::exterior::{apply, d, divergence};
use hamiltonize_core::poisson::{
    casimir_check, check_scalar, check_tensor, conformal_identity_check, hamiltonization_check, jacobi_check,
    poisson_vf_check,
};
use hamiltonize_core::verify::{flow_conservation, FlowSpec};
use hamiltonize_core::{Certificate, Form, Frac, Metric, MultiVector, RationalMatrix, SamplerConfig, Verdict, VolumeForm, Q};

use crate::problem::{FlowDef, Object, Problem, TaskDef};
use crate::report::{ChartJson, FlowResult, ObjectJson, Report, ResultJson, TaskReport, SCHEMA};

/// Command-line overrides.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    pub fail_fast: bool,
    pub timings: bool,
}

const DEFAULT_MAX_DRIFT: f64 = 1e-6;
const DEFAULT_MAX_DEVIATION: f64 = 1e-9;

#[derive(Default)]
struct Output {
    results: Vec<HamiltonizationResult>,
    certificates: Vec<Certificate>,
    objects: BTreeMap<String, ObjectJson>,
}

struct Inputs<'a> {
    task: &'a TaskDef,
    problem: &'a Problem,
}

impl<'a> Inputs<'a> {
    fn names(&self, key: &str) -> Option<Vec<&'a str>> {
        self.task.inputs.get(key).map(|r| r.get_ref().names())
    }

    fn objects(&self, key: &str) -> Result<Vec<&'a Object>> {
        let names = self.names(key).ok_or_else(|| anyhow!("missing input `{key}`"))?;
        Ok(names.into_iter().map(|n| &self.problem.objects[n]).collect())
    }

    fn one(&self, key: &str) -> Result<&'a Object> {
        let objs = self.objects(key)?;
        match objs.as_slice() {
            [o] => Ok(o),
            _ => bail!("input `{key}` takes one object, got {}", objs.len()),
        }
    }

    fn has(&self, key: &str) -> bool {
        self.task.inputs.contains_key(key)
    }

    fn expr(&self, key: &str) -> Result<Frac> {
        as_expr(key, self.one(key)?)
    }

    fn exprs(&self, key: &str) -> Result<Vec<Frac>> {
        self.objects(key)?.into_iter().map(|o| as_expr(key, o)).collect()
    }

    fn field(&self, key: &str) -> Result<MultiVector> {
        match self.one(key)? {
            Object::Field(x) => Ok(x.clone()),
            Object::Multivector(x) if x.grade() == 1 => Ok(x.clone()),
            o => bail!("input `{key}` must be a vector field, got {}", o.kind()),
        }
    }

    fn bivector(&self, key: &str) -> Result<MultiVector> {
        match self.one(key)? {
            Object::Multivector(x) if x.grade() == 2 => Ok(x.clone()),
            o => bail!("input `{key}` must be a bivector, got {}", o.kind()),
        }
    }

    fn form(&self, key: &str) -> Result<Form> {
        as_form(key, self.one(key)?)
    }

    fn forms(&self, key: &str) -> Result<Vec<Form>> {
        self.objects(key)?.into_iter().map(|o| as_form(key, o)).collect()
    }

    fn volume(&self, key: &str) -> Result<VolumeForm> {
        match self.one(key)? {
            Object::Volume(v) => Ok(v.clone()),
            o => bail!("input `{key}` must be a volume, got {}", o.kind()),
        }
    }

    fn metric(&self, key: &str) -> Result<Metric> {
        match self.one(key)? {
            Object::Metric(g) => Ok(g.clone()),
            o => bail!("input `{key}` must be a metric, got {}", o.kind()),
        }
    }

    fn matrix(&self, key: &str) -> Result<RationalMatrix> {
        match self.one(key)? {
            Object::Matrix(m) => Ok(m.clone()),
            o => bail!("input `{key}` must be a matrix, got {}", o.kind()),
        }
    }

    fn option(&self, key: &str) -> Option<&'a toml::Value> {
        self.task.options.get(key)
    }
}

fn as_expr(key: &str, o: &Object) -> Result<Frac> {
    match o {
        Object::Function(f) => Ok(f.clone()),
        o => bail!("input `{key}` must be an expression, got {}", o.kind()),
    }
}

fn as_form(key: &str, o: &Object) -> Result<Form> {
    match o {
        Object::Form(w) => Ok(w.clone()),
        o => bail!("input `{key}` must be a form, got {}", o.kind()),
    }
}

fn rational(v: &toml::Value) -> Result<Q> {
    match v {
        toml::Value::Integer(n) => Ok(Q::from_integer((*n).into())),
        toml::Value::String(s) => s.trim().parse::<Q>().map_err(|_| anyhow!("`{s}` is not a rational number")),
        other => bail!("expected a rational number, got {other}"),
    }
}

fn tensor_obj<V: hamiltonize_core::exterior::Variance>(t: &hamiltonize_core::exterior::GradedTensor<V>) -> ObjectJson {
    ObjectJson::Tensor(t.to_json())
}

fn exprs_obj(fs: &[Frac]) -> ObjectJson {
    ObjectJson::Exprs(fs.iter().map(|f| f.to_expr().to_string()).collect())
}

fn dispatch(kind: &str, inp: &Inputs, cfg: &SamplerConfig) -> Result<Output> {
    let chart = &inp.problem.chart;
    let mut out = Output::default();
    match kind {
        "flaschka_ratiu" => {
            let cs = if inp.has("casimirs") { inp.exprs("casimirs")? } else { Vec::new() };
            out.results.push(flaschka_ratiu(&inp.volume("vol")?, &cs, cfg)?);
        }
        "integrable_family" => {
            out.results = integrable_family(&inp.field("x")?, &inp.exprs("hs")?, &inp.volume("vol")?, cfg)?;
        }
        "linear_fr" => {
            let r = linear_fr(chart, &inp.matrix("p")?, &inp.matrix("a")?, cfg)?;
            out.objects.insert("x".into(), tensor_obj(&r.x));
            out.objects.insert("omega".into(), tensor_obj(&r.omega));
            out.objects.insert("norm_sq".into(), ObjectJson::Exprs(vec![r.norm_sq.to_string()]));
            out.results.push(r.result);
        }
        "primitive" => {
            let w = inp.form("omega")?;
            let base = match inp.option("base") {
                Some(toml::Value::Array(vs)) => Some(vs.iter().map(rational).collect::<Result<Vec<_>>>()?),
                Some(other) => bail!("option `base` must be a list, got {other}"),
                None => None,
            };
            let rho = primitive(&w, base.as_deref())?;
            let mut cert = Certificate::new("primitive", cfg);
            check_tensor(&mut cert, "d_primitive", &d(&rho)?.sub(&w)?, cfg)?;
            out.certificates.push(cert);
            out.objects.insert("rho".into(), tensor_obj(&rho));
        }
        "integrating_factor" => {
            let rho = inp.form("rho")?;
            let bound = match inp.option("degree_bound") {
                Some(toml::Value::Integer(n)) if *n >= 0 => *n as usize,
                Some(other) => bail!("option `degree_bound` must be a non-negative integer, got {other}"),
                None => DEFAULT_DEGREE_BOUND,
            };
            let factors = integrating_factor(&rho, bound)?;
            let mut cert = Certificate::new("integrating_factor", cfg);
            for (i, a) in factors.iter().enumerate() {
                check_tensor(&mut cert, &format!("closed_{}", i + 1), &d(&rho.scale(a))?, cfg)?;
            }
            out.certificates.push(cert);
            out.objects.insert("factors".into(), exprs_obj(&factors));
        }
        "unimodularize" => {
            out.results.push(unimodularize(
                &inp.field("x")?,
                &inp.volume("vol")?,
                &inp.form("rho")?,
                &inp.expr("a")?,
                cfg,
            )?);
        }
        "foliated_build" => {
            let alphas = if inp.has("alphas") { inp.forms("alphas")? } else { Vec::new() };
            let x = if inp.has("x") { Some(inp.field("x")?) } else { None };
            let h = if inp.has("h") { Some(inp.expr("h")?) } else { None };
            if h.is_some() && x.is_none() {
                bail!("input `h` needs `x`");
            }
            let field = x.as_ref().map(|x| (x, h.as_ref()));
            out.results
                .push(foliated_build(&inp.volume("vol")?, &alphas, &inp.form("beta")?, field, cfg)?);
        }
        "normal_class_check" => {
            out.certificates
                .push(normal_class_check(&inp.field("x")?, &inp.expr("h")?, &inp.field("y")?, cfg)?);
        }
        "decomposable" => {
            let x = inp.field("x")?;
            let mut r = decomposable(&x, &inp.field("y")?, cfg)?;
            if inp.has("h") {
                let h = inp.expr("h")?;
                let ham = hamiltonization_check(&r.pi, &h, &x, cfg)?;
                r.lambda = ham.lambda;
                r.hamiltonization = Some(ham.certificate);
                r.h = Some(h);
            }
            out.results.push(r);
        }
        "hojman" => {
            out.results.push(hojman(&inp.field("x")?, &inp.expr("h")?, &inp.field("z")?, cfg)?);
        }
        "metric_normal" => {
            let r = metric_normal(&inp.field("x")?, &inp.expr("h")?, &inp.metric("g")?, cfg)?;
            out.objects.insert("y0".into(), tensor_obj(&r.y0));
            out.results.push(r.result);
        }
        "torus2" => {
            let strict = match inp.option("strict") {
                Some(toml::Value::Boolean(b)) => *b,
                Some(other) => bail!("option `strict` must be a boolean, got {other}"),
                None => true,
            };
            let (x1, x2) = (inp.field("x1")?, inp.field("x2")?);
            let (h1, h2) = (inp.expr("h1")?, inp.expr("h2")?);
            let (y1, y2) = (inp.field("y1")?, inp.field("y2")?);
            let build = if strict { torus2 } else { torus2_unchecked };
            out.results.push(build([&x1, &x2], [&h1, &h2], [&y1, &y2], cfg)?);
        }
        "jacobi" => out.certificates.push(jacobi_check(&inp.bivector("pi")?, cfg)?),
        "casimir" => {
            let vol = if inp.has("vol") { Some(inp.volume("vol")?) } else { None };
            out.certificates
                .push(casimir_check(&inp.bivector("pi")?, &inp.expr("c")?, vol.as_ref(), cfg)?);
        }
        "hamiltonization" => {
            let ham = hamiltonization_check(&inp.bivector("pi")?, &inp.expr("h")?, &inp.field("x")?, cfg)?;
            out.certificates.push(ham.certificate);
        }
        "poisson_vf" => out.certificates.push(poisson_vf_check(&inp.bivector("pi")?, &inp.field("x")?, cfg)?),
        "conformal" => {
            out.certificates
                .push(conformal_identity_check(&inp.bivector("pi")?, &inp.expr("f")?, cfg)?);
        }
        "divergence_free" => {
            let x = inp.field("x")?;
            let mut cert = Certificate::new("divergence_free", cfg);
            cert.assume_tensor(&x);
            check_scalar(&mut cert, "divergence", &divergence(&x, &inp.volume("vol")?)?, chart, cfg)?;
            out.certificates.push(cert);
        }
        "first_integral" => {
            let x = inp.field("x")?;
            let mut cert = Certificate::new("first_integral", cfg);
            cert.assume_tensor(&x);
            for (i, c) in inp.exprs("c")?.iter().enumerate() {
                cert.assume_frac(c);
                check_scalar(&mut cert, &format!("lie_derivative_{}", i + 1), &apply(&x, c)?, chart, cfg)?;
            }
            out.certificates.push(cert);
        }
        other => bail!("unknown task kind `{other}`"),
    }
    Ok(out)
}

fn run_flow(problem: &Problem, flow: &FlowDef) -> Result<hamiltonize_core::verify::FlowReport> {
    let expr = |name: &str| as_expr(name, &problem.objects[name]);
    let x = match &problem.objects[flow.field.get_ref()] {
        Object::Field(x) => x.clone(),
        o => bail!("flow field must be a vector field, got {}", o.kind()),
    };
    let invariants = flow
        .invariants
        .iter()
        .map(|n| expr(n.get_ref()))
        .collect::<Result<Vec<_>>>()?;
    let pi_h = match (&flow.pi, &flow.h) {
        (Some(p), Some(h)) => match &problem.objects[p.get_ref()] {
            Object::Multivector(pi) if pi.grade() == 2 => Some((pi.clone(), expr(h.get_ref())?)),
            o => bail!("flow pi must be a bivector, got {}", o.kind()),
        },
        (None, None) => None,
        _ => bail!("flow needs both `pi` and `h` or neither"),
    };
    let spec = FlowSpec {
        start: flow.start.clone(),
        horizon: flow.horizon,
        dt: flow.dt,
        params: flow.params.iter().map(|(k, v)| (Arc::from(k.as_str()), *v)).collect(),
        bounds: None,
    };
    Ok(flow_conservation(
        &x,
        &invariants,
        pi_h.as_ref().map(|(p, h)| (p, h)),
        &spec,
    )?)
}

/// Run every task and flow check of a validated problem.
pub fn run(problem: &Problem, opts: &RunOptions) -> Report {
    let mut base = problem.sampler.clone();
    if let Some(n) = opts.samples {
        base.n = n;
    }
    if let Some(t) = opts.tol {
        base.tolerance = t;
    }
    if let Some(s) = opts.seed {
        base.seed = s;
    }

    let mut tasks = Vec::new();
    let mut aborted = false;
    for (index, task) in problem.tasks.iter().enumerate() {
        let mut cfg = base.clone();
        if let Some(v) = &task.verify {
            v.apply(&mut cfg);
            if let Some(s) = opts.seed {
                cfg.seed = s;
            }
        }
        let kind = task.kind.get_ref().clone();
        let expect = task.expect.as_ref().map_or("zero".to_string(), |e| e.get_ref().clone());
        let started = Instant::now();
        let outcome = cfg
            .validate()
            .map_err(anyhow::Error::from)
            .and_then(|_| dispatch(&kind, &Inputs { task, problem }, &cfg))
            .with_context(|| format!("task {} ({kind})", index + 1));
        let timing_ms = opts.timings.then(|| started.elapsed().as_secs_f64() * 1e3);
        let mut rep = TaskReport {
            index: index + 1,
            kind,
            label: task.label.clone(),
            expect: expect.clone(),
            error: None,
            verdict: None,
            passed: false,
            results: Vec::new(),
            certificates: Vec::new(),
            objects: BTreeMap::new(),
            timing_ms,
        };
        match outcome {
            Ok(out) => {
                rep.results = out.results.iter().map(ResultJson::of).collect();
                rep.certificates = out.certificates;
                rep.objects = out.objects;
                let v = rep
                    .all_certificates()
                    .fold(Verdict::Zero, |acc, c| acc.and(Verdict::of(&c.verdict())));
                rep.verdict = Some(v);
                rep.passed = match expect.as_str() {
                    "nonzero" => v == Verdict::Nonzero,
                    "error" => false,
                    _ => v != Verdict::Nonzero,
                };
            }
            Err(e) => {
                rep.error = Some(format!("{e:#}"));
                rep.passed = expect == "error";
            }
        }
        let failed = !rep.passed;
        tasks.push(rep);
        if failed && opts.fail_fast {
            aborted = true;
            break;
        }
    }

    let mut flows = Vec::new();
    if !aborted {
        for flow in &problem.flows {
            let mut res = FlowResult {
                label: flow.label.clone(),
                field: flow.field.get_ref().clone(),
                invariants: flow.invariants.iter().map(|s| s.get_ref().clone()).collect(),
                report: None,
                error: None,
                passed: false,
            };
            match run_flow(problem, flow) {
                Ok(r) => {
                    let max_drift = flow.max_drift.unwrap_or(DEFAULT_MAX_DRIFT);
                    let max_dev = flow.max_deviation.unwrap_or(DEFAULT_MAX_DEVIATION);
                    res.passed = !r.truncated
                        && r.drift.iter().all(|d| *d <= max_drift)
                        && r.field_deviation.is_none_or(|d| d <= max_dev);
                    res.report = Some(r);
                }
                Err(e) => res.error = Some(format!("{e:#}")),
            }
            let failed = !res.passed;
            flows.push(res);
            if failed && opts.fail_fast {
                break;
            }
        }
    }

    let verdict = tasks
        .iter()
        .filter_map(|t| t.verdict)
        .fold(Verdict::Zero, Verdict::and);
    let passed = !aborted && tasks.iter().all(|t| t.passed) && flows.iter().all(|f| f.passed);
    Report {
        schema: SCHEMA.to_string(),
        tool: format!("hamiltonize {}", env!("CARGO_PKG_VERSION")),
        seed: base.seed,
        sampler: base,
        chart: ChartJson::of(&problem.chart),
        tasks,
        flows,
        verdict,
        passed,
    }
}
