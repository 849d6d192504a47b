//! Problem files: parsing, validation and object construction.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use hamiltonize_core::{Chart, Form, Frac, Metric, MultiVector, RationalMatrix, SamplerConfig, VolumeForm, Q};
use serde::Deserialize;
use toml::Spanned;

/// A parse or validation failure, with the 1-based line it points at.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ProblemError {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub manifold: Manifold,
    #[serde(default)]
    pub params: BTreeMap<String, Spanned<Scalar>>,
    #[serde(default)]
    pub objects: BTreeMap<String, Spanned<ObjectDef>>,
    #[serde(default)]
    pub tasks: Vec<TaskDef>,
    #[serde(default)]
    pub verify: VerifyDef,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifold {
    pub dim: Option<usize>,
    pub coords: Option<Vec<String>>,
    #[serde(default)]
    pub exclude: Vec<Spanned<String>>,
    /// Symbolic parameters; values, if any, go in `[params]`.
    #[serde(default)]
    pub params: Vec<String>,
}

/// A number or an expression string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Scalar {
    fn text(&self) -> String {
        match self {
            Scalar::Int(n) => n.to_string(),
            Scalar::Float(x) => format!("{x:?}"),
            Scalar::Text(s) => s.clone(),
        }
    }

    fn rational(&self) -> Result<Q, String> {
        match self {
            Scalar::Int(n) => Ok(Q::from_integer((*n).into())),
            Scalar::Float(_) => Err("write rational values as \"p/q\" strings".into()),
            Scalar::Text(s) => s.trim().parse::<Q>().map_err(|_| format!("`{s}` is not a rational number")),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectDef {
    pub expr: Option<Scalar>,
    pub field: Option<Vec<Scalar>>,
    pub form: Option<usize>,
    pub multivector: Option<usize>,
    /// Entries of a form or multivector, keyed by 1-based comma-separated indices.
    pub entries: Option<BTreeMap<String, Scalar>>,
    pub volume: Option<Scalar>,
    pub metric: Option<Vec<Vec<Scalar>>>,
    pub matrix: Option<Vec<Vec<Scalar>>>,
}

/// One name or a list of names.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum InputRef {
    One(String),
    Many(Vec<String>),
}

impl InputRef {
    pub fn names(&self) -> Vec<&str> {
        match self {
            InputRef::One(s) => vec![s.as_str()],
            InputRef::Many(v) => v.iter().map(String::as_str).collect(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskDef {
    pub kind: Spanned<String>,
    pub label: Option<String>,
    #[serde(default)]
    pub inputs: BTreeMap<String, Spanned<InputRef>>,
    #[serde(default)]
    pub options: toml::Table,
    /// `"nonzero"` or `"error"` when the task is meant to fail.
    pub expect: Option<Spanned<String>>,
    /// Sampler overrides for this task.
    pub verify: Option<SamplerDef>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerDef {
    #[serde(rename = "box")]
    pub bounds: Option<Vec<(f64, f64)>>,
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub margin: Option<f64>,
}

impl SamplerDef {
    pub fn apply(&self, cfg: &mut SamplerConfig) {
        if let Some(b) = &self.bounds {
            cfg.bounds = b.clone();
        }
        if let Some(n) = self.count {
            cfg.n = n;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.tolerance {
            cfg.tolerance = t;
        }
        if let Some(m) = self.margin {
            cfg.margin = m;
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyDef {
    #[serde(flatten)]
    pub sampler: SamplerDef,
    #[serde(default)]
    pub flow: Vec<FlowDef>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowDef {
    pub label: Option<String>,
    pub field: Spanned<String>,
    #[serde(default)]
    pub invariants: Vec<Spanned<String>>,
    pub start: Vec<f64>,
    pub horizon: f64,
    pub dt: f64,
    /// Values for unbound parameters.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub pi: Option<Spanned<String>>,
    pub h: Option<Spanned<String>>,
    /// Drift above this fails the flow check.
    pub max_drift: Option<f64>,
    pub max_deviation: Option<f64>,
}

/// A validated object.
#[derive(Debug, Clone)]
pub enum Object {
    Function(Frac),
    Field(MultiVector),
    Multivector(MultiVector),
    Form(Form),
    Volume(VolumeForm),
    Metric(Metric),
    Matrix(RationalMatrix),
}

impl Object {
    pub fn kind(&self) -> &'static str {
        match self {
            Object::Function(_) => "expr",
            Object::Field(_) => "field",
            Object::Multivector(_) => "multivector",
            Object::Form(_) => "form",
            Object::Volume(_) => "volume",
            Object::Metric(_) => "metric",
            Object::Matrix(_) => "matrix",
        }
    }
}

/// A problem file after validation: the chart, the objects and the raw tasks.
#[derive(Debug)]
pub struct Problem {
    pub chart: Arc<Chart>,
    pub objects: BTreeMap<String, Object>,
    pub tasks: Vec<TaskDef>,
    pub sampler: SamplerConfig,
    pub flows: Vec<FlowDef>,
    source: String,
}

/// 1-based line of a byte offset.
fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

impl Problem {
    pub fn parse(source: &str) -> Result<Problem, ProblemError> {
        let spec: ProblemSpec = toml::from_str(source).map_err(|e| ProblemError {
            line: e.span().map(|s| line_of(source, s.start)),
            message: e.message().to_string(),
        })?;
        Problem::build(spec, source)
    }

    pub fn line(&self, span: std::ops::Range<usize>) -> usize {
        line_of(&self.source, span.start)
    }

    fn build(spec: ProblemSpec, source: &str) -> Result<Problem, ProblemError> {
        let at = |span: std::ops::Range<usize>, message: String| ProblemError {
            line: Some(line_of(source, span.start)),
            message,
        };
        let plain = |message: String| ProblemError { line: None, message };

        let coords: Vec<String> = match (&spec.manifold.coords, spec.manifold.dim) {
            (Some(c), Some(d)) if c.len() != d => {
                return Err(plain(format!("manifold: dim = {d} but {} coords given", c.len())))
            }
            (Some(c), _) => c.clone(),
            (None, Some(d)) => (1..=d).map(|i| format!("x{i}")).collect(),
            (None, None) => return Err(plain("manifold: give `dim` or `coords`".into())),
        };
        let refs: Vec<&str> = coords.iter().map(String::as_str).collect();
        let mut chart = Chart::new(&refs).map_err(|e| plain(format!("manifold: {e}")))?;
        let names: Vec<&str> = spec.manifold.params.iter().map(String::as_str).collect();
        chart = chart.with_params(&names).map_err(|e| plain(format!("manifold: {e}")))?;
        for (name, value) in &spec.params {
            let q = value.get_ref().rational().map_err(|m| at(value.span(), format!("params.{name}: {m}")))?;
            chart = chart
                .with_param_value(name, q)
                .map_err(|e| at(value.span(), format!("params.{name}: {e}")))?;
        }
        for e in &spec.manifold.exclude {
            let expr = chart
                .parse(e.get_ref())
                .map_err(|err| at(e.span(), format!("manifold.exclude: {err}")))?;
            chart = chart.with_exclude(expr);
        }
        let chart = Arc::new(chart);

        let mut objects = BTreeMap::new();
        for (name, def) in &spec.objects {
            let obj = build_object(&chart, def.get_ref()).map_err(|m| at(def.span(), format!("objects.{name}: {m}")))?;
            objects.insert(name.clone(), obj);
        }

        for task in &spec.tasks {
            for (key, r) in &task.inputs {
                for n in r.get_ref().names() {
                    if !objects.contains_key(n) {
                        return Err(at(
                            r.span(),
                            format!("task `{}`: input `{key}` refers to undefined object `{n}`", task.kind.get_ref()),
                        ));
                    }
                }
            }
            if let Some(e) = &task.expect {
                if !matches!(e.get_ref().as_str(), "zero" | "nonzero" | "error") {
                    return Err(at(e.span(), format!("expect must be zero, nonzero or error, not `{}`", e.get_ref())));
                }
            }
            if !crate::catalog::is_known(task.kind.get_ref()) {
                return Err(at(task.kind.span(), format!("unknown task kind `{}`", task.kind.get_ref())));
            }
        }
        for flow in &spec.verify.flow {
            let mut refs = vec![&flow.field];
            refs.extend(flow.invariants.iter());
            refs.extend(flow.pi.iter());
            refs.extend(flow.h.iter());
            for r in refs {
                if !objects.contains_key(r.get_ref()) {
                    return Err(at(r.span(), format!("flow refers to undefined object `{}`", r.get_ref())));
                }
            }
            if flow.start.len() != chart.dim() {
                return Err(plain(format!(
                    "flow start has {} entries, manifold dimension is {}",
                    flow.start.len(),
                    chart.dim()
                )));
            }
        }

        let mut sampler = SamplerConfig::default();
        spec.verify.sampler.apply(&mut sampler);
        Ok(Problem {
            chart,
            objects,
            tasks: spec.tasks,
            sampler,
            flows: spec.verify.flow,
            source: source.to_string(),
        })
    }
}

fn frac(chart: &Chart, s: &Scalar) -> Result<Frac, String> {
    let e = chart.parse(&s.text()).map_err(|e| e.to_string())?;
    Frac::from_expr(&e).map_err(|e| e.to_string())
}

fn index_key(key: &str, m: usize) -> Result<Vec<usize>, String> {
    key.split(',')
        .map(|t| {
            let i: usize = t.trim().parse().map_err(|_| format!("bad index `{key}`"))?;
            if i == 0 || i > m {
                return Err(format!("index {i} out of range 1..={m}"));
            }
            Ok(i - 1)
        })
        .collect()
}

fn matrix(chart: &Chart, rows: &[Vec<Scalar>]) -> Result<RationalMatrix, String> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err("matrix rows have different lengths".into());
    }
    let data = rows
        .iter()
        .map(|r| r.iter().map(|s| frac(chart, s)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    RationalMatrix::from_rows(data).map_err(|e| e.to_string())
}

fn build_object(chart: &Arc<Chart>, def: &ObjectDef) -> Result<Object, String> {
    let m = chart.dim();
    let set = [
        def.expr.is_some(),
        def.field.is_some(),
        def.form.is_some(),
        def.multivector.is_some(),
        def.volume.is_some(),
        def.metric.is_some(),
        def.matrix.is_some(),
    ];
    if set.iter().filter(|b| **b).count() != 1 {
        return Err("give exactly one of expr, field, form, multivector, volume, metric, matrix".into());
    }
    if def.entries.is_some() && def.form.is_none() && def.multivector.is_none() {
        return Err("`entries` belongs to a form or multivector".into());
    }
    if let Some(e) = &def.expr {
        return Ok(Object::Function(frac(chart, e)?));
    }
    if let Some(cs) = &def.field {
        if cs.len() != m {
            return Err(format!("field has {} components, manifold dimension is {m}", cs.len()));
        }
        let comps = cs.iter().map(|s| frac(chart, s)).collect::<Result<Vec<_>, _>>()?;
        return MultiVector::from_components(chart, comps)
            .map(Object::Field)
            .map_err(|e| e.to_string());
    }
    let entries = || -> Result<Vec<(Vec<usize>, Frac)>, String> {
        def.entries
            .iter()
            .flatten()
            .map(|(k, v)| Ok((index_key(k, m)?, frac(chart, v)?)))
            .collect()
    };
    if let Some(k) = def.form {
        return Form::from_entries(chart, k, entries()?)
            .map(Object::Form)
            .map_err(|e| e.to_string());
    }
    if let Some(k) = def.multivector {
        return MultiVector::from_entries(chart, k, entries()?)
            .map(Object::Multivector)
            .map_err(|e| e.to_string());
    }
    if let Some(v) = &def.volume {
        return VolumeForm::new(chart, frac(chart, v)?)
            .map(Object::Volume)
            .map_err(|e| e.to_string());
    }
    if let Some(rows) = &def.metric {
        let g = matrix(chart, rows)?;
        return Metric::new(chart, g).map(Object::Metric).map_err(|e| e.to_string());
    }
    let rows = def.matrix.as_ref().expect("one key is set");
    Ok(Object::Matrix(matrix(chart, rows)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objects_and_lines() {
        let src = r#"
[manifold]
coords = ["x", "y"]
params = ["k"]

[params]
k = "1/2"

[objects]
h = { expr = "k*x*y" }
X = { field = ["x", "-y"] }
w = { form = 2, entries = { "1,2" = 1 } }
"#;
        let p = Problem::parse(src).unwrap();
        assert_eq!(p.objects.len(), 3);
        assert_eq!(p.chart.param_value("k"), Some(&Q::new(1.into(), 2.into())));

        let bad = format!("{src}\n[[tasks]]\nkind = \"hojman\"\ninputs = {{ x = \"X\", h = \"h\", z = \"E\" }}\n");
        let err = Problem::parse(&bad).unwrap_err();
        assert!(err.message.contains("`E`"), "{err}");
        assert_eq!(err.line, Some(bad.lines().count()));
    }

    #[test]
    fn shape_errors() {
        let src = "[manifold]\ndim = 3\n[objects]\nX = { field = [\"1\", \"0\"] }\n";
        let err = Problem::parse(src).unwrap_err();
        assert!(err.message.contains("2 components"));
        assert_eq!(err.line, Some(4));
        let src = "[manifold]\ndim = 2\n[objects]\nX = { expr = \"1\", volume = \"1\" }\n";
        assert!(Problem::parse(src).is_err());
        let src = "[manifold]\ndim = 2\n[[tasks]]\nkind = \"bogus\"\n";
        assert_eq!(Problem::parse(src).unwrap_err().line, Some(4));
        let err = Problem::parse("[manifold]\ndim = \n").unwrap_err();
        assert_eq!(err.line, Some(2));
    }
}
