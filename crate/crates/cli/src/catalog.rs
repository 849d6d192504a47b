//! Task identifiers, their inputs, and the hypotheses each one certifies.

use hamiltonize_core::constructions::CONSTRUCTIONS;

pub struct TaskInfo {
    pub id: &'static str,
    /// `(name, kind)`; a trailing `?` marks an optional input, `[]` a list.
    pub inputs: &'static [(&'static str, &'static str)],
    pub options: &'static [&'static str],
    pub summary: &'static str,
    pub hypotheses: &'static [&'static str],
}

const TASKS: &[TaskInfo] = &[
    TaskInfo {
        id: "flaschka_ratiu",
        inputs: &[("vol", "volume"), ("casimirs", "expr[]")],
        options: &[],
        summary: "Unimodular bivector π with ι_πΩ = dc₁∧…∧dc_{m−2}.",
        hypotheses: &[
            "Ω is a volume form: its coefficient is nonzero on the chart",
            "exactly m−2 functions c_i are given",
            "each c_i is a Casimir of π and π satisfies Jacobi (certified)",
        ],
    },
    TaskInfo {
        id: "integrable_family",
        inputs: &[("x", "field"), ("hs", "expr[]"), ("vol", "volume")],
        options: &[],
        summary: "m−1 compatible structures π_i with π_i♯dh_j = δ_ij X.",
        hypotheses: &[
            "every h_j is a first integral of X",
            "dh₁∧…∧dh_{m−1} does not vanish identically",
            "X = f_i ψ_i♯dh_i for a function f_i, where ι_{ψ_i}Ω omits dh_i",
            "the π_i pairwise Schouten-commute (certified)",
        ],
    },
    TaskInfo {
        id: "linear_fr",
        inputs: &[("p", "matrix"), ("a", "matrix")],
        options: &[],
        summary: "Constant π from the (n−2)-minors of P for the linear field Ax·∂ₓ.",
        hypotheses: &[
            "P has n−2 independent constant columns",
            "trace A = 0",
            "every column of P lies in ker Aᵀ, so v·x are first integrals",
            "h = ½xᵀ(WA)x; the proportionality constant λ is measured, not assumed",
        ],
    },
    TaskInfo {
        id: "primitive",
        inputs: &[("omega", "form")],
        options: &["base"],
        summary: "Radial homotopy primitive ϱ with dϱ = ω.",
        hypotheses: &["ω has polynomial coefficients", "ω is closed"],
    },
    TaskInfo {
        id: "integrating_factor",
        inputs: &[("rho", "form")],
        options: &["degree_bound"],
        summary: "Polynomial a with d(aϱ) = 0, up to a degree bound.",
        hypotheses: &["ϱ has polynomial coefficients and no unbound parameters"],
    },
    TaskInfo {
        id: "unimodularize",
        inputs: &[("x", "field"), ("vol", "volume"), ("rho", "form"), ("a", "expr")],
        options: &[],
        summary: "π with ι_πΩ = aϱ and Hamiltonian 1/a, for ι_XΩ = dϱ.",
        hypotheses: &[
            "ϱ is a primitive of ι_XΩ",
            "X admits an integrating factor a of the primitive: d(aϱ) = 0",
            "ϱ has rank at most two",
            "X is the modular field of π/a up to the recorded sign (certified)",
        ],
    },
    TaskInfo {
        id: "foliated_build",
        inputs: &[("vol", "volume"), ("alphas", "form[]"), ("beta", "form"), ("x", "field?"), ("h", "expr?")],
        options: &[],
        summary: "π with ι_πΩ = α₁∧…∧α_k∧β for a leaf-wise closed β.",
        hypotheses: &[
            "the α_i satisfy the integrability condition dα_i∧(the other α's) = 0",
            "α₁∧…∧α_k∧β is closed",
            "optionally X is a Poisson field of π and π♯dh = λX",
        ],
    },
    TaskInfo {
        id: "normal_class_check",
        inputs: &[("x", "field"), ("h", "expr"), ("y", "field")],
        options: &[],
        summary: "Normalization and invariance of the class of Y relative to X.",
        hypotheses: &[
            "normalization dh(Y)X = X",
            "invariance [X,Y]∧X∧Y = 0",
            "the stronger form [X,Y]∧X = 0, implied by the first two",
        ],
    },
    TaskInfo {
        id: "decomposable",
        inputs: &[("x", "field"), ("y", "field"), ("h", "expr?")],
        options: &[],
        summary: "π = Y∧X together with [π,π] = 2[X,Y]∧X∧Y.",
        hypotheses: &[
            "π is Poisson exactly when [X,Y]∧X∧Y = 0",
            "with h given and dh(Y)X = X, π♯dh = X",
        ],
    },
    TaskInfo {
        id: "hojman",
        inputs: &[("x", "field"), ("h", "expr"), ("z", "field")],
        options: &[],
        summary: "π = Z∧X/dh(Z) for a regular first integral h.",
        hypotheses: &[
            "h is a first integral of X",
            "dh(Z) vanishes nowhere on the chart",
            "[X,Z] = pX + qZ, checked as [X,Z]∧X∧Z = 0",
        ],
    },
    TaskInfo {
        id: "metric_normal",
        inputs: &[("x", "field"), ("h", "expr"), ("g", "metric")],
        options: &[],
        summary: "Y₀ = η♯dh/η(dh,dh) from the dual metric, then π = Y₀∧X.",
        hypotheses: &[
            "h has no critical points on the chart: η(dh,dh) ≠ 0",
            "g is X-invariant (full invariance L_X g = 0 is checked)",
            "then [X,Y₀] = 0 and π♯dh = X",
        ],
    },
    TaskInfo {
        id: "torus2",
        inputs: &[
            ("x1", "field"),
            ("x2", "field"),
            ("h1", "expr"),
            ("h2", "expr"),
            ("y1", "field"),
            ("y2", "field"),
        ],
        options: &["strict"],
        summary: "π = Y₁∧X₁ + Y₂∧X₂ for a 2-torus action with momentum map (h₁,h₂).",
        hypotheses: &[
            "the generators commute: [X₁,X₂] = 0",
            "each Y_j is invariant: [X_i,Y_j] = 0",
            "Σ_j dh_i(Y_j)X_j = X_i for i = 1,2",
            "[π,π] = 2[Y₁,Y₂]∧X₁∧X₂ and dh_i([Y₁,Y₂]) = 0 (certified)",
        ],
    },
];

const CHECKS: &[TaskInfo] = &[
    TaskInfo {
        id: "jacobi",
        inputs: &[("pi", "multivector")],
        options: &[],
        summary: "[π,π] = 0.",
        hypotheses: &["π is a bivector"],
    },
    TaskInfo {
        id: "casimir",
        inputs: &[("pi", "multivector"), ("c", "expr"), ("vol", "volume?")],
        options: &[],
        summary: "π♯dc = 0, and dc∧ι_πΩ = 0 when Ω is given.",
        hypotheses: &["π is a bivector"],
    },
    TaskInfo {
        id: "hamiltonization",
        inputs: &[("pi", "multivector"), ("h", "expr"), ("x", "field")],
        options: &[],
        summary: "π♯dh = λX with λ recovered.",
        hypotheses: &["π is a bivector"],
    },
    TaskInfo {
        id: "poisson_vf",
        inputs: &[("pi", "multivector"), ("x", "field")],
        options: &[],
        summary: "L_X π = 0.",
        hypotheses: &["π is a bivector"],
    },
    TaskInfo {
        id: "conformal",
        inputs: &[("pi", "multivector"), ("f", "expr")],
        options: &[],
        summary: "[fπ,fπ] + 2f π♯df∧π = 0 and fπ stays Poisson.",
        hypotheses: &["π is Poisson"],
    },
    TaskInfo {
        id: "divergence_free",
        inputs: &[("x", "field"), ("vol", "volume")],
        options: &[],
        summary: "div_Ω X = 0, i.e. Ω is X-invariant.",
        hypotheses: &[],
    },
    TaskInfo {
        id: "first_integral",
        inputs: &[("x", "field"), ("c", "expr[]")],
        options: &[],
        summary: "X(c) = 0 for each c.",
        hypotheses: &[],
    },
];

pub fn constructions() -> impl Iterator<Item = &'static TaskInfo> {
    CONSTRUCTIONS
        .iter()
        .map(|id| TASKS.iter().find(|t| t.id == *id).expect("catalogued"))
}

pub fn checks() -> impl Iterator<Item = &'static TaskInfo> {
    CHECKS.iter()
}

pub fn find(id: &str) -> Option<&'static TaskInfo> {
    TASKS.iter().chain(CHECKS).find(|t| t.id == id)
}

pub fn is_known(id: &str) -> bool {
    find(id).is_some()
}

fn signature(t: &TaskInfo) -> String {
    let ins: Vec<String> = t.inputs.iter().map(|(n, k)| format!("{n}: {k}")).collect();
    format!("{}({})", t.id, ins.join(", "))
}

pub fn list_tasks() -> String {
    let mut out = String::from("constructions:\n");
    for t in constructions() {
        out.push_str(&format!("  {}\n", signature(t)));
    }
    out.push_str("checks:\n");
    for t in checks() {
        out.push_str(&format!("  {}\n", signature(t)));
    }
    out
}

pub fn explain(id: &str) -> Option<String> {
    let t = find(id)?;
    let mut out = format!("{}\n  {}\n", signature(t), t.summary);
    if !t.options.is_empty() {
        out.push_str(&format!("options: {}\n", t.options.join(", ")));
    }
    if !t.hypotheses.is_empty() {
        out.push_str("hypotheses:\n");
        for h in t.hypotheses {
            out.push_str(&format!("  [ ] {h}\n"));
        }
    }
    Some(out)
}
