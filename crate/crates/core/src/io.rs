//! JSON documents for spaces, sections, integrands, subspaces and problem files.
//!
//! Decoding errors name the offending field with a JSON path such as
//! `sections[1].params`. Infinite values are written as `"inf"` / `"-inf"`.
//!
//! ```text
//! measure   {"weights": [1, 2], "atoms"?: ["a", "b"], "chain"?: [[0], [0, 1]]}
//! catalog   {"kind": "abs", "params": [1], "shift"?: 0, "slope"?: 0, "offset"?: 0}
//! grid      {"xs": [0, 1, 2], "vs": [1, "inf", 0]}
//! product   {"product": [<catalog or grid>, ...]}
//! integrand {"space": <measure>, "sections": [...], "negated"?: false, "caratheodory"?: false}
//! subspace  {"kind": "full" | "constants" | "piecewise_constant" | "zero_outside" | "bounded_by", ...}
//! ```

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::catalog::{Kind, ScalarConvexFunction};
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::functional::FunctionOnOmega;
use crate::grid::GridFunction;
use crate::integrand::{Integrand, ScalarSection, Section};
use crate::measure::DiscreteMeasureSpace;
use crate::subspace::SubspaceSpec;

/// Version stamped on manifests, reports and CLI records.
pub const SCHEMA_VERSION: u32 = 1;

fn format_err(path: &str, msg: impl std::fmt::Display) -> Error {
    if path.is_empty() {
        Error::Format(msg.to_string())
    } else {
        Error::Format(format!("{path}: {msg}"))
    }
}

fn join(prefix: &str, inner: &str) -> String {
    match (prefix.is_empty(), inner.is_empty() || inner == ".") {
        (true, _) => inner.to_string(),
        (false, true) => prefix.to_string(),
        (false, false) if inner.starts_with('[') => format!("{prefix}{inner}"),
        (false, false) => format!("{prefix}.{inner}"),
    }
}

/// Deserializes `value`, reporting errors at `prefix` + the inner path.
pub fn decode<T: DeserializeOwned>(value: &Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        format_err(&join(prefix, &inner), e.into_inner())
    })
}

/// Re-labels an error raised while building the object at `path`.
fn at<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Format(_) => e,
        other => format_err(path, other),
    })
}

pub fn parse_json(text: &str, what: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Format(format!("{what}: invalid JSON: {e}")))
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: cannot read: {e}", path.display())))?;
    parse_json(&text, &path.display().to_string())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureDoc {
    weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    atoms: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chain: Option<Vec<Vec<usize>>>,
}

pub fn measure_from_json(v: &Value, path: &str) -> Result<DiscreteMeasureSpace<f64>> {
    let doc: MeasureDoc = decode(v, path)?;
    let atoms = doc.atoms.unwrap_or_else(|| (0..doc.weights.len()).map(|i| format!("w{i}")).collect());
    at(path, DiscreteMeasureSpace::with_chain(atoms, doc.weights, doc.chain.unwrap_or_default()))
}

pub fn measure_to_json(space: &DiscreteMeasureSpace<f64>) -> Value {
    json!({ "atoms": space.atoms(), "weights": space.weights(), "chain": space.chain() })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogDoc {
    kind: String,
    #[serde(default)]
    params: Vec<f64>,
    #[serde(default)]
    shift: f64,
    #[serde(default)]
    slope: f64,
    #[serde(default)]
    offset: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDoc {
    xs: Vec<f64>,
    vs: Vec<ExtReal<f64>>,
}

/// Catalog kind names with their parameter lists.
pub const CATALOG_KINDS: &[(&str, &str)] = &[
    ("quadratic", "a, b, c"),
    ("abs", "w"),
    ("indicator", "lo, hi"),
    ("affine", "s, b"),
    ("exp", ""),
    ("neg_log", ""),
    ("power_even", "p, w"),
    ("piecewise_affine", "lo, hi"),
    ("entropy", ""),
    ("neg_log_conjugate", ""),
    ("power_conjugate", "p, w"),
];

fn kind_from(name: &str, params: &[f64], path: &str) -> Result<Kind<f64>> {
    let Some((_, names)) = CATALOG_KINDS.iter().find(|(n, _)| *n == name) else {
        let known: Vec<_> = CATALOG_KINDS.iter().map(|(n, _)| *n).collect();
        return Err(format_err(&join(path, "kind"), format!("unknown kind {name:?}; expected one of {}", known.join(", "))));
    };
    let expected = if names.is_empty() { 0 } else { names.split(',').count() };
    if params.len() != expected {
        return Err(format_err(
            &join(path, "params"),
            format!("{name} takes {expected} parameter(s) ({names}), got {}", params.len()),
        ));
    }
    let exponent = |v: f64| -> Result<u32> {
        if v.fract() == 0.0 && (0.0..=u32::MAX as f64).contains(&v) {
            Ok(v as u32)
        } else {
            Err(format_err(&join(path, "params[0]"), format!("power must be an integer, got {v}")))
        }
    };
    Ok(match name {
        "quadratic" => Kind::Quadratic { a: params[0], b: params[1], c: params[2] },
        "abs" => Kind::AbsoluteValue { w: params[0] },
        "indicator" => Kind::IndicatorInterval { lo: params[0], hi: params[1] },
        "affine" => Kind::Affine { s: params[0], b: params[1] },
        "exp" => Kind::Exponential,
        "neg_log" => Kind::NegLog,
        "power_even" => Kind::PowerEven { p: exponent(params[0])?, w: params[1] },
        "piecewise_affine" => Kind::PiecewiseAffine { lo: params[0], hi: params[1] },
        "entropy" => Kind::EntropyLike,
        "neg_log_conjugate" => Kind::NegLogConjugate,
        "power_conjugate" => Kind::PowerConjugate { p: exponent(params[0])?, w: params[1] },
        _ => unreachable!("kind table checked above"),
    })
}

pub fn catalog_from_json(v: &Value, path: &str) -> Result<ScalarConvexFunction<f64>> {
    let doc: CatalogDoc = decode(v, path)?;
    let kind = kind_from(&doc.kind, &doc.params, path)?;
    let f = at(&join(path, "params"), ScalarConvexFunction::from_kind(kind))?;
    at(path, f.with_transform(doc.shift, doc.slope, doc.offset))
}

pub fn catalog_to_json(f: &ScalarConvexFunction<f64>) -> Value {
    let mut v = json!({ "kind": f.kind_name(), "params": f.params() });
    for (key, val) in [("shift", f.shift()), ("slope", f.slope()), ("offset", f.offset())] {
        if val != 0.0 {
            v[key] = json!(val);
        }
    }
    v
}

pub fn grid_from_json(v: &Value, path: &str) -> Result<GridFunction<f64>> {
    let doc: GridDoc = decode(v, path)?;
    at(path, GridFunction::new(doc.xs, doc.vs))
}

pub fn grid_to_json(g: &GridFunction<f64>) -> Value {
    json!({ "xs": g.xs(), "vs": g.vs() })
}

fn scalar_section_from_json(v: &Value, path: &str) -> Result<ScalarSection<f64>> {
    let obj = v.as_object().ok_or_else(|| format_err(path, "expected a catalog or grid object"))?;
    if obj.contains_key("kind") {
        Ok(ScalarSection::Catalog(catalog_from_json(v, path)?))
    } else if obj.contains_key("xs") {
        Ok(ScalarSection::Grid(grid_from_json(v, path)?))
    } else {
        Err(format_err(path, "a section needs either \"kind\" (catalog) or \"xs\"/\"vs\" (grid)"))
    }
}

pub fn section_from_json(v: &Value, path: &str) -> Result<Section<f64>> {
    if let Some(parts) = v.get("product") {
        let ppath = join(path, "product");
        let arr = parts.as_array().ok_or_else(|| format_err(&ppath, "expected an array of sections"))?;
        if v.as_object().is_some_and(|o| o.len() > 1) {
            return Err(format_err(path, "a product section has only the \"product\" field"));
        }
        let comps = arr
            .iter()
            .enumerate()
            .map(|(k, c)| scalar_section_from_json(c, &format!("{ppath}[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Section::Product(comps));
    }
    Ok(Section::Scalar(scalar_section_from_json(v, path)?))
}

fn scalar_section_to_json(s: &ScalarSection<f64>) -> Value {
    match s {
        ScalarSection::Catalog(f) => catalog_to_json(f),
        ScalarSection::Grid(g) => grid_to_json(g),
    }
}

pub fn section_to_json(s: &Section<f64>) -> Value {
    match s {
        Section::Scalar(c) => scalar_section_to_json(c),
        Section::Product(parts) => json!({ "product": parts.iter().map(scalar_section_to_json).collect::<Vec<_>>() }),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegrandDoc {
    space: Value,
    sections: Vec<Value>,
    #[serde(default)]
    negated: bool,
    #[serde(default)]
    caratheodory: bool,
}

pub fn integrand_from_json(v: &Value, path: &str) -> Result<Integrand<f64>> {
    let doc: IntegrandDoc = decode(v, path)?;
    let space = measure_from_json(&doc.space, &join(path, "space"))?;
    let sections = doc
        .sections
        .iter()
        .enumerate()
        .map(|(i, s)| section_from_json(s, &join(path, &format!("sections[{i}]"))))
        .collect::<Result<Vec<_>>>()?;
    let spath = join(path, "sections");
    let phi = if doc.caratheodory {
        at(&spath, Integrand::build_caratheodory(space, sections))?
    } else {
        at(&spath, Integrand::new(space, sections))?
    };
    Ok(if doc.negated { phi.negated() } else { phi })
}

pub fn integrand_to_json(phi: &Integrand<f64>) -> Value {
    let mut v = json!({
        "space": measure_to_json(phi.space()),
        "sections": phi.sections().iter().map(section_to_json).collect::<Vec<_>>(),
    });
    if phi.is_negated() {
        v["negated"] = json!(true);
    }
    if phi.is_caratheodory() {
        v["caratheodory"] = json!(true);
    }
    v
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BareSubspaceDoc {
    #[allow(dead_code)]
    kind: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CellsDoc {
    #[allow(dead_code)]
    kind: String,
    cells: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SetDoc {
    #[allow(dead_code)]
    kind: String,
    set: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundDoc {
    #[allow(dead_code)]
    kind: String,
    bound: f64,
}

pub fn subspace_from_json(v: &Value, path: &str) -> Result<SubspaceSpec> {
    let kind = v
        .get("kind")
        .ok_or_else(|| format_err(path, "missing field `kind`"))?
        .as_str()
        .ok_or_else(|| format_err(&join(path, "kind"), "expected a string"))?;
    Ok(match kind {
        "full" => {
            decode::<BareSubspaceDoc>(v, path)?;
            SubspaceSpec::FullSpace
        }
        "constants" => {
            decode::<BareSubspaceDoc>(v, path)?;
            SubspaceSpec::Constants
        }
        "piecewise_constant" => SubspaceSpec::PiecewiseConstant { cells: decode::<CellsDoc>(v, path)?.cells },
        "zero_outside" => SubspaceSpec::ZeroOutsideSet { set: decode::<SetDoc>(v, path)?.set },
        "bounded_by" => SubspaceSpec::BoundedBy { bound: decode::<BoundDoc>(v, path)?.bound },
        other => {
            return Err(format_err(
                &join(path, "kind"),
                format!("unknown subspace kind {other:?}; expected full, constants, piecewise_constant, zero_outside or bounded_by"),
            ))
        }
    })
}

pub fn subspace_to_json(spec: &SubspaceSpec) -> Value {
    serde_json::to_value(spec).expect("subspace serializes")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum FunctionDoc {
    Scalar(Vec<f64>),
    Vector(Vec<Vec<f64>>),
}

/// `[1, 2]` (one real per atom) or `[[1, 0], [2, 1]]` (a point per atom).
pub fn function_from_json(v: &Value, path: &str) -> Result<FunctionOnOmega<f64>> {
    let doc: FunctionDoc = decode(v, path).map_err(|_| format_err(path, "expected an array of numbers or of number arrays"))?;
    at(
        path,
        match doc {
            FunctionDoc::Scalar(xs) => FunctionOnOmega::scalar(xs),
            FunctionDoc::Vector(xs) => FunctionOnOmega::new(xs),
        },
    )
}

pub fn function_to_json(x: &FunctionOnOmega<f64>) -> Value {
    if x.dim() == 1 {
        json!(x.first_coordinates())
    } else {
        json!(x.values())
    }
}

/// Problem file: an integrand (inline or a path relative to the file),
/// a subspace, optional witnesses and step size, and query points.
#[derive(Debug, Clone)]
pub struct Problem {
    pub integrand: Integrand<f64>,
    pub subspace: Option<SubspaceSpec>,
    pub witness: Option<FunctionOnOmega<f64>>,
    pub dual_witness: Option<FunctionOnOmega<f64>>,
    pub gamma: Option<f64>,
    pub queries: Vec<Query>,
}

/// One query point set; which fields are used depends on the operation.
#[derive(Debug, Clone, Default)]
pub struct Query {
    pub x: Option<FunctionOnOmega<f64>>,
    pub y: Option<FunctionOnOmega<f64>>,
    pub d: Option<FunctionOnOmega<f64>>,
    pub z: Option<FunctionOnOmega<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDoc {
    #[serde(default)]
    schema_version: Option<u32>,
    integrand: Value,
    #[serde(default)]
    subspace: Option<Value>,
    #[serde(default)]
    witness: Option<Value>,
    #[serde(default)]
    dual_witness: Option<Value>,
    #[serde(default)]
    gamma: Option<f64>,
    #[serde(default)]
    queries: Vec<Value>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryDoc {
    #[serde(default)]
    x: Option<Value>,
    #[serde(default)]
    y: Option<Value>,
    #[serde(default)]
    d: Option<Value>,
    #[serde(default)]
    z: Option<Value>,
}

fn resolve(base: Option<&Path>, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    match base {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

/// Loads a value that is either inline JSON or a string path to a JSON file.
pub fn inline_or_file(v: &Value, base: Option<&Path>) -> Result<Value> {
    match v {
        Value::String(rel) => read_json(&resolve(base, rel)),
        other => Ok(other.clone()),
    }
}

pub fn problem_from_json(v: &Value, base: Option<&Path>) -> Result<Problem> {
    let doc: ProblemDoc = decode(v, "")?;
    if let Some(ver) = doc.schema_version {
        if ver != SCHEMA_VERSION {
            return Err(format_err("schema_version", format!("unsupported version {ver}, expected {SCHEMA_VERSION}")));
        }
    }
    let integrand = integrand_from_json(&inline_or_file(&doc.integrand, base)?, "integrand")?;
    let subspace = doc
        .subspace
        .map(|s| inline_or_file(&s, base).and_then(|s| subspace_from_json(&s, "subspace")))
        .transpose()?;
    let opt_fn = |v: Option<Value>, path: &str| v.map(|v| function_from_json(&v, path)).transpose();
    let witness = opt_fn(doc.witness, "witness")?;
    let dual_witness = opt_fn(doc.dual_witness, "dual_witness")?;
    let queries = doc
        .queries
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let p = format!("queries[{i}]");
            let qd: QueryDoc = decode(q, &p)?;
            Ok(Query {
                x: opt_fn(qd.x, &format!("{p}.x"))?,
                y: opt_fn(qd.y, &format!("{p}.y"))?,
                d: opt_fn(qd.d, &format!("{p}.d"))?,
                z: opt_fn(qd.z, &format!("{p}.z"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Problem {
        integrand,
        subspace,
        witness,
        dual_witness,
        gamma: doc.gamma,
        queries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrand_round_trip() {
        let doc = json!({
            "space": {"weights": [1, 2]},
            "sections": [
                {"kind": "quadratic", "params": [2, -2, 1]},
                {"product": [{"kind": "abs", "params": [1], "shift": 0.5}, {"xs": [0, 1], "vs": [1, "inf"]}]}
            ]
        });
        let err = integrand_from_json(&doc, "").unwrap_err();
        assert!(err.to_string().contains("sections"), "{err}");

        let doc = json!({
            "space": {"weights": [1, 2]},
            "sections": [
                {"product": [{"kind": "quadratic", "params": [2, -2, 1]}, {"kind": "exp"}]},
                {"product": [{"kind": "abs", "params": [1], "shift": 0.5}, {"xs": [0, 1], "vs": [1, "inf"]}]}
            ]
        });
        let phi = integrand_from_json(&doc, "").unwrap();
        assert_eq!(phi.dim(), 2);
        let back = integrand_from_json(&integrand_to_json(&phi), "").unwrap();
        assert_eq!(back, phi);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let doc = json!({"space": {"weights": [1]}, "sections": [{"kind": "abs", "params": ["x"]}]});
        let err = integrand_from_json(&doc, "integrand").unwrap_err().to_string();
        assert!(err.contains("integrand.sections[0].params[0]"), "{err}");

        let doc = json!({"space": {"weights": [1]}, "sections": [{"kind": "abs", "params": [1, 2]}]});
        let err = integrand_from_json(&doc, "").unwrap_err().to_string();
        assert!(err.contains("sections[0].params"), "{err}");

        let doc = json!({"space": {"weights": [1, -1]}, "sections": [{"kind": "exp"}, {"kind": "exp"}]});
        let err = integrand_from_json(&doc, "").unwrap_err().to_string();
        assert!(err.contains("space") && err.contains("weight 1"), "{err}");

        let doc = json!({"space": {"weights": [1]}, "sections": [{"kind": "cosh"}]});
        let err = integrand_from_json(&doc, "").unwrap_err().to_string();
        assert!(err.contains("sections[0].kind"), "{err}");

        let err = subspace_from_json(&json!({"kind": "zero_outside", "set": [0, "a"]}), "subspace").unwrap_err().to_string();
        assert!(err.contains("subspace.set[1]"), "{err}");
    }

    #[test]
    fn subspace_json_forms() {
        for (doc, spec) in [
            (json!({"kind": "full"}), SubspaceSpec::FullSpace),
            (json!({"kind": "constants"}), SubspaceSpec::Constants),
            (json!({"kind": "piecewise_constant", "cells": [[0], [1, 2]]}), SubspaceSpec::PiecewiseConstant { cells: vec![vec![0], vec![1, 2]] }),
            (json!({"kind": "zero_outside", "set": [1]}), SubspaceSpec::ZeroOutsideSet { set: vec![1] }),
            (json!({"kind": "bounded_by", "bound": 2.5}), SubspaceSpec::BoundedBy { bound: 2.5 }),
        ] {
            assert_eq!(subspace_from_json(&doc, "").unwrap(), spec);
            assert_eq!(subspace_to_json(&spec), doc);
        }
        assert!(subspace_from_json(&json!({"kind": "constants", "extra": 1}), "").is_err());
    }

    #[test]
    fn problem_file_with_queries() {
        let doc = json!({
            "integrand": {"space": {"weights": [1, 1]}, "sections": [{"kind": "abs", "params": [1]}, {"kind": "abs", "params": [1]}]},
            "subspace": {"kind": "constants"},
            "gamma": 1.0,
            "queries": [{"x": [3, -0.5]}, {"y": [[0.5], [2]]}]
        });
        let p = problem_from_json(&doc, None).unwrap();
        assert_eq!(p.queries.len(), 2);
        assert_eq!(p.queries[1].y.as_ref().unwrap().first_coordinates(), vec![0.5, 2.0]);
        let bad = json!({"integrand": doc["integrand"], "queries": [{"x": [1, "b"]}]});
        let err = problem_from_json(&bad, None).unwrap_err().to_string();
        assert!(err.contains("queries[0].x"), "{err}");
    }
}
