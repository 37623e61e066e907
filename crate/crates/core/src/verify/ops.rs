//! Operation registry: each entry decodes its operands from JSON and
//! returns the algorithm's value next to the oracle's.

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use super::Tolerance;
use crate::catalog::{ScalarConvexFunction, SubdiffInterval};
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::functional::{numeric_conjugate, BruteForceConfig, FunctionOnOmega, IntegralFunctional};
use crate::grid::GridFunction;
use crate::integrand::{Integrand, ScalarSection, Section};
use crate::io::{self, decode};
use crate::measure::DiscreteMeasureSpace;
use crate::subspace::{compliance_check, decomposability_check, restricted_infimum, DecomposabilityVariant, LineSearch, SubspaceSpec};

/// Registered operation names.
pub const OPERATIONS: &[&str] = &[
    "integrate",
    "integrate_sup_convention",
    "essential_infimum",
    "partition_min",
    "eval",
    "conjugate_closed_form",
    "prox_closed_form",
    "subdifferential_interval",
    "recession_closed_form",
    "lower_convex_hull",
    "legendre_transform_grid",
    "legendre_brute_force",
    "biconjugate_grid",
    "prox_grid",
    "moreau_envelope_grid",
    "recession_grid",
    "build_caratheodory",
    "epigraph_dense_sample",
    "verify_normality_inf",
    "pointwise_inf",
    "evaluate",
    "interchange_inf",
    "interchange_sup",
    "conjugate_functional",
    "subdiff_check",
    "prox_functional",
    "envelope_functional",
    "recession_functional",
    "minimizer_pointwise_check",
    "is_member",
    "compliance_check",
    "decomposability_check",
    "restricted_infimum",
];

/// Algorithm value, oracle value, and a tolerance when the route dictates one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub lhs: ExtReal<f64>,
    pub rhs: ExtReal<f64>,
    pub tolerance: Option<Tolerance>,
}

impl Outcome {
    fn pair(lhs: ExtReal<f64>, rhs: ExtReal<f64>) -> Self {
        Outcome { lhs, rhs, tolerance: None }
    }

    /// A distance checked against zero.
    fn distance(d: ExtReal<f64>) -> Self {
        Outcome::pair(d, ExtReal::zero())
    }

    fn within(mut self, abs: f64) -> Self {
        self.tolerance = Some(Tolerance { abs, rel: 0.0 });
        self
    }
}

fn fin(v: f64) -> ExtReal<f64> {
    ExtReal::finite(v)
}

fn flag(b: bool) -> ExtReal<f64> {
    fin(if b { 1.0 } else { 0.0 })
}

fn fmt(path: String, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("{path}: {msg}"))
}

/// Sup-distance between two extended vectors; `+inf` on length or infinity mismatch.
fn distance(a: &[ExtReal<f64>], b: &[ExtReal<f64>]) -> ExtReal<f64> {
    if a.len() != b.len() {
        return ExtReal::PlusInf;
    }
    a.iter().zip(b).fold(ExtReal::zero(), |acc, (&x, &y)| {
        let g = match x.gap_to(y) {
            ExtReal::Finite(g) => fin(g.abs()),
            _ => ExtReal::PlusInf,
        };
        acc.max(g)
    })
}

fn finite_vec(v: &[f64]) -> Vec<ExtReal<f64>> {
    v.iter().map(|&x| fin(x)).collect()
}

struct Inputs<'a> {
    obj: &'a Map<String, Value>,
}

impl<'a> Inputs<'a> {
    fn new(v: &'a Value) -> Result<Self> {
        v.as_object().map(|obj| Inputs { obj }).ok_or_else(|| Error::Format("inputs: expected an object".into()))
    }

    fn path(name: &str) -> String {
        format!("inputs.{name}")
    }

    fn opt(&self, name: &str) -> Option<&'a Value> {
        self.obj.get(name).filter(|v| !v.is_null())
    }

    fn get(&self, name: &str) -> Result<&'a Value> {
        self.opt(name).ok_or_else(|| fmt(Self::path(name), "missing field"))
    }

    fn typed<T: DeserializeOwned>(&self, name: &str) -> Result<T> {
        decode(self.get(name)?, &Self::path(name))
    }

    fn typed_opt<T: DeserializeOwned>(&self, name: &str) -> Result<Option<T>> {
        self.opt(name).map(|v| decode(v, &Self::path(name))).transpose()
    }

    fn real(&self, name: &str) -> Result<f64> {
        self.typed(name)
    }

    fn ext(&self, name: &str) -> Result<ExtReal<f64>> {
        self.typed(name)
    }

    fn space(&self) -> Result<DiscreteMeasureSpace<f64>> {
        io::measure_from_json(self.get("space")?, &Self::path("space"))
    }

    fn catalog(&self, name: &str) -> Result<ScalarConvexFunction<f64>> {
        io::catalog_from_json(self.get(name)?, &Self::path(name))
    }

    /// A grid given by samples, or `{sample_of, lo, hi, n}` for a uniform
    /// sampling of a catalog function.
    fn grid(&self, name: &str) -> Result<GridFunction<f64>> {
        let v = self.get(name)?;
        let path = Self::path(name);
        match v.get("sample_of") {
            Some(f) => {
                #[derive(serde::Deserialize)]
                #[serde(deny_unknown_fields)]
                struct Sampled {
                    #[allow(dead_code)]
                    sample_of: Value,
                    lo: f64,
                    hi: f64,
                    n: usize,
                }
                let s: Sampled = decode(v, &path)?;
                let f = io::catalog_from_json(f, &format!("{path}.sample_of"))?;
                GridFunction::sample_uniform(s.lo, s.hi, s.n, |x| f.eval(x)).map_err(|e| fmt(path, e))
            }
            None => io::grid_from_json(v, &path),
        }
    }

    fn integrand(&self) -> Result<Integrand<f64>> {
        io::integrand_from_json(self.get("integrand")?, &Self::path("integrand"))
    }

    fn subspace(&self) -> Result<SubspaceSpec> {
        io::subspace_from_json(self.get("subspace")?, &Self::path("subspace"))
    }

    fn function(&self, name: &str) -> Result<FunctionOnOmega<f64>> {
        io::function_from_json(self.get(name)?, &Self::path(name))
    }

    fn function_opt(&self, name: &str) -> Result<Option<FunctionOnOmega<f64>>> {
        self.opt(name).map(|v| io::function_from_json(v, &Self::path(name))).transpose()
    }

    fn expected(&self) -> Result<Option<ExtReal<f64>>> {
        self.typed_opt("expected")
    }

    fn expected_flag(&self) -> Result<ExtReal<f64>> {
        let b: bool = self.typed("expected")?;
        Ok(flag(b))
    }

    fn expected_vec(&self) -> Result<Vec<ExtReal<f64>>> {
        self.typed("expected")
    }

    /// Functional with the given witnesses, or the canonical ones.
    fn functional(&self, dual: bool) -> Result<IntegralFunctional<f64>> {
        let f = IntegralFunctional::new(self.integrand()?);
        let w = match self.function_opt("witness")? {
            Some(w) => w,
            None => f.canonical_witness()?,
        };
        let f = f.certify(w)?;
        if !dual {
            return Ok(f);
        }
        let d = match self.function_opt("dual_witness")? {
            Some(d) => d,
            None => f.canonical_dual_witness()?,
        };
        f.certify_dual(d)
    }

    fn seed(&self, default: u64) -> Result<u64> {
        Ok(self.typed_opt("seed")?.unwrap_or(default))
    }
}

/// Runs the named operation. With `"expect_error": true` the case passes
/// exactly when the operation is rejected.
pub fn run_op(op: &str, inputs: &Value, seed: u64) -> Result<Outcome> {
    let inp = Inputs::new(inputs)?;
    if inp.typed_opt::<bool>("expect_error")?.unwrap_or(false) {
        let errored = dispatch(op, &inp, seed).is_err();
        if !OPERATIONS.contains(&op) {
            return Err(Error::InvalidParameter(format!("unknown operation {op:?}")));
        }
        return Ok(Outcome::pair(flag(errored), flag(true)));
    }
    dispatch(op, &inp, seed)
}

fn dispatch(op: &str, inp: &Inputs<'_>, seed: u64) -> Result<Outcome> {
    match op {
        "integrate" | "integrate_sup_convention" => {
            let space = inp.space()?;
            let values: Vec<ExtReal<f64>> = inp.typed("values")?;
            let v = if op == "integrate" {
                space.integrate(&values)?
            } else {
                space.integrate_sup_convention(&values)?
            };
            Ok(Outcome::pair(v, inp.ext("expected")?))
        }
        "essential_infimum" => {
            let space = inp.space()?;
            let family: Vec<Vec<ExtReal<f64>>> = inp.typed("family")?;
            let r = space.essential_infimum(&family)?;
            Ok(Outcome::distance(distance(&r.values, &inp.expected_vec()?)))
        }
        "partition_min" => {
            let space = inp.space()?;
            let family: Vec<Vec<f64>> = inp.typed("family")?;
            let r = space.partition_min(&family)?;
            let mut d = distance(&finite_vec(&r.min), &inp.expected_vec()?);
            if let Some(cells) = inp.typed_opt::<Vec<Vec<usize>>>("expected_cells")? {
                if cells != r.cells {
                    d = ExtReal::PlusInf;
                }
            }
            Ok(Outcome::distance(d))
        }
        "eval" => {
            let f = inp.catalog("f")?;
            Ok(Outcome::pair(f.eval(inp.real("x")?), inp.ext("expected")?))
        }
        "conjugate_closed_form" => {
            let f = inp.catalog("f")?;
            let y = inp.real("y")?;
            let lhs = f.conjugate().eval(y);
            let rhs = match inp.expected()? {
                Some(e) => e,
                None => numeric_conjugate(&ScalarSection::Catalog(f), y),
            };
            Ok(Outcome::pair(lhs, rhs))
        }
        "prox_closed_form" => {
            let f = inp.catalog("f")?;
            let p = f.prox(inp.real("gamma")?, inp.real("x")?)?;
            Ok(Outcome::pair(fin(p), inp.ext("expected")?))
        }
        "subdifferential_interval" => {
            let f = inp.catalog("f")?;
            let s = f.subdifferential(inp.real("x")?);
            let expected: Option<(ExtReal<f64>, ExtReal<f64>)> = inp.typed("expected")?;
            let d = match (interval_bounds(&s), expected) {
                (None, None) => ExtReal::zero(),
                (Some((lo, hi)), Some((elo, ehi))) => distance(&[lo, hi], &[elo, ehi]),
                _ => ExtReal::PlusInf,
            };
            Ok(Outcome::distance(d))
        }
        "recession_closed_form" => {
            let f = inp.catalog("f")?;
            Ok(Outcome::pair(f.recession(inp.real("d")?), inp.ext("expected")?))
        }
        "lower_convex_hull" => {
            let g = inp.grid("grid")?;
            let hull = g.lower_convex_hull();
            let expected: Vec<(f64, f64)> = inp.typed("expected")?;
            let d = if expected.len() != hull.vertices.len() {
                ExtReal::PlusInf
            } else {
                let flat = |v: &[(f64, f64)]| v.iter().flat_map(|&(a, b)| [fin(a), fin(b)]).collect::<Vec<_>>();
                distance(&flat(&hull.vertices), &flat(&expected))
            };
            Ok(Outcome::distance(d))
        }
        "legendre_transform_grid" | "legendre_brute_force" => {
            let g = inp.grid("grid")?;
            let ys: Vec<f64> = inp.typed("ys")?;
            let got = if op == "legendre_transform_grid" {
                g.legendre_transform(&ys)
            } else {
                g.legendre_brute_force(&ys)
            };
            let want = match inp.typed_opt::<Vec<ExtReal<f64>>>("expected")? {
                Some(e) => e,
                None => g.legendre_brute_force(&ys),
            };
            Ok(Outcome::distance(distance(&got, &want)))
        }
        "biconjugate_grid" => {
            let g = inp.grid("grid")?;
            let got = g.biconjugate();
            let want = match inp.typed_opt::<Vec<ExtReal<f64>>>("expected")? {
                Some(e) => e,
                None => double_transform(&g),
            };
            Ok(Outcome::distance(distance(got.vs(), &want)))
        }
        "prox_grid" => {
            let g = inp.grid("grid")?;
            let gamma = inp.real("gamma")?;
            let x = inp.real("x")?;
            let r = g.prox(gamma, x)?;
            let (p, value) = match (inp.typed_opt::<f64>("expected_p")?, inp.typed_opt::<f64>("expected_value")?) {
                (Some(p), Some(v)) => (p, v),
                (None, None) => grid_prox_scan(&g, gamma, x),
                _ => return Err(fmt(Inputs::path("expected_value"), "expected_p and expected_value go together")),
            };
            Ok(Outcome::distance(distance(&[fin(r.p), fin(r.value)], &[fin(p), fin(value)])))
        }
        "moreau_envelope_grid" => {
            let g = inp.grid("grid")?;
            let gamma = inp.real("gamma")?;
            let xs: Vec<f64> = inp.typed("xs")?;
            let got = g.moreau_envelope(gamma, &xs)?;
            match inp.typed_opt::<Vec<f64>>("expected")? {
                // analytic values of the sampled function: off by at most the sampling step
                Some(e) => {
                    let h = max_spacing(g.xs());
                    Ok(Outcome::distance(distance(&finite_vec(&got), &finite_vec(&e))).within(h))
                }
                None => {
                    let want: Vec<f64> = xs.iter().map(|&x| grid_prox_scan(&g, gamma, x).1).collect();
                    Ok(Outcome::distance(distance(&finite_vec(&got), &finite_vec(&want))))
                }
            }
        }
        "recession_grid" => {
            let g = inp.grid("grid")?;
            Ok(Outcome::pair(g.recession(inp.real("d")?), inp.ext("expected")?))
        }
        "build_caratheodory" => {
            let space = inp.space()?;
            let sections: Vec<Value> = inp.typed("sections")?;
            let sections = sections
                .iter()
                .enumerate()
                .map(|(i, s)| io::section_from_json(s, &format!("inputs.sections[{i}]")))
                .collect::<Result<Vec<Section<f64>>>>()?;
            let accepted = Integrand::build_caratheodory(space, sections).is_ok();
            Ok(Outcome::pair(flag(accepted), inp.expected_flag()?))
        }
        "epigraph_dense_sample" => {
            let phi = inp.integrand()?;
            let budget: usize = inp.typed("budget")?;
            let sample = phi.epigraph_dense_sample(budget)?;
            let mut infeasible = 0usize;
            for (atom, seq) in sample.pairs.iter().enumerate() {
                infeasible += seq.iter().filter(|&&(x, r)| phi.eval_at(atom, &[x]) > fin(r)).count();
            }
            if sample.budget() != budget {
                return Err(Error::Convergence(format!("sampler emitted {} pairs for budget {budget}", sample.budget())));
            }
            Ok(Outcome::pair(fin(infeasible as f64), ExtReal::zero()))
        }
        "verify_normality_inf" => {
            let phi = inp.integrand()?;
            let budget: usize = inp.typed("budget")?;
            let tol = inp.real("tol")?;
            let sample = phi.epigraph_dense_sample(budget)?;
            let reports = phi.verify_normality_inf(&sample, tol)?;
            Ok(Outcome::pair(flag(reports.iter().all(|r| r.pass)), inp.expected_flag()?))
        }
        "pointwise_inf" => {
            let phi = inp.integrand()?;
            let r = phi.pointwise_inf()?;
            Ok(Outcome::distance(distance(&r.values, &inp.expected_vec()?)))
        }
        "evaluate" => {
            let f = IntegralFunctional::new(inp.integrand()?);
            Ok(Outcome::pair(f.evaluate(&inp.function("x")?)?, inp.ext("expected")?))
        }
        "interchange_inf" | "interchange_sup" => {
            let f = IntegralFunctional::new(inp.integrand()?);
            let spec = inp.subspace()?;
            let search = LineSearch::default();
            let r = if op == "interchange_inf" {
                f.interchange_inf(&spec, &search)?
            } else {
                f.interchange_sup(&spec, &search)?
            };
            match inp.typed_opt::<ExtReal<f64>>("expected_gap")? {
                Some(g) => Ok(Outcome::pair(r.gap, g)),
                None => Ok(Outcome::pair(r.lhs, r.rhs)),
            }
        }
        "conjugate_functional" => {
            let f = inp.functional(false)?;
            let r = f.conjugate_functional(&inp.function("y")?)?;
            Ok(Outcome::pair(r.formula, inp.expected()?.unwrap_or(r.direct)))
        }
        "subdiff_check" => {
            let f = inp.functional(false)?;
            let tol = inp.typed_opt("tol")?.unwrap_or(1e-9);
            let r = f.subdiff_check(&inp.function("x")?, &inp.function("y")?, tol)?;
            let rhs = match inp.typed_opt::<bool>("expected")? {
                Some(b) => flag(b),
                None => flag(r.interval_member),
            };
            Ok(Outcome::pair(flag(r.member), rhs))
        }
        "prox_functional" => {
            let f = inp.functional(true)?;
            let gamma = inp.real("gamma")?;
            let x = inp.function("x")?;
            let p = f.prox_functional(gamma, &x)?;
            let got: Vec<f64> = p.values().concat();
            match inp.function_opt("expected")? {
                Some(e) => Ok(Outcome::distance(distance(&finite_vec(&got), &finite_vec(&e.values().concat())))),
                None => {
                    let bf = f.prox_brute_force(gamma, &x, &BruteForceConfig::default())?;
                    let d = distance(&finite_vec(&got), &finite_vec(&bf.p.values().concat()));
                    Ok(Outcome::distance(d).within(bf.step * (1.0 + 1e-9)))
                }
            }
        }
        "envelope_functional" => {
            let f = inp.functional(true)?;
            let r = f.envelope_functional(inp.real("gamma")?, &inp.function("x")?)?;
            Ok(Outcome::pair(fin(r.per_atom_sum), inp.expected()?.unwrap_or(r.prox_route)))
        }
        "recession_functional" => {
            let f = inp.functional(false)?;
            let z = match inp.function_opt("z")? {
                Some(z) => z,
                None => f.canonical_witness()?,
            };
            let r = f.recession_functional(&inp.function("d")?, &z)?;
            if !r.monotone {
                return Err(Error::Convergence("difference quotients are not nondecreasing".into()));
            }
            Ok(Outcome::pair(r.closed_form, inp.expected()?.unwrap_or(r.limit)))
        }
        "minimizer_pointwise_check" => {
            let f = IntegralFunctional::new(inp.integrand()?);
            let tol = inp.typed_opt("tol")?.unwrap_or(1e-9);
            let r = f.minimizer_pointwise_check(&inp.function("z")?, tol)?;
            Ok(Outcome::pair(flag(r.is_min), inp.expected_flag()?))
        }
        "is_member" => {
            let spec = inp.subspace()?;
            let x = inp.function("x")?;
            spec.validate(x.len())?;
            Ok(Outcome::pair(flag(spec.is_member(&x)), inp.expected_flag()?))
        }
        "compliance_check" => {
            let spec = inp.subspace()?;
            let m: usize = inp.typed("m")?;
            let probes: usize = inp.typed_opt("probes")?.unwrap_or(8);
            let r = compliance_check::<f64>(&spec, m, probes, inp.seed(seed)?)?;
            if let Some(c) = &r.counterexample {
                if c.replay(&spec) {
                    return Err(Error::Convergence("counterexample does not replay".into()));
                }
                if let Some(subset) = inp.typed_opt::<Vec<usize>>("expected_subset")? {
                    if subset != c.subset {
                        return Ok(Outcome::pair(ExtReal::PlusInf, ExtReal::zero()));
                    }
                }
            }
            Ok(Outcome::pair(flag(r.compliant), inp.expected_flag()?))
        }
        "decomposability_check" => {
            let spec = inp.subspace()?;
            let m: usize = inp.typed("m")?;
            let probes: usize = inp.typed_opt("probes")?.unwrap_or(8);
            let variant = match inp.typed_opt::<String>("variant")?.as_deref() {
                None | Some("rockafellar") => DecomposabilityVariant::Rockafellar,
                Some("valadier") => DecomposabilityVariant::Valadier,
                Some(other) => return Err(fmt(Inputs::path("variant"), format!("unknown variant {other:?}"))),
            };
            let r = decomposability_check::<f64>(&spec, m, variant, probes, inp.seed(seed)?)?;
            if !r.implication_holds {
                return Err(Error::Convergence("decomposable spec failed the compliance check".into()));
            }
            if let Some(c) = &r.counterexample {
                if c.replay(&spec) {
                    return Err(Error::Convergence("counterexample does not replay".into()));
                }
                if let Some(subset) = inp.typed_opt::<Vec<usize>>("expected_subset")? {
                    if subset != c.subset {
                        return Ok(Outcome::pair(ExtReal::PlusInf, ExtReal::zero()));
                    }
                }
            }
            Ok(Outcome::pair(flag(r.decomposable), inp.expected_flag()?))
        }
        "restricted_infimum" => {
            let phi = inp.integrand()?;
            let v = restricted_infimum(&phi, &inp.subspace()?, &LineSearch::default())?;
            Ok(Outcome::pair(v, inp.ext("expected")?))
        }
        other => Err(Error::InvalidParameter(format!("unknown operation {other:?}"))),
    }
}

fn interval_bounds(s: &SubdiffInterval<f64>) -> Option<(ExtReal<f64>, ExtReal<f64>)> {
    (!s.empty).then_some((s.lower, s.upper))
}

fn max_spacing(xs: &[f64]) -> f64 {
    xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// `(p, value)` by scanning every finite sample, earliest index on ties.
fn grid_prox_scan(g: &GridFunction<f64>, gamma: f64, x: f64) -> (f64, f64) {
    let mut best = (f64::NAN, f64::INFINITY);
    for (s, v) in g.finite_points() {
        let obj = v + (x - s) * (x - s) / (2.0 * gamma);
        if obj < best.1 {
            best = (s, obj);
        }
    }
    best
}

/// `f**` on the sample abscissae by two brute-force transforms. The dual
/// slopes are all chord slopes between finite samples plus one slope
/// beyond each end, which contains every breakpoint of `f*`.
fn double_transform(g: &GridFunction<f64>) -> Vec<ExtReal<f64>> {
    let pts: Vec<(f64, f64)> = g.finite_points().collect();
    let mut ys = Vec::new();
    for (i, &(xi, vi)) in pts.iter().enumerate() {
        for &(xj, vj) in &pts[i + 1..] {
            ys.push((vj - vi) / (xj - xi));
        }
    }
    let lo = ys.iter().copied().fold(0.0, f64::min) - 1.0;
    let hi = ys.iter().copied().fold(0.0, f64::max) + 1.0;
    ys.push(lo);
    ys.push(hi);
    let conj = g.legendre_brute_force(&ys);
    let (first, last) = (pts[0].0, pts[pts.len() - 1].0);
    g.xs()
        .iter()
        .map(|&x| {
            if x < first || x > last {
                return ExtReal::PlusInf;
            }
            ys.iter()
                .zip(&conj)
                .map(|(&y, c)| match c {
                    ExtReal::Finite(c) => fin(x * y - c),
                    _ => ExtReal::MinusInf,
                })
                .fold(ExtReal::MinusInf, ExtReal::max)
        })
        .collect()
}
