//! Batch runner wiring every operation to an oracle, with tolerance
//! comparison and JSON-lines / CSV reports.
//!
//! A case names an operation and carries its operands as JSON. Running
//! it yields a left value (the algorithm) and a right value (the oracle
//! route declared by the case), which are then compared. Operations whose
//! result is a vector report the sup-distance as `lhs` against `rhs = 0`;
//! yes/no outcomes are encoded as `1` / `0`.

pub mod gen;
mod ops;
mod suite;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::io::{decode, SCHEMA_VERSION};

pub use ops::{run_op, Outcome, OPERATIONS};
pub use suite::{default_suite, DEFAULT_SEED};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-9, rel: 1e-6 }
    }
}

impl Tolerance {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs >= 0.0 && self.rel >= 0.0) {
            return Err(Error::InvalidParameter(format!("tolerances must be >= 0, got abs {} rel {}", self.abs, self.rel)));
        }
        Ok(())
    }
}

/// Which route produces the right-hand value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Oracle {
    ClosedForm,
    BruteForce,
    BothSides,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestCase {
    pub id: String,
    pub op: String,
    pub inputs: Value,
    pub oracle: Oracle,
    #[serde(default)]
    pub tolerance: Tolerance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub cases: Vec<TestCase>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl Manifest {
    pub fn new(seed: u64, cases: Vec<TestCase>) -> Self {
        Manifest {
            schema_version: SCHEMA_VERSION,
            seed,
            cases,
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let m: Manifest = decode(v, "manifest")?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "manifest.schema_version: unsupported version {}, expected {SCHEMA_VERSION}",
                m.schema_version
            )));
        }
        for (i, c) in m.cases.iter().enumerate() {
            c.tolerance
                .validate()
                .map_err(|e| Error::Format(format!("manifest.cases[{i}].tolerance: {e}")))?;
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub gap: ExtReal<f64>,
    pub pass: bool,
}

/// `gap = |lhs - rhs|`, zero for equal infinities and `+inf` when exactly
/// one side is infinite; `pass ⇔ gap <= abs + rel·max(|lhs|, |rhs|)`.
pub fn compare_with_tolerance(lhs: ExtReal<f64>, rhs: ExtReal<f64>, tol: Tolerance) -> Comparison {
    let gap = match lhs.gap_to(rhs) {
        ExtReal::Finite(g) => ExtReal::Finite(g.abs()),
        _ => ExtReal::PlusInf,
    };
    let pass = match (gap, lhs, rhs) {
        (ExtReal::Finite(g), ExtReal::Finite(a), ExtReal::Finite(b)) => g <= tol.abs + tol.rel * a.abs().max(b.abs()),
        (ExtReal::Finite(g), _, _) => g == 0.0,
        _ => false,
    };
    Comparison { gap, pass }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub id: String,
    pub op: String,
    pub lhs: Option<ExtReal<f64>>,
    pub rhs: Option<ExtReal<f64>>,
    pub gap: Option<ExtReal<f64>>,
    pub pass: bool,
    /// Tolerance actually applied (grid routes attach their own).
    pub tolerance: Tolerance,
    pub error: Option<String>,
    /// Wall time; kept out of the serialized record so reports stay reproducible.
    #[serde(skip)]
    pub runtime_ms: f64,
}

impl CaseRecord {
    /// Recomputes the pass flag from the recorded values.
    pub fn recheck(&self) -> bool {
        match (self.lhs, self.rhs, self.error.as_ref()) {
            (Some(l), Some(r), None) => compare_with_tolerance(l, r, self.tolerance).pass,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub seed: u64,
    pub cases: Vec<CaseRecord>,
    pub summary: Summary,
}

/// Runs one case; failures inside the operation become a case-level error.
pub fn run_case(case: &TestCase, seed: u64) -> CaseRecord {
    let start = Instant::now();
    let outcome = case.tolerance.validate().and_then(|_| run_op(&case.op, &case.inputs, seed));
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok(out) => {
            let tolerance = out.tolerance.unwrap_or(case.tolerance);
            let cmp = compare_with_tolerance(out.lhs, out.rhs, tolerance);
            CaseRecord {
                id: case.id.clone(),
                op: case.op.clone(),
                lhs: Some(out.lhs),
                rhs: Some(out.rhs),
                gap: Some(cmp.gap),
                pass: cmp.pass,
                tolerance,
                error: None,
                runtime_ms,
            }
        }
        Err(e) => CaseRecord {
            id: case.id.clone(),
            op: case.op.clone(),
            lhs: None,
            rhs: None,
            gap: None,
            pass: false,
            tolerance: case.tolerance,
            error: Some(e.to_string()),
            runtime_ms,
        },
    }
}

/// Runs every case on a pool of `parallelism` threads (`0` = all cores)
/// and orders the records by case id.
pub fn run_suite(manifest: &Manifest, parallelism: usize) -> Result<SuiteReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build a pool of {parallelism} threads: {e}")))?;
    let seed = manifest.seed;
    let mut cases: Vec<CaseRecord> = pool.install(|| manifest.cases.par_iter().map(|c| run_case(c, seed)).collect());
    cases.sort_by(|a, b| a.id.cmp(&b.id));
    let passed = cases.iter().filter(|c| c.pass).count();
    let errors = cases.iter().filter(|c| c.error.is_some()).count();
    Ok(SuiteReport {
        schema_version: SCHEMA_VERSION,
        seed,
        summary: Summary {
            total: cases.len(),
            passed,
            failed: cases.len() - passed - errors,
            errors,
        },
        cases,
    })
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.summary.passed == self.summary.total
    }

    /// One JSON object per case, then a summary object.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for c in &self.cases {
            out.push_str(&serde_json::to_string(c).expect("record serializes"));
            out.push('\n');
        }
        let summary = json!({ "schema_version": self.schema_version, "seed": self.seed, "summary": self.summary });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }

    /// `id,op,lhs,rhs,gap,pass,error` with empty cells for missing values.
    pub fn to_csv(&self) -> String {
        let cell = |v: Option<ExtReal<f64>>| v.map(|v| v.to_string()).unwrap_or_default();
        let mut out = String::from("id,op,lhs,rhs,gap,pass,error\n");
        for c in &self.cases {
            let err = c.error.as_deref().unwrap_or("").replace('"', "\"\"");
            out.push_str(&format!(
                "{},{},{},{},{},{},\"{}\"\n",
                c.id,
                c.op,
                cell(c.lhs),
                cell(c.rhs),
                cell(c.gap),
                c.pass,
                err
            ));
        }
        out
    }

    /// `(id, runtime_ms)` pairs, the side channel for timings.
    pub fn timings(&self) -> Vec<(String, f64)> {
        self.cases.iter().map(|c| (c.id.clone(), c.runtime_ms)).collect()
    }
}
