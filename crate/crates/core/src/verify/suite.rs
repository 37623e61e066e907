//! Built-in manifest: hand-computed spot values for every operation plus
//! seeded random cases checked against their brute-force or second route.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::gen::{dyadic, random_catalog_from, random_grid, random_integrand, ALL_KINDS, FINITE_KINDS};
use super::{Manifest, Oracle, TestCase, Tolerance};
use crate::io::{catalog_to_json, grid_to_json, integrand_to_json};

pub const DEFAULT_SEED: u64 = 20_240_917;

fn quad(a: f64, b: f64, c: f64) -> Value {
    json!({"kind": "quadratic", "params": [a, b, c]})
}

fn abs(w: f64) -> Value {
    json!({"kind": "abs", "params": [w]})
}

fn ind(lo: f64, hi: f64) -> Value {
    json!({"kind": "indicator", "params": [lo, hi]})
}

fn affine(s: f64, b: f64) -> Value {
    json!({"kind": "affine", "params": [s, b]})
}

fn integrand(weights: &[f64], sections: Vec<Value>) -> Value {
    json!({"space": {"weights": weights}, "sections": sections})
}

fn two_quadratics() -> Value {
    integrand(&[1.0, 1.0], vec![quad(2.0, 0.0, 0.0), quad(2.0, -2.0, 1.0)])
}

fn negated(mut v: Value) -> Value {
    v["negated"] = json!(true);
    v
}

struct Builder {
    cases: Vec<TestCase>,
}

impl Builder {
    fn push(&mut self, op: &str, oracle: Oracle, inputs: Value) {
        let id = format!("{:03}-{op}", self.cases.len() + 1);
        self.cases.push(TestCase {
            id,
            op: op.to_string(),
            inputs,
            oracle,
            tolerance: Tolerance::default(),
        });
    }

    fn closed(&mut self, op: &str, inputs: Value) {
        self.push(op, Oracle::ClosedForm, inputs)
    }

    fn brute(&mut self, op: &str, inputs: Value) {
        self.push(op, Oracle::BruteForce, inputs)
    }

    fn both(&mut self, op: &str, inputs: Value) {
        self.push(op, Oracle::BothSides, inputs)
    }
}

/// The default suite for `seed`; identical seeds give identical manifests.
pub fn default_suite(seed: u64) -> Manifest {
    let mut b = Builder { cases: Vec::new() };
    spot_values(&mut b);
    generated(&mut b, seed);
    Manifest::new(seed, b.cases)
}

fn spot_values(b: &mut Builder) {
    let w11 = json!({"weights": [1, 1]});
    b.closed("integrate", json!({"space": w11, "values": [2, 3], "expected": 5}));
    b.closed("integrate", json!({"space": w11, "values": ["inf", "-inf"], "expected": "inf"}));
    b.closed("integrate", json!({"space": {"weights": [0.5, 2]}, "values": [4, -1], "expected": 0}));
    b.closed("integrate_sup_convention", json!({"space": w11, "values": ["inf", "-inf"], "expected": "-inf"}));
    b.closed("integrate_sup_convention", json!({"space": {"weights": [2, 1]}, "values": [1, "inf"], "expected": "inf"}));
    b.closed(
        "essential_infimum",
        json!({"space": w11, "family": [[1, "inf"], ["inf", 1], [2, 2]], "expected": [1, 1]}),
    );
    b.closed(
        "partition_min",
        json!({"space": {"weights": [1, 1, 1]}, "family": [[4, 0, 7], [4, 2, 1], [5, -1, 1]],
               "expected": [4, -1, 1], "expected_cells": [[0], [2], [1]]}),
    );
    b.closed(
        "partition_min",
        json!({"space": w11, "family": [[1, 1], [1, 1]], "expected": [1, 1], "expected_cells": [[0, 1], []]}),
    );

    b.closed("eval", json!({"f": {"kind": "neg_log"}, "x": std::f64::consts::E, "expected": -1}));
    b.closed("eval", json!({"f": ind(-1.0, 1.0), "x": 3, "expected": "inf"}));
    b.closed("conjugate_closed_form", json!({"f": ind(0.0, 2.0), "y": 3, "expected": 6}));
    b.brute("conjugate_closed_form", json!({"f": quad(1.0, 0.0, 0.0), "y": 1.5}));
    b.brute("conjugate_closed_form", json!({"f": abs(1.0), "y": 2}));
    b.brute("conjugate_closed_form", json!({"f": {"kind": "exp"}, "y": 2}));
    b.closed("prox_closed_form", json!({"f": abs(1.0), "gamma": 1, "x": 3, "expected": 2}));
    b.closed("prox_closed_form", json!({"f": ind(-1.0, 1.0), "gamma": 5, "x": -7, "expected": -1}));
    b.closed("subdifferential_interval", json!({"f": abs(1.0), "x": 0, "expected": [-1, 1]}));
    b.closed("subdifferential_interval", json!({"f": ind(-1.0, 1.0), "x": 1, "expected": [0, "inf"]}));
    b.closed("recession_closed_form", json!({"f": abs(2.0), "d": -3, "expected": 6}));
    b.closed("recession_closed_form", json!({"f": affine(5.0, 7.0), "d": 2, "expected": 10}));
    b.closed("recession_closed_form", json!({"f": quad(1.0, 0.0, 0.0), "d": 1, "expected": "inf"}));

    b.closed(
        "lower_convex_hull",
        json!({"grid": {"xs": [-1, 0, 1], "vs": [0, 1, 0]}, "expected": [[-1, 0], [1, 0]]}),
    );
    b.closed(
        "lower_convex_hull",
        json!({"grid": {"xs": [0, 1, 2, 3], "vs": [0, 0.2, 1, 3]}, "expected": [[0, 0], [1, 0.2], [2, 1], [3, 3]]}),
    );
    let half_sq = json!({"xs": [-2, -1, 0, 1, 2], "vs": [2, 0.5, 0, 0.5, 2]});
    b.closed("legendre_transform_grid", json!({"grid": half_sq, "ys": [1], "expected": [0.5]}));
    b.closed(
        "legendre_transform_grid",
        json!({"grid": {"xs": [0, 1, 2], "vs": [0, 0, 0]}, "ys": [3], "expected": [6]}),
    );
    b.closed(
        "legendre_brute_force",
        json!({"grid": {"xs": [0, 1, 2], "vs": ["inf", 3, "inf"]}, "ys": [2, -1], "expected": [-1, -4]}),
    );
    b.closed(
        "biconjugate_grid",
        json!({"grid": {"xs": [-1, 0, 1], "vs": [0, 1, 0]}, "expected": [0, 0, 0]}),
    );
    b.closed(
        "biconjugate_grid",
        json!({"grid": {"xs": [-2, -1, 0, 1, 2], "vs": [2, 1, 0, 1, 2]}, "expected": [2, 1, 0, 1, 2]}),
    );
    let abs_grid = json!({"xs": [-3, -2, -1, 0, 1, 2, 3], "vs": [3, 2, 1, 0, 1, 2, 3]});
    b.closed("prox_grid", json!({"grid": abs_grid, "gamma": 1, "x": 3, "expected_p": 2, "expected_value": 2.5}));
    b.closed(
        "prox_grid",
        json!({"grid": {"xs": [-1, 0, 1], "vs": [0, 0, 0]}, "gamma": 2, "x": 5, "expected_p": 1, "expected_value": 4}),
    );
    b.closed(
        "moreau_envelope_grid",
        json!({"grid": {"sample_of": abs(1.0), "lo": -4, "hi": 4, "n": 8001}, "gamma": 1, "xs": [0.5, 3], "expected": [0.125, 2.5]}),
    );
    b.closed("recession_grid", json!({"grid": abs_grid, "d": 0, "expected": 0}));
    b.closed("recession_grid", json!({"grid": abs_grid, "d": -2, "expected": "inf"}));

    b.closed(
        "build_caratheodory",
        json!({"space": w11, "sections": [quad(2.0, 0.0, 0.0), quad(2.0, -2.0, 1.0)], "expected": true}),
    );
    b.closed("build_caratheodory", json!({"space": {"weights": [1]}, "sections": [ind(0.0, 1.0)], "expected": false}));
    b.closed("epigraph_dense_sample", json!({"integrand": integrand(&[1.0], vec![quad(1.0, 0.0, 0.0)]), "budget": 4}));
    b.closed("epigraph_dense_sample", json!({"integrand": integrand(&[1.0], vec![ind(0.0, 1.0)]), "budget": 64}));
    b.closed(
        "epigraph_dense_sample",
        json!({"integrand": integrand(&[1.0], vec![quad(1.0, 0.0, 0.0)]), "budget": 0, "expect_error": true}),
    );
    b.closed(
        "verify_normality_inf",
        json!({"integrand": integrand(&[1.0], vec![quad(1.0, 0.0, 0.0)]), "budget": 64, "tol": 1e-2, "expected": true}),
    );
    b.closed(
        "verify_normality_inf",
        json!({"integrand": integrand(&[1.0], vec![json!({"kind": "abs", "params": [1], "shift": 1.0 / 3.0})]),
               "budget": 8, "tol": 1e-3, "expected": false}),
    );
    b.closed(
        "pointwise_inf",
        json!({"integrand": integrand(&[1.0, 1.0], vec![json!({"kind": "abs", "params": [1], "offset": 1}), ind(2.0, 3.0)]),
               "expected": [1, 0]}),
    );
    b.closed(
        "pointwise_inf",
        json!({"integrand": integrand(&[1.0], vec![json!({"xs": [0, 1, 2], "vs": [3, 1, 2]})]), "expected": [1]}),
    );

    let two_abs = |w: &[f64]| integrand(w, vec![abs(1.0), abs(1.0)]);
    let two_half_sq = |w: &[f64]| integrand(w, vec![quad(1.0, 0.0, 0.0), quad(1.0, 0.0, 0.0)]);
    b.closed("evaluate", json!({"integrand": two_abs(&[2.0, 1.0]), "x": [1, -3], "expected": 5}));
    b.closed("evaluate", json!({"integrand": integrand(&[1.0], vec![ind(0.0, 1.0)]), "x": [2], "expected": "inf"}));
    b.both("interchange_inf", json!({"integrand": two_quadratics(), "subspace": {"kind": "full"}}));
    b.closed(
        "interchange_inf",
        json!({"integrand": two_quadratics(), "subspace": {"kind": "constants"}, "expected_gap": 0.5}),
    );
    b.both("interchange_sup", json!({"integrand": negated(two_quadratics()), "subspace": {"kind": "full"}}));
    b.closed(
        "interchange_sup",
        json!({"integrand": negated(two_quadratics()), "subspace": {"kind": "constants"}, "expected_gap": -0.5}),
    );
    b.closed("conjugate_functional", json!({"integrand": two_half_sq(&[1.0, 1.0]), "y": [1, 2], "expected": 2.5}));
    b.both("conjugate_functional", json!({"integrand": two_abs(&[1.0, 1.0]), "y": [0.5, 2]}));
    b.both("conjugate_functional", json!({"integrand": two_half_sq(&[3.0, 1.0]), "y": [1, 1]}));
    b.closed(
        "subdiff_check",
        json!({"integrand": two_half_sq(&[1.0, 1.0]), "x": [1, 2], "y": [1, 2], "expected": true}),
    );
    b.both("subdiff_check", json!({"integrand": two_abs(&[1.0, 1.0]), "x": [0, 0], "y": [0.3, -1]}));
    b.closed(
        "subdiff_check",
        json!({"integrand": two_abs(&[1.0, 1.0]), "x": [2, 0], "y": [0.5, 0], "expected": false}),
    );
    b.closed(
        "prox_functional",
        json!({"integrand": two_abs(&[1.0, 4.0]), "gamma": 1, "x": [3, -0.5], "expected": [2, 0]}),
    );
    b.closed(
        "prox_functional",
        json!({"integrand": two_half_sq(&[1.0, 1.0]), "gamma": 1, "x": [4, -2], "expected": [2, -1]}),
    );
    b.brute(
        "prox_functional",
        json!({"integrand": integrand(&[1.0, 1.0], vec![abs(1.0), ind(0.0, 1.0)]), "gamma": 2, "x": [-5, 7]}),
    );
    b.closed("envelope_functional", json!({"integrand": two_abs(&[1.0, 1.0]), "gamma": 1, "x": [0.5, 3], "expected": 2.625}));
    b.both("envelope_functional", json!({"integrand": two_abs(&[2.0, 1.0]), "gamma": 1, "x": [0.5, 3]}));
    b.closed("recession_functional", json!({"integrand": two_abs(&[1.0, 2.0]), "d": [1, -1], "expected": 3}));
    b.both(
        "recession_functional",
        json!({"integrand": integrand(&[1.0, 1.0], vec![affine(2.0, 0.0), affine(-1.0, 5.0)]), "d": [1, 1]}),
    );
    b.closed("recession_functional", json!({"integrand": two_half_sq(&[1.0, 1.0]), "d": [0, 1], "expected": "inf"}));
    b.closed("minimizer_pointwise_check", json!({"integrand": two_quadratics(), "z": [0, 1], "expected": true}));
    b.closed("minimizer_pointwise_check", json!({"integrand": two_quadratics(), "z": [0, 0], "expected": false}));

    b.closed("is_member", json!({"subspace": {"kind": "constants"}, "x": [2, 2, 2], "expected": true}));
    b.closed("is_member", json!({"subspace": {"kind": "constants"}, "x": [2, 3, 2], "expected": false}));
    b.closed("is_member", json!({"subspace": {"kind": "zero_outside", "set": [0]}, "x": [5, 0], "expected": true}));
    b.closed("compliance_check", json!({"subspace": {"kind": "full"}, "m": 3, "expected": true}));
    b.closed(
        "compliance_check",
        json!({"subspace": {"kind": "constants"}, "m": 2, "expected": false, "expected_subset": [0]}),
    );
    b.brute(
        "compliance_check",
        json!({"subspace": {"kind": "piecewise_constant", "cells": [[0], [1], [2], [3]]}, "m": 4, "expected": true}),
    );
    b.closed("decomposability_check", json!({"subspace": {"kind": "full"}, "m": 3, "variant": "valadier", "expected": true}));
    b.closed("decomposability_check", json!({"subspace": {"kind": "constants"}, "m": 2, "expected": false}));
    b.brute(
        "decomposability_check",
        json!({"subspace": {"kind": "zero_outside", "set": [0, 1]}, "m": 3, "expected": false, "expected_subset": [2]}),
    );
    b.closed("restricted_infimum", json!({"integrand": two_quadratics(), "subspace": {"kind": "full"}, "expected": 0}));
    b.closed("restricted_infimum", json!({"integrand": two_quadratics(), "subspace": {"kind": "constants"}, "expected": 0.5}));
    b.closed(
        "restricted_infimum",
        json!({"integrand": integrand(&[1.0, 1.0], vec![quad(2.0, -2.0, 1.0), quad(2.0, -2.0, 1.0)]),
               "subspace": {"kind": "zero_outside", "set": [0]}, "expected": 1}),
    );
}

fn dyadic_vec(rng: &mut ChaCha8Rng, m: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..m).map(|_| dyadic(rng, lo, hi, 4.0)).collect()
}

/// Kinds whose untilted members are bounded below.
const BOUNDED_BELOW_KINDS: &[&str] = &["quadratic", "abs", "indicator", "exp", "power_even", "piecewise_affine", "entropy", "power_conjugate"];

/// Seeded cases checked against their second route.
fn generated(b: &mut Builder, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..4 {
        let m = rng.gen_range(1..=4);
        let phi = random_integrand(&mut rng, m, BOUNDED_BELOW_KINDS);
        b.both("interchange_inf", json!({"integrand": integrand_to_json(&phi), "subspace": {"kind": "full"}}));
    }
    for _ in 0..4 {
        let m = rng.gen_range(1..=3);
        let phi = random_integrand(&mut rng, m, ALL_KINDS);
        let y = dyadic_vec(&mut rng, m, -2.0, 2.0);
        b.both("conjugate_functional", json!({"integrand": integrand_to_json(&phi), "y": y}));
    }
    let prox_kinds = &["quadratic", "abs", "indicator", "affine", "piecewise_affine"];
    for _ in 0..3 {
        let m = rng.gen_range(1..=2);
        let phi = random_integrand(&mut rng, m, prox_kinds);
        let x = dyadic_vec(&mut rng, m, -2.0, 2.0);
        b.brute("prox_functional", json!({"integrand": integrand_to_json(&phi), "gamma": 0.25, "x": x}));
    }
    for _ in 0..3 {
        let m = rng.gen_range(1..=4);
        let phi = random_integrand(&mut rng, m, FINITE_KINDS);
        let x = dyadic_vec(&mut rng, m, -2.0, 2.0);
        b.both("envelope_functional", json!({"integrand": integrand_to_json(&phi), "gamma": 0.5, "x": x}));
    }
    for _ in 0..2 {
        let m = rng.gen_range(1..=3);
        let phi = random_integrand(&mut rng, m, &["abs", "affine", "piecewise_affine"]);
        let d = dyadic_vec(&mut rng, m, -2.0, 2.0);
        b.both("recession_functional", json!({"integrand": integrand_to_json(&phi), "d": d}));
    }
    for _ in 0..2 {
        let g = random_grid(&mut rng, 12, 0.2);
        let ys = dyadic_vec(&mut rng, 6, -4.0, 4.0);
        b.brute("legendre_transform_grid", json!({"grid": grid_to_json(&g), "ys": ys}));
    }
    for _ in 0..2 {
        let g = random_grid(&mut rng, 10, 0.2);
        b.brute("biconjugate_grid", json!({"grid": grid_to_json(&g)}));
    }
    for _ in 0..2 {
        let g = random_grid(&mut rng, 10, 0.2);
        let x = dyadic(&mut rng, -3.0, 3.0, 4.0);
        b.brute("prox_grid", json!({"grid": grid_to_json(&g), "gamma": 0.5, "x": x}));
        let xs = dyadic_vec(&mut rng, 4, -3.0, 3.0);
        b.brute("moreau_envelope_grid", json!({"grid": grid_to_json(&g), "gamma": 0.5, "xs": xs}));
    }
    for _ in 0..2 {
        let f = random_catalog_from(&mut rng, ALL_KINDS);
        let y = dyadic(&mut rng, -2.0, 2.0, 4.0);
        b.brute("conjugate_closed_form", json!({"f": catalog_to_json(&f), "y": y}));
    }
}
