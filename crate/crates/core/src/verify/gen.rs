//! Seeded generators of dyadic test data.
//!
//! Every parameter is a small multiple of a power of two, so sums and
//! products in the simple identities stay exact in `f64`.

use rand::Rng;

use crate::catalog::ScalarConvexFunction;
use crate::ext_real::ExtReal;
use crate::grid::GridFunction;
use crate::integrand::Integrand;
use crate::measure::DiscreteMeasureSpace;

/// `k / denom` with `k` uniform in `lo·denom ..= hi·denom`.
pub fn dyadic<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64, denom: f64) -> f64 {
    let k = rng.gen_range((lo * denom).round() as i64..=(hi * denom).round() as i64);
    k as f64 / denom
}

/// A nonzero dyadic in `[lo, hi]` (`lo > 0`).
pub fn positive_dyadic<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64, denom: f64) -> f64 {
    dyadic(rng, lo, hi, denom).max(lo)
}

/// Kinds finite on the whole line.
pub const FINITE_KINDS: &[&str] = &["quadratic", "abs", "affine", "exp", "power_even", "piecewise_affine", "power_conjugate"];

/// Every catalog kind.
pub const ALL_KINDS: &[&str] = &[
    "quadratic",
    "abs",
    "indicator",
    "affine",
    "exp",
    "neg_log",
    "power_even",
    "piecewise_affine",
    "entropy",
    "neg_log_conjugate",
    "power_conjugate",
];

pub fn catalog_of_kind<R: Rng + ?Sized>(rng: &mut R, kind: &str) -> ScalarConvexFunction<f64> {
    let f = match kind {
        "quadratic" => ScalarConvexFunction::quadratic(positive_dyadic(rng, 0.25, 4.0, 4.0), dyadic(rng, -2.0, 2.0, 4.0), dyadic(rng, -2.0, 2.0, 4.0)),
        "abs" => ScalarConvexFunction::abs(positive_dyadic(rng, 0.25, 3.0, 4.0)),
        "indicator" => {
            let lo = dyadic(rng, -2.0, 1.0, 4.0);
            ScalarConvexFunction::indicator(lo, lo + dyadic(rng, 0.0, 2.0, 4.0))
        }
        "affine" => ScalarConvexFunction::affine(dyadic(rng, -2.0, 2.0, 4.0), dyadic(rng, -2.0, 2.0, 4.0)),
        "exp" => Ok(ScalarConvexFunction::exponential()),
        "neg_log" => Ok(ScalarConvexFunction::neg_log()),
        "power_even" => ScalarConvexFunction::power_even(2 * rng.gen_range(1..=3), positive_dyadic(rng, 0.25, 2.0, 4.0)),
        "piecewise_affine" => {
            let lo = dyadic(rng, -2.0, 0.0, 4.0);
            ScalarConvexFunction::piecewise_affine(lo, lo + dyadic(rng, 0.0, 2.0, 4.0))
        }
        "entropy" => Ok(ScalarConvexFunction::entropy_like()),
        "neg_log_conjugate" => Ok(ScalarConvexFunction::neg_log_conjugate()),
        "power_conjugate" => ScalarConvexFunction::power_conjugate(2 * rng.gen_range(1..=2), positive_dyadic(rng, 0.25, 2.0, 4.0)),
        other => panic!("unknown catalog kind {other}"),
    };
    f.expect("generated parameters are valid")
}

/// Random shift, slope and offset applied to `f`.
pub fn transformed<R: Rng + ?Sized>(rng: &mut R, f: ScalarConvexFunction<f64>) -> ScalarConvexFunction<f64> {
    let shift = dyadic(rng, -2.0, 2.0, 4.0);
    let slope = dyadic(rng, -1.0, 1.0, 4.0);
    let offset = dyadic(rng, -2.0, 2.0, 4.0);
    f.with_transform(shift, slope, offset).expect("finite transform")
}

/// A random member of `kinds`, transformed with probability 1/2.
pub fn random_catalog_from<R: Rng + ?Sized>(rng: &mut R, kinds: &[&str]) -> ScalarConvexFunction<f64> {
    let kind = kinds[rng.gen_range(0..kinds.len())];
    let f = catalog_of_kind(rng, kind);
    if rng.gen_bool(0.5) {
        transformed(rng, f)
    } else {
        f
    }
}

pub fn random_catalog<R: Rng + ?Sized>(rng: &mut R) -> ScalarConvexFunction<f64> {
    random_catalog_from(rng, ALL_KINDS)
}

/// Weights `k / 4` in `[1/4, 4]`.
pub fn random_space<R: Rng + ?Sized>(rng: &mut R, m: usize) -> DiscreteMeasureSpace<f64> {
    DiscreteMeasureSpace::from_weights((0..m).map(|_| positive_dyadic(rng, 0.25, 4.0, 4.0)).collect()).expect("positive weights")
}

pub fn random_integrand<R: Rng + ?Sized>(rng: &mut R, m: usize, kinds: &[&str]) -> Integrand<f64> {
    let space = random_space(rng, m);
    let sections = (0..m).map(|_| random_catalog_from(rng, kinds)).collect();
    Integrand::from_catalog(space, sections).expect("matching sizes")
}

/// `n` strictly increasing dyadic abscissae with random dyadic values;
/// each value is `+inf` with probability `p_inf` (at least one stays finite).
pub fn random_grid<R: Rng + ?Sized>(rng: &mut R, n: usize, p_inf: f64) -> GridFunction<f64> {
    let mut x = dyadic(rng, -4.0, 0.0, 8.0);
    let mut xs = Vec::with_capacity(n);
    for _ in 0..n {
        xs.push(x);
        x += positive_dyadic(rng, 0.125, 1.0, 8.0);
    }
    let mut vs: Vec<ExtReal<f64>> = (0..n)
        .map(|_| if rng.gen_bool(p_inf) { ExtReal::PlusInf } else { ExtReal::finite(dyadic(rng, -4.0, 4.0, 8.0)) })
        .collect();
    if !vs.iter().any(ExtReal::is_finite) {
        vs[rng.gen_range(0..n)] = ExtReal::finite(dyadic(rng, -4.0, 4.0, 8.0));
    }
    GridFunction::new(xs, vs).expect("valid grid")
}
