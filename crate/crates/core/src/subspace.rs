//! Function subspaces over the atoms, truncation compliance, and the
//! infimum of the integral functional restricted to a subspace.
//!
//! On a finite space every finite-valued `z` has a bounded image, so the
//! compactness requirement on `z(A)` reduces to finiteness and the
//! checkers only probe finite values. A "compliant" verdict is evidence
//! from an exhaustive enumeration of subsets against a finite probe set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::Domain;
use crate::error::{capability, invalid, Error, Result};
use crate::ext_real::ExtReal;
use crate::functional::{negligible, FunctionOnOmega};
use crate::integrand::{sum_values, Integrand, ScalarSection, Section};
use crate::scalar::{compensated_sum, pow2, Scalar};
use crate::solve::golden_section_min;

/// Largest number of atoms for exhaustive subset enumeration.
pub const MAX_ENUMERATED_ATOMS: usize = 20;

/// Half-width of the interval for random probes.
pub const DEFAULT_PROBE_BOUND: f64 = 10.0;

/// Number of seeded random probes used by default.
pub const DEFAULT_RANDOM_PROBES: usize = 32;

/// Atom indices are 0-based. The JSON form is tagged by `kind`, e.g.
/// `{"kind": "zero_outside", "set": [0, 2]}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum SubspaceSpec {
    #[serde(rename = "full")]
    FullSpace,
    #[serde(rename = "constants")]
    Constants,
    /// Constant on each cell of a partition of the atoms.
    #[serde(rename = "piecewise_constant")]
    PiecewiseConstant { cells: Vec<Vec<usize>> },
    /// Zero at every atom outside `set`.
    #[serde(rename = "zero_outside")]
    ZeroOutsideSet { set: Vec<usize> },
    /// Sup-norm ball of radius `bound`; not a subspace (negative control).
    #[serde(rename = "bounded_by")]
    BoundedBy { bound: f64 },
}

impl SubspaceSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            SubspaceSpec::FullSpace => "full",
            SubspaceSpec::Constants => "constants",
            SubspaceSpec::PiecewiseConstant { .. } => "piecewise_constant",
            SubspaceSpec::ZeroOutsideSet { .. } => "zero_outside",
            SubspaceSpec::BoundedBy { .. } => "bounded_by",
        }
    }

    /// Checks that indices fit `m` atoms and cells partition them.
    pub fn validate(&self, m: usize) -> Result<()> {
        match self {
            SubspaceSpec::PiecewiseConstant { cells } => {
                let mut seen = vec![false; m];
                for cell in cells {
                    if cell.is_empty() {
                        return Err(invalid("partition cells must be nonempty"));
                    }
                    for &i in cell {
                        if i >= m {
                            return Err(invalid(format!("cell index {i} out of range for {m} atoms")));
                        }
                        if std::mem::replace(&mut seen[i], true) {
                            return Err(invalid(format!("atom {i} appears in two cells")));
                        }
                    }
                }
                if let Some(i) = seen.iter().position(|s| !s) {
                    return Err(invalid(format!("atom {i} is in no cell")));
                }
            }
            SubspaceSpec::ZeroOutsideSet { set } => {
                if let Some(&i) = set.iter().find(|&&i| i >= m) {
                    return Err(invalid(format!("set index {i} out of range for {m} atoms")));
                }
            }
            SubspaceSpec::BoundedBy { bound } => {
                if !(*bound > 0.0 && bound.is_finite()) {
                    return Err(invalid(format!("bound must be positive and finite, got {bound}")));
                }
            }
            SubspaceSpec::FullSpace | SubspaceSpec::Constants => {}
        }
        Ok(())
    }

    /// Every kind except `BoundedBy` is a vector subspace.
    pub fn is_vector_subspace(&self) -> bool {
        !matches!(self, SubspaceSpec::BoundedBy { .. })
    }

    pub fn is_member<F: Scalar>(&self, x: &FunctionOnOmega<F>) -> bool {
        member(self, x.values())
    }
}

fn member<F: Scalar>(spec: &SubspaceSpec, x: &[Vec<F>]) -> bool {
    match spec {
        SubspaceSpec::FullSpace => true,
        SubspaceSpec::Constants => x.windows(2).all(|w| w[0] == w[1]),
        SubspaceSpec::PiecewiseConstant { cells } => cells.iter().all(|cell| cell.windows(2).all(|w| x[w[0]] == x[w[1]])),
        SubspaceSpec::ZeroOutsideSet { set } => x
            .iter()
            .enumerate()
            .all(|(i, v)| set.contains(&i) || v.iter().all(|c| *c == F::zero())),
        SubspaceSpec::BoundedBy { bound } => x.iter().flatten().all(|c| c.abs().as_f64() <= *bound),
    }
}

/// A subset `A` and probe `z` with `1_A z` outside the subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample<F> {
    pub subset: Vec<usize>,
    pub probe_index: usize,
    pub z: FunctionOnOmega<F>,
    /// For decomposability: the member glued on the complement.
    pub x: Option<FunctionOnOmega<F>>,
    /// `1_A z` (plus `1_{∁A} x` for decomposability), not a member.
    pub glued: FunctionOnOmega<F>,
}

impl<F: Scalar> Counterexample<F> {
    /// Re-evaluates membership of the glued function; `false` for a genuine counterexample.
    pub fn replay(&self, spec: &SubspaceSpec) -> bool {
        let m = self.z.len();
        let mask = self.subset.iter().fold(0u64, |acc, &i| acc | (1 << i));
        let zero = vec![F::zero(); m];
        let x = self.x.as_ref().map_or(zero, FunctionOnOmega::first_coordinates);
        spec.is_member(&FunctionOnOmega::scalar(glue(mask, &self.z.first_coordinates(), &x)).expect("finite values"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplianceReport<F> {
    pub compliant: bool,
    pub counterexample: Option<Counterexample<F>>,
    /// Number of subsets `A` enumerated (`2^m`).
    pub subsets: u64,
    /// Number of probe functions `z`.
    pub probes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecomposabilityVariant {
    Rockafellar,
    Valadier,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposabilityReport<F> {
    pub variant: DecomposabilityVariant,
    pub decomposable: bool,
    pub counterexample: Option<Counterexample<F>>,
    pub compliant: bool,
    /// `decomposable ⇒ compliant` held on this spec.
    pub implication_holds: bool,
    pub subsets: u64,
    pub probes: usize,
    pub members: usize,
}

/// Probe functions: basis vectors, all-ones, the ramp `(1, ..., m)`, then
/// `random` seeded uniform draws in `[-bound, bound]`.
pub fn probe_set<F: Scalar>(m: usize, random: usize, bound: f64, seed: u64) -> Vec<Vec<F>> {
    let mut probes = Vec::with_capacity(m + 2 + random);
    for i in 0..m {
        let mut e = vec![F::zero(); m];
        e[i] = F::one();
        probes.push(e);
    }
    probes.push(vec![F::one(); m]);
    probes.push((1..=m).map(|i| F::lit(i as f64)).collect());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random {
        probes.push((0..m).map(|_| F::lit(rng.gen_range(-bound..=bound))).collect());
    }
    probes
}

/// `1_A z + 1_{∁A} x` for the subset encoded by `mask`.
fn glue<F: Scalar>(mask: u64, z: &[F], x: &[F]) -> Vec<F> {
    (0..z.len()).map(|i| if mask >> i & 1 == 1 { z[i] } else { x[i] }).collect()
}

fn subset_of(mask: u64, m: usize) -> Vec<usize> {
    (0..m).filter(|i| mask >> i & 1 == 1).collect()
}

fn enumeration_guard(m: usize) -> Result<()> {
    if m > MAX_ENUMERATED_ATOMS {
        return Err(Error::Capacity(format!(
            "{m} atoms exceed the exhaustive enumeration limit of {MAX_ENUMERATED_ATOMS}; sample subsets instead"
        )));
    }
    Ok(())
}

/// First `(mask, probe, member)` triple in lexicographic order whose glued
/// function is not in the subspace.
fn first_failure<F: Scalar>(spec: &SubspaceSpec, m: usize, probes: &[Vec<F>], members: &[Vec<F>]) -> Option<(u64, usize, usize)> {
    (0..1u64 << m).into_par_iter().find_map_first(|mask| {
        probes.iter().enumerate().find_map(|(pi, z)| {
            members.iter().enumerate().find_map(|(xi, x)| {
                let glued = glue(mask, z, x);
                let as_points: Vec<Vec<F>> = glued.into_iter().map(|v| vec![v]).collect();
                (!member(spec, &as_points)).then_some((mask, pi, xi))
            })
        })
    })
}

/// Truncation test `1_A z ∈ 𝒳` for every subset `A` and every probe `z`.
pub fn compliance_check<F: Scalar>(spec: &SubspaceSpec, m: usize, probes: usize, seed: u64) -> Result<ComplianceReport<F>> {
    enumeration_guard(m)?;
    spec.validate(m)?;
    let zs = probe_set::<F>(m, probes, DEFAULT_PROBE_BOUND, seed);
    let zero = vec![F::zero(); m];
    let failure = first_failure(spec, m, &zs, std::slice::from_ref(&zero));
    let counterexample = failure.map(|(mask, pi, _)| Counterexample {
        subset: subset_of(mask, m),
        probe_index: pi,
        z: FunctionOnOmega::scalar(zs[pi].clone()).expect("finite probe"),
        x: None,
        glued: FunctionOnOmega::scalar(glue(mask, &zs[pi], &zero)).expect("finite probe"),
    });
    Ok(ComplianceReport {
        compliant: counterexample.is_none(),
        counterexample,
        subsets: 1 << m,
        probes: zs.len(),
    })
}

/// A member of the subspace built from seeded randomness.
fn sample_member<F: Scalar>(spec: &SubspaceSpec, m: usize, rng: &mut ChaCha8Rng) -> Vec<F> {
    let mut draw = || F::lit(rng.gen_range(-DEFAULT_PROBE_BOUND..=DEFAULT_PROBE_BOUND));
    match spec {
        SubspaceSpec::FullSpace => (0..m).map(|_| draw()).collect(),
        SubspaceSpec::Constants => vec![draw(); m],
        SubspaceSpec::PiecewiseConstant { cells } => {
            let mut x = vec![F::zero(); m];
            for cell in cells {
                let v = draw();
                for &i in cell {
                    x[i] = v;
                }
            }
            x
        }
        SubspaceSpec::ZeroOutsideSet { set } => (0..m).map(|i| if set.contains(&i) { draw() } else { F::zero() }).collect(),
        SubspaceSpec::BoundedBy { bound } => {
            let scale = F::lit(bound / DEFAULT_PROBE_BOUND);
            (0..m).map(|_| draw() * scale).collect()
        }
    }
}

/// Gluing test `1_A z + 1_{∁A} x ∈ 𝒳` over every subset, every probe `z`
/// and members `x` (zero, the probes that are members, two sampled
/// members). Both variants coincide on a finite space, where every
/// bounded `z` has relatively compact image.
pub fn decomposability_check<F: Scalar>(
    spec: &SubspaceSpec,
    m: usize,
    variant: DecomposabilityVariant,
    probes: usize,
    seed: u64,
) -> Result<DecomposabilityReport<F>> {
    enumeration_guard(m)?;
    spec.validate(m)?;
    let zs = probe_set::<F>(m, probes, DEFAULT_PROBE_BOUND, seed);
    let as_points = |v: &Vec<F>| -> Vec<Vec<F>> { v.iter().map(|&c| vec![c]).collect() };
    let mut members = vec![vec![F::zero(); m]];
    members.extend(zs.iter().filter(|z| member(spec, &as_points(z))).cloned());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_d3c0);
    for _ in 0..2 {
        members.push(sample_member(spec, m, &mut rng));
    }
    let failure = first_failure(spec, m, &zs, &members);
    let counterexample = failure.map(|(mask, pi, xi)| Counterexample {
        subset: subset_of(mask, m),
        probe_index: pi,
        z: FunctionOnOmega::scalar(zs[pi].clone()).expect("finite probe"),
        x: Some(FunctionOnOmega::scalar(members[xi].clone()).expect("finite member")),
        glued: FunctionOnOmega::scalar(glue(mask, &zs[pi], &members[xi])).expect("finite probe"),
    });
    let decomposable = counterexample.is_none();
    let compliant = compliance_check::<F>(spec, m, probes, seed)?.compliant;
    Ok(DecomposabilityReport {
        variant,
        decomposable,
        counterexample,
        compliant,
        implication_holds: !decomposable || compliant,
        subsets: 1 << m,
        probes: zs.len(),
        members: members.len(),
    })
}

/// Settings of the scalar line search used for constant functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch {
    /// Uniform scan points before golden-section refinement.
    pub grid_points: usize,
}

impl Default for LineSearch {
    fn default() -> Self {
        LineSearch { grid_points: 64 }
    }
}

const SEQUENCE_STEPS: i32 = 60;

/// Limit of a section along its minimizing sequence; the section value at
/// the minimizer when it exists.
pub fn section_min_value<F: Scalar>(s: &ScalarSection<F>) -> ExtReal<F> {
    if let Some(x) = s.argmin() {
        return s.eval(x);
    }
    if s.infimum().is_minus_inf() {
        return ExtReal::MinusInf;
    }
    let mut best = ExtReal::PlusInf;
    for k in 0..=SEQUENCE_STEPS {
        let Some(x) = s.minimizing_point(k) else { break };
        let v = s.eval(x);
        if v >= best {
            break;
        }
        best = v;
    }
    best
}

fn atom_min_value<F: Scalar>(s: &Section<F>) -> ExtReal<F> {
    sum_values(s.components().iter().map(section_min_value))
}

/// `inf_{x ∈ 𝒳} I_φ(x)` by the subspace's own minimizer: pointwise
/// minimization for the full space and on the free atoms of
/// `ZeroOutsideSet`, a scalar line search for constants (per cell for
/// piecewise constants).
pub fn restricted_infimum<F: Scalar>(phi: &Integrand<F>, spec: &SubspaceSpec, search: &LineSearch) -> Result<ExtReal<F>> {
    if phi.is_negated() {
        return Err(capability("restricted infimum of a negated integrand"));
    }
    let m = phi.len();
    spec.validate(m)?;
    let space = phi.space();
    match spec {
        SubspaceSpec::FullSpace => {
            let vals: Vec<_> = phi.sections().iter().map(atom_min_value).collect();
            space.integrate(&vals)
        }
        SubspaceSpec::Constants => Ok(constant_min(phi, &(0..m).collect::<Vec<_>>(), search)),
        SubspaceSpec::PiecewiseConstant { cells } => {
            let parts: Vec<_> = cells.iter().map(|cell| constant_min(phi, cell, search)).collect();
            if parts.iter().any(ExtReal::is_plus_inf) {
                return Ok(ExtReal::PlusInf);
            }
            Ok(sum_values(parts))
        }
        SubspaceSpec::ZeroOutsideSet { set } => {
            let dim = phi.dim();
            let vals: Vec<_> = (0..m)
                .map(|i| {
                    if set.contains(&i) {
                        atom_min_value(phi.section(i))
                    } else {
                        phi.eval_at(i, &vec![F::zero(); dim])
                    }
                })
                .collect();
            space.integrate(&vals)
        }
        SubspaceSpec::BoundedBy { .. } => Err(capability("no dedicated minimizer for the bounded_by set")),
    }
}

/// `min_c Σ_{i ∈ atoms} μ_i φ_i(c, ..., c)`; separable, so each coordinate is searched on its own.
fn constant_min<F: Scalar>(phi: &Integrand<F>, atoms: &[usize], search: &LineSearch) -> ExtReal<F> {
    let parts: Vec<_> = (0..phi.dim())
        .map(|k| {
            let terms: Vec<(F, &ScalarSection<F>)> = atoms
                .iter()
                .map(|&i| (phi.space().weight(i), &phi.section(i).components()[k]))
                .collect();
            line_min(&terms, search)
        })
        .collect();
    if parts.iter().any(ExtReal::is_plus_inf) {
        return ExtReal::PlusInf;
    }
    sum_values(parts)
}

fn weighted_sum<F: Scalar>(terms: &[(F, &ScalarSection<F>)], c: F) -> ExtReal<F> {
    let vals: Vec<_> = terms.iter().map(|(w, s)| s.eval(c).scale(*w)).collect();
    if vals.iter().any(ExtReal::is_plus_inf) {
        return ExtReal::PlusInf;
    }
    if vals.iter().any(ExtReal::is_minus_inf) {
        return ExtReal::MinusInf;
    }
    ExtReal::from_float(compensated_sum(vals.iter().map(|v| v.to_float())))
}

fn line_min<F: Scalar>(terms: &[(F, &ScalarSection<F>)], search: &LineSearch) -> ExtReal<F> {
    let h = |c: F| weighted_sum(terms, c);

    // grid sections are +inf off their samples: only common samples are candidates
    let grids: Vec<_> = terms
        .iter()
        .filter_map(|(_, s)| match s {
            ScalarSection::Grid(g) => Some(g),
            ScalarSection::Catalog(_) => None,
        })
        .collect();
    if let Some(first) = grids.first() {
        return first
            .finite_points()
            .map(|(x, _)| h(x))
            .fold(ExtReal::PlusInf, ExtReal::min);
    }

    let fns: Vec<_> = terms.iter().filter_map(|(_, s)| s.as_catalog()).collect();
    let dom = fns.iter().fold(Domain::<F>::real_line(), |d, f| d.intersect(&f.domain()));
    if dom.is_empty() {
        return ExtReal::PlusInf;
    }
    let argmins: Vec<Option<F>> = fns.iter().map(|f| f.argmin()).collect();
    let start = start_point(&dom, &argmins);

    let (a, b) = if argmins.iter().all(Option::is_some) {
        // the convex sum is nonincreasing left of every minimizer and
        // nondecreasing right of every minimizer
        let lo = argmins.iter().flatten().copied().fold(F::infinity(), F::min);
        let hi = argmins.iter().flatten().copied().fold(F::neg_infinity(), F::max);
        let (a, b) = (lo.max(dom.lo), hi.min(dom.hi));
        if a <= b {
            (a, b)
        } else {
            (dom.lo.max(lo.min(dom.hi)), dom.hi.min(hi.max(dom.lo)))
        }
    } else {
        match doubling_bracket(&h, &dom, start) {
            Ok(bracket) => bracket,
            Err(limit) => return limit,
        }
    };

    let n = search.grid_points.max(2);
    let step = (b - a) / F::lit((n - 1) as f64);
    let mut best = (start, h(start));
    let mut best_idx = None;
    for j in 0..n {
        let c = if j + 1 == n { b } else { a + step * F::lit(j as f64) };
        let v = h(c);
        if v < best.1 || (best_idx.is_none() && v <= best.1) {
            best = (c, v);
            best_idx = Some(j);
        }
    }
    for c in argmins.iter().flatten() {
        let v = h(*c);
        if v < best.1 {
            best = (*c, v);
        }
    }
    let (ga, gb) = match best_idx {
        Some(j) if step > F::zero() => {
            let ga = if j == 0 { a } else { a + step * F::lit((j - 1) as f64) };
            let gb = if j + 1 >= n { b } else { (a + step * F::lit((j + 1) as f64)).min(b) };
            (ga, gb)
        }
        _ => (a, b),
    };
    let (_, v) = golden_section_min(h, ga, gb, F::lit(4.0) * F::epsilon());
    best.1.min(v)
}

/// A point of the domain: the middle minimizer when some exist, else an interior point.
fn start_point<F: Scalar>(dom: &Domain<F>, argmins: &[Option<F>]) -> F {
    let mut known: Vec<F> = argmins.iter().flatten().copied().filter(|&x| dom.contains(x)).collect();
    if !known.is_empty() {
        known.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        return known[known.len() / 2];
    }
    match (dom.lo.is_finite(), dom.hi.is_finite()) {
        (true, true) => (dom.lo + dom.hi) * F::half(),
        (true, false) => dom.lo + F::one(),
        (false, true) => dom.hi - F::one(),
        (false, false) => F::zero(),
    }
}

/// Bracket of the minimizer of a convex `h` found by doubling away from
/// `start` on unbounded sides. `Err` carries the limit value when `h`
/// keeps decreasing along a ray (`-inf` if the last decrease is not small).
fn doubling_bracket<F: Scalar>(h: &impl Fn(F) -> ExtReal<F>, dom: &Domain<F>, start: F) -> std::result::Result<(F, F), ExtReal<F>> {
    let h0 = h(start);
    let mut ends = [dom.lo, dom.hi];
    for (end, dir) in ends.iter_mut().zip([-F::one(), F::one()]) {
        if end.is_finite() {
            continue;
        }
        let mut prev = h0;
        for k in 0..SEQUENCE_STEPS {
            let c = start + dir * pow2::<F>(k);
            let v = h(c);
            if v >= prev {
                *end = c;
                break;
            }
            if prev.gap_to(v) <= ExtReal::finite(negligible(v)) {
                return Err(v);
            }
            if k + 1 == SEQUENCE_STEPS {
                return Err(if prev.gap_to(v) > ExtReal::finite(F::lit(1e-6)) { ExtReal::MinusInf } else { v });
            }
            prev = v;
        }
    }
    Ok((ends[0], ends[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::ScalarConvexFunction as C;
    use crate::grid::GridFunction;
    use crate::measure::DiscreteMeasureSpace;

    fn x(v: &[f64]) -> FunctionOnOmega<f64> {
        FunctionOnOmega::scalar(v.to_vec()).unwrap()
    }

    fn sq(c: f64) -> C<f64> {
        C::quadratic(2.0, -2.0 * c, c * c).unwrap()
    }

    fn phi(weights: &[f64], sections: Vec<C<f64>>) -> Integrand<f64> {
        Integrand::from_catalog(DiscreteMeasureSpace::from_weights(weights.to_vec()).unwrap(), sections).unwrap()
    }

    #[test]
    fn membership_examples() {
        assert!(SubspaceSpec::Constants.is_member(&x(&[2.0, 2.0, 2.0])));
        assert!(!SubspaceSpec::Constants.is_member(&x(&[2.0, 3.0, 2.0])));
        assert!(SubspaceSpec::ZeroOutsideSet { set: vec![0] }.is_member(&x(&[5.0, 0.0])));
        let pc = SubspaceSpec::PiecewiseConstant { cells: vec![vec![0, 2], vec![1]] };
        assert!(pc.is_member(&x(&[1.0, 7.0, 1.0])));
        assert!(!pc.is_member(&x(&[1.0, 7.0, 2.0])));
    }

    #[test]
    fn compliance_examples() {
        assert!(compliance_check::<f64>(&SubspaceSpec::FullSpace, 3, 32, 1).unwrap().compliant);
        let r = compliance_check::<f64>(&SubspaceSpec::Constants, 2, 32, 1).unwrap();
        let ce = r.counterexample.unwrap();
        assert_eq!(ce.subset, vec![0]);
        assert_eq!(ce.glued, x(&[1.0, 0.0]));
        assert!(!ce.replay(&SubspaceSpec::Constants));
        for m in 1..=6 {
            let singletons = SubspaceSpec::PiecewiseConstant { cells: (0..m).map(|i| vec![i]).collect() };
            assert!(compliance_check::<f64>(&singletons, m, 8, 3).unwrap().compliant);
        }
        assert!(compliance_check::<f64>(&SubspaceSpec::ZeroOutsideSet { set: vec![1] }, 3, 8, 3).unwrap().counterexample.is_some());
        assert!(!compliance_check::<f64>(&SubspaceSpec::BoundedBy { bound: 1.0 }, 2, 8, 3).unwrap().compliant);
    }

    #[test]
    fn compliance_guards_size() {
        assert!(matches!(compliance_check::<f64>(&SubspaceSpec::FullSpace, 21, 1, 0), Err(Error::Capacity(_))));
    }

    #[test]
    fn decomposability_examples() {
        for variant in [DecomposabilityVariant::Rockafellar, DecomposabilityVariant::Valadier] {
            let r = decomposability_check::<f64>(&SubspaceSpec::FullSpace, 3, variant, 8, 2).unwrap();
            assert!(r.decomposable && r.compliant && r.implication_holds);
            let r = decomposability_check::<f64>(&SubspaceSpec::Constants, 2, variant, 8, 2).unwrap();
            assert!(!r.decomposable && r.implication_holds);
        }
        let r = decomposability_check::<f64>(&SubspaceSpec::ZeroOutsideSet { set: vec![0, 1] }, 3, DecomposabilityVariant::Rockafellar, 8, 2).unwrap();
        let ce = r.counterexample.unwrap();
        assert_eq!(ce.subset, vec![2]);
        assert_eq!(ce.z, x(&[0.0, 0.0, 1.0]));
        assert!(!ce.replay(&SubspaceSpec::ZeroOutsideSet { set: vec![0, 1] }));
    }

    #[test]
    fn counterexample_is_independent_of_thread_count() {
        let spec = SubspaceSpec::PiecewiseConstant { cells: vec![vec![0, 1, 2, 3], vec![4, 5]] };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        let a = one.install(|| compliance_check::<f64>(&spec, 6, 32, 9).unwrap());
        let b = many.install(|| compliance_check::<f64>(&spec, 6, 32, 9).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn restricted_infimum_examples() {
        let ls = LineSearch::default();
        let p = phi(&[1.0, 1.0], vec![sq(0.0), sq(1.0)]);
        assert_eq!(restricted_infimum(&p, &SubspaceSpec::FullSpace, &ls).unwrap(), ExtReal::zero());
        let c = restricted_infimum(&p, &SubspaceSpec::Constants, &ls).unwrap();
        assert!((c.to_float() - 0.5).abs() <= 1e-12, "{c}");
        let p = phi(&[1.0, 1.0], vec![sq(1.0), sq(1.0)]);
        assert_eq!(restricted_infimum(&p, &SubspaceSpec::ZeroOutsideSet { set: vec![0] }, &ls).unwrap(), ExtReal::finite(1.0));
        assert!(restricted_infimum(&p, &SubspaceSpec::BoundedBy { bound: 1.0 }, &ls).is_err());
    }

    #[test]
    fn restricted_infimum_handles_unattained_and_unbounded() {
        let ls = LineSearch::default();
        let p = phi(&[1.0, 2.0], vec![C::exponential(), C::exponential().plus(1.0).unwrap()]);
        assert_eq!(restricted_infimum(&p, &SubspaceSpec::FullSpace, &ls).unwrap(), ExtReal::finite(2.0));
        assert_eq!(restricted_infimum(&p, &SubspaceSpec::Constants, &ls).unwrap(), ExtReal::finite(2.0));
        let p = phi(&[1.0, 1.0], vec![C::affine(1.0, 0.0).unwrap(), C::abs(0.5).unwrap()]);
        assert_eq!(restricted_infimum(&p, &SubspaceSpec::FullSpace, &ls).unwrap(), ExtReal::MinusInf);
        assert_eq!(restricted_infimum(&p, &SubspaceSpec::Constants, &ls).unwrap(), ExtReal::MinusInf);
    }

    #[test]
    fn restricted_infimum_with_domains() {
        let ls = LineSearch::default();
        let p = phi(&[1.0, 1.0], vec![C::indicator(0.0, 1.0).unwrap(), sq(5.0)]);
        let c = restricted_infimum(&p, &SubspaceSpec::Constants, &ls).unwrap();
        assert_eq!(c, ExtReal::finite(16.0));
        let p = phi(&[1.0, 1.0], vec![C::indicator(0.0, 1.0).unwrap(), C::indicator(2.0, 3.0).unwrap()]);
        assert_eq!(restricted_infimum(&p, &SubspaceSpec::Constants, &ls).unwrap(), ExtReal::PlusInf);
        let p = phi(&[1.0, 1.0], vec![C::neg_log(), C::abs(1.0).unwrap().shifted(3.0).unwrap()]);
        // -ln c + |c - 3| decreases up to the kink at c = 3
        let c = restricted_infimum(&p, &SubspaceSpec::Constants, &ls).unwrap();
        assert!((c.to_float() + 3f64.ln()).abs() <= 1e-12, "{c}");
    }

    #[test]
    fn constants_with_grid_sections_use_common_samples() {
        let space = DiscreteMeasureSpace::uniform(2).unwrap();
        let g = GridFunction::sample_uniform(-1.0, 1.0, 9, |x| ExtReal::finite(x * x)).unwrap();
        let p = Integrand::new(space, vec![Section::from(g), Section::from(sq(0.5))]).unwrap();
        let v = restricted_infimum(&p, &SubspaceSpec::Constants, &LineSearch::default()).unwrap();
        // c ranges over multiples of 1/4; c = 1/4 gives 1/16 + 1/16
        assert_eq!(v, ExtReal::finite(0.125));
    }

    #[test]
    fn piecewise_constant_is_per_cell() {
        let ls = LineSearch::default();
        let p = phi(&[1.0, 1.0, 1.0], vec![sq(0.0), sq(1.0), sq(3.0)]);
        let spec = SubspaceSpec::PiecewiseConstant { cells: vec![vec![0, 1], vec![2]] };
        let v = restricted_infimum(&p, &spec, &ls).unwrap();
        assert!((v.to_float() - 0.5).abs() <= 1e-12);
    }
}
