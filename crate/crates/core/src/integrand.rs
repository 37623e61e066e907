//! Atom-indexed families of sections `φ(ω, ·)` over a finite measure space.

use crate::catalog::{Domain, ScalarConvexFunction, SubdiffInterval};
use crate::error::{capability, check_len, invalid, precondition, Result};
use crate::ext_real::ExtReal;
use crate::grid::GridFunction;
use crate::measure::DiscreteMeasureSpace;
use crate::scalar::{pow2, Scalar};

/// One real coordinate of a section.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarSection<F> {
    Catalog(ScalarConvexFunction<F>),
    Grid(GridFunction<F>),
}

/// The section at one atom: scalar, or a separable sum over `N` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Section<F> {
    Scalar(ScalarSection<F>),
    Product(Vec<ScalarSection<F>>),
}

impl<F: Scalar> From<ScalarConvexFunction<F>> for ScalarSection<F> {
    fn from(f: ScalarConvexFunction<F>) -> Self {
        ScalarSection::Catalog(f)
    }
}

impl<F: Scalar> From<GridFunction<F>> for ScalarSection<F> {
    fn from(g: GridFunction<F>) -> Self {
        ScalarSection::Grid(g)
    }
}

impl<F: Scalar, T: Into<ScalarSection<F>>> From<T> for Section<F> {
    fn from(s: T) -> Self {
        Section::Scalar(s.into())
    }
}

/// Sum of values none of which is `-inf` unless all others are finite;
/// `+inf` wins.
pub(crate) fn sum_values<F: Scalar>(values: impl IntoIterator<Item = ExtReal<F>>) -> ExtReal<F> {
    let mut acc = ExtReal::zero();
    for v in values {
        if v.is_plus_inf() {
            return ExtReal::PlusInf;
        }
        acc = acc.try_add(v).expect("no +inf present");
    }
    acc
}

impl<F: Scalar> ScalarSection<F> {
    pub fn eval(&self, x: F) -> ExtReal<F> {
        match self {
            ScalarSection::Catalog(f) => f.eval(x),
            ScalarSection::Grid(g) => g.eval(x),
        }
    }

    pub fn is_catalog(&self) -> bool {
        matches!(self, ScalarSection::Catalog(_))
    }

    pub fn as_catalog(&self) -> Option<&ScalarConvexFunction<F>> {
        match self {
            ScalarSection::Catalog(f) => Some(f),
            ScalarSection::Grid(_) => None,
        }
    }

    pub fn is_finite_valued(&self) -> bool {
        match self {
            ScalarSection::Catalog(f) => f.is_finite_valued(),
            ScalarSection::Grid(g) => g.is_finite_valued(),
        }
    }

    pub fn infimum(&self) -> ExtReal<F> {
        match self {
            ScalarSection::Catalog(f) => f.infimum(),
            ScalarSection::Grid(g) => ExtReal::finite(g.min_value()),
        }
    }

    /// A minimizer, when the infimum is attained (earliest sample for grids).
    pub fn argmin(&self) -> Option<F> {
        match self {
            ScalarSection::Catalog(f) => f.argmin(),
            ScalarSection::Grid(g) => Some(g.xs()[g.argmin_index()]),
        }
    }

    /// The `k`-th point of a minimizing sequence: the minimizer when it
    /// exists, otherwise a point `2^k` away from the canonical base point in
    /// the descent direction given by a subgradient there.
    pub fn minimizing_point(&self, k: i32) -> Option<F> {
        if let Some(x) = self.argmin() {
            return Some(x);
        }
        let f = self.as_catalog()?;
        let z = f.canonical_point();
        let g = f.subdifferential(z);
        let step = pow2::<F>(k);
        if g.lower > ExtReal::zero() {
            Some(z - step)
        } else if g.upper < ExtReal::zero() {
            Some(z + step)
        } else {
            Some(z)
        }
    }

    pub fn conjugate_eval(&self, y: F) -> ExtReal<F> {
        match self {
            ScalarSection::Catalog(f) => f.conjugate().eval(y),
            ScalarSection::Grid(g) => g.legendre_transform(&[y])[0],
        }
    }

    pub fn prox(&self, gamma: F, x: F) -> Result<F> {
        match self {
            ScalarSection::Catalog(f) => f.prox(gamma, x),
            ScalarSection::Grid(g) => Ok(g.prox(gamma, x)?.p),
        }
    }

    pub fn envelope(&self, gamma: F, x: F) -> Result<F> {
        match self {
            ScalarSection::Catalog(f) => f.envelope(gamma, x),
            ScalarSection::Grid(g) => Ok(g.prox(gamma, x)?.value),
        }
    }

    pub fn recession(&self, d: F) -> ExtReal<F> {
        match self {
            ScalarSection::Catalog(f) => f.recession(d),
            ScalarSection::Grid(g) => g.recession(d),
        }
    }

    pub fn subdifferential(&self, x: F) -> Result<SubdiffInterval<F>> {
        match self {
            ScalarSection::Catalog(f) => Ok(f.subdifferential(x)),
            ScalarSection::Grid(_) => Err(capability("subdifferential of a grid section")),
        }
    }
}

impl<F: Scalar> Section<F> {
    pub fn components(&self) -> &[ScalarSection<F>] {
        match self {
            Section::Scalar(s) => std::slice::from_ref(s),
            Section::Product(parts) => parts,
        }
    }

    pub fn dim(&self) -> usize {
        self.components().len()
    }

    pub fn eval(&self, x: &[F]) -> ExtReal<F> {
        debug_assert_eq!(x.len(), self.dim());
        sum_values(self.components().iter().zip(x).map(|(s, &xi)| s.eval(xi)))
    }

    pub fn is_convex(&self) -> bool {
        self.components().iter().all(ScalarSection::is_catalog)
    }

    pub fn infimum(&self) -> ExtReal<F> {
        sum_values(self.components().iter().map(ScalarSection::infimum))
    }

    pub fn argmin(&self) -> Option<Vec<F>> {
        self.components().iter().map(ScalarSection::argmin).collect()
    }
}

/// `φ(ω, ·)` for every atom `ω`, optionally negated as a whole.
///
/// A negated integrand is the concave mirror `-φ` used by the supremum
/// convention; convex-analytic operations reject it.
#[derive(Debug, Clone, PartialEq)]
pub struct Integrand<F> {
    space: DiscreteMeasureSpace<F>,
    sections: Vec<Section<F>>,
    negated: bool,
    caratheodory: bool,
}

/// Per-atom infima with minimizers where attained.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseInf<F> {
    pub values: Vec<ExtReal<F>>,
    pub argmins: Vec<Option<Vec<F>>>,
}

/// Pairs `(x_n(ω), ϱ_n(ω))` in the epigraph of every section.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalitySample<F> {
    /// `pairs[ω][n]`.
    pub pairs: Vec<Vec<(F, F)>>,
}

impl<F: Scalar> NormalitySample<F> {
    pub fn budget(&self) -> usize {
        self.pairs.first().map_or(0, Vec::len)
    }

    /// The `n`-th pair as two functions on the atoms.
    pub fn pair(&self, n: usize) -> (Vec<F>, Vec<F>) {
        self.pairs.iter().map(|seq| seq[n]).unzip()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalityReport<F> {
    pub atom: usize,
    pub sampled_inf: ExtReal<F>,
    pub true_inf: ExtReal<F>,
    pub gap: ExtReal<F>,
    pub pass: bool,
}

impl<F: Scalar> Integrand<F> {
    pub fn new(space: DiscreteMeasureSpace<F>, sections: Vec<Section<F>>) -> Result<Self> {
        check_len("sections", space.len(), sections.len())?;
        let dim = sections[0].dim();
        if dim == 0 {
            return Err(invalid("a product section needs at least one coordinate"));
        }
        if let Some(i) = sections.iter().position(|s| s.dim() != dim) {
            return Err(invalid(format!("section {i} has dimension {} but section 0 has {dim}", sections[i].dim())));
        }
        Ok(Integrand {
            space,
            sections,
            negated: false,
            caratheodory: false,
        })
    }

    /// Scalar integrand from catalog members.
    pub fn from_catalog(space: DiscreteMeasureSpace<F>, sections: Vec<ScalarConvexFunction<F>>) -> Result<Self> {
        Self::new(space, sections.into_iter().map(Section::from).collect())
    }

    /// Integrand whose sections are finite everywhere and continuous
    /// (catalog members with full domain, or finite-valued grids).
    pub fn build_caratheodory(space: DiscreteMeasureSpace<F>, sections: Vec<Section<F>>) -> Result<Self> {
        for (i, s) in sections.iter().enumerate() {
            if !s.components().iter().all(ScalarSection::is_finite_valued) {
                return Err(capability(format!("section {i} is not finite-valued, so the integrand is not Carathéodory")));
            }
        }
        let mut out = Self::new(space, sections)?;
        out.caratheodory = true;
        Ok(out)
    }

    pub fn space(&self) -> &DiscreteMeasureSpace<F> {
        &self.space
    }

    pub fn sections(&self) -> &[Section<F>] {
        &self.sections
    }

    pub fn section(&self, atom: usize) -> &Section<F> {
        &self.sections[atom]
    }

    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.sections[0].dim()
    }

    pub fn is_negated(&self) -> bool {
        self.negated
    }

    pub fn is_caratheodory(&self) -> bool {
        self.caratheodory
    }

    /// Every section is a catalog member (and the integrand is not negated).
    pub fn convex_flag(&self) -> bool {
        !self.negated && self.sections.iter().all(Section::is_convex)
    }

    /// `-φ`.
    pub fn negated(&self) -> Self {
        Integrand {
            negated: !self.negated,
            ..self.clone()
        }
    }

    /// Same sections over another space with the same number of atoms.
    pub fn with_space(&self, space: DiscreteMeasureSpace<F>) -> Result<Self> {
        check_len("atoms", self.len(), space.len())?;
        Ok(Integrand {
            space,
            ..self.clone()
        })
    }

    /// Sub-integrand on a subset of atoms.
    pub fn restrict(&self, atoms: &[usize]) -> Result<Self> {
        Ok(Integrand {
            space: self.space.restrict(atoms)?,
            sections: atoms.iter().map(|&i| self.sections[i].clone()).collect(),
            negated: self.negated,
            caratheodory: self.caratheodory,
        })
    }

    /// `φ(ω_atom, x)` including the orientation.
    pub fn eval_at(&self, atom: usize, x: &[F]) -> ExtReal<F> {
        let v = self.sections[atom].eval(x);
        if self.negated {
            -v
        } else {
            v
        }
    }

    pub fn pointwise_inf(&self) -> Result<PointwiseInf<F>> {
        if self.negated {
            return Err(capability("pointwise infimum of a negated integrand"));
        }
        Ok(PointwiseInf {
            values: self.sections.iter().map(Section::infimum).collect(),
            argmins: self.sections.iter().map(Section::argmin).collect(),
        })
    }

    /// Dyadic enumeration of epigraph points, `budget` pairs per atom.
    ///
    /// Stage `t` uses abscissae `k / 2^j` with `|k/2^j| <= j`, `j = min(t, 40)`,
    /// restricted to the section's domain (closed finite endpoints are
    /// added up front), and offsets `q = l / 2^s`, `0 <= l <= s·2^s`,
    /// `s = floor(log2(t + 1))`. Each stage emits only pairs not emitted
    /// before, ordered by `|k|`, then sign, then `q`.
    pub fn epigraph_dense_sample(&self, budget: usize) -> Result<NormalitySample<F>> {
        if budget == 0 {
            return Err(precondition("a normality sample needs a positive budget"));
        }
        if self.negated {
            return Err(capability("epigraph sampling of a negated integrand"));
        }
        let pairs = self
            .sections
            .iter()
            .enumerate()
            .map(|(i, s)| match s {
                Section::Scalar(sec) => Ok(dyadic_epigraph(sec, budget)),
                Section::Product(_) => Err(capability(format!("epigraph sampler does not support the product section at atom {i}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(NormalitySample { pairs })
    }

    /// Compares the infimum of each section over the sampled abscissae
    /// with its true infimum.
    pub fn verify_normality_inf(&self, sample: &NormalitySample<F>, tol: F) -> Result<Vec<NormalityReport<F>>> {
        check_len("sample atoms", self.len(), sample.pairs.len())?;
        let truth = self.pointwise_inf()?;
        Ok(sample
            .pairs
            .iter()
            .enumerate()
            .map(|(atom, seq)| {
                let sampled_inf = seq
                    .iter()
                    .map(|&(x, _)| self.eval_at(atom, &[x]))
                    .fold(ExtReal::PlusInf, ExtReal::min);
                let true_inf = truth.values[atom];
                let gap = sampled_inf.gap_to(true_inf);
                NormalityReport {
                    atom,
                    sampled_inf,
                    true_inf,
                    gap,
                    pass: gap <= ExtReal::finite(tol),
                }
            })
            .collect())
    }
}

const MAX_X_LEVEL: i32 = 40;
const MAX_STAGE: u32 = 1 << 22;

fn offset_level(stage: u32) -> i32 {
    (32 - (stage + 1).leading_zeros() - 1) as i32
}

/// Number of offsets `l / 2^s` with `0 <= l <= s·2^s`.
fn offset_count(s: i32) -> i64 {
    (s as i64) * (1i64 << s) + 1
}

/// Appends `(x, φ(x) + l/2^s)` for the offsets of level `s` that are not
/// already in level `prev`. Returns `true` once the budget is reached.
fn emit_offsets<F: Scalar>(
    section: &ScalarSection<F>,
    x: F,
    prev: Option<i32>,
    s: i32,
    budget: usize,
    out: &mut Vec<(F, F)>,
) -> bool {
    if out.len() >= budget {
        return true;
    }
    if prev == Some(s) {
        return false;
    }
    let Some(v) = section.eval(x).as_finite() else {
        return false;
    };
    let scale = pow2::<F>(-s);
    for l in 0..offset_count(s) {
        let old = prev.is_some_and(|p| l % (1i64 << (s - p)) == 0 && l <= (p as i64) << s);
        if !old {
            out.push((x, v + F::lit(l as f64) * scale));
            if out.len() >= budget {
                return true;
            }
        }
    }
    false
}

fn dyadic_epigraph<F: Scalar>(section: &ScalarSection<F>, budget: usize) -> Vec<(F, F)> {
    let mut out = Vec::with_capacity(budget);
    match section {
        ScalarSection::Grid(g) => {
            let xs: Vec<F> = g.finite_points().map(|(x, _)| x).collect();
            let mut prev_s: Option<i32> = None;
            for stage in 0..MAX_STAGE {
                let s = offset_level(stage);
                if prev_s == Some(s) {
                    continue;
                }
                for &x in &xs {
                    if emit_offsets(section, x, prev_s, s, budget, &mut out) {
                        return out;
                    }
                }
                prev_s = Some(s);
            }
        }
        ScalarSection::Catalog(f) => {
            let dom = f.domain();
            let mut extras: Vec<F> = Vec::new();
            if dom.lo_closed && dom.lo.is_finite() {
                extras.push(dom.lo);
            }
            if dom.hi_closed && dom.hi.is_finite() && dom.hi != dom.lo {
                extras.push(dom.hi);
            }
            let mut prev: Option<(i32, i32)> = None;
            for stage in 0..MAX_STAGE {
                let j = (stage as i32).min(MAX_X_LEVEL);
                let s = offset_level(stage);
                if prev == Some((j, s)) {
                    continue;
                }
                let prev_s = prev.map(|p| p.1);
                for &x in &extras {
                    if emit_offsets(section, x, prev_s, s, budget, &mut out) {
                        return out;
                    }
                }
                for k in spiral(&dom, j) {
                    let x = F::lit(k as f64) * pow2::<F>(-j);
                    if extras.contains(&x) {
                        continue;
                    }
                    let old_x = prev.is_some_and(|(pj, _)| is_in_level(k, j, pj));
                    if old_x && prev_s == Some(s) {
                        continue;
                    }
                    if emit_offsets(section, x, if old_x { prev_s } else { None }, s, budget, &mut out) {
                        return out;
                    }
                }
                prev = Some((j, s));
            }
        }
    }
    out
}

/// `k / 2^j` belongs to the abscissa set of level `pj <= j`.
fn is_in_level(k: i64, j: i32, pj: i32) -> bool {
    let step = 1i64 << (j - pj);
    k % step == 0 && k.abs() <= (pj as i64) << j
}

/// Integers `k` with `k / 2^j` in the domain and `|k / 2^j| <= j`, ordered by
/// `|k|` then positive before negative.
fn spiral<F: Scalar>(dom: &Domain<F>, j: i32) -> impl Iterator<Item = i64> + '_ {
    let scale = (1i64 << j) as f64;
    let radius = j as f64;
    let lo = dom.lo.as_f64().max(-radius);
    let hi = dom.hi.as_f64().min(radius);
    let (k_lo, k_hi) = if lo > hi {
        (1, 0)
    } else {
        ((lo * scale).ceil() as i64, (hi * scale).floor() as i64)
    };
    let a_min = if k_lo <= 0 && 0 <= k_hi { 0 } else { k_lo.abs().min(k_hi.abs()) };
    let a_max = if k_lo > k_hi { -1 } else { k_lo.abs().max(k_hi.abs()) };
    (a_min..=a_max)
        .flat_map(move |a| {
            let pos = (a >= k_lo && a <= k_hi).then_some(a);
            let neg = (a > 0 && -a >= k_lo && -a <= k_hi).then_some(-a);
            pos.into_iter().chain(neg)
        })
        .filter(move |&k| dom.contains(F::lit(k as f64 / scale)))
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = ScalarConvexFunction<f64>;

    fn uniform(m: usize) -> DiscreteMeasureSpace<f64> {
        DiscreteMeasureSpace::uniform(m).unwrap()
    }

    #[test]
    fn caratheodory_examples() {
        let sq = |c: f64| C::quadratic(2.0, -2.0 * c, c * c).unwrap();
        assert!(Integrand::build_caratheodory(uniform(2), vec![sq(0.0).into(), sq(1.0).into()]).is_ok());
        let ind = vec![C::indicator(0.0, 1.0).unwrap().into()];
        assert!(Integrand::build_caratheodory(uniform(1), ind.clone()).is_err());
        assert!(Integrand::new(uniform(1), ind).is_ok());
        let abs = (1..=3).map(|w| C::abs(w as f64).unwrap().into()).collect();
        assert!(Integrand::build_caratheodory(uniform(3), abs).unwrap().is_caratheodory());
    }

    #[test]
    fn section_count_and_dimension_are_checked() {
        assert!(Integrand::from_catalog(uniform(2), vec![C::abs(1.0).unwrap()]).is_err());
        let mixed = vec![
            Section::Product(vec![C::abs(1.0).unwrap().into(), C::abs(1.0).unwrap().into()]),
            C::abs(1.0).unwrap().into(),
        ];
        assert!(Integrand::new(uniform(2), mixed).is_err());
    }

    #[test]
    fn pointwise_inf_examples() {
        let phi = Integrand::from_catalog(uniform(2), vec![C::quadratic(2.0, 0.0, 0.0).unwrap(), C::quadratic(2.0, -2.0, 1.0).unwrap()]).unwrap();
        let pi = phi.pointwise_inf().unwrap();
        assert_eq!(pi.values, vec![ExtReal::zero(), ExtReal::zero()]);
        assert_eq!(pi.argmins, vec![Some(vec![0.0]), Some(vec![1.0])]);

        let phi = Integrand::from_catalog(uniform(2), vec![C::abs(1.0).unwrap().plus(1.0).unwrap(), C::indicator(2.0, 3.0).unwrap()]).unwrap();
        assert_eq!(phi.pointwise_inf().unwrap().values, vec![ExtReal::finite(1.0), ExtReal::zero()]);

        let g = GridFunction::new(vec![0.0, 1.0, 2.0], [3.0, 1.0, 2.0].map(ExtReal::finite).to_vec()).unwrap();
        assert_eq!(g.argmin_index(), 1);
        let phi = Integrand::new(uniform(1), vec![g.into()]).unwrap();
        let pi = phi.pointwise_inf().unwrap();
        assert_eq!(pi.values, vec![ExtReal::finite(1.0)]);
        assert_eq!(pi.argmins, vec![Some(vec![1.0])]);
    }

    #[test]
    fn sampler_emits_epigraph_points_of_half_square() {
        let phi = Integrand::from_catalog(uniform(1), vec![C::quadratic(1.0, 0.0, 0.0).unwrap()]).unwrap();
        let sample = phi.epigraph_dense_sample(4).unwrap();
        assert_eq!(sample.budget(), 4);
        assert_eq!(sample.pairs[0][0], (0.0, 0.0));
        assert_eq!(sample.pairs[0][1], (0.0, 0.5));
        for &(x, r) in &sample.pairs[0] {
            assert!(r >= x * x / 2.0);
        }
        assert!(sample.pairs[0].contains(&(0.5, 0.125)));
    }

    #[test]
    fn sampler_respects_interval_domain() {
        let phi = Integrand::from_catalog(uniform(1), vec![C::indicator(0.0, 1.0).unwrap()]).unwrap();
        let sample = phi.epigraph_dense_sample(500).unwrap();
        assert_eq!(sample.budget(), 500);
        assert!(sample.pairs[0].iter().all(|&(x, r)| (0.0..=1.0).contains(&x) && r >= 0.0));
        let reports = phi.verify_normality_inf(&sample, 0.0).unwrap();
        assert!(reports[0].pass);
    }

    #[test]
    fn sampler_terminates_on_point_domains_and_open_domains() {
        let phi = Integrand::from_catalog(
            uniform(3),
            vec![C::indicator(1.0 / 3.0, 1.0 / 3.0).unwrap(), C::neg_log(), C::entropy_like()],
        )
        .unwrap();
        let sample = phi.epigraph_dense_sample(300).unwrap();
        assert!(sample.pairs[0].iter().all(|&(x, _)| x == 1.0 / 3.0));
        assert!(sample.pairs[1].iter().all(|&(x, _)| x > 0.0));
        assert!(sample.pairs[2].iter().all(|&(x, _)| x >= 0.0));
    }

    #[test]
    fn sampler_rejects_zero_budget_and_products() {
        let phi = Integrand::from_catalog(uniform(1), vec![C::abs(1.0).unwrap()]).unwrap();
        assert!(phi.epigraph_dense_sample(0).is_err());
        let prod = Integrand::new(uniform(1), vec![Section::Product(vec![C::abs(1.0).unwrap().into()])]).unwrap();
        assert!(matches!(prod.epigraph_dense_sample(3), Err(crate::Error::Capability(_))));
    }

    #[test]
    fn sample_sequences_are_prefix_stable() {
        let phi = Integrand::from_catalog(uniform(1), vec![C::abs(1.0).unwrap().shifted(0.3).unwrap()]).unwrap();
        let short = phi.epigraph_dense_sample(100).unwrap();
        let long = phi.epigraph_dense_sample(1000).unwrap();
        assert_eq!(&long.pairs[0][..100], &short.pairs[0][..]);
        let mut seen = std::collections::HashSet::new();
        for &(x, r) in &long.pairs[0] {
            assert!(seen.insert((x.to_bits(), r.to_bits())), "duplicate pair ({x}, {r})");
        }
    }

    #[test]
    fn normality_gap_for_non_dyadic_kink() {
        let phi = Integrand::from_catalog(uniform(1), vec![C::abs(1.0).unwrap().shifted(1.0 / 3.0).unwrap()]).unwrap();
        let sample = phi.epigraph_dense_sample(8).unwrap();
        // sampled minimum of |x - 1/3| over the emitted abscissae
        let sampled = sample.pairs[0].iter().map(|&(x, _)| (x - 1.0 / 3.0).abs()).fold(f64::INFINITY, f64::min);
        assert!(sampled > 1e-3);
        let r = phi.verify_normality_inf(&sample, 1e-3).unwrap();
        assert!(!r[0].pass);
        assert_eq!(r[0].sampled_inf, ExtReal::finite(sampled));
    }
}
