//! The integral functional `I_φ(x) = Σ μ_i φ_i(x_i)` and its interchange rules.
//!
//! The pairing on functions over the atoms is the weighted dot product
//! `⟨x, y⟩ = Σ μ_i x_i·y_i` and the squared norm is `Σ μ_i |x_i|²`. With
//! these, every weight multiplies both the linear (or quadratic) term and
//! the section term, so the per-atom subproblems behind the conjugate, the
//! subdifferential and the proximity operator do not depend on the weights:
//!
//! ```text
//! sup_x Σ μ_i (x_i y_i - φ_i(x_i))            = Σ μ_i φ_i*(y_i)
//! argmin_p Σ μ_i (φ_i(p_i) + |x_i - p_i|²/2γ) = (prox_{γφ_i}(x_i))_i
//! ```

use rayon::prelude::*;

use crate::error::{capability, check_len, invalid, precondition, Result};
use crate::ext_real::ExtReal;
use crate::integrand::{sum_values, Integrand, ScalarSection};
use crate::measure::DiscreteMeasureSpace;
use crate::scalar::{compensated_sum, pow2, Scalar};
use crate::solve::golden_section_min;
use crate::subspace::{restricted_infimum, LineSearch, SubspaceSpec};

/// A function on the atoms with values in `ℝᴺ`; `values[i]` is the point at atom `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionOnOmega<F> {
    values: Vec<Vec<F>>,
}

impl<F: Scalar> FunctionOnOmega<F> {
    pub fn new(values: Vec<Vec<F>>) -> Result<Self> {
        let Some(first) = values.first() else {
            return Err(invalid("a function on the atoms needs at least one atom"));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(invalid("points must have at least one coordinate"));
        }
        for (i, v) in values.iter().enumerate() {
            if v.len() != dim {
                return Err(invalid(format!("point at atom {i} has {} coordinates, expected {dim}", v.len())));
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(invalid(format!("point at atom {i} has a non-finite coordinate")));
            }
        }
        Ok(FunctionOnOmega { values })
    }

    /// Real-valued function, one number per atom.
    pub fn scalar(values: Vec<F>) -> Result<Self> {
        Self::new(values.into_iter().map(|v| vec![v]).collect())
    }

    pub fn constant(m: usize, c: F) -> Result<Self> {
        Self::scalar(vec![c; m])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn at(&self, i: usize) -> &[F] {
        &self.values[i]
    }

    pub fn values(&self) -> &[Vec<F>] {
        &self.values
    }

    /// First coordinate at every atom.
    pub fn first_coordinates(&self) -> Vec<F> {
        self.values.iter().map(|v| v[0]).collect()
    }

    pub fn map(&self, f: impl Fn(usize, usize, F) -> F) -> Self {
        FunctionOnOmega {
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| v.iter().enumerate().map(|(k, &c)| f(i, k, c)).collect())
                .collect(),
        }
    }

    /// `self + α·d`.
    pub fn add_scaled(&self, alpha: F, d: &Self) -> Self {
        self.map(|i, k, c| c + alpha * d.values[i][k])
    }
}

/// The weighted pairing and norm on functions over a measure space.
#[derive(Debug, Clone, PartialEq)]
pub struct PairingSpace<F> {
    pub space: DiscreteMeasureSpace<F>,
}

impl<F: Scalar> PairingSpace<F> {
    pub fn new(space: DiscreteMeasureSpace<F>) -> Self {
        PairingSpace { space }
    }

    /// `Σ μ_i ⟨x_i, y_i⟩`.
    pub fn pair(&self, x: &FunctionOnOmega<F>, y: &FunctionOnOmega<F>) -> Result<F> {
        check_len("pairing left operand", self.space.len(), x.len())?;
        check_len("pairing right operand", self.space.len(), y.len())?;
        check_len("pairing coordinates", x.dim(), y.dim())?;
        let terms = x.values.iter().zip(&y.values).zip(self.space.weights()).flat_map(|((a, b), &w)| {
            a.iter().zip(b).map(move |(&ai, &bi)| w * ai * bi)
        });
        Ok(compensated_sum(terms))
    }

    /// `Σ μ_i |x_i|²`.
    pub fn norm_sq(&self, x: &FunctionOnOmega<F>) -> Result<F> {
        self.pair(x, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// Lower convention: `+inf` on any atom integrates to `+inf`.
    Inf,
    /// Mirror for concave integrands: `-inf` wins.
    Sup,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterchangeResult<F> {
    pub lhs: ExtReal<F>,
    pub rhs: ExtReal<F>,
    /// `lhs - rhs`.
    pub gap: ExtReal<F>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugateResult<F> {
    /// `Σ μ_i φ_i*(y_i)` from the closed-form conjugates.
    pub formula: ExtReal<F>,
    /// `Σ μ_i sup_x (x·y_i - φ_i(x))` by numerical maximization.
    pub direct: ExtReal<F>,
    pub gap: ExtReal<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubdiffReport<F> {
    /// Fenchel–Young route: every per-atom gap is at most `tol`.
    pub member: bool,
    /// Interval route: every coordinate of `y_i` lies in the
    /// `tol`-enlarged subdifferential interval at `x_i`.
    pub interval_member: bool,
    /// `φ_i(x_i) + φ_i*(y_i) - ⟨x_i, y_i⟩` per atom.
    pub per_atom_gaps: Vec<ExtReal<F>>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeResult<F> {
    /// `Σ μ_i env_γ φ_i(x_i)` from per-atom envelopes.
    pub per_atom_sum: F,
    /// `I_φ(p) + ‖x - p‖²/(2γ)` at `p` = pointwise prox.
    pub prox_route: ExtReal<F>,
    pub prox: FunctionOnOmega<F>,
    pub gap: ExtReal<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecessionResult<F> {
    /// `Σ μ_i rec φ_i(d_i)`.
    pub closed_form: ExtReal<F>,
    /// `(I_φ(z + α d) - I_φ(z)) / α` for `α = 2^0, ..., 2^16`.
    pub quotients: Vec<ExtReal<F>>,
    /// Quotients are nondecreasing (exact comparison).
    pub monotone: bool,
    /// Last quotient.
    pub limit: ExtReal<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizerReport<F> {
    /// Every atom is within `tol` of its pointwise infimum.
    pub is_min: bool,
    pub per_atom_gaps: Vec<ExtReal<F>>,
    /// `I_φ(z) - Σ μ_i inf φ_i`.
    pub integral_gap: ExtReal<F>,
    /// `integral_gap <= m · tol · max μ_i`.
    pub integral_is_min: bool,
}

/// Product-grid brute force for the prox objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceConfig<F> {
    /// Nodes per coordinate.
    pub nodes: usize,
    /// Largest number of coordinates `m·N` enumerated.
    pub max_coordinates: usize,
    /// Half-width of the box around `x` (clipped to each domain).
    pub radius: F,
}

impl<F: Scalar> Default for BruteForceConfig<F> {
    fn default() -> Self {
        BruteForceConfig {
            nodes: 41,
            max_coordinates: 6,
            radius: F::lit(4.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceProx<F> {
    pub p: FunctionOnOmega<F>,
    pub value: ExtReal<F>,
    /// Largest node spacing, the accuracy of `p` per coordinate for convex sections.
    pub step: F,
}

/// `I_φ` together with its properness certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralFunctional<F> {
    phi: Integrand<F>,
    witness: Option<FunctionOnOmega<F>>,
    dual_witness: Option<FunctionOnOmega<F>>,
}

const ALPHA_DOUBLINGS: i32 = 16;

impl<F: Scalar> IntegralFunctional<F> {
    pub fn new(phi: Integrand<F>) -> Self {
        IntegralFunctional {
            phi,
            witness: None,
            dual_witness: None,
        }
    }

    pub fn phi(&self) -> &Integrand<F> {
        &self.phi
    }

    pub fn space(&self) -> &DiscreteMeasureSpace<F> {
        self.phi.space()
    }

    pub fn pairing(&self) -> PairingSpace<F> {
        PairingSpace::new(self.space().clone())
    }

    pub fn convention(&self) -> Convention {
        if self.phi.is_negated() {
            Convention::Sup
        } else {
            Convention::Inf
        }
    }

    pub fn witness(&self) -> Option<&FunctionOnOmega<F>> {
        self.witness.as_ref()
    }

    /// Attaches `x̄` with `∫ max{φ(·, x̄), 0} dμ < +inf`, i.e. `dom I_φ ≠ ∅`.
    pub fn certify(mut self, xbar: FunctionOnOmega<F>) -> Result<Self> {
        self.check_shape("witness", &xbar)?;
        let vals: Vec<_> = (0..self.phi.len()).map(|i| self.phi.eval_at(i, xbar.at(i)).positive_part()).collect();
        if self.space().integrate(&vals)?.is_plus_inf() {
            let atom = vals.iter().position(ExtReal::is_plus_inf).unwrap_or(0);
            return Err(precondition(format!("witness is outside the domain of the section at atom {atom}")));
        }
        self.witness = Some(xbar);
        Ok(self)
    }

    /// Attaches `ȳ` with `I_{φ*}(ȳ) < +inf`.
    pub fn certify_dual(mut self, ybar: FunctionOnOmega<F>) -> Result<Self> {
        self.check_shape("dual witness", &ybar)?;
        for i in 0..self.phi.len() {
            let v = sum_values(self.phi.section(i).components().iter().zip(ybar.at(i)).map(|(s, &y)| s.conjugate_eval(y)));
            if v.is_plus_inf() {
                return Err(precondition(format!("dual witness is outside the conjugate's domain at atom {i}")));
            }
        }
        self.dual_witness = Some(ybar);
        Ok(self)
    }

    /// Canonical domain points of every section (first finite sample for grids).
    pub fn canonical_witness(&self) -> Result<FunctionOnOmega<F>> {
        FunctionOnOmega::new(
            self.phi
                .sections()
                .iter()
                .map(|s| s.components().iter().map(canonical_point).collect())
                .collect(),
        )
    }

    /// Canonical domain points of every conjugate section.
    pub fn canonical_dual_witness(&self) -> Result<FunctionOnOmega<F>> {
        let mut values = Vec::with_capacity(self.phi.len());
        for s in self.phi.sections() {
            let mut point = Vec::new();
            for c in s.components() {
                match c {
                    ScalarSection::Catalog(f) => point.push(f.conjugate().canonical_point()),
                    // every slope of the hull is finite for the grid conjugate
                    ScalarSection::Grid(_) => point.push(F::zero()),
                }
            }
            values.push(point);
        }
        FunctionOnOmega::new(values)
    }

    /// Attaches both canonical witnesses, failing when either is not a certificate.
    pub fn certified(self) -> Result<Self> {
        let w = self.canonical_witness()?;
        let d = self.canonical_dual_witness()?;
        self.certify(w)?.certify_dual(d)
    }

    fn check_shape(&self, what: &'static str, x: &FunctionOnOmega<F>) -> Result<()> {
        check_len(what, self.phi.len(), x.len())?;
        check_len("coordinates", self.phi.dim(), x.dim())
    }

    fn require_witness(&self, op: &str) -> Result<()> {
        if self.witness.is_none() {
            return Err(precondition(format!("{op} needs a certified domain witness (call certify first)")));
        }
        Ok(())
    }

    fn require_dual_witness(&self, op: &str) -> Result<()> {
        self.require_witness(op)?;
        if self.dual_witness.is_none() {
            return Err(precondition(format!("{op} needs a certified dual witness (call certify_dual first)")));
        }
        Ok(())
    }

    fn require_convex(&self, op: &str) -> Result<()> {
        if self.phi.is_negated() {
            return Err(capability(format!("{op} requires convex sections; this integrand is negated")));
        }
        Ok(())
    }

    fn require_catalog(&self, op: &str) -> Result<()> {
        self.require_convex(op)?;
        if !self.phi.convex_flag() {
            return Err(capability(format!("{op} requires catalog sections")));
        }
        Ok(())
    }

    /// `∫ φ(ω, x(ω)) μ(dω)` under the functional's convention.
    pub fn evaluate(&self, x: &FunctionOnOmega<F>) -> Result<ExtReal<F>> {
        self.check_shape("argument", x)?;
        let vals: Vec<_> = (0..self.phi.len()).map(|i| self.phi.eval_at(i, x.at(i))).collect();
        match self.convention() {
            Convention::Inf => self.space().integrate(&vals),
            Convention::Sup => self.space().integrate_sup_convention(&vals),
        }
    }

    /// Infimum over the subspace against the integral of pointwise infima.
    pub fn interchange_inf(&self, spec: &SubspaceSpec, search: &LineSearch) -> Result<InterchangeResult<F>> {
        if self.phi.is_negated() {
            return Err(capability("interchange_inf on a negated integrand; use interchange_sup"));
        }
        let lhs = restricted_infimum(&self.phi, spec, search)?;
        let rhs = self.space().integrate(&self.phi.pointwise_inf()?.values)?;
        Ok(InterchangeResult {
            lhs,
            rhs,
            gap: lhs.gap_to(rhs),
        })
    }

    /// Supremum mirror: runs the infimum interchange on `-φ` and negates
    /// every field, so here `gap = lhs - rhs <= 0`.
    pub fn interchange_sup(&self, spec: &SubspaceSpec, search: &LineSearch) -> Result<InterchangeResult<F>> {
        if !self.phi.is_negated() {
            return Err(capability("interchange_sup needs a negated (concave) integrand"));
        }
        let r = IntegralFunctional::new(self.phi.negated()).interchange_inf(spec, search)?;
        Ok(InterchangeResult {
            lhs: -r.lhs,
            rhs: -r.rhs,
            gap: -r.gap,
        })
    }

    /// `I_φ*(y)` by the conjugate formula and by direct maximization.
    pub fn conjugate_functional(&self, y: &FunctionOnOmega<F>) -> Result<ConjugateResult<F>> {
        self.require_catalog("conjugate")?;
        self.require_witness("conjugate")?;
        self.check_shape("dual point", y)?;
        let per_atom: Vec<(ExtReal<F>, ExtReal<F>)> = (0..self.phi.len())
            .into_par_iter()
            .map(|i| {
                let comps = self.phi.section(i).components();
                let formula = sum_values(comps.iter().zip(y.at(i)).map(|(s, &yi)| s.conjugate_eval(yi)));
                let direct = sum_values(comps.iter().zip(y.at(i)).map(|(s, &yi)| numeric_conjugate(s, yi)));
                (formula, direct)
            })
            .collect();
        let (formula, direct): (Vec<_>, Vec<_>) = per_atom.into_iter().unzip();
        let formula = self.space().integrate(&formula)?;
        let direct = self.space().integrate(&direct)?;
        Ok(ConjugateResult {
            formula,
            direct,
            gap: direct.gap_to(formula),
        })
    }

    /// Fenchel–Young and interval tests of `y(ω) ∈ ∂φ_ω(x(ω))` at every atom.
    pub fn subdiff_check(&self, x: &FunctionOnOmega<F>, y: &FunctionOnOmega<F>, tol: F) -> Result<SubdiffReport<F>> {
        self.require_catalog("subdifferential check")?;
        self.require_witness("subdifferential check")?;
        self.check_shape("primal point", x)?;
        self.check_shape("dual point", y)?;
        let tol_ext = ExtReal::finite(tol);
        let mut per_atom_gaps = Vec::with_capacity(x.len());
        let mut diagnostics = Vec::new();
        let mut interval_member = true;
        for i in 0..self.phi.len() {
            let mut gap_terms = Vec::new();
            for (k, s) in self.phi.section(i).components().iter().enumerate() {
                let (xi, yi) = (x.at(i)[k], y.at(i)[k]);
                let fx = s.eval(xi);
                if fx.is_plus_inf() {
                    diagnostics.push(format!("atom {i} coordinate {k}: x = {xi} is outside the domain"));
                }
                gap_terms.push(fx.try_add(s.conjugate_eval(yi))?.add_finite(-xi * yi));
                if !s.subdifferential(xi)?.contains_within(yi, tol) {
                    interval_member = false;
                }
            }
            let gap = sum_values(gap_terms);
            if gap > tol_ext {
                diagnostics.push(format!("atom {i}: Fenchel–Young gap {gap} exceeds {tol}"));
            }
            per_atom_gaps.push(gap);
        }
        Ok(SubdiffReport {
            member: per_atom_gaps.iter().all(|g| *g <= tol_ext),
            interval_member,
            per_atom_gaps,
            diagnostics,
        })
    }

    /// Pointwise proximity operator `p(ω) = prox_{γφ_ω}(x(ω))`.
    pub fn prox_functional(&self, gamma: F, x: &FunctionOnOmega<F>) -> Result<FunctionOnOmega<F>> {
        self.require_convex("prox")?;
        self.require_dual_witness("prox")?;
        self.check_shape("prox argument", x)?;
        let values = (0..self.phi.len())
            .into_par_iter()
            .map(|i| {
                self.phi
                    .section(i)
                    .components()
                    .iter()
                    .zip(x.at(i))
                    .map(|(s, &xi)| s.prox(gamma, xi))
                    .collect::<Result<Vec<F>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        FunctionOnOmega::new(values)
    }

    /// `I_φ(p) + ‖x - p‖²/(2γ)` with the weighted norm.
    pub fn prox_objective(&self, gamma: F, x: &FunctionOnOmega<F>, p: &FunctionOnOmega<F>) -> Result<ExtReal<F>> {
        let diff = x.map(|i, k, c| c - p.at(i)[k]);
        let quad = self.pairing().norm_sq(&diff)? / (F::two() * gamma);
        Ok(self.evaluate(p)?.add_finite(quad))
    }

    /// Minimizes the weighted prox objective over a product grid of
    /// `nodes` points per coordinate in `[x - R, x + R]` clipped to each
    /// section's domain. Every grid point is enumerated.
    pub fn prox_brute_force(&self, gamma: F, x: &FunctionOnOmega<F>, config: &BruteForceConfig<F>) -> Result<BruteForceProx<F>> {
        self.require_convex("prox brute force")?;
        self.check_shape("prox argument", x)?;
        let n = self.phi.len() * self.phi.dim();
        if n > config.max_coordinates {
            return Err(crate::Error::Capacity(format!(
                "product grid over {n} coordinates exceeds the cap of {}",
                config.max_coordinates
            )));
        }
        if config.nodes < 2 {
            return Err(invalid("brute force needs at least two nodes per coordinate"));
        }
        // per-coordinate node lists, atom-major
        let mut axes: Vec<Vec<F>> = Vec::with_capacity(n);
        let mut coords: Vec<(usize, usize)> = Vec::with_capacity(n);
        let mut step = F::zero();
        for i in 0..self.phi.len() {
            for (k, s) in self.phi.section(i).components().iter().enumerate() {
                let xi = x.at(i)[k];
                let (lo, hi) = section_bounds(s);
                let a = (xi - config.radius).max(lo).min(hi);
                let b = (xi + config.radius).min(hi).max(lo);
                let h = (b - a) / F::lit((config.nodes - 1) as f64);
                step = step.max(h);
                axes.push((0..config.nodes).map(|j| if j + 1 == config.nodes { b } else { a + h * F::lit(j as f64) }).collect());
                coords.push((i, k));
            }
        }
        let weights = self.space().weights();
        let inv2g = F::one() / (F::two() * gamma);
        // term[c][j]: weighted contribution of node j on coordinate c
        let terms: Vec<Vec<ExtReal<F>>> = coords
            .iter()
            .zip(&axes)
            .map(|(&(i, k), nodes)| {
                let s = &self.phi.section(i).components()[k];
                let xi = x.at(i)[k];
                nodes
                    .iter()
                    .map(|&p| s.eval(p).add_finite((xi - p) * (xi - p) * inv2g).scale(weights[i]))
                    .collect()
            })
            .collect();
        let nodes = config.nodes;
        let total: usize = nodes.pow(n as u32);
        let best = (0..nodes)
            .into_par_iter()
            .map(|first| {
                let mut best: Option<(ExtReal<F>, usize)> = None;
                let inner = total / nodes;
                for rest in 0..inner {
                    let flat = first * inner + rest;
                    let mut r = flat;
                    let v = sum_values((0..n).rev().map(|c| {
                        let t = terms[c][r % nodes];
                        r /= nodes;
                        t
                    }));
                    if best.is_none_or(|(b, _)| v < b) {
                        best = Some((v, flat));
                    }
                }
                best.expect("at least one node")
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(None::<(ExtReal<F>, usize)>, |acc, cand| match acc {
                Some(a) if a.0 <= cand.0 => Some(a),
                _ => Some(cand),
            })
            .expect("at least one node");
        let mut r = best.1;
        let mut picks = vec![F::zero(); n];
        for c in (0..n).rev() {
            picks[c] = axes[c][r % nodes];
            r /= nodes;
        }
        let dim = self.phi.dim();
        let p = FunctionOnOmega::new(picks.chunks(dim).map(<[F]>::to_vec).collect())?;
        Ok(BruteForceProx { p, value: best.0, step })
    }

    /// Per-atom envelope sum against the value of the prox objective at the pointwise prox.
    pub fn envelope_functional(&self, gamma: F, x: &FunctionOnOmega<F>) -> Result<EnvelopeResult<F>> {
        let p = self.prox_functional(gamma, x)?;
        let mut per_atom = Vec::with_capacity(x.len());
        for i in 0..self.phi.len() {
            let mut e = Vec::new();
            for (k, s) in self.phi.section(i).components().iter().enumerate() {
                e.push(s.envelope(gamma, x.at(i)[k])?);
            }
            per_atom.push(compensated_sum(e));
        }
        let per_atom_sum = self.space().integrate_finite(&per_atom)?;
        let prox_route = self.prox_objective(gamma, x, &p)?;
        Ok(EnvelopeResult {
            per_atom_sum,
            prox_route,
            prox: p,
            gap: ExtReal::finite(per_atom_sum).gap_to(prox_route),
        })
    }

    /// `rec I_φ(d)` by the closed form and by the limit quotient from `z`.
    pub fn recession_functional(&self, d: &FunctionOnOmega<F>, z: &FunctionOnOmega<F>) -> Result<RecessionResult<F>> {
        self.require_convex("recession")?;
        self.require_witness("recession")?;
        self.check_shape("direction", d)?;
        self.check_shape("base point", z)?;
        let base = self.evaluate(z)?;
        let Some(base) = base.as_finite() else {
            return Err(precondition(format!("base point must be in the domain (I_φ(z) = {base})")));
        };
        let rec: Vec<_> = (0..self.phi.len())
            .map(|i| sum_values(self.phi.section(i).components().iter().zip(d.at(i)).map(|(s, &di)| s.recession(di))))
            .collect();
        let closed_form = self.space().integrate(&rec)?;
        let mut quotients = Vec::with_capacity(ALPHA_DOUBLINGS as usize + 1);
        for k in 0..=ALPHA_DOUBLINGS {
            let alpha = pow2::<F>(k);
            let v = self.evaluate(&z.add_scaled(alpha, d))?;
            quotients.push(match v {
                ExtReal::Finite(v) => ExtReal::from_float((v - base) / alpha),
                inf => inf,
            });
        }
        let monotone = quotients.windows(2).all(|w| w[0] <= w[1]);
        let limit = *quotients.last().expect("nonempty");
        Ok(RecessionResult {
            closed_form,
            quotients,
            monotone,
            limit,
        })
    }

    /// Tests `φ(ω, z(ω)) = min φ(ω, ·)` at every atom and `I_φ(z) = Σ μ_i inf φ_i`.
    pub fn minimizer_pointwise_check(&self, z: &FunctionOnOmega<F>, tol: F) -> Result<MinimizerReport<F>> {
        self.require_convex("minimizer check")?;
        self.check_shape("candidate", z)?;
        let inf = self.phi.pointwise_inf()?;
        let total = self.space().integrate(&inf.values)?;
        if total.is_minus_inf() {
            return Err(precondition("the infimum of the functional is -inf"));
        }
        let per_atom_gaps: Vec<_> = (0..self.phi.len()).map(|i| self.phi.eval_at(i, z.at(i)).gap_to(inf.values[i])).collect();
        let tol_ext = ExtReal::finite(tol);
        let integral_gap = self.evaluate(z)?.gap_to(total);
        let m = F::lit(self.phi.len() as f64);
        Ok(MinimizerReport {
            is_min: per_atom_gaps.iter().all(|g| *g <= tol_ext),
            per_atom_gaps,
            integral_gap,
            integral_is_min: integral_gap <= ExtReal::finite(m * tol * self.space().max_weight()),
        })
    }
}

fn canonical_point<F: Scalar>(s: &ScalarSection<F>) -> F {
    match s {
        ScalarSection::Catalog(f) => f.canonical_point(),
        ScalarSection::Grid(g) => g.finite_points().next().map_or(F::zero(), |(x, _)| x),
    }
}

/// Closed hull of the domain as a pair of (possibly infinite) reals.
fn section_bounds<F: Scalar>(s: &ScalarSection<F>) -> (F, F) {
    match s {
        ScalarSection::Catalog(f) => {
            let d = f.domain();
            (d.lo, d.hi)
        }
        ScalarSection::Grid(g) => {
            let mut pts = g.finite_points().map(|(x, _)| x);
            let first = pts.next().unwrap_or(F::zero());
            (first, pts.last().unwrap_or(first))
        }
    }
}

const DOUBLING_STEPS: i32 = 64;

/// Increment below which a monotone scan counts as converged; large
/// steps would otherwise only add cancellation error.
pub(crate) fn negligible<F: Scalar>(v: ExtReal<F>) -> F {
    F::lit(16.0) * F::epsilon() * (F::one() + v.as_finite().map_or(F::zero(), F::abs))
}

/// `sup_x (x·y - f(x))` by a doubling scan from a domain point followed by
/// golden-section refinement of the concave objective. When the objective
/// still increases after the last doubling the supremum is reported as
/// `+inf` if the final increment exceeds a small threshold, and as the
/// last value otherwise.
pub fn numeric_conjugate<F: Scalar>(s: &ScalarSection<F>, y: F) -> ExtReal<F> {
    let g = |x: F| -> ExtReal<F> {
        match s.eval(x) {
            ExtReal::Finite(v) => ExtReal::from_float(x * y - v),
            ExtReal::PlusInf => ExtReal::MinusInf,
            ExtReal::MinusInf => ExtReal::PlusInf,
        }
    };
    let (lo, hi) = section_bounds(s);
    let x0 = canonical_point(s);
    let g0 = g(x0);
    let threshold = F::lit(1e-6);
    // [a, b] brackets the maximizer: a finite domain end, or the first
    // doubling point where the objective decreases
    let mut ends = [lo, hi];
    for (end, dir) in ends.iter_mut().zip([-F::one(), F::one()]) {
        if end.is_finite() {
            continue;
        }
        let mut prev = g0;
        for k in 0..DOUBLING_STEPS {
            let x = x0 + dir * pow2::<F>(k);
            let v = g(x);
            if v <= prev {
                *end = x;
                break;
            }
            // increasing: the supremum may be approached along this ray
            let increment = v.gap_to(prev);
            if increment <= ExtReal::finite(negligible(v)) {
                return v;
            }
            if k + 1 == DOUBLING_STEPS {
                return if increment > ExtReal::finite(threshold) { ExtReal::PlusInf } else { v };
            }
            prev = v;
        }
    }
    let [a, b] = ends;
    let (_, best) = golden_section_min(|x| -g(x), a, b, F::lit(4.0) * F::epsilon());
    (-best).max(g0)
}
