//! Closed-form scalar convex functions.
//!
//! Every member is `x ↦ K(x - shift) + slope·x + offset` for a base kind
//! `K`. The family is closed under conjugation:
//!
//! ```text
//! g(x)  = K(x - c) + t·x + e
//! g*(y) = K*(y - t) + c·y - c·t - e
//! ```
//!
//! and the base table is closed by the dedicated entries
//! `PiecewiseAffine`, `EntropyLike`, `NegLogConjugate` and
//! `PowerConjugate`, so conjugates are exact catalog members rather than
//! grid approximations.

use std::fmt;

use crate::error::{invalid, Result};
use crate::ext_real::ExtReal;
use crate::scalar::Scalar;
use crate::solve::newton_bracketed;

/// Base kinds. Parameters are validated by the constructors on
/// [`ScalarConvexFunction`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind<F> {
    /// `a/2·x² + b·x + c`, `a > 0`.
    Quadratic { a: F, b: F, c: F },
    /// `w·|x|`, `w > 0`.
    AbsoluteValue { w: F },
    /// `0` on `[lo, hi]`, `+inf` elsewhere.
    IndicatorInterval { lo: F, hi: F },
    /// `s·x + b`.
    Affine { s: F, b: F },
    /// `e^x`.
    Exponential,
    /// `-ln x` on `(0, inf)`.
    NegLog,
    /// `w·|x|^p / p`, `p` even.
    PowerEven { p: u32, w: F },
    /// `max(lo·y, hi·y)`: the support function of `[lo, hi]`.
    PiecewiseAffine { lo: F, hi: F },
    /// `y·ln y - y` on `(0, inf)`, `0` at `0`.
    EntropyLike,
    /// `-1 - ln(-y)` on `(-inf, 0)`.
    NegLogConjugate,
    /// `w·|y|^q / q` with `q = p / (p - 1)`.
    PowerConjugate { p: u32, w: F },
}

/// Effective domain: an interval with possibly infinite endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain<F> {
    pub lo: F,
    pub hi: F,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl<F: Scalar> Domain<F> {
    pub fn real_line() -> Self {
        Domain {
            lo: F::neg_infinity(),
            hi: F::infinity(),
            lo_closed: false,
            hi_closed: false,
        }
    }

    fn closed(lo: F, hi: F) -> Self {
        Domain {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn contains(&self, x: F) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn is_real_line(&self) -> bool {
        self.lo == F::neg_infinity() && self.hi == F::infinity()
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    fn shifted(self, c: F) -> Self {
        Domain {
            lo: self.lo + c,
            hi: self.hi + c,
            ..self
        }
    }

    /// Intersection with another interval.
    pub fn intersect(&self, other: &Self) -> Self {
        let (lo, lo_closed) = if self.lo > other.lo {
            (self.lo, self.lo_closed)
        } else if other.lo > self.lo {
            (other.lo, other.lo_closed)
        } else {
            (self.lo, self.lo_closed && other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < other.hi {
            (self.hi, self.hi_closed)
        } else if other.hi < self.hi {
            (other.hi, other.hi_closed)
        } else {
            (self.hi, self.hi_closed && other.hi_closed)
        };
        Domain {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }
}

/// A closed interval of subgradients, or the empty set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubdiffInterval<F> {
    pub lower: ExtReal<F>,
    pub upper: ExtReal<F>,
    pub empty: bool,
}

impl<F: Scalar> SubdiffInterval<F> {
    pub fn empty() -> Self {
        SubdiffInterval {
            lower: ExtReal::PlusInf,
            upper: ExtReal::MinusInf,
            empty: true,
        }
    }

    pub fn point(v: F) -> Self {
        Self::between(ExtReal::from_float(v), ExtReal::from_float(v))
    }

    pub fn between(lower: ExtReal<F>, upper: ExtReal<F>) -> Self {
        debug_assert!(lower <= upper);
        SubdiffInterval {
            lower,
            upper,
            empty: false,
        }
    }

    pub fn contains(&self, y: F) -> bool {
        self.contains_within(y, F::zero())
    }

    /// Membership of `y` in the `tol`-enlarged interval.
    pub fn contains_within(&self, y: F, tol: F) -> bool {
        if self.empty {
            return false;
        }
        let y = ExtReal::from_float(y);
        y.add_finite(tol) >= self.lower && y.add_finite(-tol) <= self.upper
    }

    /// Element of least magnitude.
    pub fn min_norm_element(&self) -> Option<F> {
        if self.empty {
            return None;
        }
        let zero = ExtReal::zero();
        if self.lower > zero {
            self.lower.as_finite()
        } else if self.upper < zero {
            self.upper.as_finite()
        } else {
            Some(F::zero())
        }
    }

    fn translated(self, t: F) -> Self {
        if self.empty {
            return self;
        }
        SubdiffInterval {
            lower: self.lower.add_finite(t),
            upper: self.upper.add_finite(t),
            empty: false,
        }
    }
}

/// A catalog member `x ↦ kind(x - shift) + slope·x + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarConvexFunction<F> {
    kind: Kind<F>,
    shift: F,
    slope: F,
    offset: F,
}

fn positive<F: Scalar>(name: &str, v: F) -> Result<F> {
    if v.is_finite() && v > F::zero() {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn finite<F: Scalar>(name: &str, v: F) -> Result<F> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be finite, got {v}")))
    }
}

fn ordered<F: Scalar>(lo: F, hi: F) -> Result<(F, F)> {
    let lo = finite("lo", lo)?;
    let hi = finite("hi", hi)?;
    if lo <= hi {
        Ok((lo, hi))
    } else {
        Err(invalid(format!("interval needs lo <= hi, got [{lo}, {hi}]")))
    }
}

fn even_power(p: u32) -> Result<u32> {
    if p >= 2 && p.is_multiple_of(2) {
        Ok(p)
    } else {
        Err(invalid(format!("power exponent must be an even integer >= 2, got {p}")))
    }
}

impl<F: Scalar> ScalarConvexFunction<F> {
    fn base(kind: Kind<F>) -> Self {
        ScalarConvexFunction {
            kind,
            shift: F::zero(),
            slope: F::zero(),
            offset: F::zero(),
        }
    }

    pub fn quadratic(a: F, b: F, c: F) -> Result<Self> {
        Ok(Self::base(Kind::Quadratic {
            a: positive("a", a)?,
            b: finite("b", b)?,
            c: finite("c", c)?,
        }))
    }

    pub fn abs(w: F) -> Result<Self> {
        Ok(Self::base(Kind::AbsoluteValue { w: positive("w", w)? }))
    }

    pub fn indicator(lo: F, hi: F) -> Result<Self> {
        let (lo, hi) = ordered(lo, hi)?;
        Ok(Self::base(Kind::IndicatorInterval { lo, hi }))
    }

    pub fn affine(s: F, b: F) -> Result<Self> {
        Ok(Self::base(Kind::Affine {
            s: finite("s", s)?,
            b: finite("b", b)?,
        }))
    }

    pub fn exponential() -> Self {
        Self::base(Kind::Exponential)
    }

    pub fn neg_log() -> Self {
        Self::base(Kind::NegLog)
    }

    pub fn power_even(p: u32, w: F) -> Result<Self> {
        Ok(Self::base(Kind::PowerEven {
            p: even_power(p)?,
            w: positive("w", w)?,
        }))
    }

    pub fn piecewise_affine(lo: F, hi: F) -> Result<Self> {
        let (lo, hi) = ordered(lo, hi)?;
        Ok(Self::base(Kind::PiecewiseAffine { lo, hi }))
    }

    pub fn entropy_like() -> Self {
        Self::base(Kind::EntropyLike)
    }

    pub fn neg_log_conjugate() -> Self {
        Self::base(Kind::NegLogConjugate)
    }

    pub fn power_conjugate(p: u32, w: F) -> Result<Self> {
        Ok(Self::base(Kind::PowerConjugate {
            p: even_power(p)?,
            w: positive("w", w)?,
        }))
    }

    /// Validates a kind built elsewhere (e.g. from a file).
    pub fn from_kind(kind: Kind<F>) -> Result<Self> {
        match kind {
            Kind::Quadratic { a, b, c } => Self::quadratic(a, b, c),
            Kind::AbsoluteValue { w } => Self::abs(w),
            Kind::IndicatorInterval { lo, hi } => Self::indicator(lo, hi),
            Kind::Affine { s, b } => Self::affine(s, b),
            Kind::Exponential => Ok(Self::exponential()),
            Kind::NegLog => Ok(Self::neg_log()),
            Kind::PowerEven { p, w } => Self::power_even(p, w),
            Kind::PiecewiseAffine { lo, hi } => Self::piecewise_affine(lo, hi),
            Kind::EntropyLike => Ok(Self::entropy_like()),
            Kind::NegLogConjugate => Ok(Self::neg_log_conjugate()),
            Kind::PowerConjugate { p, w } => Self::power_conjugate(p, w),
        }
    }

    /// `x ↦ self(x - c)`.
    pub fn shifted(self, c: F) -> Result<Self> {
        let c = finite("shift", c)?;
        // self(x - c) = K(x - c - s0) + t(x - c) + e
        Ok(ScalarConvexFunction {
            shift: self.shift + c,
            offset: self.offset - self.slope * c,
            ..self
        })
    }

    /// `x ↦ self(x) + t·x`.
    pub fn tilted(self, t: F) -> Result<Self> {
        let t = finite("slope", t)?;
        Ok(ScalarConvexFunction {
            slope: self.slope + t,
            ..self
        })
    }

    /// `x ↦ self(x) + e`.
    pub fn plus(self, e: F) -> Result<Self> {
        let e = finite("offset", e)?;
        Ok(ScalarConvexFunction {
            offset: self.offset + e,
            ..self
        })
    }

    /// Sets the transform parameters directly.
    pub fn with_transform(self, shift: F, slope: F, offset: F) -> Result<Self> {
        Ok(ScalarConvexFunction {
            kind: self.kind,
            shift: finite("shift", shift)?,
            slope: finite("slope", slope)?,
            offset: finite("offset", offset)?,
        })
    }

    pub fn kind(&self) -> &Kind<F> {
        &self.kind
    }

    pub fn shift(&self) -> F {
        self.shift
    }

    pub fn slope(&self) -> F {
        self.slope
    }

    pub fn offset(&self) -> F {
        self.offset
    }

    pub fn kind_name(&self) -> &'static str {
        kind_name(&self.kind)
    }

    /// Kind parameters in file order.
    pub fn params(&self) -> Vec<F> {
        match self.kind {
            Kind::Quadratic { a, b, c } => vec![a, b, c],
            Kind::AbsoluteValue { w } => vec![w],
            Kind::IndicatorInterval { lo, hi } | Kind::PiecewiseAffine { lo, hi } => vec![lo, hi],
            Kind::Affine { s, b } => vec![s, b],
            Kind::PowerEven { p, w } | Kind::PowerConjugate { p, w } => vec![F::lit(p as f64), w],
            Kind::Exponential | Kind::NegLog | Kind::EntropyLike | Kind::NegLogConjugate => vec![],
        }
    }

    pub fn domain(&self) -> Domain<F> {
        kind_domain(&self.kind).shifted(self.shift)
    }

    /// Finite everywhere on the real line.
    pub fn is_finite_valued(&self) -> bool {
        self.domain().is_real_line()
    }

    pub fn eval(&self, x: F) -> ExtReal<F> {
        let u = x - self.shift;
        match kind_eval(&self.kind, u) {
            ExtReal::Finite(v) => ExtReal::from_float(v + self.slope * x + self.offset),
            other => other,
        }
    }

    /// The exact conjugate `y ↦ sup_x (x·y - f(x))`.
    pub fn conjugate(&self) -> Self {
        let base = kind_conjugate(&self.kind);
        let (c, t, e) = (self.shift, self.slope, self.offset);
        ScalarConvexFunction {
            kind: base.kind,
            shift: t + base.shift,
            slope: base.slope + c,
            offset: base.offset - base.slope * t - c * t - e,
        }
    }

    /// Unique minimizer of `f(p) + (x - p)² / (2γ)`.
    pub fn prox(&self, gamma: F, x: F) -> Result<F> {
        positive("gamma", gamma)?;
        let u = x - self.shift - gamma * self.slope;
        Ok(self.shift + kind_prox(&self.kind, gamma, u)?)
    }

    /// Moreau envelope `min_p f(p) + (x - p)² / (2γ)` by closed forms
    /// where elementary and by the conjugate identity
    /// `env_γ f(x) = x²/(2γ) - env_{1/γ} f*(x/γ)` otherwise.
    pub fn envelope(&self, gamma: F, x: F) -> Result<F> {
        positive("gamma", gamma)?;
        let t = self.slope;
        let u = x - gamma * t - self.shift;
        let base = kind_envelope(&self.kind, gamma, u)?;
        Ok(base + t * x - gamma * t * t * F::half() + self.offset)
    }

    pub fn subdifferential(&self, x: F) -> SubdiffInterval<F> {
        kind_subdiff(&self.kind, x - self.shift).translated(self.slope)
    }

    /// Recession function `lim_{α→∞} (f(z + α d) - f(z)) / α`.
    pub fn recession(&self, d: F) -> ExtReal<F> {
        if d == F::zero() {
            return ExtReal::zero();
        }
        kind_recession(&self.kind, d).add_finite(self.slope * d)
    }

    /// A point of the effective domain used as the base point for
    /// recession quotients.
    pub fn canonical_point(&self) -> F {
        self.shift + kind_canonical_point(&self.kind)
    }

    /// `inf f = -f*(0)`.
    pub fn infimum(&self) -> ExtReal<F> {
        -self.conjugate().eval(F::zero())
    }

    /// Least-magnitude minimizer, `None` when the infimum is not attained.
    /// Minimizers are exactly `∂f*(0)`.
    pub fn argmin(&self) -> Option<F> {
        if !self.infimum().is_finite() {
            return None;
        }
        self.conjugate().subdifferential(F::zero()).min_norm_element()
    }
}

impl<F: Scalar> fmt::Display for ScalarConvexFunction<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.kind_name())?;
        for (i, p) in self.params().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str(")")?;
        if self.shift != F::zero() {
            write!(f, "[x-{}]", self.shift)?;
        }
        if self.slope != F::zero() {
            write!(f, " + {}x", self.slope)?;
        }
        if self.offset != F::zero() {
            write!(f, " + {}", self.offset)?;
        }
        Ok(())
    }
}

pub fn kind_name<F>(kind: &Kind<F>) -> &'static str {
    match kind {
        Kind::Quadratic { .. } => "quadratic",
        Kind::AbsoluteValue { .. } => "abs",
        Kind::IndicatorInterval { .. } => "indicator",
        Kind::Affine { .. } => "affine",
        Kind::Exponential => "exp",
        Kind::NegLog => "neg_log",
        Kind::PowerEven { .. } => "power_even",
        Kind::PiecewiseAffine { .. } => "piecewise_affine",
        Kind::EntropyLike => "entropy",
        Kind::NegLogConjugate => "neg_log_conjugate",
        Kind::PowerConjugate { .. } => "power_conjugate",
    }
}

fn dual_exponent<F: Scalar>(p: u32) -> F {
    let p = F::lit(p as f64);
    p / (p - F::one())
}

fn kind_domain<F: Scalar>(kind: &Kind<F>) -> Domain<F> {
    match *kind {
        Kind::IndicatorInterval { lo, hi } => Domain::closed(lo, hi),
        Kind::NegLog => Domain {
            lo: F::zero(),
            hi: F::infinity(),
            lo_closed: false,
            hi_closed: false,
        },
        Kind::EntropyLike => Domain {
            lo: F::zero(),
            hi: F::infinity(),
            lo_closed: true,
            hi_closed: false,
        },
        Kind::NegLogConjugate => Domain {
            lo: F::neg_infinity(),
            hi: F::zero(),
            lo_closed: false,
            hi_closed: false,
        },
        _ => Domain::real_line(),
    }
}

fn kind_eval<F: Scalar>(kind: &Kind<F>, u: F) -> ExtReal<F> {
    let inf = ExtReal::PlusInf;
    match *kind {
        Kind::Quadratic { a, b, c } => ExtReal::from_float(a * u * u * F::half() + b * u + c),
        Kind::AbsoluteValue { w } => ExtReal::from_float(w * u.abs()),
        Kind::IndicatorInterval { lo, hi } => {
            if lo <= u && u <= hi {
                ExtReal::zero()
            } else {
                inf
            }
        }
        Kind::Affine { s, b } => ExtReal::from_float(s * u + b),
        Kind::Exponential => ExtReal::from_float(u.exp()),
        Kind::NegLog => {
            if u > F::zero() {
                ExtReal::from_float(-u.ln())
            } else {
                inf
            }
        }
        Kind::PowerEven { p, w } => {
            let p = F::lit(p as f64);
            ExtReal::from_float(w * u.abs().powf(p) / p)
        }
        Kind::PiecewiseAffine { lo, hi } => ExtReal::from_float((lo * u).max(hi * u)),
        Kind::EntropyLike => {
            if u > F::zero() {
                ExtReal::from_float(u * u.ln() - u)
            } else if u == F::zero() {
                ExtReal::zero()
            } else {
                inf
            }
        }
        Kind::NegLogConjugate => {
            if u < F::zero() {
                ExtReal::from_float(-F::one() - (-u).ln())
            } else {
                inf
            }
        }
        Kind::PowerConjugate { p, w } => {
            let q = dual_exponent::<F>(p);
            ExtReal::from_float(w * u.abs().powf(q) / q)
        }
    }
}

fn kind_conjugate<F: Scalar>(kind: &Kind<F>) -> ScalarConvexFunction<F> {
    let base = ScalarConvexFunction::base;
    match *kind {
        Kind::Quadratic { a, b, c } => base(Kind::Quadratic {
            a: a.recip(),
            b: -b / a,
            c: b * b / (F::two() * a) - c,
        }),
        Kind::AbsoluteValue { w } => base(Kind::IndicatorInterval { lo: -w, hi: w }),
        Kind::IndicatorInterval { lo, hi } => base(Kind::PiecewiseAffine { lo, hi }),
        Kind::PiecewiseAffine { lo, hi } => base(Kind::IndicatorInterval { lo, hi }),
        Kind::Affine { s, b } => ScalarConvexFunction {
            offset: -b,
            ..base(Kind::IndicatorInterval { lo: s, hi: s })
        },
        Kind::Exponential => base(Kind::EntropyLike),
        Kind::EntropyLike => base(Kind::Exponential),
        Kind::NegLog => base(Kind::NegLogConjugate),
        Kind::NegLogConjugate => base(Kind::NegLog),
        Kind::PowerEven { p, w } => {
            let pm1 = F::lit(p as f64 - 1.0);
            base(Kind::PowerConjugate {
                p,
                w: w.powf(-pm1.recip()),
            })
        }
        Kind::PowerConjugate { p, w } => {
            let pm1 = F::lit(p as f64 - 1.0);
            base(Kind::PowerEven { p, w: w.powf(-pm1) })
        }
    }
}

fn solver_tol<F: Scalar>() -> F {
    F::lit(F::SOLVER_TOL)
}

/// Root `r >= 0` of `r + c·r^k = m` for `m >= 0`, `c > 0`, `k > 0`.
fn power_shrink<F: Scalar>(m: F, c: F, k: F) -> Result<F> {
    if m == F::zero() {
        return Ok(F::zero());
    }
    let hi = m.min((m / c).powf(k.recip()));
    newton_bracketed(
        |r| r + c * r.powf(k) - m,
        |r| F::one() + c * k * r.powf(k - F::one()),
        F::zero(),
        hi,
        solver_tol(),
    )
}

fn kind_prox<F: Scalar>(kind: &Kind<F>, gamma: F, u: F) -> Result<F> {
    let zero = F::zero();
    Ok(match *kind {
        Kind::Quadratic { a, b, .. } => (u - gamma * b) / (F::one() + gamma * a),
        Kind::AbsoluteValue { w } => u.signum() * (u.abs() - gamma * w).max(zero),
        Kind::IndicatorInterval { lo, hi } => u.max(lo).min(hi),
        Kind::Affine { s, .. } => u - gamma * s,
        Kind::PiecewiseAffine { lo, hi } => {
            if u > gamma * hi {
                u - gamma * hi
            } else if u < gamma * lo {
                u - gamma * lo
            } else {
                zero
            }
        }
        Kind::NegLog => {
            // (u + sqrt(u² + 4γ)) / 2 without cancellation for u < 0
            let s = (u * u + F::lit(4.0) * gamma).sqrt();
            if u >= zero {
                (u + s) * F::half()
            } else {
                F::two() * gamma / (s - u)
            }
        }
        Kind::NegLogConjugate => {
            let s = (u * u + F::lit(4.0) * gamma).sqrt();
            if u <= zero {
                (u - s) * F::half()
            } else {
                -F::two() * gamma / (u + s)
            }
        }
        Kind::Exponential => {
            // p + γ e^p = u; the root lies below u, and below ln(u/γ) when positive.
            let hi = if u > zero {
                u.min(zero.max((u / gamma).ln()))
            } else {
                u
            };
            let lo = u - gamma * hi.exp();
            newton_bracketed(|p| p + gamma * p.exp() - u, |p| F::one() + gamma * p.exp(), lo, hi, solver_tol())?
        }
        Kind::EntropyLike => {
            // p + γ ln p = u, solved for t = ln p: e^t + γ t = u.
            let cap = if u > zero { zero.max(u.ln()) } else { zero };
            let hi = (u / gamma).min(cap);
            let lo = (u - hi.exp()) / gamma;
            let t = newton_bracketed(|t| t.exp() + gamma * t - u, |t| t.exp() + gamma, lo, hi, solver_tol())?;
            t.exp()
        }
        Kind::PowerEven { p, w } => {
            let k = F::lit(p as f64 - 1.0);
            u.signum() * power_shrink(u.abs(), gamma * w, k)?
        }
        Kind::PowerConjugate { p, w } => {
            let k = dual_exponent::<F>(p) - F::one();
            u.signum() * power_shrink(u.abs(), gamma * w, k)?
        }
    })
}

fn kind_envelope<F: Scalar>(kind: &Kind<F>, gamma: F, u: F) -> Result<F> {
    let half = F::half();
    Ok(match *kind {
        Kind::Quadratic { a, b, c } => {
            let den = F::one() + gamma * a;
            a * u * u * half / den + b * u / den - gamma * b * b * half / den + c
        }
        Kind::AbsoluteValue { w } => {
            if u.abs() <= gamma * w {
                u * u * half / gamma
            } else {
                w * u.abs() - gamma * w * w * half
            }
        }
        Kind::IndicatorInterval { lo, hi } => {
            let dist = (lo - u).max(u - hi).max(F::zero());
            dist * dist * half / gamma
        }
        Kind::Affine { s, b } => s * u + b - gamma * s * s * half,
        Kind::PiecewiseAffine { lo, hi } => {
            if u > gamma * hi {
                hi * u - gamma * hi * hi * half
            } else if u < gamma * lo {
                lo * u - gamma * lo * lo * half
            } else {
                u * u * half / gamma
            }
        }
        _ => {
            // env_γ f(u) = u²/(2γ) - [f*(q) + γ/2·(u/γ - q)²],  q = prox_{f*/γ}(u/γ)
            let dual = kind_conjugate(kind);
            let v = u / gamma;
            let q = dual.prox(gamma.recip(), v)?;
            let dual_val = dual.eval(q).as_finite().ok_or_else(|| {
                invalid(format!("conjugate prox left the domain at {q} for {}", kind_name(kind)))
            })?;
            let dual_env = dual_val + gamma * half * (v - q) * (v - q);
            u * u * half / gamma - dual_env
        }
    })
}

fn kind_subdiff<F: Scalar>(kind: &Kind<F>, u: F) -> SubdiffInterval<F> {
    let zero = F::zero();
    let point = SubdiffInterval::point;
    match *kind {
        Kind::Quadratic { a, b, .. } => point(a * u + b),
        Kind::AbsoluteValue { w } => {
            if u > zero {
                point(w)
            } else if u < zero {
                point(-w)
            } else {
                SubdiffInterval::between(ExtReal::finite(-w), ExtReal::finite(w))
            }
        }
        Kind::IndicatorInterval { lo, hi } => {
            if u < lo || u > hi {
                SubdiffInterval::empty()
            } else {
                let lower = if u == lo { ExtReal::MinusInf } else { ExtReal::zero() };
                let upper = if u == hi { ExtReal::PlusInf } else { ExtReal::zero() };
                SubdiffInterval::between(lower, upper)
            }
        }
        Kind::Affine { s, .. } => point(s),
        Kind::Exponential => point(u.exp()),
        Kind::NegLog => {
            if u > zero {
                point(-u.recip())
            } else {
                SubdiffInterval::empty()
            }
        }
        Kind::PowerEven { p, w } => point(u.signum() * w * u.abs().powi(p as i32 - 1)),
        Kind::PiecewiseAffine { lo, hi } => {
            if u > zero {
                point(hi)
            } else if u < zero {
                point(lo)
            } else {
                SubdiffInterval::between(ExtReal::finite(lo), ExtReal::finite(hi))
            }
        }
        Kind::EntropyLike => {
            if u > zero {
                point(u.ln())
            } else {
                SubdiffInterval::empty()
            }
        }
        Kind::NegLogConjugate => {
            if u < zero {
                point(-u.recip())
            } else {
                SubdiffInterval::empty()
            }
        }
        Kind::PowerConjugate { p, w } => {
            if u == zero {
                return point(zero);
            }
            let k = dual_exponent::<F>(p) - F::one();
            point(u.signum() * w * u.abs().powf(k))
        }
    }
}

/// Recession of the base kind for `d != 0`.
fn kind_recession<F: Scalar>(kind: &Kind<F>, d: F) -> ExtReal<F> {
    let zero = F::zero();
    match *kind {
        Kind::AbsoluteValue { w } => ExtReal::from_float(w * d.abs()),
        Kind::Affine { s, .. } => ExtReal::from_float(s * d),
        Kind::PiecewiseAffine { lo, hi } => ExtReal::from_float((lo * d).max(hi * d)),
        Kind::Exponential if d < zero => ExtReal::zero(),
        Kind::NegLog if d > zero => ExtReal::zero(),
        Kind::NegLogConjugate if d < zero => ExtReal::zero(),
        _ => ExtReal::PlusInf,
    }
}

fn kind_canonical_point<F: Scalar>(kind: &Kind<F>) -> F {
    match *kind {
        Kind::IndicatorInterval { lo, .. } => lo,
        Kind::NegLog | Kind::EntropyLike => F::one(),
        Kind::NegLogConjugate => -F::one(),
        _ => F::zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = ScalarConvexFunction<f64>;
    const E: f64 = std::f64::consts::E;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn eval_examples() {
        assert_eq!(C::quadratic(1.0, 0.0, 0.0).unwrap().eval(2.0), ExtReal::finite(2.0));
        assert_eq!(C::indicator(-1.0, 1.0).unwrap().eval(3.0), ExtReal::PlusInf);
        assert!(close(C::neg_log().eval(E).as_finite().unwrap(), -1.0, 1e-15));
        assert_eq!(C::entropy_like().eval(0.0), ExtReal::zero());
        assert_eq!(C::entropy_like().eval(-1.0), ExtReal::PlusInf);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(C::quadratic(0.0, 0.0, 0.0).is_err());
        assert!(C::abs(-1.0).is_err());
        assert!(C::indicator(2.0, 1.0).is_err());
        assert!(C::power_even(3, 1.0).is_err());
        assert!(C::power_even(0, 1.0).is_err());
        assert!(C::affine(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn conjugate_table_examples() {
        let q = C::quadratic(1.0, 0.0, 0.0).unwrap();
        assert_eq!(q.conjugate(), q);
        assert_eq!(C::abs(1.0).unwrap().conjugate(), C::indicator(-1.0, 1.0).unwrap());
        let support = C::indicator(0.0, 2.0).unwrap().conjugate();
        // brute-force sup of x·3 over a fine grid of [0, 2]
        let brute = (0..=20_000).map(|i| i as f64 * 1e-4 * 3.0).fold(f64::MIN, f64::max);
        assert!(close(brute, 6.0, 1e-12));
        assert_eq!(support.eval(3.0), ExtReal::finite(6.0));
        let aff = C::affine(2.0, 3.0).unwrap().conjugate();
        assert_eq!(aff.eval(2.0), ExtReal::finite(-3.0));
        assert_eq!(aff.eval(2.5), ExtReal::PlusInf);
    }

    #[test]
    fn transformed_conjugate_matches_definition() {
        // g(x) = (x-1)² + 0.5x + 2 = Quadratic(2, 0, 0) shifted, tilted and offset
        let g = C::quadratic(2.0, 0.0, 0.0).unwrap().shifted(1.0).unwrap().tilted(0.5).unwrap().plus(2.0).unwrap();
        let gs = g.conjugate();
        for &y in &[-3.0, -0.5, 0.0, 1.0, 4.0] {
            let brute = (-40_000..=40_000)
                .map(|i| {
                    let x = i as f64 * 2.5e-4;
                    x * y - g.eval(x).as_finite().unwrap()
                })
                .fold(f64::MIN, f64::max);
            assert!(close(gs.eval(y).as_finite().unwrap(), brute, 1e-6), "y={y}");
        }
    }

    #[test]
    fn prox_examples() {
        assert_eq!(C::abs(1.0).unwrap().prox(1.0, 3.0).unwrap(), 2.0);
        assert_eq!(C::quadratic(1.0, 0.0, 0.0).unwrap().prox(1.0, 4.0).unwrap(), 2.0);
        assert_eq!(C::indicator(-1.0, 1.0).unwrap().prox(5.0, -7.0).unwrap(), -1.0);
        assert_eq!(C::affine(2.0, 9.0).unwrap().prox(0.5, 1.0).unwrap(), 0.0);
        let nl = C::neg_log().prox(2.0, -3.0).unwrap();
        assert!(close(nl, (-3.0 + (9.0f64 + 8.0).sqrt()) / 2.0, 1e-15));
    }

    #[test]
    fn exp_prox_solves_its_optimality_equation_for_extreme_inputs() {
        let f = C::exponential();
        for &(gamma, x) in &[(1.0, 0.0), (100.0, 0.0), (1.0, 50.0), (1e-3, 700.0), (5.0, -40.0), (0.1, 1e5)] {
            let p = f.prox(gamma, x).unwrap();
            let resid = p + gamma * p.exp() - x;
            assert!(resid.abs() <= 1e-9 * (1.0 + x.abs()), "γ={gamma} x={x} p={p} resid={resid}");
        }
    }

    #[test]
    fn entropy_prox_solves_its_optimality_equation() {
        let f = C::entropy_like();
        for &(gamma, x) in &[(1.0, 0.0), (1.0, -30.0), (0.5, 3.0), (10.0, 1e4)] {
            let p = f.prox(gamma, x).unwrap();
            assert!(p > 0.0);
            let resid = p + gamma * p.ln() - x;
            assert!(resid.abs() <= 1e-9 * (1.0 + x.abs()), "γ={gamma} x={x} p={p}");
        }
    }

    #[test]
    fn subdifferential_examples() {
        let s = C::abs(1.0).unwrap().subdifferential(0.0);
        assert_eq!((s.lower, s.upper), (ExtReal::finite(-1.0), ExtReal::finite(1.0)));
        assert_eq!(C::quadratic(1.0, 0.0, 0.0).unwrap().subdifferential(3.0), SubdiffInterval::point(3.0));
        let s = C::indicator(-1.0, 1.0).unwrap().subdifferential(1.0);
        assert_eq!((s.lower, s.upper), (ExtReal::zero(), ExtReal::PlusInf));
        assert!(C::indicator(-1.0, 1.0).unwrap().subdifferential(2.0).empty);
        assert!(C::neg_log().subdifferential(0.0).empty);
    }

    #[test]
    fn recession_examples() {
        assert_eq!(C::quadratic(1.0, 0.0, 0.0).unwrap().recession(1.0), ExtReal::PlusInf);
        assert_eq!(C::abs(2.0).unwrap().recession(-3.0), ExtReal::finite(6.0));
        assert_eq!(C::affine(5.0, 7.0).unwrap().recession(2.0), ExtReal::finite(10.0));
        assert_eq!(C::exponential().recession(-1.0), ExtReal::zero());
        assert_eq!(C::neg_log().recession(-1.0), ExtReal::PlusInf);
        assert_eq!(C::quadratic(1.0, 0.0, 0.0).unwrap().recession(0.0), ExtReal::zero());
    }

    #[test]
    fn infimum_and_argmin_via_conjugate() {
        let g = C::quadratic(2.0, -2.0, 1.0).unwrap(); // (x-1)²
        assert_eq!(g.infimum(), ExtReal::zero());
        assert_eq!(g.argmin(), Some(1.0));
        let g = C::abs(1.0).unwrap().plus(1.0).unwrap();
        assert_eq!(g.infimum(), ExtReal::finite(1.0));
        assert_eq!(g.argmin(), Some(0.0));
        assert_eq!(C::indicator(2.0, 3.0).unwrap().argmin(), Some(2.0));
        assert_eq!(C::exponential().infimum(), ExtReal::zero());
        assert_eq!(C::exponential().argmin(), None);
        assert_eq!(C::neg_log().infimum(), ExtReal::MinusInf);
        assert_eq!(C::affine(1.0, 0.0).unwrap().infimum(), ExtReal::MinusInf);
        assert_eq!(C::entropy_like().argmin(), Some(1.0));
    }

    #[test]
    fn works_in_single_precision() {
        let f = ScalarConvexFunction::<f32>::abs(1.0).unwrap();
        assert_eq!(f.prox(1.0, 3.0).unwrap(), 2.0f32);
        let p = ScalarConvexFunction::<f32>::exponential().prox(1.0, 2.0).unwrap();
        assert!((p + p.exp() - 2.0).abs() < 1e-5);
    }
}
