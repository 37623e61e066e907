//! Sampled extended-real functions on a 1-D grid and their transforms.
//!
//! A [`GridFunction`] is `+inf` everywhere except at its sample abscissae,
//! which keeps it proper and bounded below on compacts and makes its
//! recession function `0` at `d = 0` and `+inf` elsewhere.

use crate::error::{invalid, Result};
use crate::ext_real::ExtReal;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<F> {
    xs: Vec<F>,
    vs: Vec<ExtReal<F>>,
}

/// Lower convex hull of the finite samples.
#[derive(Debug, Clone, PartialEq)]
pub struct HullForm<F> {
    pub vertices: Vec<(F, F)>,
    /// `slopes[k]` joins `vertices[k]` and `vertices[k + 1]`; nondecreasing.
    pub slopes: Vec<F>,
}

/// Result of a grid proximity step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridProx<F> {
    pub index: usize,
    pub p: F,
    pub value: F,
}

impl<F: Scalar> GridFunction<F> {
    pub fn new(xs: Vec<F>, vs: Vec<ExtReal<F>>) -> Result<Self> {
        if xs.len() < 2 {
            return Err(invalid(format!("a grid function needs at least 2 samples, got {}", xs.len())));
        }
        if xs.len() != vs.len() {
            return Err(invalid(format!("xs has {} entries but vs has {}", xs.len(), vs.len())));
        }
        if let Some(i) = xs.iter().position(|x| !x.is_finite()) {
            return Err(invalid(format!("abscissa {i} is not finite")));
        }
        if let Some(i) = xs.windows(2).position(|w| w[0] >= w[1]) {
            return Err(invalid(format!("abscissae must be strictly increasing (index {})", i + 1)));
        }
        if let Some(i) = vs.iter().position(ExtReal::is_minus_inf) {
            return Err(invalid(format!("value {i} is -inf")));
        }
        if !vs.iter().any(ExtReal::is_finite) {
            return Err(invalid("a grid function needs at least one finite value (nonempty epigraph)"));
        }
        Ok(GridFunction { xs, vs })
    }

    /// Samples `f` at the given abscissae.
    pub fn sample(xs: Vec<F>, f: impl Fn(F) -> ExtReal<F>) -> Result<Self> {
        let vs = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, vs)
    }

    /// `n` equispaced samples on `[lo, hi]`.
    pub fn sample_uniform(lo: F, hi: F, n: usize, f: impl Fn(F) -> ExtReal<F>) -> Result<Self> {
        if n < 2 {
            return Err(invalid("uniform grid needs n >= 2"));
        }
        let step = (hi - lo) / F::lit((n - 1) as f64);
        let xs = (0..n).map(|i| lo + step * F::lit(i as f64)).collect();
        Self::sample(xs, f)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn xs(&self) -> &[F] {
        &self.xs
    }

    pub fn vs(&self) -> &[ExtReal<F>] {
        &self.vs
    }

    pub fn finite_points(&self) -> impl Iterator<Item = (F, F)> + '_ {
        self.xs
            .iter()
            .zip(&self.vs)
            .filter_map(|(&x, v)| v.as_finite().map(|v| (x, v)))
    }

    pub fn is_finite_valued(&self) -> bool {
        self.vs.iter().all(ExtReal::is_finite)
    }

    /// Value at `x`: the sample if `x` is a grid abscissa, `+inf` otherwise.
    pub fn eval(&self, x: F) -> ExtReal<F> {
        match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => self.vs[i],
            Err(_) => ExtReal::PlusInf,
        }
    }

    /// Earliest index attaining the minimum sample.
    pub fn argmin_index(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.vs.iter().enumerate() {
            if *v < self.vs[best] {
                best = i;
            }
        }
        best
    }

    pub fn min_value(&self) -> F {
        self.vs[self.argmin_index()]
            .as_finite()
            .expect("at least one finite sample")
    }

    pub fn span(&self) -> F {
        self.xs[self.xs.len() - 1] - self.xs[0]
    }

    pub fn lower_convex_hull(&self) -> HullForm<F> {
        let points: Vec<(F, F)> = self.finite_points().collect();
        lower_hull(&points)
    }

    /// Discrete conjugate `y ↦ max_i (y·x_i - v_i)` through the hull:
    /// O(n + |ys|) after sorting the queries.
    pub fn legendre_transform(&self, ys: &[F]) -> Vec<ExtReal<F>> {
        let hull = self.lower_convex_hull();
        hull_conjugate(&hull, ys)
            .into_iter()
            .map(ExtReal::from_float)
            .collect()
    }

    /// Quadratic-time reference: direct maximum over every finite sample.
    pub fn legendre_brute_force(&self, ys: &[F]) -> Vec<ExtReal<F>> {
        ys.iter()
            .map(|&y| {
                let best = self
                    .finite_points()
                    .map(|(x, v)| y * x - v)
                    .fold(F::neg_infinity(), F::max);
                ExtReal::from_float(best)
            })
            .collect()
    }

    /// `f**` on the grid, computed by conjugating twice: the conjugate is
    /// evaluated at the hull slopes (its breakpoints), then conjugated back
    /// at the grid abscissae. Outside the finite samples' range the result
    /// is `+inf`.
    pub fn biconjugate(&self) -> GridFunction<F> {
        let hull = self.lower_convex_hull();
        let (first, last) = (hull.vertices[0].0, hull.vertices[hull.vertices.len() - 1].0);
        let vs = if hull.slopes.is_empty() {
            self.xs
                .iter()
                .map(|&x| if x == first { ExtReal::finite(hull.vertices[0].1) } else { ExtReal::PlusInf })
                .collect()
        } else {
            let conj = hull_conjugate(&hull, &hull.slopes);
            let mut dual: Vec<(F, F)> = hull.slopes.iter().copied().zip(conj).collect();
            dual.dedup_by(|b, a| b.0 <= a.0);
            let dual_hull = lower_hull(&dual);
            let back = hull_conjugate(&dual_hull, &self.xs);
            self.xs
                .iter()
                .zip(back)
                .map(|(&x, v)| if x < first || x > last { ExtReal::PlusInf } else { ExtReal::from_float(v) })
                .collect()
        };
        GridFunction {
            xs: self.xs.clone(),
            vs,
        }
    }

    /// Minimizer over the samples of `v_i + (x - x_i)² / (2γ)`; ties go to
    /// the earliest index.
    pub fn prox(&self, gamma: F, x: F) -> Result<GridProx<F>> {
        if !(gamma > F::zero() && gamma.is_finite()) {
            return Err(invalid(format!("gamma must be finite and > 0, got {gamma}")));
        }
        let mut best: Option<GridProx<F>> = None;
        for (i, (&xi, v)) in self.xs.iter().zip(&self.vs).enumerate() {
            let Some(v) = v.as_finite() else { continue };
            let value = v + (x - xi) * (x - xi) / (F::two() * gamma);
            if best.is_none_or(|b| value < b.value) {
                best = Some(GridProx { index: i, p: xi, value });
            }
        }
        Ok(best.expect("at least one finite sample"))
    }

    pub fn moreau_envelope(&self, gamma: F, query_xs: &[F]) -> Result<Vec<F>> {
        query_xs.iter().map(|&x| self.prox(gamma, x).map(|p| p.value)).collect()
    }

    /// Recession function along `d`, following the difference quotients
    /// `(f(z + α d) - f(z)) / α` for `α = 1, 2, 4, ...` from the first finite
    /// sample until `α·|d|` exceeds the grid span.
    pub fn recession(&self, d: F) -> ExtReal<F> {
        if d == F::zero() {
            return ExtReal::zero();
        }
        let (z, fz) = self.finite_points().next().expect("at least one finite sample");
        let span = self.span();
        let mut alpha = F::one();
        let mut quotient = ExtReal::PlusInf;
        while alpha * d.abs() <= span {
            quotient = match self.eval(z + alpha * d) {
                ExtReal::Finite(v) => ExtReal::from_float((v - fz) / alpha),
                _ => ExtReal::PlusInf,
            };
            alpha = alpha * F::two();
        }
        // z + α d has left [x_min, x_max]; the value there is +inf.
        if quotient.is_finite() {
            quotient = ExtReal::PlusInf;
        }
        quotient
    }
}

impl<F: Scalar> HullForm<F> {
    /// Piecewise-linear interpolation of the hull; `+inf` outside it.
    pub fn eval(&self, x: F) -> ExtReal<F> {
        let n = self.vertices.len();
        let (x0, _) = self.vertices[0];
        let (xn, _) = self.vertices[n - 1];
        if x < x0 || x > xn {
            return ExtReal::PlusInf;
        }
        let k = self.vertices.partition_point(|&(vx, _)| vx <= x);
        // vertices[k-1].0 <= x < vertices[k].0, or x is the last vertex
        if k == n {
            return ExtReal::finite(self.vertices[n - 1].1);
        }
        let (xa, va) = self.vertices[k - 1];
        if x == xa {
            return ExtReal::finite(va);
        }
        ExtReal::finite(va + self.slopes[k - 1] * (x - xa))
    }
}

/// Monotone-chain lower hull of points sorted by strictly increasing x.
/// Collinear interior points are dropped so only extreme points remain.
fn lower_hull<F: Scalar>(points: &[(F, F)]) -> HullForm<F> {
    let mut hull: Vec<(F, F)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= F::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let slopes = hull.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    HullForm {
        vertices: hull,
        slopes,
    }
}

/// `max_k (y·x_k - v_k)` over hull vertices for every query, by a sweep
/// over the queries in increasing order.
fn hull_conjugate<F: Scalar>(hull: &HullForm<F>, ys: &[F]) -> Vec<F> {
    let mut order: Vec<usize> = (0..ys.len()).collect();
    order.sort_by(|&a, &b| ys[a].partial_cmp(&ys[b]).unwrap());
    let mut out = vec![F::zero(); ys.len()];
    let mut k = 0;
    for i in order {
        let y = ys[i];
        while k < hull.slopes.len() && y > hull.slopes[k] {
            k += 1;
        }
        let (x, v) = hull.vertices[k];
        out[i] = y * x - v;
    }
    out
}
