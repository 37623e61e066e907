//! Finite measure spaces with strictly positive atom weights.
//!
//! On such a space "almost everywhere" means "at every atom", the
//! essential infimum of a family is its coordinatewise infimum, and the
//! integral follows the lower convention: any `+inf` value integrates to
//! `+inf` because its atom has positive mass.

use crate::error::{check_len, invalid, precondition, Result};
use crate::ext_real::ExtReal;
use crate::scalar::{compensated_sum, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasureSpace<F> {
    atoms: Vec<String>,
    weights: Vec<F>,
    chain: Vec<Vec<usize>>,
}

impl<F: Scalar> DiscreteMeasureSpace<F> {
    /// Builds a space whose exhaustion chain is the single set of all atoms.
    pub fn new(atoms: Vec<String>, weights: Vec<F>) -> Result<Self> {
        let m = weights.len();
        let all: Vec<usize> = (0..m).collect();
        Self::with_chain(atoms, weights, vec![all])
    }

    /// Atoms labelled `w0, w1, ...`.
    pub fn from_weights(weights: Vec<F>) -> Result<Self> {
        let atoms = (0..weights.len()).map(|i| format!("w{i}")).collect();
        Self::new(atoms, weights)
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::from_weights(vec![F::one(); m])
    }

    pub fn with_chain(atoms: Vec<String>, weights: Vec<F>, chain: Vec<Vec<usize>>) -> Result<Self> {
        let m = weights.len();
        if m == 0 {
            return Err(invalid("a measure space needs at least one atom"));
        }
        check_len("atom labels", m, atoms.len())?;
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > F::zero()))
        {
            return Err(invalid(format!("weight {i} must be finite and > 0, got {w}")));
        }
        let chain = if chain.is_empty() {
            vec![(0..m).collect()]
        } else {
            chain
        };
        let mut sets: Vec<Vec<bool>> = Vec::with_capacity(chain.len());
        for (k, set) in chain.iter().enumerate() {
            let mut mask = vec![false; m];
            for &i in set {
                if i >= m {
                    return Err(invalid(format!("chain set {k} references atom {i} >= {m}")));
                }
                mask[i] = true;
            }
            if let Some(prev) = sets.last() {
                if prev.iter().zip(&mask).any(|(p, c)| *p && !*c) {
                    return Err(invalid(format!("chain set {k} does not contain set {}", k - 1)));
                }
            }
            sets.push(mask);
        }
        if !sets.last().map(|s| s.iter().all(|b| *b)).unwrap_or(false) {
            return Err(invalid("chain does not exhaust all atoms"));
        }
        Ok(DiscreteMeasureSpace {
            atoms,
            weights,
            chain,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> F {
        self.weights[i]
    }

    pub fn chain(&self) -> &[Vec<usize>] {
        &self.chain
    }

    pub fn total_mass(&self) -> F {
        compensated_sum(self.weights.iter().copied())
    }

    pub fn max_weight(&self) -> F {
        self.weights.iter().copied().fold(F::zero(), F::max)
    }

    /// Same atoms with every weight multiplied by `factor > 0`.
    pub fn scaled(&self, factor: F) -> Result<Self> {
        Self::with_chain(
            self.atoms.clone(),
            self.weights.iter().map(|w| *w * factor).collect(),
            self.chain.clone(),
        )
    }

    /// Restriction to a subset of atoms (used for per-cell searches).
    pub fn restrict(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            indices.iter().map(|&i| self.atoms[i].clone()).collect(),
            indices.iter().map(|&i| self.weights[i]).collect(),
        )
    }

    /// Integral under the lower convention.
    pub fn integrate(&self, values: &[ExtReal<F>]) -> Result<ExtReal<F>> {
        check_len("integrand values", self.len(), values.len())?;
        if values.iter().any(ExtReal::is_plus_inf) {
            return Ok(ExtReal::PlusInf);
        }
        if values.iter().any(ExtReal::is_minus_inf) {
            return Ok(ExtReal::MinusInf);
        }
        let terms = values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| *w * v.as_finite().unwrap_or_else(F::zero));
        Ok(ExtReal::from_float(compensated_sum(terms)))
    }

    /// Integral of real values; shorthand for the all-finite case.
    pub fn integrate_finite(&self, values: &[F]) -> Result<F> {
        check_len("integrand values", self.len(), values.len())?;
        Ok(compensated_sum(values.iter().zip(&self.weights).map(|(v, w)| *v * *w)))
    }

    /// Mirror convention for suprema: any `-inf` forces `-inf`.
    pub fn integrate_sup_convention(&self, values: &[ExtReal<F>]) -> Result<ExtReal<F>> {
        let negated: Vec<_> = values.iter().map(|v| -*v).collect();
        Ok(-self.integrate(&negated)?)
    }

    /// Coordinatewise infimum of a nonempty family, together with the
    /// index of the earliest member attaining it at every atom.
    pub fn essential_infimum(&self, family: &[Vec<ExtReal<F>>]) -> Result<EssentialInfimum<F>> {
        if family.is_empty() {
            return Err(precondition("essential infimum of an empty family"));
        }
        for member in family {
            check_len("family member", self.len(), member.len())?;
        }
        let mut values = family[0].clone();
        let mut attained_by = vec![0; self.len()];
        for (n, member) in family.iter().enumerate().skip(1) {
            for (j, v) in member.iter().enumerate() {
                if *v < values[j] {
                    values[j] = *v;
                    attained_by[j] = n;
                }
            }
        }
        Ok(EssentialInfimum {
            values,
            attained_by,
        })
    }

    /// Disjoint partition `B_0, ..., B_n` of the atoms with
    /// `min_i f_i = sum_i 1_{B_i} f_i`. Built inductively: when `f_k` is
    /// added, only atoms where it is strictly below the running minimum
    /// move into `B_k`, so ties stay with the earlier index.
    pub fn partition_min(&self, family: &[Vec<F>]) -> Result<MinPartition<F>> {
        if family.is_empty() {
            return Err(precondition("partition_min needs at least one vector"));
        }
        for member in family {
            check_len("family member", self.len(), member.len())?;
            if member.iter().any(|v| !v.is_finite()) {
                return Err(precondition("partition_min requires finite values"));
            }
        }
        let mut owner = vec![0usize; self.len()];
        let mut min = family[0].clone();
        for (k, member) in family.iter().enumerate().skip(1) {
            for j in 0..self.len() {
                if member[j] < min[j] {
                    min[j] = member[j];
                    owner[j] = k;
                }
            }
        }
        let mut cells = vec![Vec::new(); family.len()];
        for (j, k) in owner.into_iter().enumerate() {
            cells[k].push(j);
        }
        Ok(MinPartition { cells, min })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EssentialInfimum<F> {
    pub values: Vec<ExtReal<F>>,
    /// For every atom, the earliest family index attaining the infimum.
    pub attained_by: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinPartition<F> {
    pub cells: Vec<Vec<usize>>,
    pub min: Vec<F>,
}

#[cfg(test)]
mod tests {
    use super::*;

    type X = ExtReal<f64>;

    fn space(w: &[f64]) -> DiscreteMeasureSpace<f64> {
        DiscreteMeasureSpace::from_weights(w.to_vec()).unwrap()
    }

    #[test]
    fn rejects_nonpositive_weights_and_empty_spaces() {
        assert!(DiscreteMeasureSpace::<f64>::from_weights(vec![]).is_err());
        assert!(DiscreteMeasureSpace::from_weights(vec![1.0, 0.0]).is_err());
        assert!(DiscreteMeasureSpace::from_weights(vec![-1.0]).is_err());
        assert!(DiscreteMeasureSpace::from_weights(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn chain_must_increase_and_exhaust() {
        let labels = || vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let w = vec![1.0, 1.0, 1.0];
        assert!(DiscreteMeasureSpace::with_chain(labels(), w.clone(), vec![vec![0], vec![0, 1], vec![0, 1, 2]]).is_ok());
        assert!(DiscreteMeasureSpace::with_chain(labels(), w.clone(), vec![vec![0], vec![1, 2]]).is_err());
        assert!(DiscreteMeasureSpace::with_chain(labels(), w.clone(), vec![vec![0], vec![0, 1]]).is_err());
        assert!(DiscreteMeasureSpace::with_chain(labels(), w.clone(), vec![vec![7]]).is_err());
        let s = DiscreteMeasureSpace::new(labels(), w).unwrap();
        assert_eq!(s.chain(), &[vec![0, 1, 2]]);
    }

    #[test]
    fn integrate_examples() {
        assert_eq!(space(&[1.0, 1.0]).integrate(&[X::finite(2.0), X::finite(3.0)]), Ok(X::finite(5.0)));
        assert_eq!(space(&[1.0, 1.0]).integrate(&[X::PlusInf, X::MinusInf]), Ok(X::PlusInf));
        assert_eq!(space(&[0.5, 2.0]).integrate(&[X::finite(4.0), X::finite(-1.0)]), Ok(X::finite(0.0)));
        assert!(space(&[1.0]).integrate(&[X::zero(), X::zero()]).is_err());
    }

    #[test]
    fn sup_convention_examples() {
        assert_eq!(space(&[1.0, 1.0]).integrate_sup_convention(&[X::PlusInf, X::MinusInf]), Ok(X::MinusInf));
        assert_eq!(space(&[1.0]).integrate_sup_convention(&[X::finite(3.0)]), Ok(X::finite(3.0)));
        assert_eq!(space(&[2.0, 1.0]).integrate_sup_convention(&[X::finite(1.0), X::PlusInf]), Ok(X::PlusInf));
    }

    #[test]
    fn essential_infimum_examples() {
        let s = space(&[1.0, 1.0]);
        let f = |a: f64, b: f64| vec![X::from_float(a), X::from_float(b)];
        assert_eq!(s.essential_infimum(&[f(1.0, 5.0), f(3.0, 2.0)]).unwrap().values, f(1.0, 2.0));
        assert_eq!(s.essential_infimum(&[f(0.0, 0.0)]).unwrap().values, f(0.0, 0.0));
        let e = s
            .essential_infimum(&[f(1.0, f64::INFINITY), f(f64::INFINITY, 1.0), f(2.0, 2.0)])
            .unwrap();
        assert_eq!(e.values, f(1.0, 1.0));
        assert_eq!(e.attained_by, vec![0, 1]);
        assert!(s.essential_infimum(&[]).is_err());
    }

    #[test]
    fn partition_min_examples() {
        let s = space(&[1.0, 1.0]);
        let p = s.partition_min(&[vec![1.0, 5.0], vec![3.0, 2.0]]).unwrap();
        assert_eq!(p.cells, vec![vec![0], vec![1]]);
        assert_eq!(p.min, vec![1.0, 2.0]);

        let p = s.partition_min(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(p.cells, vec![vec![0, 1], vec![]]);

        let s3 = space(&[1.0, 1.0, 1.0]);
        let family = vec![vec![4.0, 0.0, 7.0], vec![4.0, 2.0, 1.0], vec![5.0, -1.0, 1.0]];
        let p = s3.partition_min(&family).unwrap();
        // Brute force: earliest argmin per atom.
        let oracle: Vec<usize> = (0..3)
            .map(|j| {
                let mut best = 0;
                for k in 1..family.len() {
                    if family[k][j] < family[best][j] {
                        best = k;
                    }
                }
                best
            })
            .collect();
        assert_eq!(oracle, vec![0, 2, 1]);
        assert_eq!(p.cells, vec![vec![0], vec![2], vec![1]]);
        assert_eq!(p.min, vec![4.0, -1.0, 1.0]);
    }
}
