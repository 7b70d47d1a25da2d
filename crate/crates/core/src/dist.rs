//! Dense tabular joint distributions over small sets of state variables,
//! plus the divergence and reweighting primitives the belief layer is built
//! from.
//!
//! Tuples are enumerated lexicographically over domain indices with the last
//! variable fastest; that enumeration is the canonical order for tables,
//! serialization, and tie-breaking everywhere.

use std::sync::OnceLock;

use rand::Rng;
use thiserror::Error;

use crate::schema::{StateVariable, Value};

#[derive(Debug, Error)]
pub enum DistError {
    #[error("variable lists do not match")]
    MismatchedVariables,
    #[error("variable `{0}` is not part of this distribution")]
    UnknownVariable(StateVariable),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(StateVariable),
    #[error("table length {got} does not match domain product {expected}")]
    BadTableLength { expected: usize, got: usize },
    #[error("weights must be non-negative with positive sum")]
    BadWeights,
    #[error("no probability mass consistent with the update")]
    EmptyConsistentSet,
}

/// A normalized probability table over one or more state variables.
#[derive(Debug)]
pub struct JointDistribution {
    variables: Vec<StateVariable>,
    sizes: Vec<usize>,
    table: Vec<f64>,
    cdf: OnceLock<Vec<f64>>,
}

impl Clone for JointDistribution {
    fn clone(&self) -> Self {
        JointDistribution {
            variables: self.variables.clone(),
            sizes: self.sizes.clone(),
            table: self.table.clone(),
            cdf: OnceLock::new(),
        }
    }
}

impl JointDistribution {
    /// Builds a distribution from non-negative weights, normalizing them.
    pub fn new(variables: Vec<StateVariable>, weights: Vec<f64>) -> Result<Self, DistError> {
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].contains(v) {
                return Err(DistError::DuplicateVariable(v.clone()));
            }
        }
        let sizes: Vec<usize> = variables.iter().map(|v| v.domain_len()).collect();
        let expected: usize = sizes.iter().product();
        if weights.len() != expected {
            return Err(DistError::BadTableLength {
                expected,
                got: weights.len(),
            });
        }
        let mut dist = JointDistribution {
            variables,
            sizes,
            table: weights,
            cdf: OnceLock::new(),
        };
        dist.normalize()?;
        Ok(dist)
    }

    pub fn uniform(variables: Vec<StateVariable>) -> Self {
        let n: usize = variables.iter().map(|v| v.domain_len()).product();
        Self::new(variables, vec![1.0; n]).expect("uniform table is always valid")
    }

    pub fn point_mass(variable: StateVariable, value: &Value) -> Result<Self, DistError> {
        let idx = variable
            .property
            .index_of(value)
            .ok_or(DistError::BadWeights)?;
        let mut weights = vec![0.0; variable.domain_len()];
        weights[idx] = 1.0;
        Self::new(vec![variable], weights)
    }

    pub fn variables(&self) -> &[StateVariable] {
        &self.variables
    }

    pub fn arity(&self) -> usize {
        self.variables.len()
    }

    /// Number of entries in the dense table.
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.table
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.table[index]
    }

    pub fn contains_variable(&self, v: &StateVariable) -> bool {
        self.variables.contains(v)
    }

    /// Domain indices of the tuple at `index`.
    pub fn digits_at(&self, index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.sizes.len()];
        let mut rem = index;
        for (k, &size) in self.sizes.iter().enumerate().rev() {
            digits[k] = rem % size;
            rem /= size;
        }
        digits
    }

    /// Values of the tuple at `index`, aligned with `variables()`.
    pub fn tuple_at(&self, index: usize) -> Vec<Value> {
        self.digits_at(index)
            .into_iter()
            .zip(&self.variables)
            .map(|(d, v)| v.domain()[d].clone())
            .collect()
    }

    /// Table index for a tuple of domain indices.
    pub fn index_of_digits(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.sizes.len());
        let mut idx = 0;
        for (d, size) in digits.iter().zip(&self.sizes) {
            debug_assert!(d < size);
            idx = idx * size + d;
        }
        idx
    }

    fn position_of(&self, v: &StateVariable) -> Result<usize, DistError> {
        self.variables
            .iter()
            .position(|x| x == v)
            .ok_or_else(|| DistError::UnknownVariable(v.clone()))
    }

    fn normalize(&mut self) -> Result<(), DistError> {
        let mut total = 0.0;
        for &w in &self.table {
            if !(w >= 0.0) {
                return Err(DistError::BadWeights);
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(DistError::BadWeights);
        }
        for w in &mut self.table {
            *w /= total;
        }
        self.cdf = OnceLock::new();
        Ok(())
    }

    /// Joins independent factors into one table. The result's variables are
    /// the canonically sorted union; the factors must be variable-disjoint.
    pub fn product(factors: &[&JointDistribution]) -> Result<Self, DistError> {
        let mut variables: Vec<StateVariable> = Vec::new();
        for f in factors {
            for v in &f.variables {
                if variables.contains(v) {
                    return Err(DistError::DuplicateVariable(v.clone()));
                }
                variables.push(v.clone());
            }
        }
        variables.sort();
        let sizes: Vec<usize> = variables.iter().map(|v| v.domain_len()).collect();
        let total: usize = sizes.iter().product();
        // For each factor, where each of its variables sits in the result.
        let placements: Vec<Vec<usize>> = factors
            .iter()
            .map(|f| {
                f.variables
                    .iter()
                    .map(|v| variables.iter().position(|x| x == v).unwrap())
                    .collect()
            })
            .collect();
        let mut table = Vec::with_capacity(total);
        let mut digits = vec![0usize; variables.len()];
        for idx in 0..total {
            let mut rem = idx;
            for (k, &size) in sizes.iter().enumerate().rev() {
                digits[k] = rem % size;
                rem /= size;
            }
            let mut p = 1.0;
            for (f, places) in factors.iter().zip(&placements) {
                let mut sub = 0;
                for (vk, &place) in places.iter().enumerate() {
                    sub = sub * f.sizes[vk] + digits[place];
                }
                p *= f.table[sub];
            }
            table.push(p);
        }
        Self::new(variables, table)
    }

    /// Marginal over `keep` (an order-significant subset of this
    /// distribution's variables).
    pub fn marginalize(&self, keep: &[StateVariable]) -> Result<Self, DistError> {
        let positions: Vec<usize> = keep
            .iter()
            .map(|v| self.position_of(v))
            .collect::<Result<_, _>>()?;
        let out_sizes: Vec<usize> = positions.iter().map(|&p| self.sizes[p]).collect();
        let out_total: usize = out_sizes.iter().product();
        let mut weights = vec![0.0; out_total];
        let mut digits = vec![0usize; self.sizes.len()];
        for (idx, &p) in self.table.iter().enumerate() {
            let mut rem = idx;
            for (k, &size) in self.sizes.iter().enumerate().rev() {
                digits[k] = rem % size;
                rem /= size;
            }
            let mut out_idx = 0;
            for (k, &pos) in positions.iter().enumerate() {
                out_idx = out_idx * out_sizes[k] + digits[pos];
            }
            weights[out_idx] += p;
        }
        Self::new(keep.to_vec(), weights)
    }

    /// Draws a tuple index proportionally to the table.
    pub fn sample_index<R: Rng>(&self, rng: &mut R) -> usize {
        let cdf = self.cdf.get_or_init(|| {
            let mut acc = 0.0;
            self.table
                .iter()
                .map(|&p| {
                    acc += p;
                    acc
                })
                .collect()
        });
        let total = *cdf.last().expect("non-empty table");
        let x = rng.gen::<f64>() * total;
        let idx = cdf.partition_point(|&c| c <= x);
        idx.min(self.table.len() - 1)
    }

    /// Draws a tuple of values aligned with `variables()`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<Value> {
        let idx = self.sample_index(rng);
        self.tuple_at(idx)
    }

    /// True when a single tuple carries all the mass.
    pub fn is_point_mass(&self) -> bool {
        self.table.iter().filter(|&&p| p > 0.0).count() == 1
    }

    /// Jeffrey's rule over a consistency partition of the tuples: the
    /// posterior places mass exactly `p` on the consistent set, scaling the
    /// inconsistent tuples by (1-p)(1-m)/(pm) where m is their prior mass.
    ///
    /// Returns `false` when the update is a no-op (no inconsistent mass).
    /// Errors when no consistent mass exists: there is nowhere to put `p`.
    pub fn jeffrey_update(
        &mut self,
        consistent: impl Fn(usize) -> bool,
        p: f64,
    ) -> Result<bool, DistError> {
        debug_assert!(p > 0.0 && p <= 1.0);
        let mut consistent_mass = 0.0;
        let mut inconsistent_mass = 0.0;
        let flags: Vec<bool> = (0..self.table.len()).map(&consistent).collect();
        for (idx, &ok) in flags.iter().enumerate() {
            if ok {
                consistent_mass += self.table[idx];
            } else {
                inconsistent_mass += self.table[idx];
            }
        }
        if inconsistent_mass <= 0.0 {
            return Ok(false);
        }
        if consistent_mass <= 0.0 {
            return Err(DistError::EmptyConsistentSet);
        }
        let m = inconsistent_mass;
        let scale = (1.0 - p) * (1.0 - m) / (p * m);
        for (idx, &ok) in flags.iter().enumerate() {
            if !ok {
                self.table[idx] *= scale;
            }
        }
        self.normalize()?;
        Ok(true)
    }

    /// D_KL(self || other) in nats. Infinite when `other` lacks support
    /// somewhere `self` has mass.
    pub fn kl_divergence(&self, other: &JointDistribution) -> Result<f64, DistError> {
        if self.variables != other.variables {
            return Err(DistError::MismatchedVariables);
        }
        Ok(kl_tables(&self.table, &other.table))
    }

    /// Jensen-Shannon divergence in nats; symmetric and within [0, ln 2].
    pub fn js_divergence(&self, other: &JointDistribution) -> Result<f64, DistError> {
        if self.variables != other.variables {
            return Err(DistError::MismatchedVariables);
        }
        Ok(js_tables(&self.table, &other.table))
    }
}

pub(crate) fn kl_tables(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let mut sum = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return f64::INFINITY;
            }
            sum += pi * (pi / qi).ln();
        }
    }
    sum
}

pub(crate) fn js_tables(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let avg: Vec<f64> = p.iter().zip(q).map(|(&a, &b)| 0.5 * (a + b)).collect();
    0.5 * kl_tables(p, &avg) + 0.5 * kl_tables(q, &avg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{PropertySchema, SchemaRegistry, Value};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn color_vars(n: usize) -> Vec<StateVariable> {
        let mut reg = SchemaRegistry::new();
        let color = PropertySchema::new(
            "color",
            vec![Value::sym("red"), Value::sym("green"), Value::sym("blue")],
        );
        reg.declare_type("object", vec![color]).unwrap();
        (0..n)
            .map(|i| reg.resolve("color", &format!("O{i}")).unwrap())
            .collect()
    }

    fn diag_pair() -> JointDistribution {
        let vars = color_vars(2);
        let mut w = vec![0.0; 9];
        w[0] = 1.0;
        w[4] = 1.0;
        w[8] = 1.0;
        JointDistribution::new(vars, w).unwrap()
    }

    #[test]
    fn uniform_has_equal_mass() {
        let d = JointDistribution::uniform(color_vars(2));
        assert_eq!(d.len(), 9);
        for &p in d.probs() {
            assert!((p - 1.0 / 9.0).abs() < 1e-12);
        }
    }

    #[test]
    fn marginal_of_uniform_diagonal_is_uniform() {
        let d = diag_pair();
        for v in d.variables().to_vec() {
            let m = d.marginalize(&[v]).unwrap();
            for &p in m.probs() {
                assert!((p - 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn product_sorts_variables_canonically() {
        let vars = color_vars(2);
        let a = JointDistribution::uniform(vec![vars[1].clone()]);
        let b = JointDistribution::uniform(vec![vars[0].clone()]);
        let prod = JointDistribution::product(&[&a, &b]).unwrap();
        assert_eq!(prod.variables(), &[vars[0].clone(), vars[1].clone()]);
        assert_eq!(prod.len(), 9);
    }

    #[test]
    fn product_rejects_shared_variables() {
        let vars = color_vars(1);
        let a = JointDistribution::uniform(vec![vars[0].clone()]);
        let b = JointDistribution::uniform(vec![vars[0].clone()]);
        assert!(matches!(
            JointDistribution::product(&[&a, &b]),
            Err(DistError::DuplicateVariable(_))
        ));
    }

    #[test]
    fn kl_self_is_zero_and_missing_support_is_infinite() {
        let d = diag_pair();
        assert_eq!(d.kl_divergence(&d).unwrap(), 0.0);
        let u = JointDistribution::uniform(d.variables().to_vec());
        assert!(u.kl_divergence(&d).unwrap().is_infinite());
        assert!(d.kl_divergence(&u).unwrap().is_finite());
    }

    #[test]
    fn js_worked_value_uniform_vs_point() {
        // Two-value domain: D_JS(uniform, point) = 0.215762 nats, computed
        // directly from 0.5*KL(P||A) + 0.5*KL(Q||A) with A the average.
        let p = [0.5, 0.5];
        let q = [1.0, 0.0];
        let js = js_tables(&p, &q);
        assert!((js - 0.215762).abs() < 1e-6, "got {js}");
    }

    #[test]
    fn js_disjoint_point_masses_hit_ln2() {
        let p = [1.0, 0.0];
        let q = [0.0, 1.0];
        assert!((js_tables(&p, &q) - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn js_is_symmetric_zero_on_self_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(2..16);
            let a: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let sa: f64 = a.iter().sum();
            let sb: f64 = b.iter().sum();
            let a: Vec<f64> = a.iter().map(|x| x / sa).collect();
            let b: Vec<f64> = b.iter().map(|x| x / sb).collect();
            let ab = js_tables(&a, &b);
            let ba = js_tables(&b, &a);
            assert!((ab - ba).abs() < 1e-12);
            assert!(ab >= 0.0 && ab <= std::f64::consts::LN_2 + 1e-12);
            assert!(js_tables(&a, &a).abs() < 1e-15);
        }
    }

    #[test]
    fn jeffrey_places_exactly_p_on_the_consistent_set() {
        // Uniform pair over 3 colors, consistent = diagonal, p = 0.5:
        // posterior diagonal entries 1/6 each, off-diagonal 1/12 each.
        let mut d = JointDistribution::uniform(color_vars(2));
        let changed = d.jeffrey_update(|i| i % 4 == 0, 0.5).unwrap();
        assert!(changed);
        for (i, &p) in d.probs().iter().enumerate() {
            let expect = if i % 4 == 0 { 1.0 / 6.0 } else { 1.0 / 12.0 };
            assert!((p - expect).abs() < 1e-12, "entry {i}: {p}");
        }
    }

    #[test]
    fn jeffrey_with_certainty_filters_and_normalizes() {
        let mut d = JointDistribution::uniform(color_vars(2));
        d.jeffrey_update(|i| i % 4 == 0, 1.0).unwrap();
        for (i, &p) in d.probs().iter().enumerate() {
            let expect = if i % 4 == 0 { 1.0 / 3.0 } else { 0.0 };
            assert!((p - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn jeffrey_no_inconsistent_mass_is_a_noop() {
        let mut d = diag_pair();
        let before = d.probs().to_vec();
        let changed = d.jeffrey_update(|i| i % 4 == 0, 0.7).unwrap();
        assert!(!changed);
        assert_eq!(d.probs(), &before[..]);
    }

    #[test]
    fn jeffrey_errors_when_consistent_set_has_no_mass() {
        let mut d = diag_pair();
        let err = d.jeffrey_update(|i| i == 1, 1.0).unwrap_err();
        assert!(matches!(err, DistError::EmptyConsistentSet));
        // Same with p < 1: there is still nowhere to put the mass.
        let mut d = diag_pair();
        assert!(d.jeffrey_update(|i| i == 1, 0.6).is_err());
    }

    #[test]
    fn repeated_jeffrey_is_idempotent() {
        let mut d = JointDistribution::uniform(color_vars(2));
        d.jeffrey_update(|i| i % 4 == 0, 0.8).unwrap();
        let once = d.probs().to_vec();
        d.jeffrey_update(|i| i % 4 == 0, 0.8).unwrap();
        for (a, b) in once.iter().zip(d.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_respects_the_table() {
        let vars = color_vars(1);
        let d = JointDistribution::new(vars, vec![0.7, 0.2, 0.1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0usize; 3];
        for _ in 0..20_000 {
            counts[d.sample_index(&mut rng)] += 1;
        }
        assert!((counts[0] as f64 / 20_000.0 - 0.7).abs() < 0.02);
        assert!((counts[2] as f64 / 20_000.0 - 0.1).abs() < 0.01);
    }

    #[test]
    fn point_mass_always_samples_its_point() {
        let vars = color_vars(1);
        let d = JointDistribution::point_mass(vars[0].clone(), &Value::sym("green")).unwrap();
        assert!(d.is_point_mass());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(d.sample(&mut rng), vec![Value::sym("green")]);
        }
    }

    #[test]
    fn zero_probability_tuples_are_never_drawn() {
        let vars = color_vars(1);
        let d = JointDistribution::new(vars, vec![0.0, 1.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            assert_eq!(d.sample_index(&mut rng), 1);
        }
    }

    #[test]
    fn digits_roundtrip() {
        let d = JointDistribution::uniform(color_vars(3));
        for idx in 0..d.len() {
            assert_eq!(d.index_of_digits(&d.digits_at(idx)), idx);
        }
    }
}
