//! Baseline belief with a factoring fixed at construction time.
//!
//! The variable partition is chosen once (one singleton factor per declared
//! variable) and never reshaped. A fluent folds only when it mentions exactly
//! one declared variable, in which case it reweights that singleton by
//! Jeffrey's rule; every other fluent goes to the lazy store and is enforced
//! only at sampling time. Variables outside the declared set are never
//! represented, so constraints touching them cannot prune samples.

use std::collections::BTreeMap;

use rand::Rng;

use crate::belief::{
    backtracking_sample, is_too_big, snapshot_text, BeliefConfig, BeliefError,
    ContradictionPolicy, UpdateStats,
};
use crate::dist::{DistError, JointDistribution};
use crate::fluent::Observation;
use crate::schema::{Assignment, StateVariable, Value};

#[derive(Debug, Clone)]
pub struct StaticBelief {
    config: BeliefConfig,
    factors: BTreeMap<StateVariable, JointDistribution>,
    complex: Vec<(crate::fluent::Fluent, f64)>,
}

impl StaticBelief {
    /// A belief over a fixed set of variables, one default-prior singleton
    /// factor each. The set never changes afterwards.
    pub fn with_variables(
        variables: impl IntoIterator<Item = StateVariable>,
        config: BeliefConfig,
    ) -> Result<Self, BeliefError> {
        let mut factors = BTreeMap::new();
        for v in variables {
            if factors.contains_key(&v) {
                return Err(BeliefError::DuplicateVariable(v));
            }
            let dist = match config.priors.get(&v.property.name) {
                Some(weights) => JointDistribution::new(vec![v.clone()], weights.clone())?,
                None => JointDistribution::uniform(vec![v.clone()]),
            };
            factors.insert(v, dist);
        }
        Ok(StaticBelief {
            config,
            factors,
            complex: Vec::new(),
        })
    }

    pub fn config(&self) -> &BeliefConfig {
        &self.config
    }

    pub fn knows(&self, v: &StateVariable) -> bool {
        self.factors.contains_key(v)
    }

    pub fn known_variables(&self) -> impl Iterator<Item = &StateVariable> {
        self.factors.keys()
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> impl Iterator<Item = &JointDistribution> {
        self.factors.values()
    }

    pub fn complex_fluents(&self) -> &[(crate::fluent::Fluent, f64)] {
        &self.complex
    }

    /// Marginal over a single declared variable. Anything wider necessarily
    /// spans factors here.
    pub fn marginal(&self, vars: &[StateVariable]) -> Result<JointDistribution, BeliefError> {
        let mut distinct: Vec<&StateVariable> = Vec::new();
        for v in vars {
            if !self.factors.contains_key(v) {
                return Err(BeliefError::UnknownVariable(v.clone()));
            }
            if !distinct.contains(&v) {
                distinct.push(v);
            }
        }
        match distinct.as_slice() {
            [only] => Ok(self.factors[*only].clone()),
            _ => {
                let names: Vec<String> = distinct.iter().map(|v| v.to_string()).collect();
                Err(BeliefError::QuerySpansFactors(names.join(", ")))
            }
        }
    }

    /// Folds single-variable fluents over declared variables; defers the
    /// rest. Deterministic effects overwrite declared variables and are
    /// silently dropped for anything outside the representation.
    pub fn belief_update(
        &mut self,
        obs: &Observation,
        effects: &[(StateVariable, Value)],
    ) -> Result<UpdateStats, BeliefError> {
        let mut stats = UpdateStats::default();
        for (fluent, p) in obs.entries() {
            let mentioned = fluent.mentioned_variables();
            let foldable = match mentioned.as_slice() {
                [only] => self.factors.contains_key(*only),
                _ => false,
            };
            if !foldable || is_too_big(&[mentioned[0].domain_len()], &self.config) {
                if !self.complex.iter().any(|(g, q)| g == fluent && q == p) {
                    self.complex.push((fluent.clone(), *p));
                }
                stats.deferred += 1;
                continue;
            }
            let v = mentioned[0];
            let factor = self.factors.get_mut(v).expect("declared variable");
            let flags: Vec<bool> = (0..factor.len())
                .map(|idx| {
                    let mut a = Assignment::new();
                    a.insert(v.clone(), factor.tuple_at(idx)[0].clone());
                    fluent.evaluate(&a).expect("single mentioned variable")
                })
                .collect();
            match factor.jeffrey_update(|i| flags[i], *p) {
                Ok(_) => stats.folded += 1,
                Err(DistError::EmptyConsistentSet) => match self.config.on_contradiction {
                    ContradictionPolicy::Error => {
                        return Err(BeliefError::Contradiction {
                            fluent: Box::new(fluent.clone()),
                        })
                    }
                    ContradictionPolicy::Skip => stats.contradictions += 1,
                },
                Err(e) => return Err(e.into()),
            }
        }
        self.update_with_action(effects)?;
        Ok(stats)
    }

    /// Point-mass overwrite of declared variables; effects on undeclared
    /// variables are outside the representation and ignored.
    pub fn update_with_action(
        &mut self,
        effects: &[(StateVariable, Value)],
    ) -> Result<(), BeliefError> {
        for (v, value) in effects {
            if v.property.index_of(value).is_none() {
                return Err(BeliefError::EffectOutsideDomain {
                    variable: v.clone(),
                    value: value.clone(),
                });
            }
            if self.factors.contains_key(v) {
                let point = JointDistribution::point_mass(v.clone(), value)?;
                self.factors.insert(v.clone(), point);
            }
        }
        Ok(())
    }

    /// Backtracking draw over the declared variables only. Lazily stored
    /// fluents mentioning undeclared variables never become grounded and so
    /// never reject a sample.
    pub fn sample_state<R: Rng>(&self, rng: &mut R) -> Result<Assignment, BeliefError> {
        let factors: Vec<&JointDistribution> = self.factors.values().collect();
        backtracking_sample(&factors, &self.complex, &self.config, rng)
    }

    pub fn snapshot(&self) -> String {
        let factors: Vec<&JointDistribution> = self.factors.values().collect();
        snapshot_text(&factors, &self.complex)
    }
}

impl crate::belief::BeliefRepr for StaticBelief {
    fn belief_update(
        &mut self,
        obs: &Observation,
        effects: &[(StateVariable, Value)],
    ) -> Result<UpdateStats, BeliefError> {
        StaticBelief::belief_update(self, obs, effects)
    }

    fn sample_state<R: Rng>(&self, rng: &mut R) -> Result<Assignment, BeliefError> {
        StaticBelief::sample_state(self, rng)
    }

    fn knows(&self, v: &StateVariable) -> bool {
        StaticBelief::knows(self, v)
    }

    fn factor_sizes(&self) -> Vec<usize> {
        self.factors.values().map(|f| f.len()).collect()
    }

    fn complex_fluent_count(&self) -> usize {
        self.complex.len()
    }
}
