//! A belief state whose factoring changes shape as constraints arrive.
//!
//! Known state variables are partitioned into factors, each holding a dense
//! joint distribution. Folding a fluent joins every factor it touches and
//! reweights tuples by Jeffrey's rule; after each update every factor is
//! offered the chance to split back apart wherever a variable has become
//! independent of the rest (Jensen-Shannon divergence below a threshold).
//! Fluents whose prospective join would be too large are parked in a lazy
//! store and only enforced when states are sampled.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{js_tables, DistError, JointDistribution};
use crate::fluent::{Fluent, Observation};
use crate::schema::{Assignment, StateVariable, Value};

#[derive(Debug, Error)]
pub enum BeliefError {
    #[error("contradiction folding `{fluent}`: no prior mass is consistent with it")]
    Contradiction { fluent: Box<Fluent> },
    #[error("unknown variable `{0}`")]
    UnknownVariable(StateVariable),
    #[error("variable `{0}` is already tracked")]
    DuplicateVariable(StateVariable),
    #[error("query {0} spans more than one factor")]
    QuerySpansFactors(String),
    #[error("sampling search exhausted after {steps} draws")]
    SearchExhausted { steps: usize },
    #[error("action effect assigns `{value}` outside the domain of `{variable}`")]
    EffectOutsideDomain {
        variable: StateVariable,
        value: Value,
    },
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// What `belief_update` does when folding a fluent contradicts the belief.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContradictionPolicy {
    /// Propagate the error; fluents folded earlier in the batch remain folded.
    #[default]
    Error,
    /// Drop the offending fluent and keep going (counted in the stats).
    Skip,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BeliefConfig {
    /// Split threshold: a variable splits off when D_JS between the factor
    /// and the product of the two marginals is strictly below this. Zero
    /// disables splitting.
    pub epsilon: f64,
    /// A fluent whose prospective join would exceed this many table entries
    /// is deferred to the lazy store instead of being folded.
    pub max_joint_entries: usize,
    /// Consecutive rejected draws tolerated per factor before backtracking.
    pub sample_limit_per_factor: usize,
    /// Total draws allowed in one `sample_state` call.
    pub max_backtrack_steps: usize,
    /// Re-offer splits until a full pass over the factor makes none.
    pub split_to_fixpoint: bool,
    pub on_contradiction: ContradictionPolicy,
    /// Prior weights by property name for newly tracked variables; anything
    /// absent here starts uniform.
    pub priors: BTreeMap<String, Vec<f64>>,
}

impl Default for BeliefConfig {
    fn default() -> Self {
        BeliefConfig {
            epsilon: 1e-9,
            max_joint_entries: 1_000_000,
            sample_limit_per_factor: 100,
            max_backtrack_steps: 100_000,
            split_to_fixpoint: false,
            on_contradiction: ContradictionPolicy::Error,
            priors: BTreeMap::new(),
        }
    }
}

/// Per-update accounting, mostly for benchmarking and logs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UpdateStats {
    /// Fluents folded into factors.
    pub folded: usize,
    /// Fluents deferred to the lazy store.
    pub deferred: usize,
    /// Fluents dropped under `ContradictionPolicy::Skip`.
    pub contradictions: usize,
    /// Variables split off across the post-update pass.
    pub splits: usize,
}

/// True when a joint over tables of the given sizes would exceed the
/// configured entry budget. Saturates instead of overflowing.
pub fn is_too_big(factor_sizes: &[usize], config: &BeliefConfig) -> bool {
    let mut product: usize = 1;
    for &s in factor_sizes {
        product = product.saturating_mul(s);
        if product > config.max_joint_entries {
            return true;
        }
    }
    false
}

type FactorId = u64;

#[derive(Debug, Clone)]
pub struct Belief {
    config: BeliefConfig,
    factors: BTreeMap<FactorId, JointDistribution>,
    var_index: BTreeMap<StateVariable, FactorId>,
    complex: Vec<(Fluent, f64)>,
    next_id: FactorId,
}

impl Belief {
    pub fn new(config: BeliefConfig) -> Self {
        Belief {
            config,
            factors: BTreeMap::new(),
            var_index: BTreeMap::new(),
            complex: Vec::new(),
            next_id: 0,
        }
    }

    /// A belief over an a-priori known set of variables, one default-prior
    /// singleton factor each.
    pub fn with_variables(
        variables: impl IntoIterator<Item = StateVariable>,
        config: BeliefConfig,
    ) -> Result<Self, BeliefError> {
        let mut b = Belief::new(config);
        for v in variables {
            if b.var_index.contains_key(&v) {
                return Err(BeliefError::DuplicateVariable(v));
            }
            b.add_variable(v)?;
        }
        Ok(b)
    }

    pub fn config(&self) -> &BeliefConfig {
        &self.config
    }

    pub fn knows(&self, v: &StateVariable) -> bool {
        self.var_index.contains_key(v)
    }

    pub fn known_variables(&self) -> impl Iterator<Item = &StateVariable> {
        self.var_index.keys()
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> impl Iterator<Item = &JointDistribution> {
        self.factors.values()
    }

    pub fn factor_of(&self, v: &StateVariable) -> Option<&JointDistribution> {
        self.var_index.get(v).map(|id| &self.factors[id])
    }

    pub fn complex_fluents(&self) -> &[(Fluent, f64)] {
        &self.complex
    }

    /// Variable lists of all factors, canonically sorted; handy for asserting
    /// factor structure in tests.
    pub fn factor_structure(&self) -> Vec<Vec<StateVariable>> {
        let mut out: Vec<Vec<StateVariable>> = self
            .factors
            .values()
            .map(|f| f.variables().to_vec())
            .collect();
        out.sort();
        out
    }

    fn fresh_id(&mut self) -> FactorId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn insert_factor(&mut self, dist: JointDistribution) -> FactorId {
        let id = self.fresh_id();
        for v in dist.variables() {
            self.var_index.insert(v.clone(), id);
        }
        self.factors.insert(id, dist);
        id
    }

    fn default_dist(&self, v: &StateVariable) -> Result<JointDistribution, DistError> {
        match self.config.priors.get(&v.property.name) {
            Some(weights) => JointDistribution::new(vec![v.clone()], weights.clone()),
            None => Ok(JointDistribution::uniform(vec![v.clone()])),
        }
    }

    fn add_variable(&mut self, v: StateVariable) -> Result<FactorId, BeliefError> {
        let dist = self.default_dist(&v)?;
        Ok(self.insert_factor(dist))
    }

    /// Marginal over variables that all live in one factor.
    pub fn marginal(&self, vars: &[StateVariable]) -> Result<JointDistribution, BeliefError> {
        let mut distinct: Vec<StateVariable> = Vec::new();
        for v in vars {
            if !self.var_index.contains_key(v) {
                return Err(BeliefError::UnknownVariable(v.clone()));
            }
            if !distinct.contains(v) {
                distinct.push(v.clone());
            }
        }
        let mut ids = distinct.iter().map(|v| self.var_index[v]);
        let first = ids.next().ok_or_else(|| {
            BeliefError::QuerySpansFactors("over an empty variable list".to_string())
        })?;
        if !ids.all(|id| id == first) {
            let names: Vec<String> = distinct.iter().map(|v| v.to_string()).collect();
            return Err(BeliefError::QuerySpansFactors(names.join(", ")));
        }
        Ok(self.factors[&first].marginalize(&distinct)?)
    }

    /// Folds each observed fluent, applies deterministic action effects, then
    /// offers every factor one split pass.
    pub fn belief_update(
        &mut self,
        obs: &Observation,
        effects: &[(StateVariable, Value)],
    ) -> Result<UpdateStats, BeliefError> {
        let mut stats = UpdateStats::default();
        for (fluent, p) in obs.entries() {
            for v in fluent.mentioned_variables() {
                if !self.var_index.contains_key(v) {
                    self.add_variable(v.clone())?;
                }
            }
            let sizes = self.touched_factor_sizes(fluent);
            if is_too_big(&sizes, &self.config) {
                if !self.complex.iter().any(|(g, q)| g == fluent && q == p) {
                    self.complex.push((fluent.clone(), *p));
                }
                stats.deferred += 1;
                continue;
            }
            match self.join_factors_and_update(fluent, *p) {
                Ok(()) => stats.folded += 1,
                Err(e @ BeliefError::Contradiction { .. }) => match self.config.on_contradiction {
                    ContradictionPolicy::Error => return Err(e),
                    ContradictionPolicy::Skip => stats.contradictions += 1,
                },
                Err(e) => return Err(e),
            }
        }
        self.update_with_action(effects)?;
        let ids: Vec<FactorId> = self.factors.keys().copied().collect();
        for id in ids {
            if self.factors.contains_key(&id) {
                stats.splits += self.try_split_id(id)?;
            }
        }
        Ok(stats)
    }

    /// Table sizes of the distinct factors holding the fluent's variables.
    fn touched_factor_sizes(&self, fluent: &Fluent) -> Vec<usize> {
        let mut ids: Vec<FactorId> = fluent
            .mentioned_variables()
            .iter()
            .map(|v| self.var_index[v])
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids.iter().map(|id| self.factors[id].len()).collect()
    }

    /// Joins the factors mentioned by `fluent` into one and reweights it so
    /// the fluent holds with probability exactly `p`. Commits nothing on
    /// contradiction. All mentioned variables must already be tracked.
    pub fn join_factors_and_update(&mut self, fluent: &Fluent, p: f64) -> Result<(), BeliefError> {
        let mentioned = fluent.mentioned_variables();
        let mut ids: Vec<FactorId> = Vec::new();
        for v in &mentioned {
            let id = *self
                .var_index
                .get(v)
                .ok_or_else(|| BeliefError::UnknownVariable((*v).clone()))?;
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
        let parts: Vec<&JointDistribution> = ids.iter().map(|id| &self.factors[id]).collect();
        let mut joined = JointDistribution::product(&parts)?;
        let flags = consistency_flags(&joined, fluent);
        match joined.jeffrey_update(|i| flags[i], p) {
            Ok(_) => {}
            Err(DistError::EmptyConsistentSet) => {
                return Err(BeliefError::Contradiction {
                    fluent: Box::new(fluent.clone()),
                })
            }
            Err(e) => return Err(e.into()),
        }
        for id in &ids {
            self.factors.remove(id);
        }
        self.insert_factor(joined);
        Ok(())
    }

    /// Applies deterministic effects: each effected variable leaves its
    /// factor (the remainder keeps the marginal over the rest) and becomes a
    /// point-mass singleton.
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
            if let Some(&id) = self.var_index.get(v) {
                let factor = self.factors.remove(&id).expect("indexed factor exists");
                if factor.arity() > 1 {
                    let rest: Vec<StateVariable> = factor
                        .variables()
                        .iter()
                        .filter(|x| *x != v)
                        .cloned()
                        .collect();
                    let remainder = factor.marginalize(&rest)?;
                    self.insert_factor(remainder);
                }
            }
            let point = JointDistribution::point_mass(v.clone(), value)?;
            self.insert_factor(point);
        }
        Ok(())
    }

    /// One split pass over the factor holding `v` (no-op if untracked).
    pub fn try_split(&mut self, v: &StateVariable) -> Result<usize, BeliefError> {
        match self.var_index.get(v) {
            Some(&id) => self.try_split_id(id),
            None => Ok(0),
        }
    }

    fn try_split_id(&mut self, mut id: FactorId) -> Result<usize, BeliefError> {
        let mut splits = 0;
        loop {
            let mut made_one = false;
            let snapshot: Vec<StateVariable> = self.factors[&id].variables().to_vec();
            for v in snapshot {
                let factor = &self.factors[&id];
                if factor.arity() < 2 {
                    break;
                }
                let pos = factor
                    .variables()
                    .iter()
                    .position(|x| *x == v)
                    .expect("variable stays in the remainder until split off");
                let split = split_gap(factor, pos)?;
                if split.js < self.config.epsilon {
                    self.factors.remove(&id);
                    self.insert_factor(split.single);
                    id = self.insert_factor(split.rest);
                    splits += 1;
                    made_one = true;
                }
            }
            if !(self.config.split_to_fixpoint && made_one) {
                return Ok(splits);
            }
            if self.factors[&id].arity() < 2 {
                return Ok(splits);
            }
        }
    }

    /// Backtracking draw of a full assignment of all tracked variables,
    /// consistent with every lazily stored fluent that becomes fully grounded.
    pub fn sample_state<R: Rng>(&self, rng: &mut R) -> Result<Assignment, BeliefError> {
        let factors: Vec<&JointDistribution> = self.factors.values().collect();
        backtracking_sample(&factors, &self.complex, &self.config, rng)
    }

    /// Canonical text form of the whole belief, for golden-file comparison.
    pub fn snapshot(&self) -> String {
        let factors: Vec<&JointDistribution> = self.factors.values().collect();
        snapshot_text(&factors, &self.complex)
    }

    /// Structural health check used heavily by tests: the variable partition,
    /// the index, and table normalization.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen: BTreeMap<StateVariable, FactorId> = BTreeMap::new();
        for (&id, f) in &self.factors {
            if f.variables().is_empty() {
                return Err(format!("factor {id} has no variables"));
            }
            for v in f.variables() {
                if let Some(prev) = seen.insert(v.clone(), id) {
                    return Err(format!("variable {v} appears in factors {prev} and {id}"));
                }
                match self.var_index.get(v) {
                    Some(&ix) if ix == id => {}
                    other => return Err(format!("index for {v} is {other:?}, factor is {id}")),
                }
            }
            let total: f64 = f.probs().iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(format!("factor {id} sums to {total}"));
            }
        }
        if seen.len() != self.var_index.len() {
            return Err("index tracks variables not present in any factor".to_string());
        }
        Ok(())
    }
}

/// The operations an episode needs from a belief, whatever its factoring
/// discipline. Lets the planner and harness run dynamic and static
/// representations through identical code.
pub trait BeliefRepr {
    fn belief_update(
        &mut self,
        obs: &Observation,
        effects: &[(StateVariable, Value)],
    ) -> Result<UpdateStats, BeliefError>;

    fn sample_state<R: Rng>(&self, rng: &mut R) -> Result<Assignment, BeliefError>;

    fn knows(&self, v: &StateVariable) -> bool;

    /// Table sizes of all current factors, in no particular order.
    fn factor_sizes(&self) -> Vec<usize>;

    fn complex_fluent_count(&self) -> usize;
}

impl BeliefRepr for Belief {
    fn belief_update(
        &mut self,
        obs: &Observation,
        effects: &[(StateVariable, Value)],
    ) -> Result<UpdateStats, BeliefError> {
        Belief::belief_update(self, obs, effects)
    }

    fn sample_state<R: Rng>(&self, rng: &mut R) -> Result<Assignment, BeliefError> {
        Belief::sample_state(self, rng)
    }

    fn knows(&self, v: &StateVariable) -> bool {
        Belief::knows(self, v)
    }

    fn factor_sizes(&self) -> Vec<usize> {
        self.factors.values().map(|f| f.len()).collect()
    }

    fn complex_fluent_count(&self) -> usize {
        self.complex.len()
    }
}

struct SplitPieces {
    js: f64,
    single: JointDistribution,
    rest: JointDistribution,
}

/// Divergence between a factor and the product of its marginals over one
/// variable versus the rest, plus the two marginal pieces.
fn split_gap(factor: &JointDistribution, pos: usize) -> Result<SplitPieces, DistError> {
    let vars = factor.variables();
    let v = vars[pos].clone();
    let rest: Vec<StateVariable> = vars
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != pos)
        .map(|(_, x)| x.clone())
        .collect();
    let single = factor.marginalize(std::slice::from_ref(&v))?;
    let rest_marg = factor.marginalize(&rest)?;
    // Reconstruct the independent product aligned with the factor's own
    // tuple enumeration, then measure the gap.
    let mut product = vec![0.0; factor.len()];
    let rest_sizes: Vec<usize> = rest.iter().map(|x| x.domain_len()).collect();
    for (idx, slot) in product.iter_mut().enumerate() {
        let digits = factor.digits_at(idx);
        let mut rest_idx = 0;
        let mut k = 0;
        for (i, &d) in digits.iter().enumerate() {
            if i != pos {
                rest_idx = rest_idx * rest_sizes[k] + d;
                k += 1;
            }
        }
        *slot = single.prob(digits[pos]) * rest_marg.prob(rest_idx);
    }
    let js = js_tables(factor.probs(), &product).max(0.0);
    Ok(SplitPieces {
        js,
        single,
        rest: rest_marg,
    })
}

/// Consistency of each tuple of `joined` with `fluent`. The fluent's
/// variables must all be in the joined table.
fn consistency_flags(joined: &JointDistribution, fluent: &Fluent) -> Vec<bool> {
    let mut assignment = Assignment::new();
    let vars = joined.variables().to_vec();
    let mentioned = fluent.mentioned_variables();
    let needed: Vec<usize> = vars
        .iter()
        .enumerate()
        .filter(|(_, v)| mentioned.contains(v))
        .map(|(i, _)| i)
        .collect();
    (0..joined.len())
        .map(|idx| {
            let tuple = joined.tuple_at(idx);
            for &i in &needed {
                assignment.insert(vars[i].clone(), tuple[i].clone());
            }
            fluent
                .evaluate(&assignment)
                .expect("joined table covers all mentioned variables")
        })
        .collect()
}

/// Shared sampler: factors ascending by size, per-factor retry budget, global
/// draw budget, lazily stored fluents enforced once fully grounded.
pub(crate) fn backtracking_sample<R: Rng>(
    factors: &[&JointDistribution],
    complex: &[(Fluent, f64)],
    config: &BeliefConfig,
    rng: &mut R,
) -> Result<Assignment, BeliefError> {
    let mut order: Vec<&JointDistribution> = factors.to_vec();
    order.sort_by(|a, b| {
        (a.len(), &a.variables()[0]).cmp(&(b.len(), &b.variables()[0]))
    });
    // Position after which each variable is grounded.
    let mut var_pos: BTreeMap<&StateVariable, usize> = BTreeMap::new();
    for (i, f) in order.iter().enumerate() {
        for v in f.variables() {
            var_pos.insert(v, i);
        }
    }
    // Constraints come due at the factor grounding their last variable.
    // Fluents mentioning untracked variables never come due.
    let mut due: Vec<Vec<&Fluent>> = vec![Vec::new(); order.len()];
    for (fluent, _) in complex {
        let mut last = 0;
        let mut reachable = true;
        for v in fluent.mentioned_variables() {
            match var_pos.get(v) {
                Some(&i) => last = last.max(i),
                None => {
                    reachable = false;
                    break;
                }
            }
        }
        if reachable && !order.is_empty() {
            due[last].push(fluent);
        }
    }

    let mut assignment = Assignment::new();
    let mut attempts = vec![0usize; order.len()];
    let mut steps = 0usize;
    let mut cur = 0usize;
    while cur < order.len() {
        if steps >= config.max_backtrack_steps {
            return Err(BeliefError::SearchExhausted { steps });
        }
        steps += 1;
        let factor = order[cur];
        let tuple = factor.sample(rng);
        for (v, value) in factor.variables().iter().zip(tuple) {
            assignment.insert(v.clone(), value);
        }
        let ok = due[cur].iter().all(|f| {
            f.evaluate(&assignment)
                .expect("constraint is fully grounded at this position")
        });
        if ok {
            cur += 1;
            if cur < order.len() {
                attempts[cur] = 0;
            }
        } else {
            attempts[cur] += 1;
            if attempts[cur] >= config.sample_limit_per_factor {
                for v in factor.variables() {
                    assignment.remove(v);
                }
                attempts[cur] = 0;
                if cur == 0 {
                    return Err(BeliefError::SearchExhausted { steps });
                }
                cur -= 1;
            }
        }
    }
    Ok(assignment)
}

/// Canonical, deterministic rendering of factors plus the lazy store.
pub(crate) fn snapshot_text(factors: &[&JointDistribution], complex: &[(Fluent, f64)]) -> String {
    use serde_json::{json, Value as Json};
    let mut rendered: Vec<(String, Json)> = factors
        .iter()
        .map(|f| {
            let vars: Vec<String> = f.variables().iter().map(|v| v.to_string()).collect();
            let entries: Vec<Json> = (0..f.len())
                .map(|idx| {
                    let tuple: Vec<String> =
                        f.tuple_at(idx).iter().map(|v| v.to_string()).collect();
                    json!([tuple, f.prob(idx)])
                })
                .collect();
            let key = vars.join(",");
            (key, json!({ "variables": vars, "entries": entries }))
        })
        .collect();
    rendered.sort_by(|a, b| a.0.cmp(&b.0));
    let mut lazy: Vec<Json> = complex
        .iter()
        .map(|(f, p)| json!([f.to_string(), p]))
        .collect();
    lazy.sort_by_key(|j| j[0].as_str().unwrap_or_default().to_string());
    let doc = json!({
        "factors": rendered.into_iter().map(|(_, j)| j).collect::<Vec<_>>(),
        "complex_fluents": lazy,
    });
    serde_json::to_string_pretty(&doc).expect("snapshot is valid JSON")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluent::{Predicate, Term};
    use crate::schema::{PropertySchema, SchemaRegistry};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn registry() -> SchemaRegistry {
        let mut reg = SchemaRegistry::new();
        let color = PropertySchema::new(
            "color",
            vec![Value::sym("red"), Value::sym("green"), Value::sym("blue")],
        );
        reg.declare_type("object", vec![color]).unwrap();
        reg
    }

    fn cvar(reg: &mut SchemaRegistry, obj: &str) -> StateVariable {
        reg.resolve("color", obj).unwrap()
    }

    fn same(a: &StateVariable, b: &StateVariable) -> Fluent {
        Fluent::new(
            Predicate::Same,
            vec![Term::Var(a.clone()), Term::Var(b.clone())],
        )
        .unwrap()
    }

    fn equal(a: &StateVariable, val: &str) -> Fluent {
        Fluent::new(
            Predicate::Equal,
            vec![Term::Var(a.clone()), Term::Const(Value::sym(val))],
        )
        .unwrap()
    }

    #[test]
    fn folding_same_with_certainty_yields_uniform_diagonal() {
        let mut reg = registry();
        let a = cvar(&mut reg, "A");
        let b = cvar(&mut reg, "B");
        let mut belief = Belief::new(BeliefConfig::default());
        let obs = Observation::single(same(&a, &b), 1.0).unwrap();
        let stats = belief.belief_update(&obs, &[]).unwrap();
        assert_eq!(stats.folded, 1);
        // One joint factor over both variables, 1/3 on each agreeing pair.
        assert_eq!(belief.factor_structure(), vec![vec![a.clone(), b.clone()]]);
        let f = belief.factor_of(&a).unwrap();
        for idx in 0..f.len() {
            let expect = if idx % 4 == 0 { 1.0 / 3.0 } else { 0.0 };
            assert!((f.prob(idx) - expect).abs() < 1e-12);
        }
        belief.check_invariants().unwrap();
    }

    #[test]
    fn folding_same_at_half_confidence_matches_jeffrey() {
        let mut reg = registry();
        let a = cvar(&mut reg, "A");
        let b = cvar(&mut reg, "B");
        let mut belief = Belief::new(BeliefConfig::default());
        let obs = Observation::single(same(&a, &b), 0.5).unwrap();
        belief.belief_update(&obs, &[]).unwrap();
        let f = belief.factor_of(&a).unwrap();
        for idx in 0..f.len() {
            let expect = if idx % 4 == 0 { 1.0 / 6.0 } else { 1.0 / 12.0 };
            assert!((f.prob(idx) - expect).abs() < 1e-12, "idx {idx}");
        }
    }

    #[test]
    fn contradiction_policy_error_and_skip() {
        let mut reg = registry();
        let a = cvar(&mut reg, "A");
        let mut belief = Belief::new(BeliefConfig::default());
        belief
            .belief_update(&Observation::single(equal(&a, "red"), 1.0).unwrap(), &[])
            .unwrap();
        let bad = Observation::single(equal(&a, "blue"), 1.0).unwrap();
        let err = belief.belief_update(&bad, &[]).unwrap_err();
        assert!(matches!(err, BeliefError::Contradiction { .. }));

        let mut skipping = Belief::new(BeliefConfig {
            on_contradiction: ContradictionPolicy::Skip,
            ..BeliefConfig::default()
        });
        skipping
            .belief_update(&Observation::single(equal(&a, "red"), 1.0).unwrap(), &[])
            .unwrap();
        let stats = skipping.belief_update(&bad, &[]).unwrap();
        assert_eq!(stats.contradictions, 1);
        let m = skipping.marginal(std::slice::from_ref(&a)).unwrap();
        assert!((m.prob(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_prior_consistent_mass_is_a_contradiction_even_below_certainty() {
        let mut reg = registry();
        let a = cvar(&mut reg, "A");
        let mut belief = Belief::new(BeliefConfig::default());
        belief
            .belief_update(&Observation::single(equal(&a, "red"), 1.0).unwrap(), &[])
            .unwrap();
        let err = belief
            .belief_update(&Observation::single(equal(&a, "blue"), 0.7).unwrap(), &[])
            .unwrap_err();
        assert!(matches!(err, BeliefError::Contradiction { .. }));
    }

    #[test]
    fn oversized_joins_are_deferred_to_the_lazy_store() {
        let mut reg = registry();
        let a = cvar(&mut reg, "A");
        let b = cvar(&mut reg, "B");
        let config = BeliefConfig {
            max_joint_entries: 8, // a 3x3 join would have 9 entries
            ..BeliefConfig::default()
        };
        let mut belief = Belief::new(config);
        let obs = Observation::single(same(&a, &b), 0.9).unwrap();
        let stats = belief.belief_update(&obs, &[]).unwrap();
        assert_eq!(stats.deferred, 1);
        assert_eq!(belief.complex_fluents().len(), 1);
        // Both variables were still registered as singletons.
        assert_eq!(belief.factor_count(), 2);
        // The duplicate is not stored twice.
        belief.belief_update(&obs, &[]).unwrap();
        assert_eq!(belief.complex_fluents().len(), 1);
        belief.check_invariants().unwrap();
    }

    #[test]
    fn correlated_pair_splits_only_above_its_divergence() {
        // A perfectly correlated pair is far from its marginal product
        // (D_JS is about 0.2158 nats), so it must survive a 0.1 threshold
        // and split under a 0.5 threshold.
        let mut reg = registry();
        let a = cvar(&mut reg, "A");
        let b = cvar(&mut reg, "B");
        for (eps, expect_joint) in [(0.1, true), (0.5, false)] {
            let mut belief = Belief::new(BeliefConfig {
                epsilon: eps,
                ..BeliefConfig::default()
            });
            belief
                .belief_update(&Observation::single(same(&a, &b), 1.0).unwrap(), &[])
                .unwrap();
            let joint = belief.factor_of(&a).unwrap().arity() == 2;
            assert_eq!(joint, expect_joint, "epsilon {eps}");
            belief.check_invariants().unwrap();
        }
    }

    #[test]
    fn pinning_a_variable_splits_it_off_at_default_epsilon() {
        let mut reg = registry();
        let a = cvar(&mut reg, "A");
        let b = cvar(&mut reg, "B");
        let mut belief = Belief::new(BeliefConfig::default());
        belief
            .belief_update(&Observation::single(same(&a, &b), 1.0).unwrap(), &[])
            .unwrap();
        assert_eq!(belief.factor_count(), 1);
        belief
            .belief_update(&Observation::single(equal(&a, "green"), 1.0).unwrap(), &[])
            .unwrap();
        // Once color(A) is certain, color(B) is independent of it.
        assert_eq!(
            belief.factor_structure(),
            vec![vec![a.clone()], vec![b.clone()]]
        );
        let mb = belief.marginal(std::slice::from_ref(&b)).unwrap();
        assert!((mb.prob(1) - 1.0).abs() < 1e-12, "B pinned green too");
        belief.check_invariants().unwrap();
    }

    #[test]
    fn action_effects_extract_a_point_mass() {
        let mut reg = registry();
        let a = cvar(&mut reg, "A");
        let b = cvar(&mut reg, "B");
        let mut belief = Belief::new(BeliefConfig {
            epsilon: 0.0, // keep the joint so extraction itself is exercised
            ..BeliefConfig::default()
        });
        belief
            .belief_update(&Observation::single(same(&a, &b), 1.0).unwrap(), &[])
            .unwrap();
        belief
            .update_with_action(&[(a.clone(), Value::sym("blue"))])
            .unwrap();
        let fa = belief.factor_of(&a).unwrap();
        assert_eq!(fa.arity(), 1);
        assert!(fa.is_point_mass());
        let fb = belief.factor_of(&b).unwrap();
        assert_eq!(fb.arity(), 1);
        // The remainder keeps the marginal it had: uniform over colors.
        for &p in fb.probs() {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
        belief.check_invariants().unwrap();
    }

    #[test]
    fn effect_outside_domain_is_rejected() {
        let mut reg = registry();
        let a = cvar(&mut reg, "A");
        let mut belief = Belief::with_variables([a.clone()], BeliefConfig::default()).unwrap();
        let err = belief
            .update_with_action(&[(a, Value::sym("plaid"))])
            .unwrap_err();
        assert!(matches!(err, BeliefError::EffectOutsideDomain { .. }));
    }

    #[test]
    fn marginal_spanning_factors_is_an_error() {
        let mut reg = registry();
        let a = cvar(&mut reg, "A");
        let b = cvar(&mut reg, "B");
        let belief =
            Belief::with_variables([a.clone(), b.clone()], BeliefConfig::default()).unwrap();
        assert!(matches!(
            belief.marginal(&[a, b]),
            Err(BeliefError::QuerySpansFactors(_))
        ));
    }

    #[test]
    fn sample_state_respects_lazy_constraints() {
        let mut reg = registry();
        let a = cvar(&mut reg, "A");
        let b = cvar(&mut reg, "B");
        let config = BeliefConfig {
            max_joint_entries: 8,
            ..BeliefConfig::default()
        };
        let mut belief = Belief::new(config);
        belief
            .belief_update(&Observation::single(same(&a, &b), 1.0).unwrap(), &[])
            .unwrap();
        assert_eq!(belief.complex_fluents().len(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let s = belief.sample_state(&mut rng).unwrap();
            assert_eq!(s[&a], s[&b]);
        }
    }

    #[test]
    fn unsatisfiable_lazy_constraints_exhaust_the_search() {
        let mut reg = registry();
        let a = cvar(&mut reg, "A");
        let b = cvar(&mut reg, "B");
        let config = BeliefConfig {
            max_joint_entries: 8,
            max_backtrack_steps: 2_000,
            ..BeliefConfig::default()
        };
        let mut belief = Belief::new(config);
        // Pin both variables apart, then lazily require them equal.
        belief
            .belief_update(&Observation::single(equal(&a, "red"), 1.0).unwrap(), &[])
            .unwrap();
        belief
            .belief_update(&Observation::single(equal(&b, "blue"), 1.0).unwrap(), &[])
            .unwrap();
        let mut obs = Observation::empty();
        obs.push(same(&a, &b), 1.0);
        // Make the pair unfoldable so it lands in the lazy store.
        let stats = belief.belief_update(&obs, &[]).unwrap();
        assert_eq!(stats.deferred, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(matches!(
            belief.sample_state(&mut rng),
            Err(BeliefError::SearchExhausted { .. })
        ));
    }

    #[test]
    fn sampling_an_empty_belief_yields_an_empty_assignment() {
        let belief = Belief::new(BeliefConfig::default());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(belief.sample_state(&mut rng).unwrap().is_empty());
    }

    #[test]
    fn snapshot_is_stable_and_canonical() {
        let mut reg = registry();
        let a = cvar(&mut reg, "A");
        let b = cvar(&mut reg, "B");
        let mut belief = Belief::new(BeliefConfig::default());
        belief
            .belief_update(&Observation::single(same(&a, &b), 0.75).unwrap(), &[])
            .unwrap();
        let one = belief.snapshot();
        let two = belief.snapshot();
        assert_eq!(one, two);
        assert!(one.contains("color(A)"));
        assert!(one.contains("complex_fluents"));
    }

    #[test]
    fn duplicate_initial_variables_are_rejected() {
        let mut reg = registry();
        let a = cvar(&mut reg, "A");
        assert!(matches!(
            Belief::with_variables([a.clone(), a], BeliefConfig::default()),
            Err(BeliefError::DuplicateVariable(_))
        ));
    }
}
