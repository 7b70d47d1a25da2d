//! Determinize-and-replan agent for the cooking domain.
//!
//! Each planning round draws one concrete state from the belief, reconciles
//! it with what the agent certainly knows about itself (held and potted
//! ingredients, cook progress), and runs A* over a count abstraction of the
//! resulting deterministic world. The plan executes until an incoming
//! certain fact contradicts the hypothesis, then the agent replans. The
//! episode loop feeds every action's feedback and one sampled assertion per
//! step into the belief.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, VecDeque};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{Belief, BeliefConfig, BeliefError, BeliefRepr, ContradictionPolicy};
use crate::cooking::{
    location_name, AssertionSpace, CookingError, CookingSchema, HiddenWorld, Kind, Operator,
    VisibleState, WorldConfig, HOLD_CAPACITY, LIVING_COST, PICK_COST, PLACE_BASE_COST,
    PLACE_PER_ITEM_COST, SEASONING_PENALTY, VEGETABLE_SYM,
};
use crate::fluent::{Fluent, FluentError, Observation};
use crate::schema::{Assignment, CellPos, Value};
use crate::static_belief::StaticBelief;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("planning ran past the deadline")]
    Timeout,
}

#[derive(Debug, Error)]
pub enum EpisodeError {
    #[error(transparent)]
    Cooking(#[from] CookingError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error(transparent)]
    Fluent(#[from] FluentError),
}

/// Which belief implementation an episode runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Dynamic,
    Static,
}

impl Representation {
    pub fn label(self) -> &'static str {
        match self {
            Representation::Dynamic => "dynamic",
            Representation::Static => "static",
        }
    }
}

/// A fully determined view of the cooking world, assembled from one sampled
/// hypothesis plus the agent's certain knowledge of itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannerWorld {
    /// Cells believed to hold vegetables, sorted row-major.
    pub veg_cells: Vec<CellPos>,
    /// Cells believed to hold seasonings, sorted row-major.
    pub seas_cells: Vec<CellPos>,
    pub veg_held: usize,
    pub seas_held: usize,
    /// Steps until every potted vegetable is cooked.
    pub cook_remaining: u64,
}

/// Builds the planner's world from a sampled assignment. Position variables
/// of on-grid ingredients claim their cells and take the kind the hypothesis
/// assigns to that cell's contents (vegetable when the contents say empty,
/// which only happens when the hypothesis disagrees with itself). Any other
/// cell with non-empty contents becomes an anonymous ingredient. Held and
/// potted ingredients come from the visible state, never from the
/// hypothesis.
pub fn reconcile(
    hypothesis: &Assignment,
    visible: &VisibleState,
    schema: &CookingSchema,
) -> PlannerWorld {
    let off_grid: BTreeSet<usize> = visible
        .held
        .iter()
        .map(|&(i, _)| i)
        .chain(visible.potted.iter().map(|&(i, _, _)| i))
        .collect();
    let hypothesized_kind = |cell: CellPos| -> Option<Kind> {
        match hypothesis.get(schema.contents_var(cell)) {
            Some(v) if *v == Value::sym(VEGETABLE_SYM) => Some(Kind::Vegetable),
            Some(v) if *v == Value::sym(crate::cooking::SEASONING_SYM) => Some(Kind::Seasoning),
            _ => None,
        }
    };

    let mut claimed: BTreeSet<CellPos> = BTreeSet::new();
    let mut veg_cells: Vec<CellPos> = Vec::new();
    let mut seas_cells: Vec<CellPos> = Vec::new();
    for (i, pv) in schema.position_vars().iter().enumerate() {
        if off_grid.contains(&i) {
            continue;
        }
        if let Some(Value::Cell(cell)) = hypothesis.get(pv) {
            claimed.insert(*cell);
            match hypothesized_kind(*cell).unwrap_or(Kind::Vegetable) {
                Kind::Vegetable => veg_cells.push(*cell),
                Kind::Seasoning => seas_cells.push(*cell),
            }
        }
    }
    for cell in schema.all_cells() {
        if claimed.contains(&cell) {
            continue;
        }
        match hypothesized_kind(cell) {
            Some(Kind::Vegetable) => veg_cells.push(cell),
            Some(Kind::Seasoning) => seas_cells.push(cell),
            None => {}
        }
    }
    veg_cells.sort();
    seas_cells.sort();
    PlannerWorld {
        veg_cells,
        seas_cells,
        veg_held: visible
            .held
            .iter()
            .filter(|(_, k)| *k == Kind::Vegetable)
            .count(),
        seas_held: visible
            .held
            .iter()
            .filter(|(_, k)| *k == Kind::Seasoning)
            .count(),
        cook_remaining: visible.cook_remaining(),
    }
}

/// Count abstraction of a [`PlannerWorld`]: which cell an item sits on never
/// changes any cost, so only the per-kind tallies matter for search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct PlanState {
    veg_left: u32,
    seas_left: u32,
    veg_held: u32,
    seas_held: u32,
    cook_remaining: u32,
}

impl PlanState {
    fn is_goal(self) -> bool {
        self.veg_left == 0
            && self.seas_left == 0
            && self.veg_held == 0
            && self.seas_held == 0
            && self.cook_remaining == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AbstractOp {
    PickVeg,
    PickSeas,
    Place,
    Wait,
}

/// Successors with full step costs (operator plus living cost plus any
/// seasoning penalty). The cook timer runs down at the start of the step,
/// exactly as the simulator ticks its clock before applying the operator.
fn successors(s: PlanState) -> Vec<(PlanState, AbstractOp, u64)> {
    let cr = s.cook_remaining.saturating_sub(1);
    let held = s.veg_held + s.seas_held;
    let mut out = Vec::with_capacity(4);
    if s.veg_left > 0 && (held as usize) < HOLD_CAPACITY {
        out.push((
            PlanState {
                veg_left: s.veg_left - 1,
                veg_held: s.veg_held + 1,
                cook_remaining: cr,
                ..s
            },
            AbstractOp::PickVeg,
            PICK_COST + LIVING_COST,
        ));
    }
    if s.seas_left > 0 && (held as usize) < HOLD_CAPACITY {
        out.push((
            PlanState {
                seas_left: s.seas_left - 1,
                seas_held: s.seas_held + 1,
                cook_remaining: cr,
                ..s
            },
            AbstractOp::PickSeas,
            PICK_COST + LIVING_COST,
        ));
    }
    if held > 0 {
        let mut cost = PLACE_BASE_COST + PLACE_PER_ITEM_COST * held as u64 + LIVING_COST;
        let vegetables_all_cooked = s.veg_left == 0 && s.veg_held == 0 && cr == 0;
        if s.seas_held > 0 && !vegetables_all_cooked {
            cost += SEASONING_PENALTY;
        }
        out.push((
            PlanState {
                veg_held: 0,
                seas_held: 0,
                cook_remaining: if s.veg_held > 0 { 5 } else { cr },
                ..s
            },
            AbstractOp::Place,
            cost,
        ));
    }
    if s.cook_remaining > 0 {
        out.push((
            PlanState {
                cook_remaining: cr,
                ..s
            },
            AbstractOp::Wait,
            LIVING_COST,
        ));
    }
    out
}

/// Admissible lower bound on the remaining cost. Every on-grid item needs
/// its own pick; everything un-potted appears in some future placement (one
/// base charge, a per-item charge each); and the step count is at least the
/// cook timer and at least picks plus one placement.
fn heuristic(s: PlanState) -> u64 {
    let k_grid = (s.veg_left + s.seas_left) as u64;
    let k_all = k_grid + (s.veg_held + s.seas_held) as u64;
    let op_lb = if k_all > 0 {
        PLACE_BASE_COST + PLACE_PER_ITEM_COST * k_all + PICK_COST * k_grid
    } else {
        0
    };
    let steps_lb = (s.cook_remaining as u64).max(k_grid + u64::from(k_all > 0));
    op_lb + LIVING_COST * steps_lb
}

/// Optimal plan for a determinized world, as concrete operators. Picks are
/// grounded against the sorted cell lists in row-major order.
pub fn plan(
    world: &PlannerWorld,
    schema: &CookingSchema,
    deadline: Option<Instant>,
) -> Result<Vec<Operator>, PlanError> {
    let start = PlanState {
        veg_left: world.veg_cells.len() as u32,
        seas_left: world.seas_cells.len() as u32,
        veg_held: world.veg_held as u32,
        seas_held: world.seas_held as u32,
        cook_remaining: world.cook_remaining as u32,
    };
    if start.is_goal() {
        return Ok(Vec::new());
    }
    let mut best_g: HashMap<PlanState, u64> = HashMap::new();
    let mut parent: HashMap<PlanState, (PlanState, AbstractOp)> = HashMap::new();
    let mut open: BinaryHeap<Reverse<(u64, u64, PlanState)>> = BinaryHeap::new();
    best_g.insert(start, 0);
    open.push(Reverse((heuristic(start), 0, start)));
    let mut expansions = 0usize;
    while let Some(Reverse((_, g, state))) = open.pop() {
        if g > best_g[&state] {
            continue;
        }
        expansions += 1;
        if expansions % 256 == 0 {
            if let Some(d) = deadline {
                if Instant::now() >= d {
                    return Err(PlanError::Timeout);
                }
            }
        }
        if state.is_goal() {
            return Ok(ground(reconstruct(&parent, start, state), world, schema));
        }
        for (next, op, cost) in successors(state) {
            let ng = g + cost;
            if ng < best_g.get(&next).copied().unwrap_or(u64::MAX) {
                best_g.insert(next, ng);
                parent.insert(next, (state, op));
                open.push(Reverse((ng + heuristic(next), ng, next)));
            }
        }
    }
    unreachable!("every planner world can reach the goal by picking and placing");
}

fn reconstruct(
    parent: &HashMap<PlanState, (PlanState, AbstractOp)>,
    start: PlanState,
    goal: PlanState,
) -> Vec<AbstractOp> {
    let mut ops = Vec::new();
    let mut cur = goal;
    while cur != start {
        let (prev, op) = parent[&cur];
        ops.push(op);
        cur = prev;
    }
    ops.reverse();
    ops
}

fn ground(ops: Vec<AbstractOp>, world: &PlannerWorld, schema: &CookingSchema) -> Vec<Operator> {
    let mut veg_i = 0;
    let mut seas_i = 0;
    ops.into_iter()
        .map(|op| match op {
            AbstractOp::PickVeg => {
                let cell = world.veg_cells[veg_i];
                veg_i += 1;
                Operator::Pick {
                    location: location_name(schema.cols(), cell),
                }
            }
            AbstractOp::PickSeas => {
                let cell = world.seas_cells[seas_i];
                seas_i += 1;
                Operator::Pick {
                    location: location_name(schema.cols(), cell),
                }
            }
            AbstractOp::Place => Operator::PlaceInPot,
            AbstractOp::Wait => Operator::NoOp,
        })
        .collect()
}

/// True when a certain fluent rules the hypothesis out. Fluents mentioning
/// variables the hypothesis does not cover are inconclusive.
pub fn rejects_hypothesis(hypothesis: &Assignment, fluent: &Fluent) -> bool {
    matches!(fluent.evaluate(hypothesis), Ok(false))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeConfig {
    pub world: WorldConfig,
    pub belief: BeliefConfig,
    /// Confidence attached to the per-step assertion stream; also the chance
    /// each assertion is true.
    pub assertion_confidence: f64,
    pub max_steps: usize,
    /// State draws attempted per planning round before falling back to a
    /// probing no-op.
    pub determinize_attempts: usize,
    /// Planning rounds in a row that may fail to determinize before the
    /// episode is abandoned.
    pub max_consecutive_determinize_failures: usize,
    pub timeout_s: Option<f64>,
    pub seed: u64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            world: WorldConfig::with_ingredients(4, 4, 6),
            belief: BeliefConfig::default(),
            assertion_confidence: 1.0,
            max_steps: 10_000,
            determinize_attempts: 10,
            max_consecutive_determinize_failures: 20,
            timeout_s: None,
            seed: 0,
        }
    }
}

impl EpisodeConfig {
    /// The hidden layout an episode with this configuration plays against,
    /// for inspection and demos. Layout generation draws from the world
    /// stream first, so this matches `run_episode` for the same seed.
    pub fn hidden_world(&self) -> Result<HiddenWorld, CookingError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        HiddenWorld::generate(self.world, &mut rng)
    }
}

/// Everything measured over one episode. Times are raw totals so that rates
/// can be aggregated across many episodes without weighting bugs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub seed: u64,
    pub solved: bool,
    pub steps: usize,
    pub total_cost: u64,
    pub wall_time_s: f64,
    pub update_count: usize,
    pub update_time_s: f64,
    pub sample_count: usize,
    pub sample_time_s: f64,
    pub factor_count_mean: f64,
    pub factor_entries_mean: f64,
    pub replans: usize,
    pub determinize_failures: usize,
    pub deferred_fluents: usize,
}

impl EpisodeResult {
    pub fn mean_update_time_s(&self) -> f64 {
        if self.update_count == 0 {
            0.0
        } else {
            self.update_time_s / self.update_count as f64
        }
    }

    /// State-sampling throughput measured inside the sampling calls.
    pub fn queries_per_second(&self) -> f64 {
        if self.sample_time_s <= 0.0 {
            0.0
        } else {
            self.sample_count as f64 / self.sample_time_s
        }
    }
}

/// Runs one full episode with the chosen representation.
pub fn run_episode(
    config: &EpisodeConfig,
    repr: Representation,
) -> Result<EpisodeResult, EpisodeError> {
    let schema = CookingSchema::new(&config.world);
    // Benchmark episodes drop contradictory assertions instead of aborting;
    // long noisy streams can starve a tuple of mass outright.
    let mut belief_config = config.belief.clone();
    belief_config.on_contradiction = ContradictionPolicy::Skip;
    match repr {
        Representation::Dynamic => {
            let belief = Belief::with_variables(schema.initial_variables(), belief_config)?;
            run_episode_with(config, schema, belief)
        }
        Representation::Static => {
            let belief = StaticBelief::with_variables(schema.initial_variables(), belief_config)?;
            run_episode_with(config, schema, belief)
        }
    }
}

fn run_episode_with<B: BeliefRepr>(
    config: &EpisodeConfig,
    schema: CookingSchema,
    mut belief: B,
) -> Result<EpisodeResult, EpisodeError> {
    let mut world_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut agent_rng = ChaCha8Rng::seed_from_u64(config.seed);
    agent_rng.set_stream(1);
    let mut world = HiddenWorld::generate(config.world, &mut world_rng)?;
    let space = AssertionSpace::new(&schema, config.world.ingredients());

    let start = Instant::now();
    let deadline = config
        .timeout_s
        .map(|s| start + Duration::from_secs_f64(s));
    let mut result = EpisodeResult {
        seed: config.seed,
        solved: world.goal_test(),
        steps: 0,
        total_cost: 0,
        wall_time_s: 0.0,
        update_count: 0,
        update_time_s: 0.0,
        sample_count: 0,
        sample_time_s: 0.0,
        factor_count_mean: 0.0,
        factor_entries_mean: 0.0,
        replans: 0,
        determinize_failures: 0,
        deferred_fluents: 0,
    };
    let mut factor_count_sum = 0.0;
    let mut factor_entries_sum = 0.0;
    let mut plan_queue: VecDeque<Operator> = VecDeque::new();
    let mut hypothesis: Option<Assignment> = None;
    let mut consecutive_failures = 0usize;

    let record_update = |belief: &B,
                             result: &mut EpisodeResult,
                             count_sum: &mut f64,
                             entries_sum: &mut f64,
                             elapsed: f64| {
        result.update_count += 1;
        result.update_time_s += elapsed;
        let sizes = belief.factor_sizes();
        *count_sum += sizes.len() as f64;
        if !sizes.is_empty() {
            *entries_sum += sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
        }
    };

    while !result.solved && result.steps < config.max_steps {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        if plan_queue.is_empty() {
            let mut drawn = None;
            for _ in 0..config.determinize_attempts {
                let t0 = Instant::now();
                let outcome = belief.sample_state(&mut agent_rng);
                result.sample_time_s += t0.elapsed().as_secs_f64();
                result.sample_count += 1;
                if let Ok(state) = outcome {
                    drawn = Some(state);
                    break;
                }
            }
            match drawn {
                Some(h) => {
                    consecutive_failures = 0;
                    let pw = reconcile(&h, &world.visible(), &schema);
                    match plan(&pw, &schema, deadline) {
                        Ok(ops) if ops.is_empty() => {
                            // The hypothesis says the goal is met but the
                            // real world disagrees; probe for information.
                            hypothesis = Some(h);
                            plan_queue.push_back(Operator::NoOp);
                        }
                        Ok(ops) => {
                            hypothesis = Some(h);
                            plan_queue.extend(ops);
                        }
                        Err(PlanError::Timeout) => break,
                    }
                }
                None => {
                    result.determinize_failures += 1;
                    consecutive_failures += 1;
                    if consecutive_failures >= config.max_consecutive_determinize_failures {
                        break;
                    }
                    hypothesis = None;
                    plan_queue.push_back(Operator::NoOp);
                }
            }
        }

        let op = plan_queue.pop_front().expect("planning always queues one");
        let outcome = match world.step(&op, &schema) {
            Ok(o) => o,
            Err(_) => {
                // A stale plan issued an invalid operator; replan.
                plan_queue.clear();
                result.replans += 1;
                continue;
            }
        };
        result.steps += 1;
        result.total_cost += outcome.cost;

        // First update: what the action itself revealed, then its effects.
        let feedback = Observation::new(
            outcome.revealed.iter().map(|f| (f.clone(), 1.0)).collect(),
        )?;
        let t0 = Instant::now();
        belief.belief_update(&feedback, &outcome.effects)?;
        record_update(
            &belief,
            &mut result,
            &mut factor_count_sum,
            &mut factor_entries_sum,
            t0.elapsed().as_secs_f64(),
        );
        if let Some(h) = &mut hypothesis {
            if outcome
                .revealed
                .iter()
                .any(|f| rejects_hypothesis(h, f))
            {
                plan_queue.clear();
                result.replans += 1;
                hypothesis = None;
            } else {
                // Keep the hypothesis aligned with the world we acted on.
                for (v, value) in &outcome.effects {
                    h.insert(v.clone(), value.clone());
                }
            }
        }

        // Second update: one assertion about the post-step state.
        let (fluent, p) =
            space.sample_assertion(&world, &schema, &mut world_rng, config.assertion_confidence);
        let assertion = Observation::single(fluent.clone(), p)?;
        let t0 = Instant::now();
        belief.belief_update(&assertion, &[])?;
        record_update(
            &belief,
            &mut result,
            &mut factor_count_sum,
            &mut factor_entries_sum,
            t0.elapsed().as_secs_f64(),
        );
        if p >= 1.0 {
            if let Some(h) = &hypothesis {
                if rejects_hypothesis(h, &fluent) {
                    plan_queue.clear();
                    result.replans += 1;
                    hypothesis = None;
                }
            }
        }

        result.solved = world.goal_test();
    }

    if result.update_count > 0 {
        result.factor_count_mean = factor_count_sum / result.update_count as f64;
        result.factor_entries_mean = factor_entries_sum / result.update_count as f64;
    }
    result.deferred_fluents = belief.complex_fluent_count();
    result.wall_time_s = start.elapsed().as_secs_f64();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooking::{ingredient_name, EMPTY_SYM};

    fn veg_at(r: usize, c: usize) -> (Kind, CellPos) {
        (Kind::Vegetable, CellPos { row: r, col: c })
    }

    fn seas_at(r: usize, c: usize) -> (Kind, CellPos) {
        (Kind::Seasoning, CellPos { row: r, col: c })
    }

    fn execute(
        world: &mut HiddenWorld,
        schema: &CookingSchema,
        ops: &[Operator],
    ) -> u64 {
        ops.iter()
            .map(|op| world.step(op, schema).unwrap().cost)
            .sum()
    }

    #[test]
    fn single_vegetable_plan_costs_240() {
        let config = WorldConfig {
            rows: 1,
            cols: 1,
            vegetables: 1,
            seasonings: 0,
        };
        let schema = CookingSchema::new(&config);
        let pw = PlannerWorld {
            veg_cells: vec![CellPos { row: 0, col: 0 }],
            seas_cells: vec![],
            veg_held: 0,
            seas_held: 0,
            cook_remaining: 0,
        };
        let ops = plan(&pw, &schema, None).unwrap();
        assert_eq!(ops.len(), 7);
        let mut world = HiddenWorld::from_layout(config, &[veg_at(0, 0)]).unwrap();
        assert_eq!(execute(&mut world, &schema, &ops), 240);
        assert!(world.goal_test());
    }

    #[test]
    fn planner_batches_picks_before_placing() {
        let config = WorldConfig {
            rows: 1,
            cols: 2,
            vegetables: 2,
            seasonings: 0,
        };
        let schema = CookingSchema::new(&config);
        let pw = PlannerWorld {
            veg_cells: vec![CellPos { row: 0, col: 0 }, CellPos { row: 0, col: 1 }],
            seas_cells: vec![],
            veg_held: 0,
            seas_held: 0,
            cook_remaining: 0,
        };
        let ops = plan(&pw, &schema, None).unwrap();
        // Two picks, one placement of both, five waits.
        assert_eq!(
            ops,
            vec![
                Operator::Pick { location: "L1".into() },
                Operator::Pick { location: "L2".into() },
                Operator::PlaceInPot,
                Operator::NoOp,
                Operator::NoOp,
                Operator::NoOp,
                Operator::NoOp,
                Operator::NoOp,
            ]
        );
        let mut world =
            HiddenWorld::from_layout(config, &[veg_at(0, 0), veg_at(0, 1)]).unwrap();
        assert_eq!(execute(&mut world, &schema, &ops), 20 + 20 + 200 + 80);
        assert!(world.goal_test());
    }

    #[test]
    fn planner_never_pays_the_seasoning_penalty() {
        let config = WorldConfig {
            rows: 2,
            cols: 2,
            vegetables: 1,
            seasonings: 1,
        };
        let schema = CookingSchema::new(&config);
        let pw = PlannerWorld {
            veg_cells: vec![CellPos { row: 0, col: 0 }],
            seas_cells: vec![CellPos { row: 1, col: 1 }],
            veg_held: 0,
            seas_held: 0,
            cook_remaining: 0,
        };
        let ops = plan(&pw, &schema, None).unwrap();
        let mut world =
            HiddenWorld::from_layout(config, &[veg_at(0, 0), seas_at(1, 1)]).unwrap();
        let cost = execute(&mut world, &schema, &ops);
        assert!(world.goal_test());
        assert!(cost < SEASONING_PENALTY, "optimal plan paid the penalty: {cost}");
    }

    #[test]
    fn empty_world_needs_no_plan() {
        let config = WorldConfig {
            rows: 2,
            cols: 2,
            vegetables: 0,
            seasonings: 0,
        };
        let schema = CookingSchema::new(&config);
        let pw = PlannerWorld {
            veg_cells: vec![],
            seas_cells: vec![],
            veg_held: 0,
            seas_held: 0,
            cook_remaining: 0,
        };
        assert!(plan(&pw, &schema, None).unwrap().is_empty());
    }

    #[test]
    fn heuristic_is_admissible_on_exhaustive_small_states() {
        // Uniform-cost search gives the true remaining cost; the heuristic
        // must never exceed it.
        for veg_left in 0..3u32 {
            for seas_left in 0..3u32 {
                for veg_held in 0..3u32 {
                    for seas_held in 0..3u32 {
                        for cook_remaining in 0..6u32 {
                            let s = PlanState {
                                veg_left,
                                seas_left,
                                veg_held,
                                seas_held,
                                cook_remaining,
                            };
                            let truth = dijkstra_cost(s);
                            assert!(
                                heuristic(s) <= truth,
                                "h({s:?}) = {} > {truth}",
                                heuristic(s)
                            );
                        }
                    }
                }
            }
        }
    }

    fn dijkstra_cost(start: PlanState) -> u64 {
        let mut best: HashMap<PlanState, u64> = HashMap::new();
        let mut open = BinaryHeap::new();
        best.insert(start, 0);
        open.push(Reverse((0u64, start)));
        while let Some(Reverse((g, s))) = open.pop() {
            if g > best[&s] {
                continue;
            }
            if s.is_goal() {
                return g;
            }
            for (next, _, cost) in successors(s) {
                let ng = g + cost;
                if ng < best.get(&next).copied().unwrap_or(u64::MAX) {
                    best.insert(next, ng);
                    open.push(Reverse((ng, next)));
                }
            }
        }
        unreachable!("goal is always reachable");
    }

    #[test]
    fn reconcile_prefers_known_positions_and_fills_in_anonymous_ones() {
        let config = WorldConfig {
            rows: 2,
            cols: 2,
            vegetables: 1,
            seasonings: 1,
        };
        let schema = CookingSchema::new(&config);
        let mut hypothesis = Assignment::new();
        // ing1 claims (0,0); contents there say seasoning, so it counts as
        // one. The unclaimed (1,1) shows a vegetable: anonymous.
        hypothesis.insert(
            schema.position_var(0).clone(),
            Value::cell(0, 0),
        );
        hypothesis.insert(
            schema.contents_var(CellPos { row: 0, col: 0 }).clone(),
            Value::sym(crate::cooking::SEASONING_SYM),
        );
        hypothesis.insert(
            schema.contents_var(CellPos { row: 1, col: 1 }).clone(),
            Value::sym(VEGETABLE_SYM),
        );
        let visible = VisibleState {
            clock: 0,
            held: vec![],
            potted: vec![],
        };
        let pw = reconcile(&hypothesis, &visible, &schema);
        assert_eq!(pw.seas_cells, vec![CellPos { row: 0, col: 0 }]);
        assert_eq!(pw.veg_cells, vec![CellPos { row: 1, col: 1 }]);
        assert_eq!((pw.veg_held, pw.seas_held, pw.cook_remaining), (0, 0, 0));
    }

    #[test]
    fn reconcile_excludes_held_and_potted_ingredients() {
        let config = WorldConfig {
            rows: 2,
            cols: 2,
            vegetables: 2,
            seasonings: 0,
        };
        let schema = CookingSchema::new(&config);
        let mut hypothesis = Assignment::new();
        // Both position variables are stale point masses from before the
        // agent picked the ingredients up.
        hypothesis.insert(schema.position_var(0).clone(), Value::cell(0, 0));
        hypothesis.insert(schema.position_var(1).clone(), Value::cell(0, 1));
        for cell in schema.all_cells() {
            hypothesis.insert(
                schema.contents_var(cell).clone(),
                Value::sym(EMPTY_SYM),
            );
        }
        let visible = VisibleState {
            clock: 8,
            held: vec![(0, Kind::Vegetable)],
            potted: vec![(1, Kind::Vegetable, 6)],
        };
        let pw = reconcile(&hypothesis, &visible, &schema);
        assert!(pw.veg_cells.is_empty());
        assert_eq!(pw.veg_held, 1);
        // Placed at 6, clock 8: three more steps of cooking.
        assert_eq!(pw.cook_remaining, 3);
    }

    #[test]
    fn certain_fluents_reject_only_covered_false_hypotheses() {
        let config = WorldConfig {
            rows: 1,
            cols: 2,
            vegetables: 1,
            seasonings: 0,
        };
        let schema = CookingSchema::new(&config);
        let mut hypothesis = Assignment::new();
        hypothesis.insert(
            schema.contents_var(CellPos { row: 0, col: 0 }).clone(),
            Value::sym(VEGETABLE_SYM),
        );
        let agrees = Fluent::new(
            crate::fluent::Predicate::Equal,
            vec![
                crate::fluent::Term::Var(schema.contents_var(CellPos { row: 0, col: 0 }).clone()),
                crate::fluent::Term::Const(Value::sym(VEGETABLE_SYM)),
            ],
        )
        .unwrap();
        let refutes = Fluent::new(
            crate::fluent::Predicate::Equal,
            vec![
                crate::fluent::Term::Var(schema.contents_var(CellPos { row: 0, col: 0 }).clone()),
                crate::fluent::Term::Const(Value::sym(EMPTY_SYM)),
            ],
        )
        .unwrap();
        let uncovered = Fluent::new(
            crate::fluent::Predicate::Equal,
            vec![
                crate::fluent::Term::Var(schema.position_var(0).clone()),
                crate::fluent::Term::Const(Value::cell(0, 0)),
            ],
        )
        .unwrap();
        assert!(!rejects_hypothesis(&hypothesis, &agrees));
        assert!(rejects_hypothesis(&hypothesis, &refutes));
        assert!(!rejects_hypothesis(&hypothesis, &uncovered));
    }

    #[test]
    fn dynamic_episode_solves_a_small_world() {
        let config = EpisodeConfig {
            world: WorldConfig::with_ingredients(2, 2, 2),
            seed: 42,
            ..EpisodeConfig::default()
        };
        let r = run_episode(&config, Representation::Dynamic).unwrap();
        assert!(r.solved, "{r:?}");
        assert!(r.total_cost >= 240, "cannot beat the one-ingredient floor");
        assert!(r.steps >= 7);
        assert!(r.update_count == 2 * r.steps);
        assert!(r.sample_count > 0);
        let name = ingredient_name(0);
        assert_eq!(name, "ing1");
    }

    #[test]
    fn static_episode_solves_a_small_world() {
        let config = EpisodeConfig {
            world: WorldConfig::with_ingredients(2, 2, 2),
            seed: 42,
            ..EpisodeConfig::default()
        };
        let r = run_episode(&config, Representation::Static).unwrap();
        assert!(r.solved, "{r:?}");
    }

    #[test]
    fn episodes_with_the_same_seed_replay_identically() {
        let config = EpisodeConfig {
            world: WorldConfig::with_ingredients(3, 3, 3),
            seed: 7,
            ..EpisodeConfig::default()
        };
        let a = run_episode(&config, Representation::Dynamic).unwrap();
        let b = run_episode(&config, Representation::Dynamic).unwrap();
        assert_eq!(a.solved, b.solved);
        assert_eq!(a.steps, b.steps);
        assert_eq!(a.total_cost, b.total_cost);
        assert_eq!(a.sample_count, b.sample_count);
        assert_eq!(a.update_count, b.update_count);
        assert_eq!(a.replans, b.replans);
    }

    #[test]
    fn zero_ingredient_episode_is_solved_at_birth() {
        let config = EpisodeConfig {
            world: WorldConfig {
                rows: 2,
                cols: 2,
                vegetables: 0,
                seasonings: 0,
            },
            seed: 1,
            ..EpisodeConfig::default()
        };
        let r = run_episode(&config, Representation::Dynamic).unwrap();
        assert!(r.solved);
        assert_eq!(r.steps, 0);
        assert_eq!(r.total_cost, 0);
    }

    #[test]
    fn timeout_ends_an_episode_unsolved() {
        let config = EpisodeConfig {
            world: WorldConfig::with_ingredients(4, 4, 6),
            timeout_s: Some(0.0),
            seed: 3,
            ..EpisodeConfig::default()
        };
        let r = run_episode(&config, Representation::Dynamic).unwrap();
        assert!(!r.solved);
        assert_eq!(r.steps, 0);
    }
}
