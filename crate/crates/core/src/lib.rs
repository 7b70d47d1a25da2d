//! Dynamically factored beliefs over relational probabilistic constraints,
//! plus a gridworld cooking benchmark that exercises them.
//!
//! The heart of the crate is [`Belief`]: a joint distribution over discrete
//! state variables kept in factored form, where the factoring itself is
//! reshaped by the constraints that arrive. Incoming fluents join the factors
//! they touch and reweight them by Jeffrey's rule; afterwards any variable
//! that has become independent splits back off. Constraints too wide to fold
//! are stored lazily and enforced when full states are sampled. A
//! [`StaticBelief`] baseline keeps a fixed factoring for comparison, and the
//! `cooking` and `planner` modules provide a partially observable cooking
//! domain and a determinize-and-replan agent for benchmarking both.

pub mod belief;
pub mod cooking;
pub mod dist;
pub mod fluent;
pub mod harness;
pub mod parser;
pub mod planner;
pub mod repl;
pub mod schema;
pub mod static_belief;

pub use belief::{
    Belief, BeliefConfig, BeliefError, BeliefRepr, ContradictionPolicy, UpdateStats,
};
pub use cooking::{
    ingredient_name, location_name, AssertionSpace, CookingError, CookingSchema, HiddenWorld,
    Kind, Operator, StepOutcome, VisibleState, WorldConfig,
};
pub use dist::{DistError, JointDistribution};
pub use fluent::{EvalError, Fluent, FluentError, Observation, Predicate, PredicateRegistry, Term};
pub use harness::{
    episodes_csv, report_json, run_benchmark, run_sweep, sweep_csv, sweep_summary_csv, Aggregate,
    BenchmarkConfig, BenchmarkReport, SweepConfig, SweepPoint,
};
pub use parser::{parse_fluent, parse_variable, ParseError};
pub use planner::{
    plan, reconcile, run_episode, EpisodeConfig, EpisodeError, EpisodeResult, PlanError,
    PlannerWorld, Representation,
};
pub use repl::{ReplError, ReplReply, ReplSession};
pub use schema::{
    Assignment, CellPos, ObjectType, PropertySchema, Rect, SchemaError, SchemaRegistry,
    StateVariable, Value,
};
pub use static_belief::StaticBelief;
