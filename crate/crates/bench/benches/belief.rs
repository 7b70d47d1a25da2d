//! Microbenchmarks for the operations the episode loop leans on: folding
//! observation streams into each representation, drawing states from folded
//! and deferred constraints, and the divergence behind the split test.

use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dfb_core::{
    Belief, BeliefConfig, ContradictionPolicy, CookingSchema, Fluent, JointDistribution,
    Observation, Predicate, PropertySchema, SchemaRegistry, StateVariable, StaticBelief, Term,
    Value, WorldConfig,
};

fn skip_config() -> BeliefConfig {
    BeliefConfig {
        on_contradiction: ContradictionPolicy::Skip,
        ..BeliefConfig::default()
    }
}

/// One uncertain contents assertion per cell of a 4x4 kitchen.
fn contents_stream(schema: &CookingSchema) -> Vec<Observation> {
    let symbols = [Value::sym("vegetable"), Value::sym("seasoning"), Value::sym("empty")];
    schema
        .all_cells()
        .enumerate()
        .map(|(i, cell)| {
            let fluent = Fluent::new(
                Predicate::Equal,
                vec![
                    Term::Var(schema.contents_var(cell).clone()),
                    Term::Const(symbols[i % 3].clone()),
                ],
            )
            .unwrap();
            Observation::single(fluent, 0.9).unwrap()
        })
        .collect()
}

fn bench_belief_update(c: &mut Criterion) {
    let world = WorldConfig::with_ingredients(4, 4, 0);
    let schema = CookingSchema::new(&world);
    let stream = contents_stream(&schema);
    let vars = schema.initial_variables();

    let mut group = c.benchmark_group("belief_update");
    group.bench_function("dynamic_16_cells", |b| {
        b.iter_batched(
            || Belief::with_variables(vars.clone(), skip_config()).unwrap(),
            |mut belief| {
                for obs in &stream {
                    belief.belief_update(obs, &[]).unwrap();
                }
                belief
            },
            BatchSize::SmallInput,
        )
    });
    group.bench_function("static_16_cells", |b| {
        b.iter_batched(
            || StaticBelief::with_variables(vars.clone(), skip_config()).unwrap(),
            |mut belief| {
                for obs in &stream {
                    belief.belief_update(obs, &[]).unwrap();
                }
                belief
            },
            BatchSize::SmallInput,
        )
    });

    // A relational pair forces a join; the follow-up point fact forces the
    // split pass to undo it.
    let cells: Vec<_> = schema.all_cells().collect();
    let same = Fluent::new(
        Predicate::Same,
        vec![
            Term::Var(schema.contents_var(cells[0]).clone()),
            Term::Var(schema.contents_var(cells[1]).clone()),
        ],
    )
    .unwrap();
    let pin = Fluent::new(
        Predicate::Equal,
        vec![
            Term::Var(schema.contents_var(cells[0]).clone()),
            Term::Const(Value::sym("vegetable")),
        ],
    )
    .unwrap();
    let join_obs = Observation::single(same, 1.0).unwrap();
    let split_obs = Observation::single(pin, 1.0).unwrap();
    group.bench_function("dynamic_join_then_split", |b| {
        b.iter_batched(
            || Belief::with_variables(vars.clone(), skip_config()).unwrap(),
            |mut belief| {
                belief.belief_update(&join_obs, &[]).unwrap();
                belief.belief_update(&split_obs, &[]).unwrap();
                belief
            },
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

/// Three markers on a 1x6 row with adjacency constraints, either folded into
/// one joint or deferred to the lazy store by a small join budget.
fn marker_belief(max_joint_entries: usize) -> Belief {
    let slot_values: Vec<Value> = (0..6).map(|c| Value::cell(0, c)).collect();
    let mut reg = SchemaRegistry::new();
    reg.declare_type("marker", vec![PropertySchema::new("slot", slot_values)])
        .unwrap();
    let slots: Vec<StateVariable> = ["P", "Q", "R"]
        .iter()
        .map(|o| reg.resolve("slot", o).unwrap())
        .collect();
    let mut belief = Belief::new(BeliefConfig {
        max_joint_entries,
        ..BeliefConfig::default()
    });
    for pair in slots.windows(2) {
        let fluent = Fluent::new(
            Predicate::NextTo,
            vec![Term::Var(pair[0].clone()), Term::Var(pair[1].clone())],
        )
        .unwrap();
        belief
            .belief_update(&Observation::single(fluent, 1.0).unwrap(), &[])
            .unwrap();
    }
    belief
}

fn bench_sample_state(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_state");
    let folded = marker_belief(1_000_000);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    group.bench_function("folded_chain", |b| {
        b.iter(|| folded.sample_state(&mut rng).unwrap())
    });
    let deferred = marker_belief(8);
    group.bench_function("deferred_chain", |b| {
        b.iter(|| deferred.sample_state(&mut rng).unwrap())
    });
    group.finish();
}

fn bench_js_divergence(c: &mut Criterion) {
    let mut reg = SchemaRegistry::new();
    let domain: Vec<Value> = (0..1024).map(Value::Int).collect();
    reg.declare_type("t", vec![PropertySchema::new("d", domain)])
        .unwrap();
    let var = reg.resolve("d", "x").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut draw = || -> Vec<f64> { (0..1024).map(|_| rng.gen_range(0.001..1.0)).collect() };
    let a = JointDistribution::new(vec![var.clone()], draw()).unwrap();
    let b = JointDistribution::new(vec![var], draw()).unwrap();
    c.bench_function("js_divergence_1024", |bench| {
        bench.iter(|| black_box(&a).js_divergence(black_box(&b)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_belief_update,
    bench_sample_state,
    bench_js_divergence
);
criterion_main!(benches);
