//! Command line front end: batch benchmarks, parameter sweeps, a narrated
//! single episode, and an interactive prompt against a live belief state.
//!
//! Subcommands read an optional JSON configuration file and then apply any
//! explicit flags on top, so a config file never locks out quick overrides.

use std::fs;
use std::io::{self, BufRead, Write as _};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dfb_core::{
    episodes_csv, ingredient_name, location_name, report_json, run_benchmark, run_episode,
    run_sweep, sweep_csv, sweep_summary_csv, BenchmarkConfig, BenchmarkReport, CellPos,
    CookingSchema, EpisodeResult, Kind, ReplReply, ReplSession, Representation, SchemaRegistry,
    SweepConfig, WorldConfig,
};

#[derive(Parser)]
#[command(
    name = "dfb",
    version,
    about = "Factored-belief benchmarks over a hidden-ingredient kitchen"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration over a batch of seeds and print aggregates.
    Bench(BenchArgs),
    /// Run a cartesian parameter sweep and emit per-point summaries.
    Sweep(SweepArgs),
    /// Generate one hidden world, run one episode, and report what happened.
    Demo(DemoArgs),
    /// Interactive prompt: assert fluents, inspect marginals, draw samples.
    Repl(ReplArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ReprArg {
    Dynamic,
    Static,
}

impl From<ReprArg> for Representation {
    fn from(arg: ReprArg) -> Representation {
        match arg {
            ReprArg::Dynamic => Representation::Dynamic,
            ReprArg::Static => Representation::Static,
        }
    }
}

/// Episode knobs shared by `bench`, `sweep`, and `demo`. Every field is
/// optional; unset fields keep whatever the config file or default says.
#[derive(Args)]
struct EpisodeArgs {
    /// Grid rows.
    #[arg(long)]
    rows: Option<usize>,
    /// Grid columns.
    #[arg(long)]
    cols: Option<usize>,
    /// Ingredients hidden in the grid; two thirds round up to vegetables.
    #[arg(long)]
    ingredients: Option<usize>,
    /// Belief representation to run.
    #[arg(long, value_enum)]
    representation: Option<ReprArg>,
    /// Confidence carried by the per-step assertion stream.
    #[arg(long)]
    confidence: Option<f64>,
    /// Independence gap below which a factor splits.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Joint-size budget above which fluents stay in the lazy store.
    #[arg(long)]
    max_joint_entries: Option<usize>,
    /// Step budget before an episode is abandoned.
    #[arg(long)]
    max_steps: Option<usize>,
    /// Wall-clock budget per episode, in seconds.
    #[arg(long)]
    timeout_s: Option<f64>,
}

impl EpisodeArgs {
    fn apply(&self, config: &mut BenchmarkConfig) {
        let world = &mut config.episode.world;
        let rows = self.rows.unwrap_or(world.rows);
        let cols = self.cols.unwrap_or(world.cols);
        let count = self.ingredients.unwrap_or(world.ingredients());
        *world = WorldConfig::with_ingredients(rows, cols, count);
        if let Some(repr) = self.representation {
            config.representation = repr.into();
        }
        if let Some(p) = self.confidence {
            config.episode.assertion_confidence = p;
        }
        if let Some(eps) = self.epsilon {
            config.episode.belief.epsilon = eps;
        }
        if let Some(cap) = self.max_joint_entries {
            config.episode.belief.max_joint_entries = cap;
        }
        if let Some(steps) = self.max_steps {
            config.episode.max_steps = steps;
        }
        if let Some(budget) = self.timeout_s {
            config.episode.timeout_s = Some(budget);
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    /// JSON benchmark configuration; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    episode: EpisodeArgs,
    /// Episodes to run, seeded `first_seed..first_seed + episodes`.
    #[arg(long)]
    episodes: Option<usize>,
    /// Seed of the first episode.
    #[arg(long)]
    first_seed: Option<u64>,
    /// Write per-episode rows as CSV to this path, or `-` for stdout.
    #[arg(long)]
    csv: Option<String>,
    /// Write the full report as JSON to this path, or `-` for stdout.
    #[arg(long)]
    json: Option<String>,
    /// Zero wall-clock fields so identical runs emit identical bytes.
    #[arg(long)]
    stable_output: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep configuration; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    episode: EpisodeArgs,
    /// Episodes per sweep point.
    #[arg(long)]
    episodes: Option<usize>,
    /// Seed of the first episode at every point.
    #[arg(long)]
    first_seed: Option<u64>,
    /// Representation axis.
    #[arg(long, value_enum, value_delimiter = ',')]
    representations: Vec<ReprArg>,
    /// Assertion confidence axis.
    #[arg(long, value_delimiter = ',')]
    confidences: Vec<f64>,
    /// Split threshold axis.
    #[arg(long, value_delimiter = ',')]
    epsilons: Vec<f64>,
    /// Grid axis, e.g. `4x4,5x5`.
    #[arg(long, value_delimiter = ',')]
    grids: Vec<String>,
    /// Ingredient count axis.
    #[arg(long, value_delimiter = ',')]
    ingredient_counts: Vec<usize>,
    /// Emit every episode row instead of one summary row per point.
    #[arg(long)]
    per_episode: bool,
    /// Output path, or `-` for stdout.
    #[arg(long, default_value = "-")]
    out: String,
    /// Zero wall-clock fields so identical runs emit identical bytes.
    #[arg(long)]
    stable_output: bool,
}

#[derive(Args)]
struct DemoArgs {
    #[command(flatten)]
    episode: EpisodeArgs,
    /// Episode seed; fixes both the hidden layout and the agent's draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ReplArgs {
    /// JSON schema file declaring object types and property domains.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Grid rows for the built-in kitchen schema.
    #[arg(long, default_value_t = 3)]
    rows: usize,
    /// Grid columns for the built-in kitchen schema.
    #[arg(long, default_value_t = 3)]
    cols: usize,
    /// Seed for the `sample` command.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independence gap below which a factor splits.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Joint-size budget above which fluents stay in the lazy store.
    #[arg(long)]
    max_joint_entries: Option<usize>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Bench(args) => bench(&args),
        Command::Sweep(args) => sweep(&args),
        Command::Demo(args) => demo(&args),
        Command::Repl(args) => repl(&args),
    }
}

fn bench(args: &BenchArgs) -> Result<()> {
    let mut config: BenchmarkConfig = match &args.config {
        Some(path) => read_json(path)?,
        None => BenchmarkConfig::default(),
    };
    args.episode.apply(&mut config);
    if let Some(n) = args.episodes {
        config.episodes = n;
        config.seeds = None;
    }
    if let Some(seed) = args.first_seed {
        config.first_seed = seed;
    }
    let report = run_benchmark(&config)?;
    if let Some(target) = &args.csv {
        write_out(target, &episodes_csv(&report, args.stable_output))?;
    }
    if let Some(target) = &args.json {
        write_out(target, &report_json(&report, args.stable_output))?;
    }
    if args.csv.as_deref() != Some("-") && args.json.as_deref() != Some("-") {
        print_aggregate(&report, args.stable_output);
    }
    Ok(())
}

fn print_aggregate(report: &BenchmarkReport, stable: bool) {
    let mut agg = report.aggregate();
    if stable {
        agg.mean_update_time_s = 0.0;
        agg.queries_per_second = 0.0;
    }
    println!("representation       {}", report.config.representation.label());
    println!(
        "world                {}x{}, {} ingredients",
        report.config.episode.world.rows,
        report.config.episode.world.cols,
        report.config.episode.world.ingredients()
    );
    println!("episodes             {}", agg.episodes);
    println!("solve_rate           {:.3}", agg.solve_rate);
    println!("mean_cost            {:.1}", agg.mean_cost);
    println!("mean_cost_solved     {:.1}", agg.mean_cost_solved);
    println!("mean_steps           {:.1}", agg.mean_steps);
    println!("mean_update_time_s   {:.9}", agg.mean_update_time_s);
    println!("queries_per_second   {:.1}", agg.queries_per_second);
    println!("mean_factor_count    {:.2}", agg.mean_factor_count);
    println!("mean_factor_entries  {:.2}", agg.mean_factor_entries);
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let mut config: SweepConfig = match &args.config {
        Some(path) => read_json(path)?,
        None => SweepConfig::default(),
    };
    args.episode.apply(&mut config.base);
    if let Some(n) = args.episodes {
        config.base.episodes = n;
        config.base.seeds = None;
    }
    if let Some(seed) = args.first_seed {
        config.base.first_seed = seed;
    }
    if !args.representations.is_empty() {
        config.representations = args
            .representations
            .iter()
            .map(|&r| Representation::from(r))
            .collect();
    }
    if !args.confidences.is_empty() {
        config.confidences = args.confidences.clone();
    }
    if !args.epsilons.is_empty() {
        config.epsilons = args.epsilons.clone();
    }
    if !args.grids.is_empty() {
        config.grids = args
            .grids
            .iter()
            .map(|g| parse_grid(g))
            .collect::<Result<_>>()?;
    }
    if !args.ingredient_counts.is_empty() {
        config.ingredient_counts = args.ingredient_counts.clone();
    }
    eprintln!(
        "sweep: {} points x {} episodes",
        config.points().len(),
        config.base.episodes
    );
    let results = run_sweep(&config)?;
    let rendered = if args.per_episode {
        sweep_csv(&results, args.stable_output)
    } else {
        sweep_summary_csv(&results, args.stable_output)
    };
    write_out(&args.out, &rendered)
}

fn demo(args: &DemoArgs) -> Result<()> {
    let mut config = BenchmarkConfig::default();
    args.episode.apply(&mut config);
    let mut episode = config.episode.clone();
    episode.seed = args.seed;
    let world = episode.hidden_world()?;
    let shape = world.config();

    println!(
        "hidden world {}x{}: {} vegetables, {} seasonings",
        shape.rows, shape.cols, shape.vegetables, shape.seasonings
    );
    for row in 0..shape.rows {
        let mut line = String::from("  ");
        for col in 0..shape.cols {
            let cell = CellPos { row, col };
            line.push(match world.occupant(cell) {
                Some(i) if world.kind(i) == Kind::Vegetable => 'V',
                Some(_) => 'S',
                None => '.',
            });
            line.push(' ');
        }
        println!("{}", line.trim_end());
    }
    for i in 0..shape.ingredients() {
        if let Some(cell) = world.on_grid_cell(i) {
            println!(
                "  {} {} at {} {}",
                ingredient_name(i),
                match world.kind(i) {
                    Kind::Vegetable => "vegetable",
                    Kind::Seasoning => "seasoning",
                },
                location_name(shape.cols, cell),
                cell
            );
        }
    }

    let result = run_episode(&episode, config.representation)?;
    println!();
    print_episode(&result, config.representation);
    Ok(())
}

fn print_episode(result: &EpisodeResult, repr: Representation) {
    println!("episode seed {} on the {} representation", result.seed, repr.label());
    println!("  solved               {}", result.solved);
    println!("  steps                {}", result.steps);
    println!("  total_cost           {}", result.total_cost);
    println!("  replans              {}", result.replans);
    println!("  determinize_failures {}", result.determinize_failures);
    println!("  deferred_fluents     {}", result.deferred_fluents);
    println!("  belief_updates       {}", result.update_count);
    println!("  state_samples        {}", result.sample_count);
    println!("  mean_factor_count    {:.2}", result.factor_count_mean);
    println!("  mean_factor_entries  {:.2}", result.factor_entries_mean);
    println!("  wall_time_s          {:.3}", result.wall_time_s);
}

fn repl(args: &ReplArgs) -> Result<()> {
    let registry = match &args.schema {
        Some(path) => SchemaRegistry::from_file(path)
            .with_context(|| format!("loading schema {}", path.display()))?,
        None => {
            let world = WorldConfig::with_ingredients(args.rows, args.cols, 0);
            CookingSchema::new(&world).registry.clone()
        }
    };
    let mut belief_config = dfb_core::BeliefConfig::default();
    if let Some(eps) = args.epsilon {
        belief_config.epsilon = eps;
    }
    if let Some(cap) = args.max_joint_entries {
        belief_config.max_joint_entries = cap;
    }
    let mut session = ReplSession::new(registry, belief_config, args.seed);

    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    loop {
        eprint!("> ");
        io::stderr().flush()?;
        let Some(line) = lines.next() else { break };
        match session.exec_line(&line?) {
            Ok(ReplReply::Quit) => break,
            Ok(ReplReply::Text(text)) => {
                if !text.is_empty() {
                    println!("{text}");
                }
            }
            Err(err) => println!("error: {err}"),
        }
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_out(target: &str, text: &str) -> Result<()> {
    if target == "-" {
        print!("{text}");
        io::stdout().flush()?;
    } else {
        fs::write(target, text).with_context(|| format!("writing {target}"))?;
    }
    Ok(())
}

fn parse_grid(text: &str) -> Result<[usize; 2]> {
    let (rows, cols) = text
        .split_once(['x', 'X'])
        .with_context(|| format!("grid `{text}` must look like 4x4"))?;
    Ok([
        rows.trim().parse().context("grid rows")?,
        cols.trim().parse().context("grid cols")?,
    ])
}
