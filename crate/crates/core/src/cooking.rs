//! A partially observable cooking domain on a discrete grid.
//!
//! Ingredients (vegetables and seasonings) sit on grid cells. An agent picks
//! them up, places them in a pot, and waits for vegetables to cook. The true
//! world is hidden: the agent learns about it from action feedback and from a
//! stream of relational assertions sampled from the current state. Locations
//! are objects with a `contents` variable; ingredients are objects with a
//! `position` variable. The hidden simulator keeps exact ingredient
//! identities and kinds, while observations describe the world only through
//! those two variable families.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fluent::{Fluent, Predicate, Term};
use crate::schema::{CellPos, PropertySchema, Rect, SchemaRegistry, StateVariable, Value};

pub const OBSERVE_COST: u64 = 5;
pub const PICK_COST: u64 = 20;
pub const PLACE_BASE_COST: u64 = 100;
pub const PLACE_PER_ITEM_COST: u64 = 50;
pub const SEASONING_PENALTY: u64 = 1_000;
pub const LIVING_COST: u64 = 10;
/// Steps a vegetable must sit in the pot, counted from the step it went in.
pub const COOK_DURATION: u64 = 5;
pub const HOLD_CAPACITY: usize = 10;

pub const VEGETABLE_SYM: &str = "vegetable";
pub const SEASONING_SYM: &str = "seasoning";
pub const EMPTY_SYM: &str = "empty";

#[derive(Debug, Error)]
pub enum CookingError {
    #[error("no location named `{0}` on the grid")]
    UnknownLocation(String),
    #[error("cannot pick while holding {0} ingredients")]
    HandsFull(usize),
    #[error("{needed} ingredients will not fit on a grid of {available} cells")]
    TooManyIngredients { needed: usize, available: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Vegetable,
    Seasoning,
}

impl Kind {
    /// The `contents` symbol a location shows when occupied by this kind.
    pub fn contents_symbol(self) -> Value {
        match self {
            Kind::Vegetable => Value::sym(VEGETABLE_SYM),
            Kind::Seasoning => Value::sym(SEASONING_SYM),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub rows: usize,
    pub cols: usize,
    pub vegetables: usize,
    pub seasonings: usize,
}

impl WorldConfig {
    /// Splits `n` ingredients into roughly two thirds vegetables and one
    /// third seasonings, rounding the vegetable share up.
    pub fn with_ingredients(rows: usize, cols: usize, n: usize) -> Self {
        let vegetables = (2 * n).div_ceil(3);
        WorldConfig {
            rows,
            cols,
            vegetables,
            seasonings: n - vegetables,
        }
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    pub fn ingredients(&self) -> usize {
        self.vegetables + self.seasonings
    }
}

/// Row-major location name for a cell: `(0,0)` is `L1`, `(0,1)` is `L2`.
pub fn location_name(cols: usize, cell: CellPos) -> String {
    format!("L{}", cell.row * cols + cell.col + 1)
}

/// Inverse of [`location_name`]; `None` for names that are off the grid or
/// not of the `L<index>` form.
pub fn location_cell(rows: usize, cols: usize, name: &str) -> Option<CellPos> {
    let digits = name.strip_prefix('L')?;
    let index: usize = digits.parse().ok()?;
    if index == 0 || index > rows * cols {
        return None;
    }
    Some(CellPos {
        row: (index - 1) / cols,
        col: (index - 1) % cols,
    })
}

/// The fixed vocabulary of one episode: the registry plus the state
/// variables for every location's contents and every ingredient's position.
#[derive(Debug, Clone)]
pub struct CookingSchema {
    pub registry: SchemaRegistry,
    rows: usize,
    cols: usize,
    contents_vars: Vec<StateVariable>,
    position_vars: Vec<StateVariable>,
}

impl CookingSchema {
    pub fn new(config: &WorldConfig) -> Self {
        let mut registry = SchemaRegistry::new();
        let contents = PropertySchema::new(
            "contents",
            vec![
                Value::sym(VEGETABLE_SYM),
                Value::sym(SEASONING_SYM),
                Value::sym(EMPTY_SYM),
            ],
        );
        registry
            .declare_type("location", vec![contents])
            .expect("fresh registry");
        let cells: Vec<Value> = (0..config.rows)
            .flat_map(|r| (0..config.cols).map(move |c| Value::cell(r, c)))
            .collect();
        let position = PropertySchema::new("position", cells);
        registry
            .declare_type("ingredient", vec![position])
            .expect("fresh registry");

        let mut contents_vars = Vec::with_capacity(config.cells());
        for r in 0..config.rows {
            for c in 0..config.cols {
                let name = location_name(config.cols, CellPos { row: r, col: c });
                registry
                    .add_object(&name, "location")
                    .expect("distinct location names");
                contents_vars.push(
                    registry
                        .state_variable("contents", &name)
                        .expect("declared above"),
                );
            }
        }
        let mut position_vars = Vec::with_capacity(config.ingredients());
        for i in 0..config.ingredients() {
            let name = ingredient_name(i);
            registry
                .add_object(&name, "ingredient")
                .expect("distinct ingredient names");
            position_vars.push(
                registry
                    .state_variable("position", &name)
                    .expect("declared above"),
            );
        }
        CookingSchema {
            registry,
            rows: config.rows,
            cols: config.cols,
            contents_vars,
            position_vars,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn contents_var(&self, cell: CellPos) -> &StateVariable {
        &self.contents_vars[cell.row * self.cols + cell.col]
    }

    pub fn contents_vars(&self) -> &[StateVariable] {
        &self.contents_vars
    }

    pub fn position_var(&self, ingredient: usize) -> &StateVariable {
        &self.position_vars[ingredient]
    }

    pub fn position_vars(&self) -> &[StateVariable] {
        &self.position_vars
    }

    /// The variables a belief tracks from the start of an episode: every
    /// location's contents. Position variables enter only through mention.
    pub fn initial_variables(&self) -> Vec<StateVariable> {
        self.contents_vars.clone()
    }

    pub fn all_cells(&self) -> impl Iterator<Item = CellPos> + '_ {
        (0..self.rows).flat_map(move |r| (0..self.cols).map(move |c| CellPos { row: r, col: c }))
    }

    /// Every axis-aligned sub-rectangle of the grid except the full grid,
    /// which contains every cell and so asserts nothing.
    pub fn proper_rects(&self) -> Vec<Rect> {
        let mut out = Vec::new();
        for r0 in 0..self.rows {
            for r1 in r0..self.rows {
                for c0 in 0..self.cols {
                    for c1 in c0..self.cols {
                        let full =
                            r0 == 0 && c0 == 0 && r1 == self.rows - 1 && c1 == self.cols - 1;
                        if !full {
                            out.push(Rect { r0, c0, r1, c1 });
                        }
                    }
                }
            }
        }
        out
    }
}

pub fn ingredient_name(index: usize) -> String {
    format!("ing{}", index + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Place {
    Cell(CellPos),
    Held,
    Potted { placed_at: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Operator {
    Observe { location: String },
    Pick { location: String },
    PlaceInPot,
    NoOp,
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operator::Observe { location } => write!(f, "Observe({location})"),
            Operator::Pick { location } => write!(f, "Pick({location})"),
            Operator::PlaceInPot => write!(f, "PlaceInPot"),
            Operator::NoOp => write!(f, "NoOp"),
        }
    }
}

/// Everything one step hands back to the agent.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    /// Operator cost plus living cost plus any seasoning penalty.
    pub cost: u64,
    /// Certain facts about the state the operator acted on (before its own
    /// effects), e.g. what a picked cell contained.
    pub revealed: Vec<Fluent>,
    /// Deterministic variable assignments caused by the operator.
    pub effects: Vec<(StateVariable, Value)>,
}

/// What the agent can see of its own situation without observing the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisibleState {
    pub clock: u64,
    /// Held ingredient indices with their kinds (kind was revealed at pick).
    pub held: Vec<(usize, Kind)>,
    /// Potted ingredient indices with kinds and the clock value at placement.
    pub potted: Vec<(usize, Kind, u64)>,
}

impl VisibleState {
    /// Steps until every potted vegetable is cooked; zero when none is
    /// waiting.
    pub fn cook_remaining(&self) -> u64 {
        self.potted
            .iter()
            .filter(|(_, kind, _)| *kind == Kind::Vegetable)
            .map(|(_, _, placed_at)| {
                COOK_DURATION.saturating_sub(self.clock.saturating_sub(*placed_at))
            })
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HiddenWorld {
    config: WorldConfig,
    clock: u64,
    kinds: Vec<Kind>,
    places: Vec<Place>,
}

impl HiddenWorld {
    /// A random world: ingredients scattered over distinct cells, vegetables
    /// first in index order.
    pub fn generate<R: Rng>(config: WorldConfig, rng: &mut R) -> Result<Self, CookingError> {
        let needed = config.ingredients();
        if needed > config.cells() {
            return Err(CookingError::TooManyIngredients {
                needed,
                available: config.cells(),
            });
        }
        let chosen = rand::seq::index::sample(rng, config.cells(), needed);
        let places = chosen
            .iter()
            .map(|i| {
                Place::Cell(CellPos {
                    row: i / config.cols,
                    col: i % config.cols,
                })
            })
            .collect();
        let mut kinds = vec![Kind::Vegetable; config.vegetables];
        kinds.extend(std::iter::repeat_n(Kind::Seasoning, config.seasonings));
        Ok(HiddenWorld {
            config,
            clock: 0,
            kinds,
            places,
        })
    }

    /// A world with a fixed layout, mainly for tests and oracles. Kinds and
    /// cells are given per ingredient; cells must be distinct and on-grid.
    pub fn from_layout(
        config: WorldConfig,
        layout: &[(Kind, CellPos)],
    ) -> Result<Self, CookingError> {
        assert_eq!(layout.len(), config.ingredients());
        let mut seen = BTreeSet::new();
        for &(_, cell) in layout {
            assert!(cell.row < config.rows && cell.col < config.cols);
            assert!(seen.insert(cell), "two ingredients on {cell}");
        }
        assert_eq!(
            layout.iter().filter(|(k, _)| *k == Kind::Vegetable).count(),
            config.vegetables
        );
        Ok(HiddenWorld {
            config,
            clock: 0,
            kinds: layout.iter().map(|&(k, _)| k).collect(),
            places: layout.iter().map(|&(_, c)| Place::Cell(c)).collect(),
        })
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn kind(&self, ingredient: usize) -> Kind {
        self.kinds[ingredient]
    }

    /// The cell an ingredient sits on, if it is still on the grid.
    pub fn on_grid_cell(&self, ingredient: usize) -> Option<CellPos> {
        match self.places[ingredient] {
            Place::Cell(c) => Some(c),
            _ => None,
        }
    }

    /// The ingredient occupying a cell, if any.
    pub fn occupant(&self, cell: CellPos) -> Option<usize> {
        self.places
            .iter()
            .position(|p| matches!(p, Place::Cell(c) if *c == cell))
    }

    /// The `contents` symbol a cell currently shows.
    pub fn contents_at(&self, cell: CellPos) -> Value {
        match self.occupant(cell) {
            Some(i) => self.kinds[i].contents_symbol(),
            None => Value::sym(EMPTY_SYM),
        }
    }

    fn held_count(&self) -> usize {
        self.places.iter().filter(|p| **p == Place::Held).count()
    }

    fn is_cooked(&self, ingredient: usize) -> bool {
        match self.places[ingredient] {
            Place::Potted { placed_at } => self.clock - placed_at >= COOK_DURATION,
            _ => false,
        }
    }

    /// True once every ingredient is potted and every vegetable is cooked.
    /// Vacuously true for a world with no ingredients.
    pub fn goal_test(&self) -> bool {
        self.places
            .iter()
            .all(|p| matches!(p, Place::Potted { .. }))
            && (0..self.kinds.len())
                .filter(|&i| self.kinds[i] == Kind::Vegetable)
                .all(|i| self.is_cooked(i))
    }

    pub fn visible(&self) -> VisibleState {
        let mut held = Vec::new();
        let mut potted = Vec::new();
        for (i, p) in self.places.iter().enumerate() {
            match *p {
                Place::Held => held.push((i, self.kinds[i])),
                Place::Potted { placed_at } => potted.push((i, self.kinds[i], placed_at)),
                Place::Cell(_) => {}
            }
        }
        VisibleState {
            clock: self.clock,
            held,
            potted,
        }
    }

    fn resolve_location(&self, name: &str) -> Result<CellPos, CookingError> {
        location_cell(self.config.rows, self.config.cols, name)
            .ok_or_else(|| CookingError::UnknownLocation(name.to_string()))
    }

    /// Advances one step: the clock ticks, cooking progresses, then the
    /// operator runs. Errors leave the world unchanged.
    pub fn step(
        &mut self,
        op: &Operator,
        schema: &CookingSchema,
    ) -> Result<StepOutcome, CookingError> {
        // Validate before mutating anything.
        let target = match op {
            Operator::Observe { location } | Operator::Pick { location } => {
                Some(self.resolve_location(location)?)
            }
            _ => None,
        };
        if matches!(op, Operator::Pick { .. }) && self.held_count() >= HOLD_CAPACITY {
            return Err(CookingError::HandsFull(self.held_count()));
        }

        self.clock += 1;
        let mut cost = LIVING_COST;
        let mut revealed = Vec::new();
        let mut effects = Vec::new();
        match op {
            Operator::Observe { .. } => {
                cost += OBSERVE_COST;
                let cell = target.expect("validated above");
                self.reveal_cell(cell, schema, &mut revealed);
            }
            Operator::Pick { .. } => {
                cost += PICK_COST;
                let cell = target.expect("validated above");
                self.reveal_cell(cell, schema, &mut revealed);
                if let Some(i) = self.occupant(cell) {
                    self.places[i] = Place::Held;
                }
                effects.push((
                    schema.contents_var(cell).clone(),
                    Value::sym(EMPTY_SYM),
                ));
            }
            Operator::PlaceInPot => {
                let placing: Vec<usize> = (0..self.places.len())
                    .filter(|&i| self.places[i] == Place::Held)
                    .collect();
                cost += PLACE_BASE_COST + PLACE_PER_ITEM_COST * placing.len() as u64;
                for &i in &placing {
                    self.places[i] = Place::Potted {
                        placed_at: self.clock,
                    };
                }
                let placed_seasoning = placing.iter().any(|&i| self.kinds[i] == Kind::Seasoning);
                let uncooked_vegetable = (0..self.kinds.len())
                    .any(|i| self.kinds[i] == Kind::Vegetable && !self.is_cooked(i));
                if placed_seasoning && uncooked_vegetable {
                    cost += SEASONING_PENALTY;
                }
            }
            Operator::NoOp => {}
        }
        Ok(StepOutcome {
            cost,
            revealed,
            effects,
        })
    }

    /// Certain facts about one cell: its contents, and the occupant's
    /// position if something sits there.
    fn reveal_cell(&self, cell: CellPos, schema: &CookingSchema, out: &mut Vec<Fluent>) {
        out.push(
            Fluent::new(
                Predicate::Equal,
                vec![
                    Term::Var(schema.contents_var(cell).clone()),
                    Term::Const(self.contents_at(cell)),
                ],
            )
            .expect("contents symbol is in the domain"),
        );
        if let Some(i) = self.occupant(cell) {
            out.push(
                Fluent::new(
                    Predicate::Equal,
                    vec![
                        Term::Var(schema.position_var(i).clone()),
                        Term::Const(Value::Cell(cell)),
                    ],
                )
                .expect("cell is in the position domain"),
            );
        }
    }
}

/// One assertion template instantiation; truth is judged against a world.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Instantiation {
    /// contents(cell) = symbol
    ContentsEqual { cell_index: usize, symbol: u8 },
    /// Same or Different over contents of an unordered cell pair.
    ContentsPair {
        a: usize,
        b: usize,
        want_same: bool,
    },
    /// position(ingredient) = cell
    PositionEqual {
        ingredient: usize,
        cell_index: usize,
    },
    /// NextTo over the positions of an unordered ingredient pair.
    Adjacent { a: usize, b: usize },
    /// position(ingredient) inside a proper sub-rectangle.
    InRect { ingredient: usize, rect: usize },
}

/// The full space of assertion instantiations for one episode's vocabulary.
/// Instantiations mentioning off-grid ingredients are excluded from both the
/// true and the false side at evaluation time.
#[derive(Debug, Clone)]
pub struct AssertionSpace {
    cells: Vec<CellPos>,
    rects: Vec<Rect>,
    n_ingredients: usize,
    total: usize,
}

const SYMBOLS: [&str; 3] = [VEGETABLE_SYM, SEASONING_SYM, EMPTY_SYM];

impl AssertionSpace {
    pub fn new(schema: &CookingSchema, n_ingredients: usize) -> Self {
        let cells: Vec<CellPos> = schema.all_cells().collect();
        let rects = schema.proper_rects();
        let n = cells.len();
        let pairs = n * (n - 1) / 2;
        let ing_pairs = n_ingredients.saturating_sub(1) * n_ingredients / 2;
        let total = n * SYMBOLS.len()
            + pairs * 2
            + n_ingredients * n
            + ing_pairs
            + n_ingredients * rects.len();
        AssertionSpace {
            cells,
            rects,
            n_ingredients,
            total,
        }
    }

    fn decode(&self, mut index: usize) -> Instantiation {
        let n = self.cells.len();
        let contents_block = n * SYMBOLS.len();
        if index < contents_block {
            return Instantiation::ContentsEqual {
                cell_index: index / SYMBOLS.len(),
                symbol: (index % SYMBOLS.len()) as u8,
            };
        }
        index -= contents_block;
        let pairs = n * (n - 1) / 2;
        if index < pairs * 2 {
            let (a, b) = unordered_pair(index / 2, n);
            return Instantiation::ContentsPair {
                a,
                b,
                want_same: index % 2 == 0,
            };
        }
        index -= pairs * 2;
        if index < self.n_ingredients * n {
            return Instantiation::PositionEqual {
                ingredient: index / n,
                cell_index: index % n,
            };
        }
        index -= self.n_ingredients * n;
        let ing_pairs = self.n_ingredients.saturating_sub(1) * self.n_ingredients / 2;
        if index < ing_pairs {
            let (a, b) = unordered_pair(index, self.n_ingredients);
            return Instantiation::Adjacent { a, b };
        }
        index -= ing_pairs;
        Instantiation::InRect {
            ingredient: index / self.rects.len(),
            rect: index % self.rects.len(),
        }
    }

    /// `Some(truth)` against the world, or `None` when the instantiation
    /// mentions an off-grid ingredient and is out of play.
    fn truth(&self, inst: Instantiation, world: &HiddenWorld) -> Option<bool> {
        match inst {
            Instantiation::ContentsEqual { cell_index, symbol } => {
                let actual = world.contents_at(self.cells[cell_index]);
                Some(actual == Value::sym(SYMBOLS[symbol as usize]))
            }
            Instantiation::ContentsPair { a, b, want_same } => {
                let same =
                    world.contents_at(self.cells[a]) == world.contents_at(self.cells[b]);
                Some(same == want_same)
            }
            Instantiation::PositionEqual {
                ingredient,
                cell_index,
            } => {
                let at = world.on_grid_cell(ingredient)?;
                Some(at == self.cells[cell_index])
            }
            Instantiation::Adjacent { a, b } => {
                let ca = world.on_grid_cell(a)?;
                let cb = world.on_grid_cell(b)?;
                Some(ca.distance(&cb) == 1)
            }
            Instantiation::InRect { ingredient, rect } => {
                let at = world.on_grid_cell(ingredient)?;
                Some(self.rects[rect].contains(&at))
            }
        }
    }

    fn build(&self, inst: Instantiation, schema: &CookingSchema) -> Fluent {
        let fluent = match inst {
            Instantiation::ContentsEqual { cell_index, symbol } => Fluent::new(
                Predicate::Equal,
                vec![
                    Term::Var(schema.contents_var(self.cells[cell_index]).clone()),
                    Term::Const(Value::sym(SYMBOLS[symbol as usize])),
                ],
            ),
            Instantiation::ContentsPair { a, b, want_same } => Fluent::new(
                if want_same {
                    Predicate::Same
                } else {
                    Predicate::Different
                },
                vec![
                    Term::Var(schema.contents_var(self.cells[a]).clone()),
                    Term::Var(schema.contents_var(self.cells[b]).clone()),
                ],
            ),
            Instantiation::PositionEqual {
                ingredient,
                cell_index,
            } => Fluent::new(
                Predicate::Equal,
                vec![
                    Term::Var(schema.position_var(ingredient).clone()),
                    Term::Const(Value::Cell(self.cells[cell_index])),
                ],
            ),
            Instantiation::Adjacent { a, b } => Fluent::new(
                Predicate::NextTo,
                vec![
                    Term::Var(schema.position_var(a).clone()),
                    Term::Var(schema.position_var(b).clone()),
                ],
            ),
            Instantiation::InRect { ingredient, rect } => Fluent::new(
                Predicate::In,
                vec![
                    Term::Var(schema.position_var(ingredient).clone()),
                    Term::Const(Value::Region(self.rects[rect])),
                ],
            ),
        };
        fluent.expect("templates instantiate within declared domains")
    }

    /// Every assertion that is true of the world right now.
    pub fn valid_assertions(&self, world: &HiddenWorld, schema: &CookingSchema) -> Vec<Fluent> {
        (0..self.total)
            .filter_map(|i| {
                let inst = self.decode(i);
                match self.truth(inst, world) {
                    Some(true) => Some(self.build(inst, schema)),
                    _ => None,
                }
            })
            .collect()
    }

    /// One assertion about the current state, labeled with confidence `p`.
    /// With probability `p` it is drawn uniformly from the true assertions,
    /// otherwise uniformly from the false ones.
    pub fn sample_assertion<R: Rng>(
        &self,
        world: &HiddenWorld,
        schema: &CookingSchema,
        rng: &mut R,
        p: f64,
    ) -> (Fluent, f64) {
        let want_true = p >= 1.0 || rng.gen_bool(p);
        // Rejection sampling is uniform within the target class and almost
        // always succeeds quickly; the scan below is a rare fallback.
        for _ in 0..5_000 {
            let inst = self.decode(rng.gen_range(0..self.total));
            if self.truth(inst, world) == Some(want_true) {
                return (self.build(inst, schema), p);
            }
        }
        let matching: Vec<Instantiation> = (0..self.total)
            .map(|i| self.decode(i))
            .filter(|&inst| self.truth(inst, world) == Some(want_true))
            .collect();
        let inst = matching[rng.gen_range(0..matching.len())];
        (self.build(inst, schema), p)
    }
}

/// The `k`-th unordered pair (a, b) with a < b < n, ordered by a then b.
fn unordered_pair(mut k: usize, n: usize) -> (usize, usize) {
    for a in 0..n {
        let row = n - a - 1;
        if k < row {
            return (a, a + 1 + k);
        }
        k -= row;
    }
    unreachable!("pair index out of range");
}
