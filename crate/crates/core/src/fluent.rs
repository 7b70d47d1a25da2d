//! Relational probabilistic constraints ("fluents"): a predicate applied to
//! state variables and literal values, paired with a confidence when they
//! arrive as observations.
//!
//! Evaluation is pure and total over resolved values; the only evaluation
//! error is a mentioned variable missing from the assignment.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::schema::{Assignment, StateVariable, Value};

#[derive(Debug, Error)]
pub enum FluentError {
    #[error("predicate `{predicate}` expects {expected} arguments, got {got}")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        got: usize,
    },
    #[error("fluent `{0}` mentions no state variable")]
    NoVariables(String),
    #[error("constant `{value}` is outside the domain of `{variable}`")]
    ConstantOutsideDomain { value: String, variable: String },
    #[error("predicate `{predicate}`: {detail}")]
    BadArgument { predicate: String, detail: String },
    #[error("predicate `{0}` is already registered")]
    DuplicatePredicate(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("assignment is missing variable `{0}`")]
    MissingVariable(StateVariable),
}

/// A user-supplied predicate: a name, an arity, and a semantics function over
/// resolved values.
pub struct CustomPredicate {
    pub name: String,
    pub arity: usize,
    pub eval: Box<dyn Fn(&[Value]) -> bool + Send + Sync>,
}

impl fmt::Debug for CustomPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPredicate")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum Predicate {
    /// Value equality between a variable and a constant (or two terms).
    Equal,
    /// Negation of value equality.
    Different,
    /// Equality of two variables' values.
    Same,
    /// Grid adjacency: both values are cells at Manhattan distance 1.
    NextTo,
    /// Region membership: a cell value inside a rectangle literal.
    In,
    Custom(Arc<CustomPredicate>),
}

impl Predicate {
    pub fn name(&self) -> &str {
        match self {
            Predicate::Equal => "Equal",
            Predicate::Different => "Different",
            Predicate::Same => "Same",
            Predicate::NextTo => "NextTo",
            Predicate::In => "In",
            Predicate::Custom(c) => &c.name,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Predicate::Custom(c) => c.arity,
            _ => 2,
        }
    }

    /// Truth value over resolved argument values. Total: type mismatches are
    /// simply false rather than errors.
    fn holds(&self, values: &[Value]) -> bool {
        match self {
            Predicate::Equal | Predicate::Same => values[0] == values[1],
            Predicate::Different => values[0] != values[1],
            Predicate::NextTo => match (values[0].as_cell(), values[1].as_cell()) {
                (Some(a), Some(b)) => a.distance(b) == 1,
                _ => false,
            },
            Predicate::In => match (&values[0], &values[1]) {
                (Value::Cell(c), Value::Region(r)) => r.contains(c),
                _ => false,
            },
            Predicate::Custom(c) => (c.eval)(values),
        }
    }
}

impl PartialEq for Predicate {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name()
    }
}

impl Eq for Predicate {}

impl std::hash::Hash for Predicate {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.name().hash(state);
    }
}

impl PartialOrd for Predicate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Predicate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.name().cmp(other.name())
    }
}

/// Name-keyed predicate lookup. Starts with the five builtins; more can be
/// registered as long as names stay unique.
#[derive(Debug)]
pub struct PredicateRegistry {
    entries: Vec<Predicate>,
}

impl Default for PredicateRegistry {
    fn default() -> Self {
        PredicateRegistry {
            entries: vec![
                Predicate::Equal,
                Predicate::Different,
                Predicate::Same,
                Predicate::NextTo,
                Predicate::In,
            ],
        }
    }
}

impl PredicateRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&Predicate> {
        self.entries.iter().find(|p| p.name() == name)
    }

    pub fn register(&mut self, custom: CustomPredicate) -> Result<(), FluentError> {
        if self.get(&custom.name).is_some() {
            return Err(FluentError::DuplicatePredicate(custom.name));
        }
        self.entries.push(Predicate::Custom(Arc::new(custom)));
        Ok(())
    }
}

/// A fluent argument: a state variable or a literal value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(StateVariable),
    Const(Value),
}

impl Term {
    fn resolve(&self, assignment: &Assignment) -> Result<Value, EvalError> {
        match self {
            Term::Const(v) => Ok(v.clone()),
            Term::Var(sv) => assignment
                .get(sv)
                .cloned()
                .ok_or_else(|| EvalError::MissingVariable(sv.clone())),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(sv) => write!(f, "{sv}"),
            Term::Const(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fluent {
    predicate: Predicate,
    args: Vec<Term>,
}

impl Fluent {
    /// Builds and validates a fluent. Checks arity, requires at least one
    /// state variable, and rejects arguments the predicate can never accept
    /// (a constant outside a compared variable's domain, non-cell arguments
    /// to adjacency, a missing region literal for containment).
    pub fn new(predicate: Predicate, args: Vec<Term>) -> Result<Fluent, FluentError> {
        if args.len() != predicate.arity() {
            return Err(FluentError::ArityMismatch {
                predicate: predicate.name().to_string(),
                expected: predicate.arity(),
                got: args.len(),
            });
        }
        if !args.iter().any(|t| matches!(t, Term::Var(_))) {
            let shown = Fluent {
                predicate: predicate.clone(),
                args: args.clone(),
            };
            return Err(FluentError::NoVariables(shown.to_string()));
        }
        match predicate {
            Predicate::Equal | Predicate::Different | Predicate::Same => {
                if let [Term::Var(sv), Term::Const(v)] | [Term::Const(v), Term::Var(sv)] =
                    &args[..]
                {
                    if sv.property.index_of(v).is_none() {
                        return Err(FluentError::ConstantOutsideDomain {
                            value: v.to_string(),
                            variable: sv.to_string(),
                        });
                    }
                }
            }
            Predicate::NextTo => {
                for t in &args {
                    let cell_like = match t {
                        Term::Const(v) => matches!(v, Value::Cell(_)),
                        Term::Var(sv) => sv.domain().iter().all(|v| matches!(v, Value::Cell(_))),
                    };
                    if !cell_like {
                        return Err(FluentError::BadArgument {
                            predicate: "NextTo".into(),
                            detail: format!("argument `{t}` is not cell-valued"),
                        });
                    }
                }
            }
            Predicate::In => {
                let cell_like = match &args[0] {
                    Term::Const(v) => matches!(v, Value::Cell(_)),
                    Term::Var(sv) => sv.domain().iter().all(|v| matches!(v, Value::Cell(_))),
                };
                if !cell_like {
                    return Err(FluentError::BadArgument {
                        predicate: "In".into(),
                        detail: format!("first argument `{}` is not cell-valued", args[0]),
                    });
                }
                if !matches!(&args[1], Term::Const(Value::Region(_))) {
                    return Err(FluentError::BadArgument {
                        predicate: "In".into(),
                        detail: "second argument must be a region literal".into(),
                    });
                }
            }
            Predicate::Custom(_) => {}
        }
        Ok(Fluent { predicate, args })
    }

    pub fn predicate(&self) -> &Predicate {
        &self.predicate
    }

    pub fn args(&self) -> &[Term] {
        &self.args
    }

    /// The distinct state variables this fluent mentions, in argument order.
    pub fn mentioned_variables(&self) -> Vec<&StateVariable> {
        let mut out: Vec<&StateVariable> = Vec::new();
        for t in &self.args {
            if let Term::Var(sv) = t {
                if !out.contains(&sv) {
                    out.push(sv);
                }
            }
        }
        out
    }

    /// Truth under a (at least partial) assignment covering every mentioned
    /// variable. Depends only on the assignment restricted to
    /// `mentioned_variables`.
    pub fn evaluate(&self, assignment: &Assignment) -> Result<bool, EvalError> {
        let mut values = Vec::with_capacity(self.args.len());
        for t in &self.args {
            values.push(t.resolve(assignment)?);
        }
        Ok(self.predicate.holds(&values))
    }
}

impl fmt::Display for Fluent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate.name())?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// A batch of fluents received in one timestep, each with confidence in (0,1].
#[derive(Debug, Clone, Default)]
pub struct Observation {
    entries: Vec<(Fluent, f64)>,
}

impl Observation {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(entries: Vec<(Fluent, f64)>) -> Result<Self, FluentError> {
        for (f, p) in &entries {
            if !(*p > 0.0 && *p <= 1.0) {
                return Err(FluentError::BadArgument {
                    predicate: f.predicate.name().to_string(),
                    detail: format!("confidence {p} outside (0, 1]"),
                });
            }
        }
        Ok(Observation { entries })
    }

    pub fn single(fluent: Fluent, p: f64) -> Result<Self, FluentError> {
        Self::new(vec![(fluent, p)])
    }

    pub fn push(&mut self, fluent: Fluent, p: f64) {
        debug_assert!(p > 0.0 && p <= 1.0);
        self.entries.push((fluent, p));
    }

    pub fn entries(&self) -> &[(Fluent, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
