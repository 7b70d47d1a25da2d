//! Line-oriented interactive session against a single belief.
//!
//! Each line is one command; the session parses fluents with the shared
//! grammar, mutates the belief, and renders a text reply. The CLI wraps this
//! in a stdin loop, and tests drive it directly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::belief::{Belief, BeliefConfig, BeliefError};
use crate::fluent::{Observation, PredicateRegistry};
use crate::parser::{parse_fluent, parse_variable, ParseError};
use crate::schema::SchemaRegistry;

#[derive(Debug, Error)]
pub enum ReplError {
    #[error("{0}")]
    Usage(String),
    #[error("unknown command `{0}`; try `help`")]
    UnknownCommand(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
}

/// What one line produced: text to print, or a request to exit.
#[derive(Debug, PartialEq, Eq)]
pub enum ReplReply {
    Text(String),
    Quit,
}

pub struct ReplSession {
    schema: SchemaRegistry,
    predicates: PredicateRegistry,
    config: BeliefConfig,
    belief: Belief,
    rng: ChaCha8Rng,
}

const HELP: &str = "commands:
  assert <fluent> [confidence]   fold a fluent, e.g. assert Equal(color(A), red) 0.9
  marginal <var> [<var>...]      marginal over variables in one factor, e.g. marginal color(A)
  sample                         draw one full state from the belief
  show                           print every factor and the lazy store
  reset                          start over with an empty belief
  help                           this text
  quit                           leave";

impl ReplSession {
    pub fn new(schema: SchemaRegistry, config: BeliefConfig, seed: u64) -> Self {
        ReplSession {
            schema,
            predicates: PredicateRegistry::default(),
            belief: Belief::new(config.clone()),
            config,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn belief(&self) -> &Belief {
        &self.belief
    }

    /// Executes one line and renders the reply. Errors leave the belief as
    /// it was, except that a failed `assert` may already have folded nothing
    /// but registered mentioned variables.
    pub fn exec_line(&mut self, line: &str) -> Result<ReplReply, ReplError> {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return Ok(ReplReply::Text(String::new()));
        }
        let (command, rest) = match line.split_once(char::is_whitespace) {
            Some((c, r)) => (c, r.trim()),
            None => (line, ""),
        };
        match command {
            "assert" => self.cmd_assert(rest),
            "marginal" => self.cmd_marginal(rest),
            "sample" => self.cmd_sample(),
            "show" => Ok(ReplReply::Text(self.belief.snapshot())),
            "reset" => {
                self.belief = Belief::new(self.config.clone());
                Ok(ReplReply::Text("belief cleared".to_string()))
            }
            "help" => Ok(ReplReply::Text(HELP.to_string())),
            "quit" | "exit" => Ok(ReplReply::Quit),
            other => Err(ReplError::UnknownCommand(other.to_string())),
        }
    }

    fn cmd_assert(&mut self, rest: &str) -> Result<ReplReply, ReplError> {
        if rest.is_empty() {
            return Err(ReplError::Usage(
                "usage: assert <fluent> [confidence]".to_string(),
            ));
        }
        // A trailing token that parses as a number is the confidence.
        let (fluent_text, p) = match rest.rsplit_once(char::is_whitespace) {
            Some((head, tail)) => match tail.parse::<f64>() {
                Ok(p) => (head.trim(), p),
                Err(_) => (rest, 1.0),
            },
            None => (rest, 1.0),
        };
        if !(p > 0.0 && p <= 1.0) {
            return Err(ReplError::Usage(format!(
                "confidence must be in (0, 1], got {p}"
            )));
        }
        let fluent = parse_fluent(fluent_text, &mut self.schema, &self.predicates)?;
        let obs = Observation::single(fluent, p).expect("confidence already checked");
        let stats = self.belief.belief_update(&obs, &[])?;
        let mut reply = if stats.deferred > 0 {
            "deferred to the lazy store (join too large)".to_string()
        } else {
            "folded".to_string()
        };
        if stats.splits > 0 {
            reply.push_str(&format!(", {} variable(s) split off", stats.splits));
        }
        reply.push_str(&format!("; {} factor(s)", self.belief.factor_count()));
        Ok(ReplReply::Text(reply))
    }

    fn cmd_marginal(&mut self, rest: &str) -> Result<ReplReply, ReplError> {
        if rest.is_empty() {
            return Err(ReplError::Usage(
                "usage: marginal <var> [<var>...]".to_string(),
            ));
        }
        let mut vars = Vec::new();
        for token in rest.split_whitespace() {
            vars.push(parse_variable(token, &mut self.schema)?);
        }
        let dist = self.belief.marginal(&vars)?;
        let mut lines = Vec::new();
        for idx in 0..dist.len() {
            let tuple: Vec<String> = dist.tuple_at(idx).iter().map(|v| v.to_string()).collect();
            lines.push(format!("  ({})  {:.6}", tuple.join(", "), dist.prob(idx)));
        }
        Ok(ReplReply::Text(lines.join("\n")))
    }

    fn cmd_sample(&mut self) -> Result<ReplReply, ReplError> {
        let state = self.belief.sample_state(&mut self.rng)?;
        if state.is_empty() {
            return Ok(ReplReply::Text("(no variables tracked)".to_string()));
        }
        let lines: Vec<String> = state
            .iter()
            .map(|(v, value)| format!("  {v} = {value}"))
            .collect();
        Ok(ReplReply::Text(lines.join("\n")))
    }
}
