//! Text form of fluents: `Predicate(term, ...)` where a term is either
//! `property(object)`, a bare symbol, an integer, a cell `(row,col)`, or a
//! rectangle `rect(r0,c0,r1,c1)`. Whitespace-insensitive, case-sensitive.
//!
//! Parsing is the one place new object names enter the registry: an unknown
//! object inside `property(object)` is registered with the first declared
//! type that carries the property.

use thiserror::Error;

use crate::fluent::{Fluent, FluentError, PredicateRegistry, Term};
use crate::schema::{Rect, SchemaError, SchemaRegistry, StateVariable, Value};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("at byte {pos}: expected {expected}")]
    Syntax { pos: usize, expected: String },
    #[error("at byte {pos}: unknown predicate `{name}`")]
    UnknownPredicate { pos: usize, name: String },
    #[error("at byte {pos}: {source}")]
    Schema {
        pos: usize,
        #[source]
        source: SchemaError,
    },
    #[error(transparent)]
    Fluent(#[from] FluentError),
}

/// Parses one fluent, resolving and auto-registering objects through
/// `schema` and predicate names through `predicates`.
pub fn parse_fluent(
    text: &str,
    schema: &mut SchemaRegistry,
    predicates: &PredicateRegistry,
) -> Result<Fluent, ParseError> {
    let mut s = Scanner::new(text);
    s.skip_ws();
    let (pos, name) = s.ident("a predicate name")?;
    let predicate = predicates
        .get(name)
        .cloned()
        .ok_or_else(|| ParseError::UnknownPredicate {
            pos,
            name: name.to_string(),
        })?;
    s.expect('(')?;
    let mut args = Vec::new();
    loop {
        args.push(parse_term(&mut s, schema)?);
        s.skip_ws();
        if s.eat(',') {
            continue;
        }
        s.expect(')')?;
        break;
    }
    s.skip_ws();
    if !s.done() {
        return Err(s.err("end of input"));
    }
    Ok(Fluent::new(predicate, args)?)
}

/// Parses a bare `property(object)` reference, registering unknown objects
/// the same way fluent parsing does.
pub fn parse_variable(
    text: &str,
    schema: &mut SchemaRegistry,
) -> Result<StateVariable, ParseError> {
    let mut s = Scanner::new(text);
    let term = parse_term(&mut s, schema)?;
    s.skip_ws();
    if !s.done() {
        return Err(s.err("end of input"));
    }
    match term {
        Term::Var(v) => Ok(v),
        Term::Const(_) => Err(ParseError::Syntax {
            pos: 0,
            expected: "a property(object) reference".to_string(),
        }),
    }
}

fn parse_term(s: &mut Scanner, schema: &mut SchemaRegistry) -> Result<Term, ParseError> {
    s.skip_ws();
    match s.peek() {
        Some('(') => {
            s.eat('(');
            let r = s.int()?;
            s.expect(',')?;
            let c = s.int()?;
            s.expect(')')?;
            Ok(Term::Const(Value::cell(to_coord(r, s)?, to_coord(c, s)?)))
        }
        Some(ch) if ch == '-' || ch.is_ascii_digit() => Ok(Term::Const(Value::Int(s.int()?))),
        Some(ch) if is_ident_start(ch) => {
            let (pos, name) = s.ident("a term")?;
            let name = name.to_string();
            s.skip_ws();
            if !s.eat('(') {
                return Ok(Term::Const(Value::sym(&name)));
            }
            if name == "rect" {
                let r0 = to_coord(s.int()?, s)?;
                s.expect(',')?;
                let c0 = to_coord(s.int()?, s)?;
                s.expect(',')?;
                let r1 = to_coord(s.int()?, s)?;
                s.expect(',')?;
                let c1 = to_coord(s.int()?, s)?;
                s.expect(')')?;
                return Ok(Term::Const(Value::Region(Rect::new(r0, c0, r1, c1))));
            }
            s.skip_ws();
            let (_, object) = s.ident("an object name")?;
            let object = object.to_string();
            s.expect(')')?;
            let sv = schema
                .resolve(&name, &object)
                .map_err(|source| ParseError::Schema { pos, source })?;
            Ok(Term::Var(sv))
        }
        _ => Err(s.err("a term")),
    }
}

fn to_coord(v: i64, s: &Scanner) -> Result<usize, ParseError> {
    usize::try_from(v).map_err(|_| s.err("a non-negative coordinate"))
}

fn is_ident_start(ch: char) -> bool {
    ch.is_ascii_alphabetic() || ch == '_'
}

fn is_ident_char(ch: char) -> bool {
    ch.is_ascii_alphanumeric() || ch == '_'
}

struct Scanner<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Self {
        Scanner { text, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(ch) = self.peek() {
            if ch.is_whitespace() {
                self.pos += ch.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, ch: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(ch) {
            self.pos += ch.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, ch: char) -> Result<(), ParseError> {
        if self.eat(ch) {
            Ok(())
        } else {
            Err(self.err(&format!("`{ch}`")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(ch) if is_ident_start(ch) => {}
            _ => return Err(self.err(what)),
        }
        let mut end = start;
        for ch in self.rest().chars() {
            if is_ident_char(ch) {
                end += ch.len_utf8();
            } else {
                break;
            }
        }
        self.pos = end;
        Ok((start, &self.text[start..end]))
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some('-') {
            self.pos += 1;
        }
        let digits_start = self.pos;
        while matches!(self.peek(), Some(ch) if ch.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == digits_start {
            self.pos = start;
            return Err(self.err("an integer"));
        }
        self.text[start..self.pos]
            .parse()
            .map_err(|_| self.err("an integer in range"))
    }

    fn done(&self) -> bool {
        self.pos == self.text.len()
    }

    fn err(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            pos: self.pos,
            expected: expected.to_string(),
        }
    }
}
