//! The compositional action language and its execution semantics.
//!
//! ```text
//! Set   ::= all() | with(Color) | not(Set) | leftmost(Set) | rightmost(Set)
//! Color ::= cyan | brown | red | orange
//! Act   ::= add(Set, Color) | remove(Set)
//! ```
//!
//! Ill-typed trees are unrepresentable: each category is its own enum.
//! Canonical text is the `Display` output, e.g.
//! `add(not(leftmost(with(brown))),orange)`, and [`parse_lf`] inverts it.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::world::{Color, StackSelection, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Set,
    Color,
    Act,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Set => "Set",
            Category::Color => "Color",
            Category::Act => "Act",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SetExpr {
    All,
    With(Color),
    Not(Arc<SetExpr>),
    Leftmost(Arc<SetExpr>),
    Rightmost(Arc<SetExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Action {
    Add(Arc<SetExpr>, Color),
    Remove(Arc<SetExpr>),
}

/// A well-typed logical form of any category.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LogicalForm {
    Set(Arc<SetExpr>),
    Color(Color),
    Act(Arc<Action>),
}

impl SetExpr {
    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: SetExpr) -> Self {
        SetExpr::Not(Arc::new(inner))
    }

    pub fn leftmost(inner: SetExpr) -> Self {
        SetExpr::Leftmost(Arc::new(inner))
    }

    pub fn rightmost(inner: SetExpr) -> Self {
        SetExpr::Rightmost(Arc::new(inner))
    }

    /// Stacks denoted by this set on `state`.
    pub fn eval(&self, state: &WorldState) -> StackSelection {
        let width = state.num_stacks();
        match self {
            SetExpr::All => StackSelection::all(width),
            SetExpr::With(c) => StackSelection::from_indices(
                width,
                (0..width).filter(|&i| state.top(i) == Some(*c)),
            ),
            SetExpr::Not(s) => s.eval(state).complement(),
            SetExpr::Leftmost(s) => s.eval(state).leftmost(),
            SetExpr::Rightmost(s) => s.eval(state).rightmost(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            SetExpr::All => 1,
            SetExpr::With(_) => 2,
            SetExpr::Not(s) | SetExpr::Leftmost(s) | SetExpr::Rightmost(s) => 1 + s.size(),
        }
    }
}

impl Action {
    pub fn add(set: SetExpr, color: Color) -> Self {
        Action::Add(Arc::new(set), color)
    }

    pub fn remove(set: SetExpr) -> Self {
        Action::Remove(Arc::new(set))
    }

    /// Successor state. Removing from an empty selected stack is a no-op.
    pub fn execute(&self, state: &WorldState) -> WorldState {
        let mut next = state.clone();
        match self {
            Action::Add(set, color) => {
                let sel = set.eval(state);
                for i in sel.indices() {
                    next.stacks_mut()[i].push(*color);
                }
            }
            Action::Remove(set) => {
                let sel = set.eval(state);
                for i in sel.indices() {
                    next.stacks_mut()[i].pop();
                }
            }
        }
        next
    }

    pub fn size(&self) -> usize {
        match self {
            Action::Add(s, _) => 2 + s.size(),
            Action::Remove(s) => 1 + s.size(),
        }
    }
}

impl LogicalForm {
    pub fn category(&self) -> Category {
        match self {
            LogicalForm::Set(_) => Category::Set,
            LogicalForm::Color(_) => Category::Color,
            LogicalForm::Act(_) => Category::Act,
        }
    }

    /// Number of predicates (nodes) in the tree.
    pub fn size(&self) -> usize {
        match self {
            LogicalForm::Set(s) => s.size(),
            LogicalForm::Color(_) => 1,
            LogicalForm::Act(a) => a.size(),
        }
    }

    pub fn as_action(&self) -> Option<&Action> {
        match self {
            LogicalForm::Act(a) => Some(a),
            _ => None,
        }
    }

    pub fn node(&self) -> Node<'_> {
        match self {
            LogicalForm::Set(s) => Node::Set(s),
            LogicalForm::Color(c) => Node::Color(*c),
            LogicalForm::Act(a) => Node::Act(a),
        }
    }

    pub fn canonical(&self) -> String {
        self.to_string()
    }
}

impl From<SetExpr> for LogicalForm {
    fn from(s: SetExpr) -> Self {
        LogicalForm::Set(Arc::new(s))
    }
}

impl From<Action> for LogicalForm {
    fn from(a: Action) -> Self {
        LogicalForm::Act(Arc::new(a))
    }
}

impl From<Color> for LogicalForm {
    fn from(c: Color) -> Self {
        LogicalForm::Color(c)
    }
}

/// Borrowed, category-erased view of one tree node.
#[derive(Debug, Clone, Copy)]
pub enum Node<'a> {
    Set(&'a SetExpr),
    Color(Color),
    Act(&'a Action),
}

impl<'a> Node<'a> {
    pub fn predicate(&self) -> &'static str {
        match self {
            Node::Set(SetExpr::All) => "all",
            Node::Set(SetExpr::With(_)) => "with",
            Node::Set(SetExpr::Not(_)) => "not",
            Node::Set(SetExpr::Leftmost(_)) => "leftmost",
            Node::Set(SetExpr::Rightmost(_)) => "rightmost",
            Node::Color(c) => c.name(),
            Node::Act(Action::Add(..)) => "add",
            Node::Act(Action::Remove(_)) => "remove",
        }
    }

    /// Arguments in positional order.
    pub fn children(&self) -> Vec<Node<'a>> {
        match *self {
            Node::Set(SetExpr::All) | Node::Color(_) => Vec::new(),
            Node::Set(SetExpr::With(c)) => vec![Node::Color(*c)],
            Node::Set(SetExpr::Not(s) | SetExpr::Leftmost(s) | SetExpr::Rightmost(s)) => {
                vec![Node::Set(s)]
            }
            Node::Act(Action::Add(s, c)) => vec![Node::Set(s), Node::Color(*c)],
            Node::Act(Action::Remove(s)) => vec![Node::Set(s)],
        }
    }

    /// Pre-order traversal of this node and all descendants.
    pub fn descendants(&self) -> Vec<Node<'a>> {
        let mut out = vec![*self];
        let mut i = 0;
        while i < out.len() {
            let kids = out[i].children();
            out.extend(kids);
            i += 1;
        }
        out
    }
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetExpr::All => f.write_str("all()"),
            SetExpr::With(c) => write!(f, "with({c})"),
            SetExpr::Not(s) => write!(f, "not({s})"),
            SetExpr::Leftmost(s) => write!(f, "leftmost({s})"),
            SetExpr::Rightmost(s) => write!(f, "rightmost({s})"),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Add(s, c) => write!(f, "add({s},{c})"),
            Action::Remove(s) => write!(f, "remove({s})"),
        }
    }
}

impl fmt::Display for LogicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogicalForm::Set(s) => s.fmt(f),
            LogicalForm::Color(c) => c.fmt(f),
            LogicalForm::Act(a) => a.fmt(f),
        }
    }
}

impl Serialize for LogicalForm {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LogicalForm {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_lf(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("at position {position}: {message}")]
pub struct ParseError {
    /// Byte offset of the offending token.
    pub position: usize,
    pub message: String,
}

/// Parses canonical logical-form text of any category.
pub fn parse_lf(text: &str) -> Result<LogicalForm, ParseError> {
    let mut parser = Parser { text, pos: 0 };
    let lf = parser.expr()?;
    parser.skip_ws();
    if parser.pos < text.len() {
        return Err(parser.error(parser.pos, "trailing input"));
    }
    Ok(lf)
}

/// Parses text that must denote an action.
pub fn parse_action(text: &str) -> Result<Action, ParseError> {
    match parse_lf(text)? {
        LogicalForm::Act(a) => Ok((*a).clone()),
        other => Err(ParseError {
            position: 0,
            message: format!("expected Act, found {}", other.category()),
        }),
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, position: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            position,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn ident(&mut self) -> Result<(usize, &'a str), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let len = self.text[start..]
            .bytes()
            .take_while(|b| b.is_ascii_lowercase())
            .count();
        if len == 0 {
            return Err(self.error(start, "expected predicate name"));
        }
        self.pos += len;
        Ok((start, &self.text[start..start + len]))
    }

    fn punct(&mut self, want: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.text[self.pos..].starts_with(want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(self.pos, format!("expected `{want}`")))
        }
    }

    fn peek_is(&mut self, want: char) -> bool {
        self.skip_ws();
        self.text[self.pos..].starts_with(want)
    }

    fn expr(&mut self) -> Result<LogicalForm, ParseError> {
        let (start, name) = self.ident()?;
        if let Ok(c) = name.parse::<Color>() {
            if self.peek_is('(') {
                return Err(self.error(self.pos, format!("color `{name}` takes no arguments")));
            }
            return Ok(LogicalForm::Color(c));
        }
        self.punct('(')?;
        let lf = match name {
            "all" => LogicalForm::from(SetExpr::All),
            "with" => LogicalForm::from(SetExpr::With(self.color_arg()?)),
            "not" => LogicalForm::from(SetExpr::Not(self.set_arg()?)),
            "leftmost" => LogicalForm::from(SetExpr::Leftmost(self.set_arg()?)),
            "rightmost" => LogicalForm::from(SetExpr::Rightmost(self.set_arg()?)),
            "remove" => LogicalForm::from(Action::Remove(self.set_arg()?)),
            "add" => {
                let set = self.set_arg()?;
                self.punct(',')?;
                LogicalForm::from(Action::Add(set, self.color_arg()?))
            }
            _ => return Err(self.error(start, format!("unknown predicate `{name}`"))),
        };
        self.punct(')')?;
        Ok(lf)
    }

    fn typed_arg(&mut self, want: Category) -> Result<LogicalForm, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let lf = self.expr()?;
        if lf.category() != want {
            return Err(self.error(
                start,
                format!("expected {want} argument, found {} `{lf}`", lf.category()),
            ));
        }
        Ok(lf)
    }

    fn set_arg(&mut self) -> Result<Arc<SetExpr>, ParseError> {
        match self.typed_arg(Category::Set)? {
            LogicalForm::Set(s) => Ok(s),
            _ => unreachable!(),
        }
    }

    fn color_arg(&mut self) -> Result<Color, ParseError> {
        match self.typed_arg(Category::Color)? {
            LogicalForm::Color(c) => Ok(c),
            _ => unreachable!(),
        }
    }
}
