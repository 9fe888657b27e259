//! Block-world states and stack selections.
//!
//! A state is a fixed-width line of stacks; each stack lists its blocks from
//! bottom to top. On the wire a state is an array of arrays of color names.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Block color. The derived order (cyan < brown < red < orange) is the
/// canonical order used for enumeration and serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Cyan,
    Brown,
    Red,
    Orange,
}

impl Color {
    pub const ALL: [Color; 4] = [Color::Cyan, Color::Brown, Color::Red, Color::Orange];

    pub fn name(self) -> &'static str {
        match self {
            Color::Cyan => "cyan",
            Color::Brown => "brown",
            Color::Red => "red",
            Color::Orange => "orange",
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Color {
    type Err = UnknownColor;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Color::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| UnknownColor(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown color `{0}`")]
pub struct UnknownColor(pub String);

/// A line of block stacks, each listed bottom to top.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WorldState {
    stacks: Vec<Vec<Color>>,
}

impl WorldState {
    pub fn new(stacks: Vec<Vec<Color>>) -> Self {
        WorldState { stacks }
    }

    /// `width` empty stacks.
    pub fn empty(width: usize) -> Self {
        WorldState {
            stacks: vec![Vec::new(); width],
        }
    }

    pub fn stacks(&self) -> &[Vec<Color>] {
        &self.stacks
    }

    pub fn num_stacks(&self) -> usize {
        self.stacks.len()
    }

    pub fn top(&self, index: usize) -> Option<Color> {
        self.stacks.get(index).and_then(|s| s.last().copied())
    }

    pub fn total_blocks(&self) -> usize {
        self.stacks.iter().map(Vec::len).sum()
    }

    pub fn max_height(&self) -> usize {
        self.stacks.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub(crate) fn stacks_mut(&mut self) -> &mut [Vec<Color>] {
        &mut self.stacks
    }
}

impl fmt::Display for WorldState {
    /// Compact form, e.g. `[red|orange red||brown]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, stack) in self.stacks.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            for (j, c) in stack.iter().enumerate() {
                if j > 0 {
                    f.write_str(" ")?;
                }
                f.write_str(c.name())?;
            }
        }
        f.write_str("]")
    }
}

/// A subset of the stack indices of some state, as a membership mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StackSelection {
    mask: Vec<bool>,
}

impl StackSelection {
    pub fn none(width: usize) -> Self {
        StackSelection {
            mask: vec![false; width],
        }
    }

    pub fn all(width: usize) -> Self {
        StackSelection {
            mask: vec![true; width],
        }
    }

    pub fn from_indices(width: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut sel = Self::none(width);
        for i in indices {
            sel.mask[i] = true;
        }
        sel
    }

    pub fn width(&self) -> usize {
        self.mask.len()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.mask.get(index).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    /// Selected indices in increasing order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn complement(&self) -> Self {
        StackSelection {
            mask: self.mask.iter().map(|b| !b).collect(),
        }
    }

    pub fn leftmost(&self) -> Self {
        let width = self.width();
        Self::from_indices(width, self.indices().next())
    }

    pub fn rightmost(&self) -> Self {
        let width = self.width();
        Self::from_indices(width, self.indices().last())
    }
}
