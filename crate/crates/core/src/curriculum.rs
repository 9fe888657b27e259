//! Levels, the shipped curriculum, and a breadth-first planner over actions.

use std::collections::{HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lf::{Action, SetExpr};
use crate::world::{Color, WorldState};

/// One task: transform `start` into `goal`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    pub id: String,
    /// Difficulty tier, 1-based; early tiers need only small actions.
    pub tier: u32,
    pub start: WorldState,
    pub goal: WorldState,
}

#[derive(Debug, thiserror::Error)]
pub enum CurriculumError {
    #[error("curriculum is empty")]
    Empty,
    #[error("level {id}: start has {start} stacks but goal has {goal}")]
    WidthMismatch {
        id: String,
        start: usize,
        goal: usize,
    },
    #[error("level {0}: start equals goal")]
    Trivial(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

static DEFAULT_CURRICULUM: &str = include_str!("../data/curriculum.json");

/// 50 tasks in 5 tiers of 10, generated once by [`generate_curriculum`]
/// with seed 2016 and frozen.
pub fn default_curriculum() -> Vec<Level> {
    parse_curriculum(DEFAULT_CURRICULUM).expect("shipped curriculum is valid")
}

pub fn parse_curriculum(text: &str) -> Result<Vec<Level>, CurriculumError> {
    let levels: Vec<Level> = serde_json::from_str(text)?;
    validate(&levels)?;
    Ok(levels)
}

pub fn validate(levels: &[Level]) -> Result<(), CurriculumError> {
    if levels.is_empty() {
        return Err(CurriculumError::Empty);
    }
    for l in levels {
        if l.start.num_stacks() != l.goal.num_stacks() {
            return Err(CurriculumError::WidthMismatch {
                id: l.id.clone(),
                start: l.start.num_stacks(),
                goal: l.goal.num_stacks(),
            });
        }
        if l.start == l.goal {
            return Err(CurriculumError::Trivial(l.id.clone()));
        }
    }
    Ok(())
}

/// Every set expression of size ≤ `max_size`, grouped by size.
pub fn all_sets(max_size: usize) -> Vec<Vec<SetExpr>> {
    let mut by_size: Vec<Vec<SetExpr>> = vec![Vec::new(); max_size + 1];
    for n in 1..=max_size {
        let mut cell = Vec::new();
        if n == 1 {
            cell.push(SetExpr::All);
        }
        if n == 2 {
            cell.extend(Color::ALL.map(SetExpr::With));
        }
        if n >= 2 {
            for s in by_size[n - 1].clone() {
                cell.push(SetExpr::not(s.clone()));
                cell.push(SetExpr::leftmost(s.clone()));
                cell.push(SetExpr::rightmost(s));
            }
        }
        by_size[n] = cell;
    }
    by_size
}

/// Every action of size ≤ `max_size`, ordered by (size, canonical text).
pub fn all_actions(max_size: usize) -> Vec<Action> {
    let sets = all_sets(max_size);
    let mut acts = Vec::new();
    for n in 2..=max_size {
        for s in &sets[n - 1] {
            acts.push(Action::remove(s.clone()));
        }
        if n >= 3 {
            for s in &sets[n - 2] {
                for c in Color::ALL {
                    acts.push(Action::add(s.clone(), c));
                }
            }
        }
    }
    acts.sort_by_cached_key(|a| (a.size(), a.to_string()));
    acts
}

/// Breadth-first search over states using actions up to a fixed size.
#[derive(Debug, Clone)]
pub struct Planner {
    actions: Vec<Action>,
}

impl Planner {
    pub fn new(max_action_size: usize) -> Self {
        Planner {
            actions: all_actions(max_action_size),
        }
    }

    /// Every action considered, ordered by (size, canonical text).
    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    /// Distinct changed successor states, each with its smallest action.
    pub fn successors(&self, state: &WorldState) -> Vec<(WorldState, &Action)> {
        let mut seen: HashMap<WorldState, ()> = HashMap::new();
        let mut out = Vec::new();
        for a in &self.actions {
            let next = a.execute(state);
            if &next != state && seen.insert(next.clone(), ()).is_none() {
                out.push((next, a));
            }
        }
        out
    }

    /// A shortest action sequence from `start` to `goal` of at most
    /// `max_steps` actions. Ties go to the smallest first action.
    pub fn shortest_plan(
        &self,
        start: &WorldState,
        goal: &WorldState,
        max_steps: usize,
    ) -> Option<Vec<Action>> {
        if start == goal {
            return Some(Vec::new());
        }
        let mut parent: HashMap<WorldState, (WorldState, Action)> = HashMap::new();
        let mut frontier = VecDeque::from([(start.clone(), 0usize)]);
        parent.insert(start.clone(), (start.clone(), Action::remove(SetExpr::All)));
        while let Some((state, depth)) = frontier.pop_front() {
            if depth == max_steps {
                continue;
            }
            for (next, action) in self.successors(&state) {
                if parent.contains_key(&next) {
                    continue;
                }
                parent.insert(next.clone(), (state.clone(), action.clone()));
                if &next == goal {
                    let mut plan = Vec::new();
                    let mut cur = next;
                    while &cur != start {
                        let (prev, act) = parent[&cur].clone();
                        plan.push(act);
                        cur = prev;
                    }
                    plan.reverse();
                    return Some(plan);
                }
                frontier.push_back((next, depth + 1));
            }
        }
        None
    }
}

struct TierSpec {
    min_width: usize,
    max_width: usize,
    max_height: usize,
    steps: usize,
    min_action: usize,
    max_action: usize,
}

const TIERS: [TierSpec; 5] = [
    TierSpec {
        min_width: 3,
        max_width: 4,
        max_height: 2,
        steps: 1,
        min_action: 2,
        max_action: 3,
    },
    TierSpec {
        min_width: 3,
        max_width: 5,
        max_height: 2,
        steps: 1,
        min_action: 4,
        max_action: 4,
    },
    TierSpec {
        min_width: 4,
        max_width: 5,
        max_height: 3,
        steps: 1,
        min_action: 5,
        max_action: 6,
    },
    TierSpec {
        min_width: 4,
        max_width: 5,
        max_height: 3,
        steps: 2,
        min_action: 3,
        max_action: 4,
    },
    TierSpec {
        min_width: 4,
        max_width: 6,
        max_height: 3,
        steps: 2,
        min_action: 3,
        max_action: 6,
    },
];

/// Generates a tiered curriculum of `per_tier` tasks for each of five
/// tiers. Each goal is produced by applying randomly drawn actions to a
/// random start, and every task is checked by [`Planner`] to need exactly
/// the tier's number of steps using actions no larger than the tier's
/// largest.
pub fn generate_curriculum(seed: u64, per_tier: usize) -> Vec<Level> {
    generate(seed, per_tier, true)
}

/// Like [`generate_curriculum`] but without the planner check, so some
/// two-step tasks may be solvable in one. Every goal is still reachable by
/// construction. Cheap enough to call per experiment.
pub fn random_curriculum(seed: u64, per_tier: usize) -> Vec<Level> {
    generate(seed, per_tier, false)
}

fn generate(seed: u64, per_tier: usize, verify: bool) -> Vec<Level> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let actions = all_actions(6);
    let mut levels = Vec::new();
    for (t, spec) in TIERS.iter().enumerate() {
        let pool: Vec<&Action> = actions
            .iter()
            .filter(|a| (spec.min_action..=spec.max_action).contains(&a.size()))
            .collect();
        let planner = Planner::new(if verify { spec.max_action } else { 0 });
        let mut made = 0;
        while made < per_tier {
            let width = rng.gen_range(spec.min_width..=spec.max_width);
            let start = WorldState::new(
                (0..width)
                    .map(|_| {
                        let h = rng.gen_range(0..=spec.max_height);
                        (0..h)
                            .map(|_| *Color::ALL.choose(&mut rng).unwrap())
                            .collect()
                    })
                    .collect(),
            );
            let mut goal = start.clone();
            let mut ok = true;
            for _ in 0..spec.steps {
                let a = pool.choose(&mut rng).unwrap();
                let next = a.execute(&goal);
                if next == goal {
                    ok = false;
                    break;
                }
                goal = next;
            }
            if !ok || goal == start || goal.max_height() > 5 {
                continue;
            }
            if verify {
                let plan = planner.shortest_plan(&start, &goal, spec.steps);
                if plan.map(|p| p.len()) != Some(spec.steps) {
                    continue;
                }
            }
            made += 1;
            levels.push(Level {
                id: format!("{}-{made:02}", t + 1),
                tier: t as u32 + 1,
                start,
                goal,
            });
        }
    }
    levels
}
