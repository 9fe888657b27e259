//! A scripted player with its own invented language.
//!
//! The teacher plans with breadth-first search, describes the next action
//! in a private vocabulary of pseudo-words, and always selects the state it
//! meant. With consistency ρ = 1 every predicate is always rendered by the
//! same word; lower ρ swaps in synonyms at random. Independently of ρ, an
//! utterance may carry one meaningless filler word, so that repeating an
//! action does not always repeat the exact utterance.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shrdlurn::{Action, Color, Planner, Session, SessionError, SetExpr, WorldState};

const PREDICATES: [&str; 11] = [
    "all",
    "with",
    "not",
    "leftmost",
    "rightmost",
    "add",
    "remove",
    "cyan",
    "brown",
    "red",
    "orange",
];
const SYNONYMS: usize = 2;
const FILLERS: usize = 3;
/// Alternative descriptions tried when the intended state is not listed.
const REPHRASINGS: usize = 3;
/// Probability that an utterance gets a filler word.
pub const DEFAULT_FILLER_RATE: f64 = 0.5;

#[derive(Debug, thiserror::Error)]
pub enum TeachError {
    #[error("level {0}: goal unreachable from the current state")]
    Unreachable(String),
    #[error("level {0}: no acceptable state among the candidates")]
    Stuck(String),
    #[error(transparent)]
    Session(#[from] SessionError),
}

/// Where the verb and the color of `add` go relative to the set phrase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AddOrder {
    VerbColorSet,
    VerbSetColor,
    SetVerbColor,
}

#[derive(Debug, Clone)]
pub struct SyntheticTeacher {
    /// Per predicate: the preferred word, then its synonyms.
    lexicon: HashMap<&'static str, Vec<String>>,
    rho: f64,
    fillers: Vec<String>,
    filler_rate: f64,
    verb_first: bool,
    modifier_first: bool,
    add_order: AddOrder,
    rng: ChaCha8Rng,
}

fn pseudo_word(rng: &mut ChaCha8Rng) -> String {
    const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
    const VOWELS: &[u8] = b"aeiou";
    let syllables = rng.gen_range(2..=3);
    (0..syllables)
        .flat_map(|_| {
            [
                *CONSONANTS.choose(rng).unwrap() as char,
                *VOWELS.choose(rng).unwrap() as char,
            ]
        })
        .collect()
}

impl SyntheticTeacher {
    pub fn new(seed: u64, rho: f64) -> Self {
        assert!((0.0..=1.0).contains(&rho), "rho must lie in [0, 1]");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut used = Vec::new();
        let mut lexicon = HashMap::new();
        for p in PREDICATES {
            let mut words = Vec::new();
            while words.len() < 1 + SYNONYMS {
                let w = pseudo_word(&mut rng);
                if !used.contains(&w) {
                    used.push(w.clone());
                    words.push(w);
                }
            }
            lexicon.insert(p, words);
        }
        let mut fillers = Vec::new();
        while fillers.len() < FILLERS {
            let w = pseudo_word(&mut rng);
            if !used.contains(&w) {
                used.push(w.clone());
                fillers.push(w);
            }
        }
        let verb_first = rng.gen_bool(0.5);
        let modifier_first = rng.gen_bool(0.5);
        let add_order = *[
            AddOrder::VerbColorSet,
            AddOrder::VerbSetColor,
            AddOrder::SetVerbColor,
        ]
        .choose(&mut rng)
        .unwrap();
        SyntheticTeacher {
            lexicon,
            rho,
            fillers,
            filler_rate: DEFAULT_FILLER_RATE,
            verb_first,
            modifier_first,
            add_order,
            rng,
        }
    }

    pub fn with_filler_rate(mut self, rate: f64) -> Self {
        assert!(
            (0.0..=1.0).contains(&rate),
            "filler rate must lie in [0, 1]"
        );
        self.filler_rate = rate;
        self
    }

    /// The preferred word for `predicate`.
    pub fn word(&self, predicate: &str) -> &str {
        &self.lexicon[predicate][0]
    }

    fn say(&mut self, predicate: &str) -> String {
        let words = &self.lexicon[predicate];
        if self.rho >= 1.0 || self.rng.gen_bool(self.rho) {
            words[0].clone()
        } else {
            words[1..].choose(&mut self.rng).unwrap().clone()
        }
    }

    fn set_phrase(&mut self, set: &SetExpr, out: &mut Vec<String>) {
        match set {
            SetExpr::All => out.push(self.say("all")),
            SetExpr::With(c) => out.push(self.say(c.name())),
            SetExpr::Not(s) | SetExpr::Leftmost(s) | SetExpr::Rightmost(s) => {
                let head = match set {
                    SetExpr::Not(_) => "not",
                    SetExpr::Leftmost(_) => "leftmost",
                    _ => "rightmost",
                };
                let w = self.say(head);
                if self.modifier_first {
                    out.push(w);
                    self.set_phrase(s, out);
                } else {
                    self.set_phrase(s, out);
                    out.push(w);
                }
            }
        }
    }

    fn color_word(&mut self, c: Color) -> String {
        self.say(c.name())
    }

    /// Describes `action` as an utterance.
    pub fn render(&mut self, action: &Action) -> String {
        let mut out = Vec::new();
        match action {
            Action::Remove(s) => {
                let verb = self.say("remove");
                if self.verb_first {
                    out.push(verb);
                    self.set_phrase(s, &mut out);
                } else {
                    self.set_phrase(s, &mut out);
                    out.push(verb);
                }
            }
            Action::Add(s, c) => {
                let verb = self.say("add");
                let color = self.color_word(*c);
                match self.add_order {
                    AddOrder::VerbColorSet => {
                        out.extend([verb, color]);
                        self.set_phrase(s, &mut out);
                    }
                    AddOrder::VerbSetColor => {
                        out.push(verb);
                        self.set_phrase(s, &mut out);
                        out.push(color);
                    }
                    AddOrder::SetVerbColor => {
                        self.set_phrase(s, &mut out);
                        out.extend([verb, color]);
                    }
                }
            }
        }
        if self.filler_rate > 0.0 && self.rng.gen_bool(self.filler_rate) {
            let w = self.fillers.choose(&mut self.rng).unwrap().clone();
            let at = self.rng.gen_range(0..=out.len());
            out.insert(at, w);
        }
        out.join(" ")
    }
}

/// Shortest plans keyed by (state, goal), shared between runs that play
/// the same levels.
#[derive(Debug)]
pub struct PlanCache {
    planner: Planner,
    max_steps: usize,
    plans: HashMap<(WorldState, WorldState), Option<Vec<Action>>>,
}

impl PlanCache {
    pub fn new(max_action_size: usize, max_steps: usize) -> Self {
        PlanCache {
            planner: Planner::new(max_action_size),
            max_steps,
            plans: HashMap::new(),
        }
    }

    pub fn planner(&self) -> &Planner {
        &self.planner
    }

    pub fn plan(&mut self, state: &WorldState, goal: &WorldState) -> Option<&[Action]> {
        let key = (state.clone(), goal.clone());
        if !self.plans.contains_key(&key) {
            let plan = self.planner.shortest_plan(state, goal, self.max_steps);
            self.plans.insert(key.clone(), plan);
        }
        self.plans[&key].as_deref()
    }
}

impl Default for PlanCache {
    fn default() -> Self {
        PlanCache::new(6, 2)
    }
}

/// Outcome of one teacher turn.
#[derive(Debug, Clone, PartialEq)]
pub struct Turn {
    pub utterance: String,
    pub selected_index: usize,
    /// The intended state was missing under every phrasing tried and the
    /// listed state nearest the goal was chosen instead.
    pub fallback: bool,
}

impl SyntheticTeacher {
    /// Plays one utterance and one selection on `session`.
    pub fn play_turn(
        &mut self,
        session: &mut Session,
        plans: &mut PlanCache,
    ) -> Result<Turn, TeachError> {
        let level = session.level().ok_or(SessionError::Complete)?.clone();
        let state = session.state().clone();
        let plan = plans
            .plan(&state, &level.goal)
            .ok_or_else(|| TeachError::Unreachable(level.id.clone()))?
            .to_vec();
        let target = plan[0].execute(&state);
        // the planned action first, then other descriptions of the same move
        let phrasings: Vec<Action> = std::iter::once(plan[0].clone())
            .chain(
                plans
                    .planner()
                    .actions()
                    .iter()
                    .filter(|a| **a != plan[0] && a.execute(&state) == target)
                    .take(REPHRASINGS)
                    .cloned(),
            )
            .collect();
        let mut utterance = String::new();
        for action in &phrasings {
            utterance = self.render(action);
            let list = session.submit_utterance(&utterance)?;
            if let Some(i) = list.position(&target) {
                session.select_candidate(i)?;
                return Ok(Turn {
                    utterance,
                    selected_index: i,
                    fallback: false,
                });
            }
        }
        let list = session.pending().expect("just submitted");
        // otherwise the listed state closest to the goal, best ranked first
        let denotations = list.denotations();
        let mut best: Option<(usize, usize)> = None;
        for (i, y) in denotations.iter().enumerate() {
            if y == &state {
                continue;
            }
            if let Some(d) = plans.plan(y, &level.goal).map(<[Action]>::len) {
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, i));
                }
            }
        }
        if let Some((_, i)) = best {
            session.select_candidate(i)?;
            return Ok(Turn {
                utterance,
                selected_index: i,
                fallback: true,
            });
        }
        session.abandon_pending();
        Err(TeachError::Stuck(level.id))
    }
}
