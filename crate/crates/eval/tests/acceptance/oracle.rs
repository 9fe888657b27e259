//! Reference implementations written without the library's types: a naive
//! generator of canonical form text and an interpreter over that text.

use rand::Rng;
use shrdlurn::{Color, WorldState};

pub const COLORS: [&str; 4] = ["cyan", "brown", "red", "orange"];
const UNARY: [&str; 3] = ["not", "leftmost", "rightmost"];

/// Canonical text of every Set of exactly `n` nodes.
pub fn sets(n: usize) -> Vec<String> {
    match n {
        0 => vec![],
        1 => vec!["all()".to_string()],
        _ => {
            let mut out: Vec<String> = UNARY
                .iter()
                .flat_map(|u| sets(n - 1).into_iter().map(move |s| format!("{u}({s})")))
                .collect();
            if n == 2 {
                out.extend(COLORS.iter().map(|c| format!("with({c})")));
            }
            out
        }
    }
}

/// Canonical text of every Act of exactly `n` nodes.
pub fn acts(n: usize) -> Vec<String> {
    let mut out: Vec<String> = if n >= 2 {
        sets(n - 1)
            .into_iter()
            .map(|s| format!("remove({s})"))
            .collect()
    } else {
        vec![]
    };
    if n >= 3 {
        for s in sets(n - 2) {
            for c in COLORS {
                out.push(format!("add({s},{c})"));
            }
        }
    }
    out
}

pub fn acts_up_to(n: usize) -> Vec<String> {
    (1..=n).flat_map(acts).collect()
}

pub fn sets_up_to(n: usize) -> Vec<String> {
    (1..=n).flat_map(sets).collect()
}

/// Stacks as color indices, bottom first.
pub type Board = Vec<Vec<usize>>;

fn color_index(name: &str) -> usize {
    COLORS
        .iter()
        .position(|&c| c == name)
        .unwrap_or_else(|| panic!("color {name}"))
}

/// Splits `head(args)` into the head and its top-level arguments.
fn split_call(text: &str) -> (&str, Vec<&str>) {
    let open = text.find('(').expect("call");
    assert!(text.ends_with(')'), "{text}");
    let head = &text[..open];
    let inner = &text[open + 1..text.len() - 1];
    let mut args = Vec::new();
    let (mut depth, mut start) = (0, 0);
    for (i, ch) in inner.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                args.push(&inner[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if !inner.is_empty() {
        args.push(&inner[start..]);
    }
    (head, args)
}

/// Membership mask of the stacks a Set selects.
pub fn eval_set(text: &str, board: &Board) -> Vec<bool> {
    let (head, args) = split_call(text);
    let width = board.len();
    match head {
        "all" => vec![true; width],
        "with" => {
            let c = color_index(args[0]);
            board.iter().map(|s| s.last() == Some(&c)).collect()
        }
        "not" => eval_set(args[0], board).into_iter().map(|b| !b).collect(),
        "leftmost" | "rightmost" => {
            let inner = eval_set(args[0], board);
            let pick = if head == "leftmost" {
                inner.iter().position(|&b| b)
            } else {
                inner.iter().rposition(|&b| b)
            };
            (0..width).map(|i| Some(i) == pick).collect()
        }
        other => panic!("unknown set head {other}"),
    }
}

pub fn run_act(text: &str, board: &Board) -> Board {
    let (head, args) = split_call(text);
    let mask = eval_set(args[0], board);
    let mut next = board.clone();
    for (stack, selected) in next.iter_mut().zip(mask) {
        if !selected {
            continue;
        }
        match head {
            "add" => stack.push(color_index(args[1])),
            "remove" => {
                stack.pop();
            }
            other => panic!("unknown act head {other}"),
        }
    }
    next
}

pub fn to_state(board: &Board) -> WorldState {
    WorldState::new(
        board
            .iter()
            .map(|s| s.iter().map(|&c| Color::ALL[c]).collect())
            .collect(),
    )
}

pub fn from_state(state: &WorldState) -> Board {
    state
        .stacks()
        .iter()
        .map(|s| {
            s.iter()
                .map(|c| Color::ALL.iter().position(|x| x == c).unwrap())
                .collect()
        })
        .collect()
}

pub fn random_board(rng: &mut impl Rng, max_width: usize, max_height: usize) -> Board {
    let width = rng.gen_range(1..=max_width);
    (0..width)
        .map(|_| {
            let h = rng.gen_range(0..=max_height);
            (0..h).map(|_| rng.gen_range(0..4)).collect()
        })
        .collect()
}

/// Every board of exactly `width` stacks each at most `max_height` tall.
pub fn all_boards(width: usize, max_height: usize) -> Vec<Board> {
    let mut stacks: Vec<Vec<usize>> = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_height {
        frontier = frontier
            .iter()
            .flat_map(|s: &Vec<usize>| {
                (0..4).map(move |c| {
                    let mut t = s.clone();
                    t.push(c);
                    t
                })
            })
            .collect();
        stacks.extend(frontier.iter().cloned());
    }
    let mut boards: Vec<Board> = vec![vec![]];
    for _ in 0..width {
        boards = boards
            .iter()
            .flat_map(|b| {
                stacks.iter().map(move |s| {
                    let mut t = b.clone();
                    t.push(s.clone());
                    t
                })
            })
            .collect();
    }
    boards
}
