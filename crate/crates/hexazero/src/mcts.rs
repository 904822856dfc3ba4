//! Textbook Monte-Carlo tree search with UCT selection and uniformly random
//! playouts.
//!
//! A node is a *leaf* while it still has unexpanded moves; it is *terminal*
//! when the game is over there. Each iteration selects a leaf by UCT,
//! expands one move, plays a random game to the end and propagates the
//! payout back to the root. Payouts are 1.0 / 0.0 / 0.5 for a win / loss /
//! draw of the root player (Hexapawn never draws; 0.5 is defined so the
//! searcher stays game-agnostic).
//!
//! By default the payout is credited at every node from the viewpoint of the
//! player who moved into that node, so selection always maximizes the
//! mover's interest. `book_faithful` disables that and propagates the
//! root-relative payout uniformly instead; the uniform variant is noticeably
//! weaker, which is the point of keeping it around for comparison.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::game::{Board, Color, Move};

/// Conventional UCT exploration constant, pinned as a literal rather
/// than sqrt(2).
#[allow(clippy::approx_constant)]
pub const DEFAULT_EXPLORATION: f64 = 1.4142;

/// Search parameters. `c` is the UCT exploration constant.
#[derive(Clone, Debug)]
pub struct UctConfig {
    pub c: f64,
    pub iterations: u64,
    pub seed: u64,
    pub book_faithful: bool,
}

impl Default for UctConfig {
    fn default() -> Self {
        UctConfig { c: DEFAULT_EXPLORATION, iterations: 1000, seed: 0, book_faithful: false }
    }
}

/// UCT selection score `M + c * sqrt(ln(parent_V) / V)`.
///
/// Panics if either visit count is below one; only visited nodes have a
/// defined score.
pub fn uct_value(node_m: f64, node_v: f64, parent_v: f64, c: f64) -> f64 {
    assert!(node_v >= 1.0 && parent_v >= 1.0, "uct_value needs visited nodes");
    node_m + c * (parent_v.ln() / node_v).sqrt()
}

/// Mean update `M' = (M * V + E) / (V + 1)` used during backpropagation.
pub fn update_mean(mean: f64, visits: u64, payout: f64) -> f64 {
    (mean * visits as f64 + payout) / (visits as f64 + 1.0)
}

/// Per-move statistics at the root after a search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoveStats {
    pub mv: Move,
    pub mean: f64,
    pub visits: u64,
}

/// Search result: the recommended (most visited) move plus the statistics of
/// every root move in move-generation order.
#[derive(Clone, Debug)]
pub struct UctResult {
    pub best: Move,
    pub stats: Vec<MoveStats>,
}

struct UctNode {
    board: Board,
    mean: f64,
    visits: u64,
    visited: Vec<(Move, usize)>,
    unvisited: Vec<Move>,
    parent: Option<usize>,
}

impl UctNode {
    fn new(board: Board, parent: Option<usize>) -> UctNode {
        let unvisited = if board.is_terminal() { Vec::new() } else { board.generate_moves() };
        UctNode { board, mean: 0.0, visits: 0, visited: Vec::new(), unvisited, parent }
    }

    fn is_leaf(&self) -> bool {
        !self.unvisited.is_empty()
    }

    fn is_terminal(&self) -> bool {
        self.unvisited.is_empty() && self.visited.is_empty()
    }
}

struct UctTree {
    nodes: Vec<UctNode>,
    root_player: Color,
    c: f64,
    book_faithful: bool,
}

impl UctTree {
    fn new(board: Board, cfg: &UctConfig) -> UctTree {
        UctTree {
            nodes: vec![UctNode::new(board, None)],
            root_player: board.turn(),
            c: cfg.c,
            book_faithful: cfg.book_faithful,
        }
    }

    /// Descends from the root by maximizing UCT until a leaf or terminal
    /// node is reached.
    fn select(&self) -> usize {
        let mut id = 0;
        loop {
            let node = &self.nodes[id];
            if node.is_leaf() || node.is_terminal() {
                return id;
            }
            let mut best: Option<(usize, f64)> = None;
            for &(_, child_id) in &node.visited {
                let child = &self.nodes[child_id];
                let score =
                    uct_value(child.mean, child.visits as f64, node.visits as f64, self.c);
                if best.is_none_or(|(_, b)| score > b) {
                    best = Some((child_id, score));
                }
            }
            id = best.expect("non-leaf node has visited children").0;
        }
    }

    /// Pops one unexpanded move and links the resulting child node.
    fn expand(&mut self, id: usize) -> usize {
        assert!(!self.nodes[id].is_terminal(), "cannot expand a terminal node");
        let mv = self.nodes[id].unvisited.pop().expect("leaf has unexpanded moves");
        let child_board = self.nodes[id].board.apply_unchecked(mv);
        let child_id = self.nodes.len();
        self.nodes.push(UctNode::new(child_board, Some(id)));
        self.nodes[id].visited.push((mv, child_id));
        child_id
    }

    /// Plays uniformly random moves until the game ends; returns the payout
    /// from the root player's perspective.
    fn simulate(&self, id: usize, rng: &mut ChaCha8Rng) -> f64 {
        let mut board = self.nodes[id].board;
        loop {
            if let Some(winner) = board.outcome().winner() {
                return if winner == self.root_player { 1.0 } else { 0.0 };
            }
            let moves = board.generate_moves();
            let mv = moves[rng.gen_range(0..moves.len())];
            board = board.apply_unchecked(mv);
        }
    }

    /// Applies the mean-update formula at every ancestor up to the root.
    fn backpropagate(&mut self, id: usize, payout: f64) {
        let mut current = Some(id);
        while let Some(cid) = current {
            let node = &mut self.nodes[cid];
            let credit = if self.book_faithful {
                payout
            } else {
                // viewpoint of the player who moved into this node
                let mover = node.board.turn().opponent();
                if mover == self.root_player {
                    payout
                } else {
                    1.0 - payout
                }
            };
            node.mean = update_mean(node.mean, node.visits, credit);
            node.visits += 1;
            current = node.parent;
        }
    }
}

/// Runs `cfg.iterations` rounds of select / expand / simulate /
/// backpropagate and recommends the most visited root move. Terminal
/// selections skip expansion and score directly.
///
/// Panics if the position is already terminal.
pub fn search(board: &Board, cfg: &UctConfig) -> UctResult {
    assert!(!board.is_terminal(), "cannot search a terminal position");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tree = UctTree::new(*board, cfg);
    for _ in 0..cfg.iterations {
        let mut id = tree.select();
        if !tree.nodes[id].is_terminal() {
            id = tree.expand(id);
        }
        let payout = tree.simulate(id, &mut rng);
        tree.backpropagate(id, payout);
    }

    let root = &tree.nodes[0];
    let stats: Vec<MoveStats> = board
        .generate_moves()
        .into_iter()
        .map(|mv| {
            match root.visited.iter().find(|(m, _)| *m == mv) {
                Some(&(_, child_id)) => {
                    let child = &tree.nodes[child_id];
                    MoveStats { mv, mean: child.mean, visits: child.visits }
                }
                None => MoveStats { mv, mean: 0.0, visits: 0 },
            }
        })
        .collect();
    // ties break toward the first move in the deterministic child order
    let top = stats.iter().map(|s| s.visits).max().expect("non-terminal position has moves");
    let best = stats.iter().find(|s| s.visits == top).map(|s| s.mv).unwrap();
    UctResult { best, stats }
}
