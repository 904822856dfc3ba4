//! Network-guided Monte-Carlo tree search in the AlphaZero style: no
//! rollouts, move priors and leaf values come from the two-head network.
//!
//! Edge values are stored in absolute terms (positive favors White), and Q
//! is negated for Black during selection. The root's parent edge starts with
//! a visit count of one; the count of a node's parent edge is what feeds the
//! exploration term of its children.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::game::{output_index, Board, Color, Move};
use crate::nn::TwoHeadNet;

/// Search parameters. `tau` shapes the final visit-count distribution.
#[derive(Clone, Debug)]
pub struct PuctConfig {
    pub c_puct: f64,
    pub tau: f64,
    pub simulations: u32,
    pub seed: u64,
}

impl Default for PuctConfig {
    fn default() -> Self {
        PuctConfig { c_puct: 1.0, tau: 1.0, simulations: 100, seed: 0 }
    }
}

/// Below this temperature the policy collapses to the argmax visit count.
const TAU_ARGMAX: f64 = 1e-3;

/// Exploration bonus `c * P * sqrt(N_parent) / (1 + N_edge)`.
pub fn puct_u(prior: f64, n_edge: u32, n_parent: u32, c_puct: f64) -> f64 {
    c_puct * prior * (n_parent as f64).sqrt() / (1.0 + n_edge as f64)
}

/// Visit statistics of one edge.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EdgeStats {
    pub n: u32,
    pub w: f64,
    pub q: f64,
    pub p: f64,
}

impl EdgeStats {
    /// The `W += v, N += 1, Q = W / N` update.
    pub fn add_visit(&mut self, v: f64) {
        self.n += 1;
        self.w += v;
        self.q = self.w / f64::from(self.n);
    }
}

/// Per-root-move search output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootMoveInfo {
    pub mv: Move,
    pub pi: f64,
    pub visits: u32,
    pub q: f64,
}

struct PuctNode {
    board: Board,
    parent: Option<(usize, usize)>,
    children: Vec<(Move, EdgeStats, usize)>,
}

impl PuctNode {
    fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

pub(crate) struct PuctTree {
    nodes: Vec<PuctNode>,
    root_edge: EdgeStats,
    c_puct: f64,
}

impl PuctTree {
    fn new(board: Board, c_puct: f64) -> PuctTree {
        let root = PuctNode { board, parent: None, children: Vec::new() };
        // the root's incoming edge starts at one visit
        let root_edge = EdgeStats { n: 1, ..EdgeStats::default() };
        PuctTree { nodes: vec![root], root_edge, c_puct }
    }

    fn parent_edge_n(&self, id: usize) -> u32 {
        match self.nodes[id].parent {
            Some((pid, eidx)) => self.nodes[pid].children[eidx].1.n,
            None => self.root_edge.n,
        }
    }

    /// Selection scores of a node's children: perspective-adjusted Q plus
    /// the exploration bonus.
    fn selection_scores(&self, id: usize) -> Vec<f64> {
        let node = &self.nodes[id];
        let parent_n = self.parent_edge_n(id);
        node.children
            .iter()
            .map(|(_, edge, _)| {
                let value = if node.board.turn() == Color::Black { -edge.q } else { edge.q };
                value + puct_u(edge.p, edge.n, parent_n, self.c_puct)
            })
            .collect()
    }

    /// Descends from the root, maximizing the selection score and breaking
    /// exact ties uniformly at random, until a leaf is reached.
    fn select(&self, rng: &mut ChaCha8Rng) -> usize {
        let mut id = 0;
        loop {
            if self.nodes[id].is_leaf() {
                return id;
            }
            let scores = self.selection_scores(id);
            let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let tied: Vec<usize> = scores
                .iter()
                .enumerate()
                .filter(|(_, s)| **s == best)
                .map(|(i, _)| i)
                .collect();
            assert!(!tied.is_empty(), "no child maximizes the selection score");
            let pick = if tied.len() > 1 { tied[rng.gen_range(0..tied.len())] } else { tied[0] };
            id = self.nodes[id].children[pick].2;
        }
    }

    /// Terminal leaves score +/-1 directly and grow no children; otherwise
    /// the network is queried once, an edge per legal move is created with
    /// masked, renormalized priors, and the value-head output is returned.
    fn expand_and_evaluate(&mut self, id: usize, net: &TwoHeadNet) -> f64 {
        if let Some(winner) = self.nodes[id].board.outcome().winner() {
            return if winner == Color::White { 1.0 } else { -1.0 };
        }
        let board = self.nodes[id].board;
        let (policy, value) = net.forward(&board.to_network_input().to_f64());
        let moves = board.generate_moves();
        let mut priors: Vec<f64> = moves
            .iter()
            .map(|m| policy[output_index(*m).expect("legal moves have output indices")])
            .collect();
        let prob_sum: f64 = priors.iter().sum();
        if prob_sum > 0.0 {
            for p in priors.iter_mut() {
                *p /= prob_sum;
            }
        } else {
            let uniform = 1.0 / priors.len() as f64;
            priors.iter_mut().for_each(|p| *p = uniform);
        }
        for (eidx, (mv, prior)) in moves.into_iter().zip(priors).enumerate() {
            let child_board = board.apply_unchecked(mv);
            let child_id = self.nodes.len();
            self.nodes.push(PuctNode {
                board: child_board,
                parent: Some((id, eidx)),
                children: Vec::new(),
            });
            let edge = EdgeStats { p: prior, ..EdgeStats::default() };
            self.nodes[id].children.push((mv, edge, child_id));
        }
        value
    }

    /// Applies the visit update along the parent chain up to and including
    /// the root's own edge.
    fn backpropagate(&mut self, v: f64, id: usize) {
        let mut current = id;
        loop {
            match self.nodes[current].parent {
                Some((pid, eidx)) => {
                    self.nodes[pid].children[eidx].1.add_visit(v);
                    current = pid;
                }
                None => {
                    self.root_edge.add_visit(v);
                    return;
                }
            }
        }
    }

    fn root_children(&self) -> &[(Move, EdgeStats, usize)] {
        &self.nodes[0].children
    }
}

/// Converts root visit counts to move probabilities with the temperature
/// formula `pi_m = N_m^(1/tau) / sum_n N_n^(1/tau)`; temperatures below
/// 1e-3 are treated as argmax.
pub fn visit_distribution(visits: &[u32], tau: f64) -> Vec<f64> {
    assert!(tau > 0.0, "temperature must be positive");
    if tau < TAU_ARGMAX {
        let top = visits.iter().copied().max().unwrap_or(0);
        let first = visits.iter().position(|&n| n == top).unwrap_or(0);
        let mut pi = vec![0.0; visits.len()];
        pi[first] = 1.0;
        return pi;
    }
    let powed: Vec<f64> = visits.iter().map(|&n| f64::from(n).powf(1.0 / tau)).collect();
    let sum: f64 = powed.iter().sum();
    if sum == 0.0 {
        return vec![1.0 / visits.len() as f64; visits.len()];
    }
    powed.into_iter().map(|x| x / sum).collect()
}

/// Expands the root, runs `cfg.simulations` select / expand-evaluate /
/// backpropagate iterations, and reports per-root-move statistics in
/// move-generation order.
///
/// Panics if the position is already terminal.
pub fn search(board: &Board, net: &TwoHeadNet, cfg: &PuctConfig) -> Vec<RootMoveInfo> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    search_with_rng(board, net, cfg, &mut rng)
}

/// Like [`search`] but drawing tie-break randomness from the caller's
/// generator, so self-play games own a single seed stream.
pub fn search_with_rng(
    board: &Board,
    net: &TwoHeadNet,
    cfg: &PuctConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<RootMoveInfo> {
    assert!(!board.is_terminal(), "cannot search a terminal position");
    let mut tree = PuctTree::new(*board, cfg.c_puct);
    tree.expand_and_evaluate(0, net);
    for _ in 0..cfg.simulations {
        let id = tree.select(rng);
        let v = tree.expand_and_evaluate(id, net);
        tree.backpropagate(v, id);
    }
    let children = tree.root_children();
    let visits: Vec<u32> = children.iter().map(|(_, e, _)| e.n).collect();
    let pi = visit_distribution(&visits, cfg.tau);
    children
        .iter()
        .zip(pi)
        .map(|((mv, edge, _), pi)| RootMoveInfo { mv: *mv, pi, visits: edge.n, q: edge.q })
        .collect()
}
