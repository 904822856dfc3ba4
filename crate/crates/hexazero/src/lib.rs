//! Hexapawn game-engine pipeline: exact search, Monte-Carlo tree search,
//! an AlphaZero-style self-play learning loop with a from-scratch two-head
//! network, and an NNUE-style efficiently-updatable quantized evaluator for
//! chess positions.
//!
//! Every learning component is verifiable against the exact-search oracle:
//! Hexapawn is solved (Black wins with best play) and has 188 reachable
//! states, so the whole pipeline runs end-to-end in seconds.
//!
//! The `examples/` directory contains one runnable example per capability;
//! the `hexazero` binary exposes the same functionality as subcommands.

pub mod arena;
pub mod cli;
pub mod eunn;
pub mod game;
pub mod mcts;
pub mod nn;
pub mod puct;
pub mod search;
pub mod training;

pub use game::{Board, Cell, Color, Move, NetInput, Outcome};
