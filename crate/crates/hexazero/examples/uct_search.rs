//! Monte-Carlo tree search with UCT selection and random playouts: print
//! the per-move statistics for Black's reply to 1. b2 and check the
//! recommendation against the exact oracle.
//!
//! ```bash
//! cargo run --release --example uct_search
//! ```

use hexazero::game::{Board, Move};
use hexazero::mcts::{search, UctConfig};
use hexazero::search::solve_all;

fn main() {
    let board = Board::starting_position().apply_move(Move::new(7, 4)).unwrap();
    println!("{board}\n{} to move\n", board.turn());

    let cfg = UctConfig { iterations: 10_000, seed: 1, ..UctConfig::default() };
    let result = search(&board, &cfg);
    println!("{:<6} {:>8} {:>8}", "move", "M", "V");
    for s in &result.stats {
        println!("{:<6} {:>8.4} {:>8}", s.mv.to_string(), s.mean, s.visits);
    }
    println!("\nrecommended: {}", result.best);

    let solved = solve_all();
    let after = board.apply_move(result.best).unwrap();
    let keeps_win = solved[&after] == solved[&board];
    println!("oracle agrees this keeps the win: {keeps_win}");
}
