//! Exact search: solve the starting position and a custom one, and compare
//! minimax against alpha-beta node counts.
//!
//! ```bash
//! cargo run --release --example solve
//! ```

use hexazero::game::Board;
use hexazero::search::{alpha_beta, best_move, minimax, NodeCounter, ALPHA_INIT, BETA_INIT};

fn main() {
    let start = Board::starting_position();
    println!("{start}\n");

    let result = best_move(&start, 30).unwrap();
    println!(
        "start value {} -> {} (searched {} nodes)",
        result.value,
        result.best_move.unwrap(),
        result.nodes_visited
    );

    let mut mm = NodeCounter::new();
    let mut ab = NodeCounter::new();
    let maximize = true;
    let vm = minimax(&start, 30, maximize, &mut mm);
    let va = alpha_beta(&start, 30, ALPHA_INIT, BETA_INIT, maximize, &mut ab);
    println!("minimax    : value {vm:6} after {} nodes", mm.count());
    println!("alpha-beta : value {va:6} after {} nodes", ab.count());

    // a position where White promotes immediately
    let board = Board::parse_text("..B/W../..W w").unwrap();
    println!("\n{board}");
    let result = best_move(&board, 30).unwrap();
    println!("value {} -> {}", result.value, result.best_move.unwrap());
}
