//! Network-guided search: run PUCT from the starting position with an
//! untrained network and show how the visit distribution already
//! concentrates on sound moves without any rollouts.
//!
//! ```bash
//! cargo run --release --example puct_search
//! ```

use hexazero::game::{Board, Move};
use hexazero::nn::TwoHeadNet;
use hexazero::puct::{search, PuctConfig};
use hexazero::search::solve_all;

fn main() {
    let net = TwoHeadNet::new(0);
    let solved = solve_all();

    // Black to move after 1. b2: both captures win, the forward moves differ
    let board = Board::starting_position().apply_move(Move::new(7, 4)).unwrap();
    println!("{board}\n{} to move\n", board.turn());

    let cfg = PuctConfig { simulations: 1000, seed: 3, ..PuctConfig::default() };
    let infos = search(&board, &net, &cfg);
    println!("{:<6} {:>8} {:>6} {:>9} {:>9}", "move", "pi", "N", "Q", "oracle");
    for info in &infos {
        let value = solved[&board.apply_move(info.mv).unwrap()];
        println!(
            "{:<6} {:>8.4} {:>6} {:>9.4} {:>9}",
            info.mv.to_string(),
            info.pi,
            info.visits,
            info.q,
            value
        );
    }
    let best = infos.iter().max_by(|a, b| a.pi.partial_cmp(&b.pi).unwrap()).unwrap();
    println!(
        "\nmost visited: {} (oracle value {})",
        best.mv,
        solved[&board.apply_move(best.mv).unwrap()]
    );
}
