//! Statistical baselines at ten thousand games: random-vs-random and a
//! randomly initialized network playing Black.
//!
//! ```bash
//! cargo run --release --example arena_baselines
//! ```

use hexazero::arena::{run_match, MatchKind};
use hexazero::nn::TwoHeadNet;
use hexazero::puct::PuctConfig;

fn main() {
    let cfg = PuctConfig::default();
    let games = 10_000;

    let random = run_match(MatchKind::RandVsRand, None, games, 0, 4, &cfg);
    println!(
        "random vs random     : White {:.1}%  Black {:.1}%",
        100.0 * random.white_fraction(),
        100.0 * random.black_fraction()
    );

    let untrained = TwoHeadNet::new(0);
    let net = run_match(MatchKind::RandVsNet, Some(&untrained), games, 0, 4, &cfg);
    println!(
        "random vs untrained  : White {:.1}%  Black {:.1}%",
        100.0 * net.white_fraction(),
        100.0 * net.black_fraction()
    );
}
