//! One iteration of the self-play reinforcement-learning loop: ten
//! search-guided games from a randomly initialized network, one fit on the
//! pooled samples, then an arena evaluation of the result.
//!
//! ```bash
//! cargo run --release --example selfplay_iteration
//! ```

use hexazero::arena::{run_match, MatchKind};
use hexazero::nn::TwoHeadNet;
use hexazero::puct::PuctConfig;
use hexazero::training::{train_selfplay, SelfPlayConfig};

fn main() {
    let seed = 2;
    let mut net = TwoHeadNet::new(seed);

    let before = run_match(MatchKind::RandVsNet, Some(&net), 100, 9, 1, &PuctConfig::default());
    println!("untrained net as Black: {}/{} wins", before.black_wins, before.games);

    let cfg = SelfPlayConfig {
        iterations: 1,
        games_per_iteration: 10,
        epochs: 256,
        batch_size: 16,
        learning_rate: 0.1,
        puct: PuctConfig { simulations: 100, seed, ..PuctConfig::default() },
        checkpoint_every: 10,
        seed,
        jobs: 1,
    };
    train_selfplay(&mut net, &cfg, None).unwrap();

    let after = run_match(MatchKind::RandVsNet, Some(&net), 100, 9, 1, &PuctConfig::default());
    println!("after one iteration     : {}/{} wins", after.black_wins, after.games);
}
