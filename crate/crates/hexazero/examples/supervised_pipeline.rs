//! The full supervised pipeline: enumerate the solved game, build the
//! oracle dataset, train the two-head network, and evaluate it against a
//! random opponent.
//!
//! ```bash
//! cargo run --release --example supervised_pipeline
//! ```

use hexazero::arena::{run_match, MatchKind};
use hexazero::nn::{SgdConfig, TwoHeadNet};
use hexazero::puct::PuctConfig;
use hexazero::training::{generate_supervised_dataset, oracle_agreement, train_supervised};

fn main() {
    let dataset = generate_supervised_dataset(false);
    println!("oracle dataset: {} samples (one per reachable non-terminal state)", dataset.samples.len());

    let mut net = TwoHeadNet::new(0);
    let cfg = SgdConfig { learning_rate: 0.1, batch_size: 16, epochs: 512, seed: 0 };
    let history = train_supervised(&mut net, &dataset, &cfg).unwrap();
    println!(
        "trained 512 epochs, batch 16; loss {:.4} -> {:.6}",
        history.first().unwrap(),
        history.last().unwrap()
    );

    let (policy_acc, value_acc) = oracle_agreement(&net);
    println!("oracle agreement: policy {:.1}%, value {:.1}%", 100.0 * policy_acc, 100.0 * value_acc);

    let report = run_match(MatchKind::RandVsNet, Some(&net), 100, 7, 1, &PuctConfig::default());
    println!(
        "\nrandom White vs network Black over {} games: {} / {}",
        report.games, report.white_wins, report.black_wins
    );
}
