//! Head-to-head evaluation harness: a uniformly random White against either
//! another random player or the network playing Black.
//!
//! The network side plays the raw policy head's masked argmax with no
//! search; that measures the network itself. An optional search-backed mode
//! plays the PUCT recommendation instead.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::game::{Board, Color};
use crate::nn::TwoHeadNet;
use crate::puct::{search_with_rng, PuctConfig};
use crate::training::masked_argmax_move;

/// What kind of match to play.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatchKind {
    RandVsRand,
    RandVsNet,
    RandVsNetPuct,
}

/// Aggregated match outcome. Hexapawn has no draws, so wins always sum to
/// the game count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MatchReport {
    pub games: u32,
    pub white_wins: u32,
    pub black_wins: u32,
}

impl MatchReport {
    pub fn white_fraction(&self) -> f64 {
        f64::from(self.white_wins) / f64::from(self.games)
    }

    pub fn black_fraction(&self) -> f64 {
        f64::from(self.black_wins) / f64::from(self.games)
    }
}

fn random_move(board: &Board, rng: &mut ChaCha8Rng) -> crate::game::Move {
    let moves = board.generate_moves();
    moves[rng.gen_range(0..moves.len())]
}

/// One game, both sides uniformly random.
pub fn play_rand_vs_rand(rng: &mut ChaCha8Rng) -> Color {
    let mut board = Board::starting_position();
    loop {
        if let Some(winner) = board.outcome().winner() {
            return winner;
        }
        let mv = random_move(&board, rng);
        board = board.apply_unchecked(mv);
    }
}

/// One game: White random, Black the network's masked policy argmax.
pub fn play_rand_vs_net(net: &TwoHeadNet, rng: &mut ChaCha8Rng) -> Color {
    let mut board = Board::starting_position();
    let mut plies = 0;
    loop {
        if let Some(winner) = board.outcome().winner() {
            return winner;
        }
        let mv = match board.turn() {
            Color::White => random_move(&board, rng),
            Color::Black => masked_argmax_move(net, &board),
        };
        board = board.apply_unchecked(mv);
        plies += 1;
        debug_assert!(plies <= 6, "Hexapawn games end within six plies");
    }
}

/// One game: White random, Black plays the PUCT search recommendation
/// (highest pi, ties to the first move).
pub fn play_rand_vs_net_puct(
    net: &TwoHeadNet,
    puct: &PuctConfig,
    rng: &mut ChaCha8Rng,
) -> Color {
    let mut board = Board::starting_position();
    loop {
        if let Some(winner) = board.outcome().winner() {
            return winner;
        }
        let mv = match board.turn() {
            Color::White => random_move(&board, rng),
            Color::Black => {
                let infos = search_with_rng(&board, net, puct, rng);
                let top = infos
                    .iter()
                    .map(|i| i.pi)
                    .fold(f64::NEG_INFINITY, f64::max);
                infos.iter().find(|i| i.pi == top).expect("moves exist").mv
            }
        };
        board = board.apply_unchecked(mv);
    }
}

/// Plays `games` independent games with per-game derived seeds and
/// aggregates the winners. `jobs > 1` plays them in parallel; the report is
/// identical either way.
pub fn run_match(
    kind: MatchKind,
    net: Option<&TwoHeadNet>,
    games: u32,
    seed: u64,
    jobs: usize,
    puct: &PuctConfig,
) -> MatchReport {
    assert!(games >= 1);
    let play_one = |game: u32| -> Color {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::from(game));
        match kind {
            MatchKind::RandVsRand => play_rand_vs_rand(&mut rng),
            MatchKind::RandVsNet => {
                play_rand_vs_net(net.expect("net required for rand-vs-net"), &mut rng)
            }
            MatchKind::RandVsNetPuct => {
                play_rand_vs_net_puct(net.expect("net required"), puct, &mut rng)
            }
        }
    };
    let winners: Vec<Color> = if jobs > 1 {
        let pool =
            rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("thread pool");
        pool.install(|| (0..games).into_par_iter().map(play_one).collect())
    } else {
        (0..games).map(play_one).collect()
    };
    let mut report = MatchReport { games, ..MatchReport::default() };
    for w in winners {
        match w {
            Color::White => report.white_wins += 1,
            Color::Black => report.black_wins += 1,
        }
    }
    report
}
