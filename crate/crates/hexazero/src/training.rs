//! The two training pipelines: supervised data generation from the exact
//! search oracle, and the self-play reinforcement-learning loop.
//!
//! The supervised dataset holds one sample per distinct reachable
//! non-terminal state by default (the one-hot target is the first optimal
//! move in deterministic order; the value target is the sign of the solved
//! state value). The `duplicates` flag instead emits one sample per visit of
//! the recursive full-tree walk, which weights states by their path count.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::distributions::{Distribution, WeightedIndex};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::game::{output_index, Board, Color, POLICY_SIZE};
use crate::nn::{ModelError, SgdConfig, TrainError, TrainSample, TwoHeadNet};
use crate::puct::{search_with_rng, PuctConfig};
use crate::search::{solve_all, Score};

/// Supervised or self-play training data.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub samples: Vec<TrainSample>,
}

/// All states reachable from the starting position by legal play, keyed on
/// (cells, turn). Terminal states are included.
pub fn enumerate_states() -> HashSet<Board> {
    let mut seen = HashSet::new();
    let mut stack = vec![Board::starting_position()];
    while let Some(board) = stack.pop() {
        if !seen.insert(board) {
            continue;
        }
        if board.is_terminal() {
            continue;
        }
        for m in board.generate_moves() {
            stack.push(board.apply_unchecked(m));
        }
    }
    seen
}

/// Reachable states in a stable order (non-terminal first sort key is the
/// board itself), for reproducible iteration.
pub fn enumerate_states_sorted() -> Vec<Board> {
    let mut boards: Vec<Board> = enumerate_states().into_iter().collect();
    boards.sort();
    boards
}

/// First optimal move in deterministic move order, judged by the solved
/// state values. White maximizes, Black minimizes.
pub fn oracle_best_move(
    board: &Board,
    solved: &std::collections::HashMap<Board, Score>,
) -> (crate::game::Move, Score) {
    debug_assert!(!board.is_terminal());
    let maximize = board.turn() == Color::White;
    let mut best: Option<(crate::game::Move, Score)> = None;
    for m in board.generate_moves() {
        let v = solved[&board.apply_unchecked(m)];
        let better = match best {
            None => true,
            Some((_, b)) => {
                if maximize {
                    v > b
                } else {
                    v < b
                }
            }
        };
        if better {
            best = Some((m, v));
        }
    }
    best.expect("non-terminal position has moves")
}

fn oracle_sample(board: &Board, solved: &std::collections::HashMap<Board, Score>) -> TrainSample {
    let (best, value) = oracle_best_move(board, solved);
    let mut target_policy = vec![0.0; POLICY_SIZE];
    target_policy[output_index(best).expect("legal move")] = 1.0;
    TrainSample {
        input: board.to_network_input().to_f64().to_vec(),
        target_policy,
        target_value: if value > 0 { 1.0 } else { -1.0 },
    }
}

/// Builds the supervised dataset from the exact-search oracle.
///
/// With `duplicates = false` (the default pipeline) every distinct reachable
/// non-terminal state contributes exactly one sample, in a deterministic
/// order. With `duplicates = true` the full game tree is walked and every
/// visit emits a sample, so states are weighted by how many move paths reach
/// them.
pub fn generate_supervised_dataset(duplicates: bool) -> Dataset {
    let solved = solve_all();
    let mut samples = Vec::new();
    if duplicates {
        fn walk(
            board: &Board,
            solved: &std::collections::HashMap<Board, Score>,
            samples: &mut Vec<TrainSample>,
        ) {
            if board.is_terminal() {
                return;
            }
            samples.push(oracle_sample(board, solved));
            for m in board.generate_moves() {
                walk(&board.apply_unchecked(m), solved, samples);
            }
        }
        walk(&Board::starting_position(), &solved, &mut samples);
    } else {
        for board in enumerate_states_sorted() {
            if board.is_terminal() {
                continue;
            }
            samples.push(oracle_sample(&board, &solved));
        }
    }
    Dataset { samples }
}

/// Fits the network on a dataset with the combined two-head loss.
/// Regularization defaults to zero for Hexapawn.
pub fn train_supervised(
    net: &mut TwoHeadNet,
    dataset: &Dataset,
    cfg: &SgdConfig,
) -> Result<Vec<f64>, TrainError> {
    net.fit(&dataset.samples, cfg, 0.0)
}

/// Plays one self-play game from the start. Every position is recorded with
/// the search's visit distribution spread over the 28 policy outputs, the
/// move is sampled from that distribution, and at the end all samples get
/// the winner's sign as the value label.
pub fn self_play_game(
    net: &TwoHeadNet,
    cfg: &PuctConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<TrainSample> {
    let mut board = Board::starting_position();
    let mut inputs: Vec<Vec<f64>> = Vec::new();
    let mut policies: Vec<Vec<f64>> = Vec::new();
    loop {
        if let Some(winner) = board.outcome().winner() {
            let label = if winner == Color::White { 1.0 } else { -1.0 };
            return inputs
                .into_iter()
                .zip(policies)
                .map(|(input, target_policy)| TrainSample {
                    input,
                    target_policy,
                    target_value: label,
                })
                .collect();
        }
        inputs.push(board.to_network_input().to_f64().to_vec());
        let infos = search_with_rng(&board, net, cfg, rng);
        let mut output_vec = vec![0.0; POLICY_SIZE];
        for info in &infos {
            output_vec[output_index(info.mv).expect("legal move")] = info.pi;
        }
        policies.push(output_vec);
        let weights: Vec<f64> = infos.iter().map(|i| i.pi).collect();
        let mv = match WeightedIndex::new(&weights) {
            Ok(dist) => infos[dist.sample(rng)].mv,
            // all-zero pi cannot happen with at least one simulation; fall
            // back to the first legal move for totality
            Err(_) => infos[0].mv,
        };
        board = board.apply_unchecked(mv);
    }
}

/// Self-play training loop parameters.
#[derive(Clone, Debug)]
pub struct SelfPlayConfig {
    pub iterations: u32,
    pub games_per_iteration: u32,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub puct: PuctConfig,
    pub checkpoint_every: u32,
    pub seed: u64,
    pub jobs: usize,
}

impl Default for SelfPlayConfig {
    fn default() -> Self {
        SelfPlayConfig {
            iterations: 11,
            games_per_iteration: 10,
            epochs: 256,
            batch_size: 16,
            learning_rate: 0.1,
            puct: PuctConfig::default(),
            checkpoint_every: 10,
            seed: 0,
            jobs: 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum SelfPlayError {
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("checkpoint: {0}")]
    Checkpoint(#[from] ModelError),
}

/// Per-game generator: one master seed, a dedicated stream per
/// (iteration, game) pair, so parallel self-play stays reproducible.
pub fn game_rng(master_seed: u64, iteration: u32, game: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((u64::from(iteration) << 32) | u64::from(game));
    rng
}

/// Runs the continuous-replacement training loop: each iteration self-plays
/// a batch of games with the current network, fits on the pooled samples,
/// and carries the updated network straight into the next iteration. A
/// checkpoint is written whenever `iteration % checkpoint_every == 0`.
///
/// Returns the checkpoint paths (empty when no directory is given).
pub fn train_selfplay(
    net: &mut TwoHeadNet,
    cfg: &SelfPlayConfig,
    checkpoint_base: Option<&Path>,
) -> Result<Vec<PathBuf>, SelfPlayError> {
    let mut checkpoints = Vec::new();
    for iteration in 0..cfg.iterations {
        let samples = play_iteration_games(net, cfg, iteration);
        let sgd = SgdConfig {
            learning_rate: cfg.learning_rate,
            batch_size: cfg.batch_size,
            epochs: cfg.epochs,
            seed: cfg.seed.wrapping_add(u64::from(iteration)).wrapping_mul(0x9E37_79B9),
        };
        net.fit(&samples, &sgd, 0.0)?;
        if iteration % cfg.checkpoint_every == 0 {
            if let Some(base) = checkpoint_base {
                let path = checkpoint_path(base, iteration);
                net.save(&path)?;
                checkpoints.push(path);
            }
        }
    }
    Ok(checkpoints)
}

/// Self-plays one iteration's games against a frozen network snapshot,
/// optionally in parallel. Sample order is independent of the job count.
pub fn play_iteration_games(
    net: &TwoHeadNet,
    cfg: &SelfPlayConfig,
    iteration: u32,
) -> Vec<TrainSample> {
    let run_game = |game: u32| {
        let mut rng = game_rng(cfg.seed, iteration, game);
        self_play_game(net, &cfg.puct, &mut rng)
    };
    let per_game: Vec<Vec<TrainSample>> = if cfg.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .expect("thread pool");
        pool.install(|| (0..cfg.games_per_iteration).into_par_iter().map(run_game).collect())
    } else {
        (0..cfg.games_per_iteration).map(run_game).collect()
    };
    per_game.into_iter().flatten().collect()
}

/// Checkpoint file for an iteration: `model.hznet` becomes
/// `model_it<N>.hznet`.
pub fn checkpoint_path(base: &Path, iteration: u32) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("hznet");
    base.with_file_name(format!("{stem}_it{iteration}.{ext}"))
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt dataset line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
}

/// Writes the dataset in the line format
/// `<21 bits>|<28 comma-separated policy values>|<value>`.
pub fn save_dataset(dataset: &Dataset, path: &Path) -> Result<(), DatasetError> {
    let mut w = BufWriter::new(File::create(path)?);
    for sample in &dataset.samples {
        let bits: String =
            sample.input.iter().map(|&x| if x >= 0.5 { '1' } else { '0' }).collect();
        let policy: Vec<String> = sample.target_policy.iter().map(|p| format!("{p:.17e}")).collect();
        writeln!(w, "{bits}|{}|{:.17e}", policy.join(","), sample.target_value)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a dataset written by [`save_dataset`].
pub fn load_dataset(path: &Path) -> Result<Dataset, DatasetError> {
    let reader = BufReader::new(File::open(path)?);
    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let corrupt = |reason: &str| DatasetError::Corrupt {
            line: idx + 1,
            reason: reason.to_string(),
        };
        let mut parts = line.split('|');
        let bits = parts.next().ok_or_else(|| corrupt("missing bits"))?;
        let policy = parts.next().ok_or_else(|| corrupt("missing policy"))?;
        let value = parts.next().ok_or_else(|| corrupt("missing value"))?;
        if parts.next().is_some() {
            return Err(corrupt("too many fields"));
        }
        if bits.len() != crate::game::INPUT_SIZE {
            return Err(corrupt("input must be 21 bits"));
        }
        let input: Vec<f64> = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(0.0),
                '1' => Ok(1.0),
                _ => Err(corrupt("input bits must be 0 or 1")),
            })
            .collect::<Result<_, _>>()?;
        let target_policy: Vec<f64> = policy
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| corrupt("bad policy value")))
            .collect::<Result<_, _>>()?;
        if target_policy.len() != POLICY_SIZE {
            return Err(corrupt("policy must have 28 values"));
        }
        let target_value: f64 =
            value.trim().parse().map_err(|_| corrupt("bad value target"))?;
        samples.push(TrainSample { input, target_policy, target_value });
    }
    Ok(Dataset { samples })
}

/// Masked policy argmax: the legal move whose raw policy output is largest,
/// ties broken by the lowest output index.
pub fn masked_argmax_move(net: &TwoHeadNet, board: &Board) -> crate::game::Move {
    let (policy, _) = net.forward(&board.to_network_input().to_f64());
    let mut masked = vec![0.0; POLICY_SIZE];
    let moves = board.generate_moves();
    for m in &moves {
        let idx = output_index(*m).expect("legal move");
        masked[idx] = policy[idx];
    }
    let mut best_idx = 0;
    for (idx, &p) in masked.iter().enumerate() {
        if p > masked[best_idx] {
            best_idx = idx;
        }
    }
    moves
        .into_iter()
        .find(|m| output_index(*m).unwrap() == best_idx)
        .expect("argmax lands on a legal move")
}

/// Fraction of non-terminal states where the masked policy argmax is an
/// oracle-optimal move, and where the value head's sign matches the oracle.
pub fn oracle_agreement(net: &TwoHeadNet) -> (f64, f64) {
    let solved = solve_all();
    let mut states = 0usize;
    let mut policy_hits = 0usize;
    let mut value_hits = 0usize;
    for board in enumerate_states_sorted() {
        if board.is_terminal() {
            continue;
        }
        states += 1;
        let state_value = solved[&board];
        let picked = masked_argmax_move(net, &board);
        if solved[&board.apply_unchecked(picked)] == state_value {
            policy_hits += 1;
        }
        let (_, v) = net.forward(&board.to_network_input().to_f64());
        if (v > 0.0) == (state_value > 0) {
            value_hits += 1;
        }
    }
    (policy_hits as f64 / states as f64, value_hits as f64 / states as f64)
}
