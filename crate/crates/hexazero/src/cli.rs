//! Command-line frontend. Every command is a pure function of its flags,
//! seed and input files; reruns are byte-identical.

use std::io::{BufRead, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arena::{run_match, MatchKind, MatchReport};
use crate::eunn;
use crate::game::{Board, Color, Move};
use crate::mcts::{self, UctConfig};
use crate::nn::{SgdConfig, TwoHeadNet};
use crate::puct::PuctConfig;
use crate::search;
use crate::training;

#[derive(Parser)]
#[command(
    name = "hexazero",
    about = "Hexapawn engine pipeline: exact search, MCTS, self-play learning, NNUE-style evaluation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SeedArg {
    /// RNG seed; HEXAZERO_SEED is used when the flag is absent.
    #[arg(long, env = "HEXAZERO_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustively solve a position and print its value and principal move.
    Solve {
        /// Board text, rows top-to-bottom with `.`/`W`/`B`, e.g. "BBB/.../WWW w".
        position: Option<String>,
    },
    /// Run Monte-Carlo tree search on a position and print per-move statistics.
    Mcts {
        position: Option<String>,
        #[command(flatten)]
        seed: SeedArg,
        /// UCT playout iterations.
        #[arg(long, default_value_t = 1000)]
        iterations: u64,
        /// UCT exploration constant.
        #[arg(long, default_value_t = mcts::DEFAULT_EXPLORATION)]
        c: f64,
        /// Propagate the root-relative payout uniformly instead of
        /// per-mover crediting.
        #[arg(long)]
        book_faithful: bool,
        /// Use network-guided search instead of random playouts.
        #[arg(long)]
        puct: bool,
        /// Model file for --puct (a seed-initialized net is used without it).
        #[arg(long)]
        model: Option<PathBuf>,
        /// PUCT simulations per search.
        #[arg(long, default_value_t = 100)]
        simulations: u32,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long, default_value_t = 1.0)]
        cpuct: f64,
        /// Emit CSV instead of an aligned table.
        #[arg(long)]
        csv: bool,
    },
    /// Generate the supervised dataset from the exact-search oracle.
    GenData {
        /// Output dataset path.
        #[arg(long)]
        out: PathBuf,
        /// Emit one sample per tree visit instead of one per distinct state.
        #[arg(long)]
        duplicates: bool,
    },
    /// Train a network on a dataset file with the combined two-head loss.
    TrainSl {
        #[arg(long)]
        dataset: PathBuf,
        /// Output model path.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = 512)]
        epochs: usize,
        #[arg(long, default_value_t = 16)]
        batch_size: usize,
        #[arg(long, default_value_t = 0.1)]
        lr: f64,
    },
    /// Run the self-play reinforcement-learning loop with checkpoints.
    Selfplay {
        /// Checkpoint base path; iteration N writes `<stem>_itN.<ext>`.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = 11)]
        iterations: u32,
        #[arg(long, default_value_t = 10)]
        games: u32,
        #[arg(long, default_value_t = 100)]
        simulations: u32,
        #[arg(long, default_value_t = 256)]
        epochs: usize,
        #[arg(long, default_value_t = 16)]
        batch_size: usize,
        #[arg(long, default_value_t = 0.1)]
        lr: f64,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long, default_value_t = 1.0)]
        cpuct: f64,
        /// Parallel self-play games per iteration.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Play evaluation matches and print a win-rate table.
    Arena {
        /// Network model; without it only the random baseline runs.
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = 100)]
        games: u32,
        /// Evaluate the network with PUCT search instead of raw policy argmax.
        #[arg(long)]
        puct: bool,
        #[arg(long, default_value_t = 100)]
        simulations: u32,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        csv: bool,
    },
    /// Run the quantized evaluator's exactness and mirror suites.
    EunnSelfcheck {
        #[command(flatten)]
        seed: SeedArg,
        /// Accumulator half width.
        #[arg(long, default_value_t = 256)]
        width: usize,
        /// Random 20-move games for the incremental-update check.
        #[arg(long, default_value_t = 1000)]
        games: u32,
        /// Random positions for the mirror-invariance check.
        #[arg(long, default_value_t = 2000)]
        positions: u32,
    },
    /// Evaluate a chess position with a quantized weight file.
    EunnEval {
        /// Weight file written by eunn-train.
        #[arg(long)]
        weights: PathBuf,
        /// FEN (piece placement and active color; other fields ignored).
        fen: String,
    },
    /// Train the float evaluator on synthetic material targets and quantize it.
    EunnTrain {
        /// Output weight file.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 100_000)]
        positions: usize,
        #[arg(long, default_value_t = 60)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch_size: usize,
        #[arg(long, default_value_t = 0.02)]
        lr: f64,
        /// Include the piece-placement bonus in the targets.
        #[arg(long)]
        piece_square: bool,
    },
    /// Play Hexapawn against the engine in the terminal.
    Play {
        #[arg(long)]
        model: PathBuf,
        /// Side for the human player.
        #[arg(long, default_value = "white")]
        human_side: String,
        /// Engine answers with PUCT search instead of raw policy argmax.
        #[arg(long)]
        puct: bool,
        #[arg(long, default_value_t = 100)]
        simulations: u32,
        #[command(flatten)]
        seed: SeedArg,
    },
}

pub fn run() -> Result<()> {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Solve { position } => cmd_solve(&mut out, position.as_deref()),
        Command::Mcts {
            position,
            seed,
            iterations,
            c,
            book_faithful,
            puct,
            model,
            simulations,
            tau,
            cpuct,
            csv,
        } => {
            let board = parse_position(position.as_deref())?;
            if puct {
                let net = load_or_init_net(model.as_deref(), seed.seed)?;
                let cfg = PuctConfig { c_puct: cpuct, tau, simulations, seed: seed.seed };
                cmd_mcts_puct(&mut out, &board, &net, &cfg, csv)
            } else {
                let cfg = UctConfig { c, iterations, seed: seed.seed, book_faithful };
                cmd_mcts_uct(&mut out, &board, &cfg, csv)
            }
        }
        Command::GenData { out: path, duplicates } => {
            let dataset = training::generate_supervised_dataset(duplicates);
            training::save_dataset(&dataset, &path)
                .with_context(|| format!("writing {}", path.display()))?;
            writeln!(out, "wrote {} samples to {}", dataset.samples.len(), path.display())?;
            Ok(())
        }
        Command::TrainSl { dataset, out: model_path, seed, epochs, batch_size, lr } => {
            let data = training::load_dataset(&dataset)
                .with_context(|| format!("reading {}", dataset.display()))?;
            let mut net = TwoHeadNet::new(seed.seed);
            let cfg = SgdConfig { learning_rate: lr, batch_size, epochs, seed: seed.seed };
            let history = training::train_supervised(&mut net, &data, &cfg)?;
            net.save(&model_path)?;
            writeln!(
                out,
                "trained on {} samples for {} epochs; final loss {:.6}",
                data.samples.len(),
                epochs,
                history.last().copied().unwrap_or(f64::NAN)
            )?;
            let (policy_acc, value_acc) = training::oracle_agreement(&net);
            writeln!(
                out,
                "oracle agreement: policy {:.1}%, value {:.1}%",
                100.0 * policy_acc,
                100.0 * value_acc
            )?;
            writeln!(out, "saved model to {}", model_path.display())?;
            Ok(())
        }
        Command::Selfplay {
            out: base,
            seed,
            iterations,
            games,
            simulations,
            epochs,
            batch_size,
            lr,
            tau,
            cpuct,
            jobs,
        } => {
            let mut net = TwoHeadNet::new(seed.seed);
            let cfg = training::SelfPlayConfig {
                iterations,
                games_per_iteration: games,
                epochs,
                batch_size,
                learning_rate: lr,
                puct: PuctConfig { c_puct: cpuct, tau, simulations, seed: seed.seed },
                checkpoint_every: 10,
                seed: seed.seed,
                jobs,
            };
            let checkpoints = training::train_selfplay(&mut net, &cfg, Some(&base))?;
            for path in &checkpoints {
                writeln!(out, "checkpoint {}", path.display())?;
            }
            net.save(&base)?;
            writeln!(out, "final model {}", base.display())?;
            Ok(())
        }
        Command::Arena { model, seed, games, puct, simulations, jobs, csv } => {
            let net = model.as_deref().map(TwoHeadNet::load).transpose()?;
            let puct_cfg = PuctConfig { simulations, seed: seed.seed, ..PuctConfig::default() };
            let mut rows: Vec<(String, MatchReport)> = Vec::new();
            if let Some(net) = &net {
                let kind = if puct { MatchKind::RandVsNetPuct } else { MatchKind::RandVsNet };
                let label = if puct { "vs Network + Search" } else { "vs Network" };
                let report = run_match(kind, Some(net), games, seed.seed, jobs, &puct_cfg);
                rows.push((label.to_string(), report));
            }
            let random =
                run_match(MatchKind::RandVsRand, None, games, seed.seed, jobs, &puct_cfg);
            rows.push(("vs Random Player".to_string(), random));
            print_match_table(&mut out, &rows, csv)?;
            Ok(())
        }
        Command::EunnSelfcheck { seed, width, games, positions } => {
            cmd_eunn_selfcheck(&mut out, seed.seed, width, games, positions)
        }
        Command::EunnEval { weights, fen } => {
            let net = eunn::QuantEvalNet::load(&weights)
                .with_context(|| format!("loading {}", weights.display()))?;
            let position = eunn::ChessPosition::parse_fen(&fen)?;
            let cp = eunn::evaluate_fresh(&position, &net)?;
            writeln!(out, "{}", position.to_fen())?;
            writeln!(out, "evaluation: {cp} cp (side to move)")?;
            writeln!(
                out,
                "material baseline: {} cp",
                eunn::material_eval(&position, false)
            )?;
            Ok(())
        }
        Command::EunnTrain {
            out: path,
            seed,
            width,
            positions,
            epochs,
            batch_size,
            lr,
            piece_square,
        } => cmd_eunn_train(
            &mut out,
            &path,
            seed.seed,
            width,
            positions,
            epochs,
            batch_size,
            lr,
            piece_square,
        ),
        Command::Play { model, human_side, puct, simulations, seed } => {
            let net = TwoHeadNet::load(&model)?;
            let human = match human_side.to_ascii_lowercase().as_str() {
                "white" | "w" => Color::White,
                "black" | "b" => Color::Black,
                other => bail!("human side must be white or black, not {other:?}"),
            };
            let cfg = PuctConfig { simulations, seed: seed.seed, ..PuctConfig::default() };
            let stdin = std::io::stdin();
            cmd_play(&mut out, &mut stdin.lock(), &net, human, puct, &cfg)
        }
    }
}

fn parse_position(text: Option<&str>) -> Result<Board> {
    match text {
        None => Ok(Board::starting_position()),
        Some(t) => Board::parse_text(t).map_err(Into::into),
    }
}

fn load_or_init_net(path: Option<&std::path::Path>, seed: u64) -> Result<TwoHeadNet> {
    match path {
        Some(p) => TwoHeadNet::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(TwoHeadNet::new(seed)),
    }
}

fn describe_value(value: search::Score) -> &'static str {
    if value > 0 {
        "(White wins with best play)"
    } else {
        "(Black wins with best play)"
    }
}

fn cmd_solve(out: &mut impl Write, position: Option<&str>) -> Result<()> {
    let board = parse_position(position)?;
    writeln!(out, "{board}")?;
    writeln!(out, "{} to move", board.turn())?;
    if let Some(winner) = board.outcome().winner() {
        writeln!(out, "terminal position, {winner} has won")?;
        return Ok(());
    }
    let result = search::best_move(&board, search::EXHAUSTIVE_DEPTH)
        .expect("non-terminal position is searchable");
    writeln!(out, "value: {} {}", result.value, describe_value(result.value))?;
    writeln!(out, "principal move: {}", result.best_move.expect("non-terminal"))?;
    writeln!(out, "nodes visited: {}", result.nodes_visited)?;
    Ok(())
}

fn cmd_mcts_uct(out: &mut impl Write, board: &Board, cfg: &UctConfig, csv: bool) -> Result<()> {
    let result = mcts::search(board, cfg);
    if csv {
        writeln!(out, "move,mean,visits")?;
        for s in &result.stats {
            writeln!(out, "{},{:.6},{}", s.mv, s.mean, s.visits)?;
        }
    } else {
        writeln!(out, "{board}")?;
        writeln!(out, "{} to move; {} iterations", board.turn(), cfg.iterations)?;
        writeln!(out, "{:<6} {:>10} {:>8}", "move", "M", "V")?;
        for s in &result.stats {
            writeln!(out, "{:<6} {:>10.4} {:>8}", s.mv.to_string(), s.mean, s.visits)?;
        }
        writeln!(out, "recommended: {}", result.best)?;
    }
    Ok(())
}

fn cmd_mcts_puct(
    out: &mut impl Write,
    board: &Board,
    net: &TwoHeadNet,
    cfg: &PuctConfig,
    csv: bool,
) -> Result<()> {
    let infos = crate::puct::search(board, net, cfg);
    if csv {
        writeln!(out, "move,pi,visits,q")?;
        for i in &infos {
            writeln!(out, "{},{:.6},{},{:.6}", i.mv, i.pi, i.visits, i.q)?;
        }
    } else {
        writeln!(out, "{board}")?;
        writeln!(out, "{} to move; {} simulations", board.turn(), cfg.simulations)?;
        writeln!(out, "{:<6} {:>8} {:>6} {:>9}", "move", "pi", "N", "Q")?;
        for i in &infos {
            writeln!(out, "{:<6} {:>8.4} {:>6} {:>9.4}", i.mv.to_string(), i.pi, i.visits, i.q)?;
        }
        let best = infos
            .iter()
            .max_by(|a, b| a.pi.partial_cmp(&b.pi).expect("finite pi"))
            .expect("moves exist");
        writeln!(out, "recommended: {}", best.mv)?;
    }
    Ok(())
}

fn print_match_table(
    out: &mut impl Write,
    rows: &[(String, MatchReport)],
    csv: bool,
) -> Result<()> {
    if csv {
        writeln!(out, "matchup,games,white_wins,black_wins")?;
        for (label, r) in rows {
            writeln!(out, "{label},{},{},{}", r.games, r.white_wins, r.black_wins)?;
        }
    } else {
        writeln!(
            out,
            "{:<24} {:>12} {:>12}",
            "Matchup: Random Player", "White Wins", "Black Wins"
        )?;
        for (label, r) in rows {
            writeln!(
                out,
                "{:<24} {:>11.0}% {:>11.0}%",
                label,
                100.0 * r.white_fraction(),
                100.0 * r.black_fraction()
            )?;
        }
    }
    Ok(())
}

fn cmd_eunn_selfcheck(
    out: &mut impl Write,
    seed: u64,
    width: usize,
    games: u32,
    positions: u32,
) -> Result<()> {
    let dims = eunn::QuantDims { half_width: width, ..eunn::QuantDims::default() };
    let net = random_quant_net(dims, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0u32;

    // incremental accumulator maintenance vs full refresh
    let mut drift = 0u32;
    for _ in 0..games {
        let mut position = eunn::random_position(&mut rng);
        let mut acc = eunn::Accumulator::new(&net);
        acc.refresh(&position, &net)?;
        for _ in 0..20 {
            let Some(mv) = eunn::random_move(&position, &mut rng) else { break };
            position = acc.update_for_move(&position, mv, &net)?;
            let mut fresh = eunn::Accumulator::new(&net);
            fresh.refresh(&position, &net)?;
            if acc != fresh {
                drift += 1;
            }
        }
    }
    report_check(out, "incremental-update exactness", drift == 0, &mut failures)?;
    writeln!(out, "  {games} games x 20 moves, {drift} drifts")?;

    // mirror invariance
    let mut mismatches = 0u32;
    for _ in 0..positions {
        let p = eunn::random_position(&mut rng);
        if eunn::evaluate_fresh(&p, &net)? != eunn::evaluate_fresh(&p.mirror(), &net)? {
            mismatches += 1;
        }
    }
    report_check(out, "mirror invariance", mismatches == 0, &mut failures)?;
    writeln!(out, "  {positions} positions, {mismatches} mismatches")?;

    // integer dot product against a plain scalar loop
    let mut madd_bad = 0u32;
    for _ in 0..1000 {
        use rand::Rng;
        let a: Vec<u8> = (0..512).map(|_| rng.gen()).collect();
        let b: Vec<i8> = (0..512).map(|_| rng.gen()).collect();
        let scalar: i32 = a.iter().zip(&b).map(|(&x, &y)| i32::from(x) * i32::from(y)).sum();
        if eunn::madd_pairs(&a, &b) != scalar {
            madd_bad += 1;
        }
    }
    report_check(out, "madd_pairs scalar equivalence", madd_bad == 0, &mut failures)?;

    if failures > 0 {
        bail!("{failures} self-check(s) failed");
    }
    Ok(())
}

fn report_check(out: &mut impl Write, name: &str, ok: bool, failures: &mut u32) -> Result<()> {
    if !ok {
        *failures += 1;
    }
    writeln!(out, "[{}] {name}", if ok { "PASS" } else { "FAIL" })?;
    Ok(())
}

fn random_quant_net(dims: eunn::QuantDims, seed: u64) -> eunn::QuantEvalNet {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0xEEAA));
    let mut net = eunn::QuantEvalNet::zeroed(dims);
    for w in net.input_weights.iter_mut() {
        *w = rng.gen_range(-300..=300);
    }
    for b in net.input_bias.iter_mut() {
        *b = rng.gen_range(-300..=300);
    }
    for w in net.l2_weights.iter_mut() {
        *w = rng.gen_range(-128..=127i32) as i8;
    }
    for b in net.l2_bias.iter_mut() {
        *b = rng.gen_range(-5000..=5000);
    }
    for w in net.l3_weights.iter_mut() {
        *w = rng.gen_range(-128..=127i32) as i8;
    }
    for b in net.l3_bias.iter_mut() {
        *b = rng.gen_range(-5000..=5000);
    }
    for w in net.out_weights.iter_mut() {
        *w = rng.gen_range(-128..=127i32) as i8;
    }
    net.out_bias = rng.gen_range(-5000..=5000);
    net
}

#[allow(clippy::too_many_arguments)]
fn cmd_eunn_train(
    out: &mut impl Write,
    path: &std::path::Path,
    seed: u64,
    width: usize,
    positions: usize,
    epochs: usize,
    batch_size: usize,
    lr: f64,
    piece_square: bool,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let make = |rng: &mut ChaCha8Rng, n: usize| -> Vec<(eunn::ChessPosition, f64)> {
        (0..n)
            .map(|_| {
                let p = eunn::random_position(rng);
                let cp = f64::from(eunn::material_eval(&p, piece_square));
                (p, cp)
            })
            .collect()
    };
    let train = make(&mut rng, positions);
    let test = make(&mut rng, (positions / 10).clamp(100, 5000));
    let dims = eunn::QuantDims { half_width: width, ..eunn::QuantDims::default() };
    let cfg = eunn::FloatTrainConfig { learning_rate: lr, batch_size, epochs, seed };
    let net = eunn::train_float(&train, dims, &cfg);

    let mse = eunn::mse_units(&net, &test);
    let mean: f64 = test.iter().map(|(_, cp)| eunn::train::target_units(*cp)).sum::<f64>()
        / test.len() as f64;
    let variance: f64 = test
        .iter()
        .map(|(_, cp)| {
            let d = eunn::train::target_units(*cp) - mean;
            d * d
        })
        .sum::<f64>()
        / test.len() as f64;
    writeln!(
        out,
        "held-out MSE {:.4} over target variance {:.4} (ratio {:.3})",
        mse,
        variance,
        mse / variance
    )?;

    let (quant, report) = eunn::quantize(&net);
    if report.saturation_warning() {
        writeln!(
            out,
            "warning: {:.2}% of weights clipped during quantization",
            100.0 * report.clipped_fraction()
        )?;
    } else {
        writeln!(
            out,
            "quantized with {:.4}% clipped weights",
            100.0 * report.clipped_fraction()
        )?;
    }
    let mut within = 0u32;
    let parity_n = 2000;
    let mut max_err: f64 = 0.0;
    for _ in 0..parity_n {
        let p = eunn::random_position(&mut rng);
        let cp_q = f64::from(eunn::evaluate_fresh(&p, &quant)?);
        let cp_f = net.forward_cp(&p);
        let err = (cp_q - cp_f).abs();
        max_err = max_err.max(err);
        if err <= 75.0 {
            within += 1;
        }
    }
    writeln!(
        out,
        "float/quant parity: {within}/{parity_n} positions within 75 cp (max error {max_err:.1} cp)"
    )?;
    quant.save(path)?;
    writeln!(out, "saved weights to {}", path.display())?;
    Ok(())
}

fn cmd_play(
    out: &mut impl Write,
    input: &mut impl BufRead,
    net: &TwoHeadNet,
    human: Color,
    use_puct: bool,
    cfg: &PuctConfig,
) -> Result<()> {
    let mut board = Board::starting_position();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    writeln!(out, "you play {human}; enter moves like a1a2")?;
    loop {
        writeln!(out, "\n{board}")?;
        if let Some(winner) = board.outcome().winner() {
            writeln!(out, "game over: {winner} wins")?;
            return Ok(());
        }
        if board.turn() == human {
            write!(out, "{} to move> ", board.turn())?;
            out.flush()?;
            let mut line = String::new();
            if input.read_line(&mut line)? == 0 {
                writeln!(out, "\nbye")?;
                return Ok(());
            }
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            if text == "quit" || text == "exit" {
                writeln!(out, "bye")?;
                return Ok(());
            }
            let mv = match Move::parse(text) {
                Ok(mv) => mv,
                Err(_) => {
                    writeln!(out, "cannot parse {text:?}; moves look like a1a2")?;
                    continue;
                }
            };
            match board.apply_move(mv) {
                Ok(next) => board = next,
                Err(_) => {
                    writeln!(out, "illegal move {mv}; legal: {}", legal_moves_text(&board))?;
                    continue;
                }
            }
        } else {
            let mv = if use_puct {
                let infos = crate::puct::search_with_rng(&board, net, cfg, &mut rng);
                infos
                    .iter()
                    .max_by(|a, b| a.pi.partial_cmp(&b.pi).expect("finite pi"))
                    .expect("moves exist")
                    .mv
            } else {
                training::masked_argmax_move(net, &board)
            };
            writeln!(out, "engine plays {mv}")?;
            board = board.apply_unchecked(mv);
        }
    }
}

fn legal_moves_text(board: &Board) -> String {
    board.generate_moves().iter().map(Move::to_string).collect::<Vec<_>>().join(", ")
}
