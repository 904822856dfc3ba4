//! Efficiently-updatable evaluation: maintain the accumulator across a
//! random move sequence via feature deltas, verify bit-exactness against
//! full refreshes, and show the mirror invariance of the evaluation.
//!
//! ```bash
//! cargo run --release --example nnue_incremental
//! ```

use hexazero::eunn::{
    evaluate, evaluate_fresh, random_move, random_position, Accumulator, QuantDims, QuantEvalNet,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut net = QuantEvalNet::zeroed(QuantDims::default());
    for w in net.input_weights.iter_mut() {
        *w = rng.gen_range(-300..=300);
    }
    for b in net.input_bias.iter_mut() {
        *b = rng.gen_range(-300..=300);
    }
    for w in net.l2_weights.iter_mut() {
        *w = rng.gen_range(-128..=127i32) as i8;
    }
    for w in net.l3_weights.iter_mut() {
        *w = rng.gen_range(-128..=127i32) as i8;
    }
    for w in net.out_weights.iter_mut() {
        *w = rng.gen_range(-128..=127i32) as i8;
    }

    let mut position = random_position(&mut rng);
    let mut acc = Accumulator::new(&net);
    acc.refresh(&position, &net).unwrap();
    println!("start: {}", position.to_fen());
    println!("eval (side to move): {} cp\n", evaluate(&position, &acc, &net));

    for ply in 1..=20 {
        let Some(mv) = random_move(&position, &mut rng) else { break };
        position = acc.update_for_move(&position, mv, &net).unwrap();
        let mut fresh = Accumulator::new(&net);
        fresh.refresh(&position, &net).unwrap();
        assert_eq!(acc, fresh, "incremental update drifted");
        println!(
            "ply {ply:2}: incremental == refresh, eval {} cp",
            evaluate(&position, &acc, &net)
        );
    }

    let mirrored = position.mirror();
    println!("\nmirror of the final position: {}", mirrored.to_fen());
    let a = evaluate_fresh(&position, &net).unwrap();
    let b = evaluate_fresh(&mirrored, &net).unwrap();
    println!("evaluations {a} and {b} are identical: {}", a == b);
    assert_eq!(a, b);
}
