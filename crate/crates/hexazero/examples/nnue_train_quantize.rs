//! Float-train-then-quantize at reduced width: fit the float evaluator on
//! synthetic material targets, quantize it to int8/int16, and measure the
//! float/quantized agreement.
//!
//! ```bash
//! cargo run --release --example nnue_train_quantize [positions] [epochs]
//! ```

use hexazero::eunn::{
    evaluate_fresh, material_eval, mse_units, quantize, random_position, train_float,
    ChessPosition, FloatTrainConfig, QuantDims,
};
use hexazero::eunn::train::target_units;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let positions: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(60_000);
    let epochs: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(60);

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let make = |rng: &mut ChaCha8Rng, n: usize| -> Vec<(ChessPosition, f64)> {
        (0..n)
            .map(|_| {
                let p = random_position(rng);
                let cp = f64::from(material_eval(&p, false));
                (p, cp)
            })
            .collect()
    };
    let train = make(&mut rng, positions);
    let test = make(&mut rng, 2000);
    println!("training on {positions} material-labeled positions, {epochs} epochs");

    let dims = QuantDims { half_width: 32, l2: 16, l3: 16 };
    let cfg = FloatTrainConfig { learning_rate: 0.02, batch_size: 32, epochs, seed: 0 };
    let net = train_float(&train, dims, &cfg);

    let mse = mse_units(&net, &test);
    let mean: f64 =
        test.iter().map(|(_, cp)| target_units(*cp)).sum::<f64>() / test.len() as f64;
    let variance: f64 = test
        .iter()
        .map(|(_, cp)| {
            let d = target_units(*cp) - mean;
            d * d
        })
        .sum::<f64>()
        / test.len() as f64;
    println!("held-out MSE {mse:.4}, target variance {variance:.4}, ratio {:.3}", mse / variance);

    let (quant, report) = quantize(&net);
    println!("quantized; {:.4}% of weights clipped", 100.0 * report.clipped_fraction());

    let mut within = 0;
    let mut max_err: f64 = 0.0;
    let total = 2000;
    for _ in 0..total {
        let p = random_position(&mut rng);
        let err = (f64::from(evaluate_fresh(&p, &quant).unwrap()) - net.forward_cp(&p)).abs();
        max_err = max_err.max(err);
        if err <= 75.0 {
            within += 1;
        }
    }
    println!("float/quant parity: {within}/{total} within 75 cp (max {max_err:.1} cp)");
}
