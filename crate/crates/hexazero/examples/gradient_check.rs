//! Backpropagation sanity: compare analytic gradients against central
//! finite differences on a small two-head network.
//!
//! ```bash
//! cargo run --release --example gradient_check
//! ```

use hexazero::nn::{TrainSample, TwoHeadNet};

fn main() {
    let net = TwoHeadNet::with_dims(6, &[10, 10], 5, 42);
    let batch = vec![
        TrainSample {
            input: vec![1.0, 0.0, 0.5, 0.25, 0.75, 0.1],
            target_policy: vec![0.1, 0.5, 0.2, 0.1, 0.1],
            target_value: 0.5,
        },
        TrainSample {
            input: vec![0.2, 0.9, 0.0, 0.6, 0.3, 0.8],
            target_policy: vec![0.0, 0.0, 1.0, 0.0, 0.0],
            target_value: -1.0,
        },
    ];
    let grads = net.backward(&batch, 0.001);

    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for li in 0..net.trunk.len() {
        for wi in 0..net.trunk[li].weights.len() {
            let mut probe = net.clone();
            probe.trunk[li].weights[wi] += h;
            let up = probe.batch_loss(&batch, 0.001);
            probe.trunk[li].weights[wi] -= 2.0 * h;
            let down = probe.batch_loss(&batch, 0.001);
            let numeric = (up - down) / (2.0 * h);
            let analytic = grads.trunk[li].weights[wi];
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
            checked += 1;
        }
    }
    println!("checked {checked} trunk weights against central differences (h = {h})");
    println!("worst relative error: {worst:.3e}");
    assert!(worst < 1e-4);
    println!("analytic backpropagation agrees within 1e-4");
}
