use hexazero::nn::{SgdConfig, TwoHeadNet};
use hexazero::training::{generate_supervised_dataset, train_supervised};
fn main() {
    let ds = generate_supervised_dataset(false);
    for (lr, seed) in [(0.1f64, 0u64), (0.1, 1), (0.05, 0), (0.05, 1)] {
        let mut net = TwoHeadNet::new(seed);
        let cfg = SgdConfig { learning_rate: lr, batch_size: 16, epochs: 512, seed };
        let h = train_supervised(&mut net, &ds, &cfg).unwrap();
        for window in [16usize, 32, 64] {
            let smooth: Vec<f64> = h.windows(window).map(|w| w.iter().sum::<f64>() / window as f64).collect();
            let worst = smooth.windows(2).map(|p| p[1] - p[0]).fold(f64::MIN, f64::max);
            print!("lr={lr} seed={seed} w={window}: worst {:.2}%  ", 100.0 * worst / h[0]);
        }
        println!("final {:.5}", h.last().unwrap());
    }
}
