//! Float reference topology, synthetic material targets, SGD training, and
//! float-to-int quantization.
//!
//! The float net mirrors the quantized one: a shared sparse input layer per
//! perspective with clipped-ReLU halves, two clipped-ReLU hidden layers and
//! a linear output. Training targets are centipawns clamped to +/-2000 and
//! scaled by 1/600 into network units; the quantizer maps weights onto the
//! integer scales described in the quant module.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::game::Color;
use crate::nn::{shuffle, Activation, DenseLayer, LayerGrad};

use super::board::{ChessPosition, PieceKind};
use super::features::{active_features, NUM_FEATURES};
use super::quant::{
    QuantDims, QuantEvalNet, ACT_SCALE, DEFAULT_OUT_SCALE, DEFAULT_SHIFT, INPUT_SCALE,
    WEIGHT_SCALE,
};

/// Centipawn targets are clamped here before scaling into network units.
pub const TARGET_CLAMP_CP: f64 = 2000.0;
/// Centipawns per network unit for training targets.
pub const CP_PER_UNIT: f64 = 600.0;

/// Pawn-counting piece values in centipawns.
pub const PIECE_VALUES: [i32; 5] = [100, 310, 320, 500, 900];

/// Placement bonus table, indexed `[file][rank]` exactly as the evaluation
/// routine it reproduces.
pub const PIECE_SQUARE_TABLE: [[i32; 8]; 8] = [
    [-50, -40, -30, -30, -30, -30, -40, -50],
    [-40, -20, 0, 0, 0, 0, -20, -40],
    [-30, 0, 10, 15, 15, 10, 0, -30],
    [-30, 5, 15, 20, 20, 15, 5, -30],
    [-30, 0, 15, 20, 20, 15, 0, -30],
    [-30, 5, 10, 15, 15, 10, 5, -30],
    [-40, -20, 0, 5, 5, 0, -20, -40],
    [-50, -40, -30, -30, -30, -30, -40, -50],
];

fn piece_value(kind: PieceKind) -> i32 {
    match kind {
        PieceKind::Pawn => PIECE_VALUES[0],
        PieceKind::Knight => PIECE_VALUES[1],
        PieceKind::Bishop => PIECE_VALUES[2],
        PieceKind::Rook => PIECE_VALUES[3],
        PieceKind::Queen => PIECE_VALUES[4],
        PieceKind::King => 0,
    }
}

/// White-minus-Black material sum, optionally with the placement bonus
/// applied identically to both colors, negated when Black is to move.
/// Kings count nothing.
pub fn material_eval(position: &ChessPosition, use_piece_square: bool) -> i32 {
    let mut white = 0;
    let mut black = 0;
    for (sq, piece) in position.pieces() {
        if piece.kind == PieceKind::King {
            continue;
        }
        let mut value = piece_value(piece.kind);
        if use_piece_square {
            let file = (sq % 8) as usize;
            let rank = (sq / 8) as usize;
            value += PIECE_SQUARE_TABLE[file][rank];
        }
        match piece.color {
            Color::White => white += value,
            Color::Black => black += value,
        }
    }
    let diff = white - black;
    match position.side_to_move() {
        Color::White => diff,
        Color::Black => -diff,
    }
}

/// Centipawns mapped into the network's training range.
pub fn target_units(cp: f64) -> f64 {
    cp.clamp(-TARGET_CLAMP_CP, TARGET_CLAMP_CP) / CP_PER_UNIT
}

/// Float twin of the quantized evaluator. The input matrix is shared
/// between the two perspective halves (one copy, feature-major).
#[derive(Clone, Debug, PartialEq)]
pub struct FloatEvalNet {
    pub dims: QuantDims,
    pub input_weights: Vec<f64>,
    pub input_bias: Vec<f64>,
    pub l2: DenseLayer,
    pub l3: DenseLayer,
    pub out: DenseLayer,
    pub out_scale: i32,
}

impl FloatEvalNet {
    pub fn new(dims: QuantDims, seed: u64) -> FloatEvalNet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // sparse inputs: scale the init bound by typical active-feature
        // counts rather than the formal 40960-wide fan-in, and spread the
        // biases across the clipped range so units start alive
        let bound = 0.25;
        let input_weights =
            (0..NUM_FEATURES as usize * dims.half_width)
                .map(|_| rng.gen_range(-bound..=bound))
                .collect();
        let input_bias = (0..dims.half_width).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let mut l2 =
            DenseLayer::new(2 * dims.half_width, dims.l2, Activation::ClippedRelu, &mut rng);
        let mut l3 = DenseLayer::new(dims.l2, dims.l3, Activation::ClippedRelu, &mut rng);
        for layer in [&mut l2, &mut l3] {
            for b in layer.biases.iter_mut() {
                *b = rng.gen_range(0.25..=0.75);
            }
        }
        let out = DenseLayer::new(dims.l3, 1, Activation::Linear, &mut rng);
        FloatEvalNet { dims, input_weights, input_bias, l2, l3, out, out_scale: DEFAULT_OUT_SCALE }
    }

    pub fn column(&self, feature: u32) -> &[f64] {
        let w = self.dims.half_width;
        &self.input_weights[feature as usize * w..(feature as usize + 1) * w]
    }

    /// Raw accumulator (first-layer pre-activation) of one perspective.
    pub fn accumulator(&self, position: &ChessPosition, perspective: Color) -> Vec<f64> {
        let mut acc = self.input_bias.clone();
        for feature in active_features(position, perspective) {
            for (a, &w) in acc.iter_mut().zip(self.column(feature)) {
                *a += w;
            }
        }
        acc
    }

    /// Network output in training units (roughly centipawns / 600).
    pub fn forward_units(&self, position: &ChessPosition) -> f64 {
        let stm = position.side_to_move();
        let mut x = Vec::with_capacity(2 * self.dims.half_width);
        for persp in [stm, stm.opponent()] {
            x.extend(self.accumulator(position, persp).iter().map(|&a| a.clamp(0.0, 1.0)));
        }
        let x = self.l2.forward(&x).1;
        let x = self.l3.forward(&x).1;
        self.out.forward(&x).1[0]
    }

    /// Centipawn output through the same scale convention as the quantized
    /// path: `units * 127 * 64 / out_scale`.
    pub fn forward_cp(&self, position: &ChessPosition) -> f64 {
        self.forward_units(position) * f64::from(ACT_SCALE) * f64::from(WEIGHT_SCALE)
            / f64::from(self.out_scale)
    }
}

/// Training settings for the float evaluator.
#[derive(Clone, Debug)]
pub struct FloatTrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for FloatTrainConfig {
    fn default() -> Self {
        FloatTrainConfig { learning_rate: 0.05, batch_size: 32, epochs: 40, seed: 0 }
    }
}

/// Mean squared error in training units over a dataset.
pub fn mse_units(net: &FloatEvalNet, data: &[(ChessPosition, f64)]) -> f64 {
    let total: f64 = data
        .iter()
        .map(|(p, cp)| {
            let err = net.forward_units(p) - target_units(*cp);
            err * err
        })
        .sum();
    total / data.len() as f64
}

/// SGD with MSE on (position, centipawn) pairs. Gradients flow through the
/// dense layers and into the shared sparse input matrix; only active
/// feature columns are touched.
pub fn train_float(
    data: &[(ChessPosition, f64)],
    dims: QuantDims,
    cfg: &FloatTrainConfig,
) -> FloatEvalNet {
    assert!(!data.is_empty(), "cannot train on an empty dataset");
    let mut net = FloatEvalNet::new(dims, cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..data.len()).collect();
    for _ in 0..cfg.epochs {
        shuffle(&mut order, &mut rng);
        for chunk in order.chunks(cfg.batch_size.max(1)) {
            train_batch(&mut net, data, chunk, cfg.learning_rate);
        }
    }
    net
}

fn train_batch(net: &mut FloatEvalNet, data: &[(ChessPosition, f64)], idx: &[usize], lr: f64) {
    let mut l2_grad = LayerGrad::zeros_like(&net.l2);
    let mut l3_grad = LayerGrad::zeros_like(&net.l3);
    let mut out_grad = LayerGrad::zeros_like(&net.out);
    let mut bias_grad = vec![0.0; net.dims.half_width];
    let mut column_grads: HashMap<u32, Vec<f64>> = HashMap::new();
    let scale = 1.0 / idx.len() as f64;

    for &i in idx {
        let (position, cp) = &data[i];
        let stm = position.side_to_move();
        let perspectives = [stm, stm.opponent()];
        let accs: Vec<Vec<f64>> =
            perspectives.iter().map(|&c| net.accumulator(position, c)).collect();
        let mut x = Vec::with_capacity(2 * net.dims.half_width);
        for acc in &accs {
            x.extend(acc.iter().map(|&a| a.clamp(0.0, 1.0)));
        }
        let (pre2, out2) = net.l2.forward(&x);
        let (pre3, out3) = net.l3.forward(&out2);
        let (pre_o, out_o) = net.out.forward(&out3);
        let y = out_o[0];
        let d_y = vec![2.0 * (y - target_units(*cp)) * scale];
        let d3 = net.out.backward(&out3, &pre_o, &out_o, &d_y, &mut out_grad);
        let d2 = net.l3.backward(&out2, &pre3, &out3, &d3, &mut l3_grad);
        let dx = net.l2.backward(&x, &pre2, &out2, &d2, &mut l2_grad);

        for (half, &perspective) in perspectives.iter().enumerate() {
            let w = net.dims.half_width;
            let d_half = &dx[half * w..(half + 1) * w];
            let acc = &accs[half];
            let d_acc: Vec<f64> = d_half
                .iter()
                .zip(acc)
                .map(|(&d, &a)| if a > 0.0 && a < 1.0 { d } else { 0.0 })
                .collect();
            for (bg, &d) in bias_grad.iter_mut().zip(&d_acc) {
                *bg += d;
            }
            for feature in active_features(position, perspective) {
                let col = column_grads
                    .entry(feature)
                    .or_insert_with(|| vec![0.0; net.dims.half_width]);
                for (cg, &d) in col.iter_mut().zip(&d_acc) {
                    *cg += d;
                }
            }
        }
    }

    crate::nn::sgd_step(&mut net.l2, &l2_grad, lr);
    crate::nn::sgd_step(&mut net.l3, &l3_grad, lr);
    crate::nn::sgd_step(&mut net.out, &out_grad, lr);
    for (b, g) in net.input_bias.iter_mut().zip(&bias_grad) {
        *b -= lr * g;
    }
    let w = net.dims.half_width;
    for (feature, grad) in column_grads {
        let col = &mut net.input_weights[feature as usize * w..(feature as usize + 1) * w];
        for (c, g) in col.iter_mut().zip(grad) {
            *c -= lr * g;
        }
    }
}

/// Quantization outcome; more than 1% clipped weights deserves a warning.
#[derive(Clone, Copy, Debug, Default)]
pub struct QuantizeReport {
    pub total_weights: usize,
    pub clipped: usize,
}

impl QuantizeReport {
    pub fn clipped_fraction(&self) -> f64 {
        if self.total_weights == 0 {
            0.0
        } else {
            self.clipped as f64 / self.total_weights as f64
        }
    }

    pub fn saturation_warning(&self) -> bool {
        self.clipped_fraction() > 0.01
    }
}

fn quantize_to<const MIN: i32, const MAX: i32>(
    value: f64,
    scale: f64,
    report: &mut QuantizeReport,
) -> i32 {
    report.total_weights += 1;
    let scaled = (value * scale).round();
    if scaled < f64::from(MIN) || scaled > f64::from(MAX) {
        report.clipped += 1;
    }
    (scaled as i64).clamp(i64::from(MIN), i64::from(MAX)) as i32
}

/// Maps a float net onto the integer scales: input weights and biases at
/// scale 127 (i16), hidden and output weights at scale 64 (i8), hidden and
/// output biases at scale 127 * 64 (i32). Rounding is to nearest with
/// saturation.
pub fn quantize(net: &FloatEvalNet) -> (QuantEvalNet, QuantizeReport) {
    let mut report = QuantizeReport::default();
    let mut q = QuantEvalNet::zeroed(net.dims);
    let act = f64::from(ACT_SCALE);
    let input = f64::from(INPUT_SCALE);
    let ws = f64::from(WEIGHT_SCALE);
    for (dst, &src) in q.input_weights.iter_mut().zip(&net.input_weights) {
        *dst = quantize_to::<-32768, 32767>(src, input, &mut report) as i16;
    }
    for (dst, &src) in q.input_bias.iter_mut().zip(&net.input_bias) {
        *dst = quantize_to::<-32768, 32767>(src, input, &mut report) as i16;
    }
    for (dst, &src) in q.l2_weights.iter_mut().zip(&net.l2.weights) {
        *dst = quantize_to::<-128, 127>(src, ws, &mut report) as i8;
    }
    for (dst, &src) in q.l2_bias.iter_mut().zip(&net.l2.biases) {
        *dst = quantize_to::<{ i32::MIN }, { i32::MAX }>(src, act * ws, &mut report);
    }
    for (dst, &src) in q.l3_weights.iter_mut().zip(&net.l3.weights) {
        *dst = quantize_to::<-128, 127>(src, ws, &mut report) as i8;
    }
    for (dst, &src) in q.l3_bias.iter_mut().zip(&net.l3.biases) {
        *dst = quantize_to::<{ i32::MIN }, { i32::MAX }>(src, act * ws, &mut report);
    }
    for (dst, &src) in q.out_weights.iter_mut().zip(&net.out.weights) {
        *dst = quantize_to::<-128, 127>(src, ws, &mut report) as i8;
    }
    q.out_bias = quantize_to::<{ i32::MIN }, { i32::MAX }>(net.out.biases[0], act * ws, &mut report);
    q.shift = DEFAULT_SHIFT;
    q.out_scale = net.out_scale;
    (q, report)
}

/// Inverse of [`quantize`] up to rounding; quantizing the result again is
/// the identity.
pub fn dequantize(q: &QuantEvalNet) -> FloatEvalNet {
    let act = f64::from(ACT_SCALE);
    let input = f64::from(INPUT_SCALE);
    let ws = f64::from(WEIGHT_SCALE);
    let mut l2 = DenseLayer::zeroed(2 * q.dims.half_width, q.dims.l2, Activation::ClippedRelu);
    l2.weights = q.l2_weights.iter().map(|&w| f64::from(w) / ws).collect();
    l2.biases = q.l2_bias.iter().map(|&b| f64::from(b) / (act * ws)).collect();
    let mut l3 = DenseLayer::zeroed(q.dims.l2, q.dims.l3, Activation::ClippedRelu);
    l3.weights = q.l3_weights.iter().map(|&w| f64::from(w) / ws).collect();
    l3.biases = q.l3_bias.iter().map(|&b| f64::from(b) / (act * ws)).collect();
    let mut out = DenseLayer::zeroed(q.dims.l3, 1, Activation::Linear);
    out.weights = q.out_weights.iter().map(|&w| f64::from(w) / ws).collect();
    out.biases = vec![f64::from(q.out_bias) / (act * ws)];
    FloatEvalNet {
        dims: q.dims,
        input_weights: q.input_weights.iter().map(|&w| f64::from(w) / input).collect(),
        input_bias: q.input_bias.iter().map(|&b| f64::from(b) / input).collect(),
        l2,
        l3,
        out,
        out_scale: q.out_scale,
    }
}
