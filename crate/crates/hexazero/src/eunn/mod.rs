//! Efficiently-updatable quantized evaluator for chess positions: sparse
//! HalfKP features per perspective, an incrementally maintained int16
//! accumulator, int8 hidden layers with clipped-ReLU activations, a float
//! twin for training, and a float-train-then-quantize pipeline driven by
//! synthetic material targets.

use thiserror::Error;

pub mod board;
pub mod features;
pub mod quant;
pub mod train;

pub use board::{random_move, random_position, ChessMove, ChessPosition, Piece, PieceKind};
pub use features::{
    active_features, feature_index, move_delta, perspective_transform, MoveDelta,
    PerspectiveDelta, NUM_FEATURES,
};
pub use quant::{
    clipped_relu_q, evaluate, evaluate_fresh, madd_pairs, Accumulator, QuantDims, QuantEvalNet,
};
pub use train::{
    dequantize, material_eval, mse_units, quantize, train_float, FloatEvalNet, FloatTrainConfig,
    QuantizeReport,
};

#[derive(Debug, Error)]
pub enum EunnError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported weight file: {0}")]
    Format(String),
    #[error("invalid position: {0}")]
    InvalidPosition(String),
    #[error("bad FEN: {0}")]
    Fen(String),
    #[error("malformed move: {0}")]
    MalformedMove(String),
    #[error("{0} out of range")]
    OutOfRange(&'static str),
    #[error("accumulator overflow: input weights out of scale")]
    AccumulatorOverflow,
}
