//! The quantized evaluator: int16 accumulator halves maintained
//! incrementally, int8 hidden layers with clipped-ReLU activations in
//! [0, 127], and a centipawn output.
//!
//! Quantization scheme: activations are uint8 in [0, 127] representing
//! [0, 1]; input weights and biases are int16 at scale 127, so the
//! accumulator is already in activation units and is clipped without a
//! shift. Hidden weights are int8 at scale 64, hidden biases int32 at scale
//! 127 * 64, so hidden pre-activations shift right by 6 (the stored
//! activation shift) before clipping. The output neuron's raw sum divides by
//! the output-scale constant to give centipawns from the side to move's
//! perspective.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::game::Color;

use super::board::ChessPosition;
use super::features::{active_features, move_delta, NUM_FEATURES};
use super::EunnError;

/// Layer widths of an evaluator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuantDims {
    pub half_width: usize,
    pub l2: usize,
    pub l3: usize,
}

impl Default for QuantDims {
    fn default() -> Self {
        QuantDims { half_width: 256, l2: 32, l3: 32 }
    }
}

pub const DEFAULT_SHIFT: u8 = 6;
pub const DEFAULT_OUT_SCALE: i32 = 16;
/// Activation quantization scale: 127 represents 1.0.
pub const ACT_SCALE: i32 = 127;
/// Hidden weight quantization scale, 1 << DEFAULT_SHIFT.
pub const WEIGHT_SCALE: i32 = 64;
/// The accumulator runs at 2^3 times the activation scale for extra
/// precision in the int16 domain and is shifted down by this constant when
/// clipped. Part of the weight-file semantics, not a stored field.
pub const INPUT_SHIFT: u8 = 3;
/// Input weight and bias quantization scale: 127 << INPUT_SHIFT.
pub const INPUT_SCALE: i32 = ACT_SCALE << INPUT_SHIFT;

/// Integer evaluator weights. Input weights are shared between the two
/// perspectives (one copy, feature-major rows of `half_width`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantEvalNet {
    pub dims: QuantDims,
    pub input_weights: Vec<i16>,
    pub input_bias: Vec<i16>,
    pub l2_weights: Vec<i8>,
    pub l2_bias: Vec<i32>,
    pub l3_weights: Vec<i8>,
    pub l3_bias: Vec<i32>,
    pub out_weights: Vec<i8>,
    pub out_bias: i32,
    pub shift: u8,
    pub out_scale: i32,
}

impl QuantEvalNet {
    pub fn zeroed(dims: QuantDims) -> QuantEvalNet {
        QuantEvalNet {
            dims,
            input_weights: vec![0; NUM_FEATURES as usize * dims.half_width],
            input_bias: vec![0; dims.half_width],
            l2_weights: vec![0; dims.l2 * 2 * dims.half_width],
            l2_bias: vec![0; dims.l2],
            l3_weights: vec![0; dims.l3 * dims.l2],
            l3_bias: vec![0; dims.l3],
            out_weights: vec![0; dims.l3],
            out_bias: 0,
            shift: DEFAULT_SHIFT,
            out_scale: DEFAULT_OUT_SCALE,
        }
    }

    pub fn column(&self, feature: u32) -> &[i16] {
        let w = self.dims.half_width;
        &self.input_weights[feature as usize * w..(feature as usize + 1) * w]
    }

    /// Writes the binary weight file (magic `EUNN0001`, little-endian).
    pub fn save(&self, path: &Path) -> Result<(), EunnError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(b"EUNN0001")?;
        for dim in [self.dims.half_width, self.dims.l2, self.dims.l3] {
            w.write_all(&(dim as u32).to_le_bytes())?;
        }
        for v in &self.input_weights {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &self.input_bias {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.l2_weights.iter().map(|v| *v as u8).collect::<Vec<u8>>())?;
        for v in &self.l2_bias {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.l3_weights.iter().map(|v| *v as u8).collect::<Vec<u8>>())?;
        for v in &self.l3_bias {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.out_weights.iter().map(|v| *v as u8).collect::<Vec<u8>>())?;
        w.write_all(&self.out_bias.to_le_bytes())?;
        w.write_all(&[self.shift])?;
        w.write_all(&self.out_scale.to_le_bytes())?;
        w.flush()?;
        Ok(())
    }

    /// Reads a weight file written by [`QuantEvalNet::save`].
    pub fn load(path: &Path) -> Result<QuantEvalNet, EunnError> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != b"EUNN0001" {
            return Err(EunnError::Format("bad magic".into()));
        }
        let mut u32_buf = [0u8; 4];
        let mut read_u32 = |r: &mut BufReader<File>| -> Result<u32, EunnError> {
            r.read_exact(&mut u32_buf)?;
            Ok(u32::from_le_bytes(u32_buf))
        };
        let half_width = read_u32(&mut r)? as usize;
        let l2 = read_u32(&mut r)? as usize;
        let l3 = read_u32(&mut r)? as usize;
        if half_width == 0 || half_width > 4096 || l2 == 0 || l2 > 4096 || l3 == 0 || l3 > 4096 {
            return Err(EunnError::Format("implausible dimensions".into()));
        }
        let dims = QuantDims { half_width, l2, l3 };
        let read_i16s = |r: &mut BufReader<File>, n: usize| -> Result<Vec<i16>, EunnError> {
            let mut buf = vec![0u8; n * 2];
            r.read_exact(&mut buf)?;
            Ok(buf.chunks_exact(2).map(|c| i16::from_le_bytes([c[0], c[1]])).collect())
        };
        let read_i8s = |r: &mut BufReader<File>, n: usize| -> Result<Vec<i8>, EunnError> {
            let mut buf = vec![0u8; n];
            r.read_exact(&mut buf)?;
            Ok(buf.into_iter().map(|b| b as i8).collect())
        };
        let read_i32s = |r: &mut BufReader<File>, n: usize| -> Result<Vec<i32>, EunnError> {
            let mut buf = vec![0u8; n * 4];
            r.read_exact(&mut buf)?;
            Ok(buf
                .chunks_exact(4)
                .map(|c| i32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect())
        };
        let input_weights = read_i16s(&mut r, NUM_FEATURES as usize * half_width)?;
        let input_bias = read_i16s(&mut r, half_width)?;
        let l2_weights = read_i8s(&mut r, l2 * 2 * half_width)?;
        let l2_bias = read_i32s(&mut r, l2)?;
        let l3_weights = read_i8s(&mut r, l3 * l2)?;
        let l3_bias = read_i32s(&mut r, l3)?;
        let out_weights = read_i8s(&mut r, l3)?;
        let out_bias = read_i32s(&mut r, 1)?[0];
        let mut shift = [0u8; 1];
        r.read_exact(&mut shift)?;
        let out_scale = read_i32s(&mut r, 1)?[0];
        Ok(QuantEvalNet {
            dims,
            input_weights,
            input_bias,
            l2_weights,
            l2_bias,
            l3_weights,
            l3_bias,
            out_weights,
            out_bias,
            shift: shift[0],
            out_scale,
        })
    }
}

/// Per-perspective accumulator: the first-layer pre-activations of each
/// half, maintained incrementally. Halves are indexed by perspective color.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Accumulator {
    halves: [Vec<i16>; 2],
    dirty: [bool; 2],
}

fn color_index(color: Color) -> usize {
    match color {
        Color::White => 0,
        Color::Black => 1,
    }
}

impl Accumulator {
    pub fn new(net: &QuantEvalNet) -> Accumulator {
        Accumulator {
            halves: [vec![0; net.dims.half_width], vec![0; net.dims.half_width]],
            dirty: [true, true],
        }
    }

    pub fn half(&self, perspective: Color) -> &[i16] {
        &self.halves[color_index(perspective)]
    }

    pub fn is_clean(&self) -> bool {
        !self.dirty[0] && !self.dirty[1]
    }

    /// Recomputes one half from scratch: bias plus the weight columns of
    /// every active feature.
    pub fn refresh_perspective(
        &mut self,
        position: &ChessPosition,
        perspective: Color,
        net: &QuantEvalNet,
    ) -> Result<(), EunnError> {
        let idx = color_index(perspective);
        self.halves[idx].copy_from_slice(&net.input_bias);
        for feature in active_features(position, perspective) {
            add_column(&mut self.halves[idx], net.column(feature))?;
        }
        self.dirty[idx] = false;
        Ok(())
    }

    /// Recomputes both halves from scratch and clears the dirty flags.
    pub fn refresh(
        &mut self,
        position: &ChessPosition,
        net: &QuantEvalNet,
    ) -> Result<(), EunnError> {
        self.refresh_perspective(position, Color::White, net)?;
        self.refresh_perspective(position, Color::Black, net)
    }

    /// Column subtractions then additions for one perspective. The half
    /// must be clean.
    pub fn apply_delta(
        &mut self,
        perspective: Color,
        removed: &[u32],
        added: &[u32],
        net: &QuantEvalNet,
    ) -> Result<(), EunnError> {
        let idx = color_index(perspective);
        assert!(!self.dirty[idx], "apply_delta on a dirty half");
        for &f in removed {
            sub_column(&mut self.halves[idx], net.column(f))?;
        }
        for &f in added {
            add_column(&mut self.halves[idx], net.column(f))?;
        }
        Ok(())
    }

    /// Applies one move's feature diff: perspectives whose king moved are
    /// refreshed from the new position, the others get column updates.
    /// Returns the position after the move.
    pub fn update_for_move(
        &mut self,
        position: &ChessPosition,
        mv: super::board::ChessMove,
        net: &QuantEvalNet,
    ) -> Result<ChessPosition, EunnError> {
        let delta = move_delta(position, mv)?;
        let next = position.apply_move(mv)?;
        for perspective in [Color::White, Color::Black] {
            let side = delta.perspective(perspective);
            if side.needs_refresh {
                self.refresh_perspective(&next, perspective, net)?;
            } else {
                self.apply_delta(perspective, &side.removed, &side.added, net)?;
            }
        }
        Ok(next)
    }
}

fn add_column(half: &mut [i16], column: &[i16]) -> Result<(), EunnError> {
    for (acc, &w) in half.iter_mut().zip(column) {
        *acc = acc.checked_add(w).ok_or(EunnError::AccumulatorOverflow)?;
    }
    Ok(())
}

fn sub_column(half: &mut [i16], column: &[i16]) -> Result<(), EunnError> {
    for (acc, &w) in half.iter_mut().zip(column) {
        *acc = acc.checked_sub(w).ok_or(EunnError::AccumulatorOverflow)?;
    }
    Ok(())
}

/// `clamp(x >> shift, 0, 127)` elementwise; the result is an activation
/// vector in [0, 127].
pub fn clipped_relu_q(values: &[i32], shift: u8) -> Vec<u8> {
    values.iter().map(|&x| (x >> shift).clamp(0, 127) as u8).collect()
}

/// Dot product of unsigned activations and signed weights, accumulated in
/// 32 bits with the pairwise multiply-add structure of the SIMD
/// instructions it is written to lower to.
pub fn madd_pairs(a: &[u8], b: &[i8]) -> i32 {
    assert_eq!(a.len(), b.len(), "madd_pairs needs equal lengths");
    let mut total: i32 = 0;
    let mut chunks_a = a.chunks_exact(2);
    let mut chunks_b = b.chunks_exact(2);
    for (ca, cb) in chunks_a.by_ref().zip(chunks_b.by_ref()) {
        let pair = i32::from(ca[0]) * i32::from(cb[0]) + i32::from(ca[1]) * i32::from(cb[1]);
        total += pair;
    }
    if let (Some(&ra), Some(&rb)) = (chunks_a.remainder().first(), chunks_b.remainder().first()) {
        total += i32::from(ra) * i32::from(rb);
    }
    total
}

/// Full forward pass over a clean accumulator: clip both halves (side to
/// move first), two int8 hidden layers, output neuron, divide by the output
/// scale. The result is centipawns from the side to move's perspective.
pub fn evaluate(position: &ChessPosition, acc: &Accumulator, net: &QuantEvalNet) -> i32 {
    assert!(acc.is_clean(), "evaluate needs a refreshed accumulator");
    let stm = position.side_to_move();
    let mut first = Vec::with_capacity(2 * net.dims.half_width);
    // the accumulator runs 2^INPUT_SHIFT above activation scale
    first.extend(clipped_relu_q(
        &acc.half(stm).iter().map(|&v| i32::from(v)).collect::<Vec<i32>>(),
        INPUT_SHIFT,
    ));
    first.extend(clipped_relu_q(
        &acc.half(stm.opponent()).iter().map(|&v| i32::from(v)).collect::<Vec<i32>>(),
        INPUT_SHIFT,
    ));

    let l2_pre: Vec<i32> = (0..net.dims.l2)
        .map(|o| {
            let row = &net.l2_weights[o * first.len()..(o + 1) * first.len()];
            madd_pairs(&first, row) + net.l2_bias[o]
        })
        .collect();
    let l2_out = clipped_relu_q(&l2_pre, net.shift);

    let l3_pre: Vec<i32> = (0..net.dims.l3)
        .map(|o| {
            let row = &net.l3_weights[o * net.dims.l2..(o + 1) * net.dims.l2];
            madd_pairs(&l2_out, row) + net.l3_bias[o]
        })
        .collect();
    let l3_out = clipped_relu_q(&l3_pre, net.shift);

    let raw = madd_pairs(&l3_out, &net.out_weights) + net.out_bias;
    raw / net.out_scale
}

/// Convenience: refresh an accumulator for the position and evaluate.
pub fn evaluate_fresh(position: &ChessPosition, net: &QuantEvalNet) -> Result<i32, EunnError> {
    let mut acc = Accumulator::new(net);
    acc.refresh(position, net)?;
    Ok(evaluate(position, &acc, net))
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn small_random_net(dims: QuantDims, seed: u64) -> QuantEvalNet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = QuantEvalNet::zeroed(dims);
        // keep input weights small enough that 33 columns plus bias cannot
        // overflow i16
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
}
