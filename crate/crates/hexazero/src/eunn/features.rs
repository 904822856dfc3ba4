//! HalfKP feature indexing: one feature per (own-king square, piece kind,
//! piece square) triple, per perspective. Kind indices 0..4 are the
//! perspective's own pawn..queen, 5..9 the enemy's; kings contribute no
//! features. Squares are seen from the perspective's side: the white view is
//! the identity, the black view vertically flips every square (XOR 56), so
//! mirrored positions produce identical feature sets.

use crate::game::Color;

use super::board::{ChessMove, ChessPosition, PieceKind};
use super::EunnError;

/// Features per half: 64 king squares x 10 kinds x 64 piece squares.
pub const NUM_FEATURES: u32 = 64 * 10 * 64;

/// Linear feature index `king_sq * 640 + kind * 64 + piece_sq`.
pub fn feature_index(king_sq: u8, kind: u8, piece_sq: u8) -> Result<u32, EunnError> {
    if king_sq >= 64 {
        return Err(EunnError::OutOfRange("king square"));
    }
    if kind >= 10 {
        return Err(EunnError::OutOfRange("piece kind"));
    }
    if piece_sq >= 64 {
        return Err(EunnError::OutOfRange("piece square"));
    }
    Ok(u32::from(king_sq) * 640 + u32::from(kind) * 64 + u32::from(piece_sq))
}

/// Identity for White, vertical flip (XOR 56) for Black.
pub fn perspective_transform(sq: u8, perspective: Color) -> u8 {
    match perspective {
        Color::White => sq,
        Color::Black => sq ^ 56,
    }
}

fn kind_index(piece_color: Color, kind: PieceKind, perspective: Color) -> Option<u8> {
    let offset = kind.feature_offset()? as u8;
    Some(if piece_color == perspective { offset } else { offset + 5 })
}

/// All active features of one perspective: one per non-king piece, anchored
/// at the perspective's own (transformed) king square.
pub fn active_features(position: &ChessPosition, perspective: Color) -> Vec<u32> {
    let king_sq = perspective_transform(position.king_square(perspective), perspective);
    let mut features = Vec::with_capacity(32);
    for (sq, piece) in position.pieces() {
        if let Some(kind) = kind_index(piece.color, piece.kind, perspective) {
            let piece_sq = perspective_transform(sq, perspective);
            features.push(
                feature_index(king_sq, kind, piece_sq).expect("transformed inputs are in range"),
            );
        }
    }
    features
}

/// Feature changes of one perspective for one move. A perspective whose own
/// king moved needs a full refresh (its anchor changed); its lists are left
/// empty.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PerspectiveDelta {
    pub needs_refresh: bool,
    pub removed: Vec<u32>,
    pub added: Vec<u32>,
}

/// Feature diff of a move for both perspectives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveDelta {
    pub white: PerspectiveDelta,
    pub black: PerspectiveDelta,
}

impl MoveDelta {
    pub fn perspective(&self, color: Color) -> &PerspectiveDelta {
        match color {
            Color::White => &self.white,
            Color::Black => &self.black,
        }
    }
}

/// Computes the per-perspective feature diff of a pseudo-legal move without
/// applying it. The mover's own perspective is flagged for refresh when the
/// king moves; the opposite perspective still gets its exact diff (a moving
/// king itself contributes no feature there, only a capture does).
pub fn move_delta(position: &ChessPosition, mv: ChessMove) -> Result<MoveDelta, EunnError> {
    // validate the move the same way apply_move would
    position.apply_move(mv)?;
    let mover = position
        .piece_at(mv.from)
        .expect("validated move has a mover");
    let captured = position.piece_at(mv.to);
    let landed_kind = mv.promotion.unwrap_or(mover.kind);

    let mut delta = MoveDelta {
        white: PerspectiveDelta::default(),
        black: PerspectiveDelta::default(),
    };
    for perspective in [Color::White, Color::Black] {
        let side = match perspective {
            Color::White => &mut delta.white,
            Color::Black => &mut delta.black,
        };
        if mover.kind == PieceKind::King && mover.color == perspective {
            side.needs_refresh = true;
            continue;
        }
        let king_sq = perspective_transform(position.king_square(perspective), perspective);
        if let Some(kind) = kind_index(mover.color, mover.kind, perspective) {
            side.removed.push(feature_index(
                king_sq,
                kind,
                perspective_transform(mv.from, perspective),
            )?);
        }
        if let Some(piece) = captured {
            let kind = kind_index(piece.color, piece.kind, perspective)
                .expect("kings cannot be captured");
            side.removed.push(feature_index(
                king_sq,
                kind,
                perspective_transform(mv.to, perspective),
            )?);
        }
        if let Some(kind) = kind_index(mover.color, landed_kind, perspective) {
            side.added.push(feature_index(
                king_sq,
                kind,
                perspective_transform(mv.to, perspective),
            )?);
        }
    }
    Ok(delta)
}

#[cfg(test)]
mod tests {
    use super::super::board::{random_move, random_position};
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    #[test]
    fn feature_index_formula() {
        assert_eq!(feature_index(0, 0, 8).unwrap(), 8);
        assert_eq!(feature_index(63, 9, 63).unwrap(), NUM_FEATURES - 1);
        assert_eq!(feature_index(4, 8, 56).unwrap(), 4 * 640 + 8 * 64 + 56);
        assert_eq!(feature_index(4, 8, 56).unwrap(), 3128);
        assert!(feature_index(64, 0, 0).is_err());
        assert!(feature_index(0, 10, 0).is_err());
        assert!(feature_index(0, 0, 64).is_err());
    }

    #[test]
    fn feature_index_is_a_bijection() {
        let mut seen = vec![false; NUM_FEATURES as usize];
        for king in 0..64u8 {
            for kind in 0..10u8 {
                for sq in 0..64u8 {
                    let f = feature_index(king, kind, sq).unwrap() as usize;
                    assert!(!seen[f]);
                    seen[f] = true;
                }
            }
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn perspective_transform_examples() {
        assert_eq!(perspective_transform(4, Color::Black), 60); // e1 -> e8
        assert_eq!(perspective_transform(0, Color::White), 0);
        for sq in 0..64u8 {
            let double = perspective_transform(perspective_transform(sq, Color::Black), Color::Black);
            assert_eq!(double, sq);
        }
    }

    #[test]
    fn kings_only_has_no_features() {
        let p = ChessPosition::parse_fen("4k3/8/8/8/8/8/8/4K3 w").unwrap();
        assert!(active_features(&p, Color::White).is_empty());
        assert!(active_features(&p, Color::Black).is_empty());
    }

    #[test]
    fn two_pieces_give_two_features_per_perspective() {
        let p = ChessPosition::parse_fen("4k3/8/8/3r4/8/8/P7/4K3 w").unwrap();
        for perspective in [Color::White, Color::Black] {
            assert_eq!(active_features(&p, perspective).len(), 2);
        }
        // the worked anchor: own king on e1, own pawn on a2 is feature
        // 4*640 + 0*64 + 8
        let white = active_features(&p, Color::White);
        assert!(white.contains(&(4 * 640 + 8)));
    }

    #[test]
    fn mirrored_positions_share_the_feature_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let p = random_position(&mut rng);
            let m = p.mirror();
            let stm = p.side_to_move();
            let as_set = |v: Vec<u32>| v.into_iter().collect::<HashSet<u32>>();
            // (side-to-move half, opposite half) is identical for mirrors
            assert_eq!(
                as_set(active_features(&p, stm)),
                as_set(active_features(&m, m.side_to_move()))
            );
            assert_eq!(
                as_set(active_features(&p, stm.opponent())),
                as_set(active_features(&m, m.side_to_move().opponent()))
            );
        }
    }

    /// Oracle: diff of active_features before and after the move.
    fn oracle_delta(
        before: &ChessPosition,
        after: &ChessPosition,
        perspective: Color,
    ) -> (HashSet<u32>, HashSet<u32>) {
        let old: HashSet<u32> = active_features(before, perspective).into_iter().collect();
        let new: HashSet<u32> = active_features(after, perspective).into_iter().collect();
        (old.difference(&new).copied().collect(), new.difference(&old).copied().collect())
    }

    #[test]
    fn quiet_knight_move_is_one_remove_one_add() {
        let p = ChessPosition::parse_fen("4k3/8/8/8/8/8/8/1N2K3 w").unwrap();
        let mv = ChessMove { from: 1, to: 18, promotion: None }; // Nb1-c3
        let delta = move_delta(&p, mv).unwrap();
        let after = p.apply_move(mv).unwrap();
        for perspective in [Color::White, Color::Black] {
            let side = delta.perspective(perspective);
            assert!(!side.needs_refresh);
            assert_eq!(side.removed.len(), 1);
            assert_eq!(side.added.len(), 1);
            let (rem, add) = oracle_delta(&p, &after, perspective);
            assert_eq!(rem, side.removed.iter().copied().collect());
            assert_eq!(add, side.added.iter().copied().collect());
        }
    }

    #[test]
    fn king_move_flags_own_perspective_only() {
        let p = ChessPosition::parse_fen("4k3/8/8/8/8/8/P3r3/4K3 w").unwrap();
        let mv = ChessMove { from: 4, to: 13, promotion: None }; // Ke1-f2
        let delta = move_delta(&p, mv).unwrap();
        assert!(delta.white.needs_refresh);
        assert!(delta.white.removed.is_empty() && delta.white.added.is_empty());
        // from Black's view the enemy king is not a feature piece, so a
        // quiet king move changes nothing
        assert!(!delta.black.needs_refresh);
        let after = p.apply_move(mv).unwrap();
        let (rem, add) = oracle_delta(&p, &after, Color::Black);
        assert_eq!(rem, delta.black.removed.iter().copied().collect());
        assert_eq!(add, delta.black.added.iter().copied().collect());
        assert!(delta.black.removed.is_empty() && delta.black.added.is_empty());
    }

    #[test]
    fn king_capture_move_removes_the_victim_for_the_other_side() {
        let p = ChessPosition::parse_fen("4k3/8/8/8/8/8/4r3/4K3 w").unwrap();
        let mv = ChessMove { from: 4, to: 12, promotion: None }; // Ke1xe2
        let delta = move_delta(&p, mv).unwrap();
        assert!(delta.white.needs_refresh);
        assert!(!delta.black.needs_refresh);
        assert_eq!(delta.black.removed.len(), 1);
        assert!(delta.black.added.is_empty());
        let after = p.apply_move(mv).unwrap();
        let (rem, add) = oracle_delta(&p, &after, Color::Black);
        assert_eq!(rem, delta.black.removed.iter().copied().collect());
        assert!(add.is_empty());
    }

    #[test]
    fn pawn_capture_is_two_removes_one_add() {
        let p = ChessPosition::parse_fen("4k3/8/8/8/8/2n5/1P6/4K3 w").unwrap();
        let mv = ChessMove { from: 9, to: 18, promotion: None }; // b2xc3
        let delta = move_delta(&p, mv).unwrap();
        let after = p.apply_move(mv).unwrap();
        for perspective in [Color::White, Color::Black] {
            let side = delta.perspective(perspective);
            assert_eq!(side.removed.len(), 2);
            assert_eq!(side.added.len(), 1);
            let (rem, add) = oracle_delta(&p, &after, perspective);
            assert_eq!(rem, side.removed.iter().copied().collect());
            assert_eq!(add, side.added.iter().copied().collect());
        }
    }

    #[test]
    fn random_move_deltas_match_the_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut checked = 0;
        while checked < 3000 {
            let p = random_position(&mut rng);
            let Some(mv) = random_move(&p, &mut rng) else { continue };
            let delta = move_delta(&p, mv).unwrap();
            let after = p.apply_move(mv).unwrap();
            for perspective in [Color::White, Color::Black] {
                let side = delta.perspective(perspective);
                if side.needs_refresh {
                    continue;
                }
                let (rem, add) = oracle_delta(&p, &after, perspective);
                assert_eq!(
                    rem,
                    side.removed.iter().copied().collect(),
                    "removed mismatch for {mv:?} on {p:?}"
                );
                assert_eq!(
                    add,
                    side.added.iter().copied().collect(),
                    "added mismatch for {mv:?} on {p:?}"
                );
            }
            checked += 1;
        }
    }

    #[test]
    fn malformed_move_is_an_error() {
        let p = ChessPosition::parse_fen("4k3/8/8/8/8/8/8/4K3 w").unwrap();
        assert!(move_delta(&p, ChessMove { from: 30, to: 31, promotion: None }).is_err());
    }
}
