//! Chess position representation for the quantized evaluator: per-square
//! occupancy over 64 squares (a1 = 0 ... h8 = 63, file-major within each
//! rank) plus the side to move. Only pseudo-legal move application is
//! supported; full chess legality is out of scope.

use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::game::Color;

use super::EunnError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PieceKind {
    Pawn,
    Knight,
    Bishop,
    Rook,
    Queen,
    King,
}

impl PieceKind {
    pub const NON_KING: [PieceKind; 5] = [
        PieceKind::Pawn,
        PieceKind::Knight,
        PieceKind::Bishop,
        PieceKind::Rook,
        PieceKind::Queen,
    ];

    /// 0..4 for pawn..queen; the king carries no feature index.
    pub fn feature_offset(self) -> Option<u32> {
        match self {
            PieceKind::Pawn => Some(0),
            PieceKind::Knight => Some(1),
            PieceKind::Bishop => Some(2),
            PieceKind::Rook => Some(3),
            PieceKind::Queen => Some(4),
            PieceKind::King => None,
        }
    }

    fn fen_char(self, color: Color) -> char {
        let c = match self {
            PieceKind::Pawn => 'p',
            PieceKind::Knight => 'n',
            PieceKind::Bishop => 'b',
            PieceKind::Rook => 'r',
            PieceKind::Queen => 'q',
            PieceKind::King => 'k',
        };
        match color {
            Color::White => c.to_ascii_uppercase(),
            Color::Black => c,
        }
    }

    fn from_fen_char(c: char) -> Option<(PieceKind, Color)> {
        let color = if c.is_ascii_uppercase() { Color::White } else { Color::Black };
        let kind = match c.to_ascii_lowercase() {
            'p' => PieceKind::Pawn,
            'n' => PieceKind::Knight,
            'b' => PieceKind::Bishop,
            'r' => PieceKind::Rook,
            'q' => PieceKind::Queen,
            'k' => PieceKind::King,
            _ => return None,
        };
        Some((kind, color))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Piece {
    pub color: Color,
    pub kind: PieceKind,
}

/// A pseudo-legal move: source, destination, optional promotion kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChessMove {
    pub from: u8,
    pub to: u8,
    pub promotion: Option<PieceKind>,
}

pub fn square_file(sq: u8) -> u8 {
    sq % 8
}

pub fn square_rank(sq: u8) -> u8 {
    sq / 8
}

pub fn square_name(sq: u8) -> String {
    format!("{}{}", (b'a' + square_file(sq)) as char, square_rank(sq) + 1)
}

/// Chess position: 64 squares of optional pieces plus the side to move.
/// Invariants: exactly one king per color, no pawns on ranks 1 or 8.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct ChessPosition {
    squares: [Option<Piece>; 64],
    side_to_move: Color,
}

impl ChessPosition {
    pub fn new(squares: [Option<Piece>; 64], side_to_move: Color) -> Result<Self, EunnError> {
        let p = ChessPosition { squares, side_to_move };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), EunnError> {
        for color in [Color::White, Color::Black] {
            let kings = self
                .squares
                .iter()
                .filter(|s| **s == Some(Piece { color, kind: PieceKind::King }))
                .count();
            if kings != 1 {
                return Err(EunnError::InvalidPosition(format!("{color} has {kings} kings")));
            }
        }
        for (sq, piece) in self.squares.iter().enumerate() {
            if let Some(p) = piece {
                if p.kind == PieceKind::Pawn {
                    let rank = square_rank(sq as u8);
                    if rank == 0 || rank == 7 {
                        return Err(EunnError::InvalidPosition(format!(
                            "pawn on back rank at {}",
                            square_name(sq as u8)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn piece_at(&self, sq: u8) -> Option<Piece> {
        self.squares[sq as usize]
    }

    pub fn side_to_move(&self) -> Color {
        self.side_to_move
    }

    pub fn king_square(&self, color: Color) -> u8 {
        self.squares
            .iter()
            .position(|s| *s == Some(Piece { color, kind: PieceKind::King }))
            .expect("position invariant guarantees a king") as u8
    }

    /// Iterator over (square, piece).
    pub fn pieces(&self) -> impl Iterator<Item = (u8, Piece)> + '_ {
        self.squares
            .iter()
            .enumerate()
            .filter_map(|(sq, p)| p.map(|piece| (sq as u8, piece)))
    }

    /// Color-swapped vertical mirror with the side to move flipped. The
    /// evaluator is structurally invariant under this transform.
    pub fn mirror(&self) -> ChessPosition {
        let mut squares = [None; 64];
        for (sq, piece) in self.pieces() {
            squares[(sq ^ 56) as usize] =
                Some(Piece { color: piece.color.opponent(), kind: piece.kind });
        }
        ChessPosition { squares, side_to_move: self.side_to_move.opponent() }
    }

    /// Applies a pseudo-legal move: the destination piece (if any) is
    /// captured, promotions replace the pawn, the side to move flips.
    pub fn apply_move(&self, mv: ChessMove) -> Result<ChessPosition, EunnError> {
        let bad = |reason: String| EunnError::MalformedMove(reason);
        if mv.from >= 64 || mv.to >= 64 || mv.from == mv.to {
            return Err(bad(format!("bad squares {}-{}", mv.from, mv.to)));
        }
        let piece = self
            .squares[mv.from as usize]
            .ok_or_else(|| bad(format!("no piece on {}", square_name(mv.from))))?;
        if piece.color != self.side_to_move {
            return Err(bad(format!("{} is not the mover's piece", square_name(mv.from))));
        }
        if let Some(target) = self.squares[mv.to as usize] {
            if target.color == piece.color {
                return Err(bad("cannot capture own piece".into()));
            }
            if target.kind == PieceKind::King {
                return Err(bad("cannot capture a king".into()));
            }
        }
        let to_rank = square_rank(mv.to);
        let last_rank = match piece.color {
            Color::White => 7,
            Color::Black => 0,
        };
        let landed_kind = match (piece.kind, mv.promotion) {
            (PieceKind::Pawn, Some(promo)) => {
                if to_rank != last_rank {
                    return Err(bad("promotion away from the last rank".into()));
                }
                if promo == PieceKind::Pawn || promo == PieceKind::King {
                    return Err(bad("invalid promotion kind".into()));
                }
                promo
            }
            (PieceKind::Pawn, None) => {
                if to_rank == 0 || to_rank == 7 {
                    return Err(bad("pawn move to a back rank needs a promotion".into()));
                }
                PieceKind::Pawn
            }
            (_, Some(_)) => return Err(bad("only pawns promote".into())),
            (kind, None) => kind,
        };
        let mut squares = self.squares;
        squares[mv.to as usize] = Some(Piece { color: piece.color, kind: landed_kind });
        squares[mv.from as usize] = None;
        let next = ChessPosition { squares, side_to_move: self.side_to_move.opponent() };
        next.validate()?;
        Ok(next)
    }

    /// Parses the piece-placement and active-color fields of a FEN string;
    /// castling, en-passant and clock fields are accepted and ignored.
    pub fn parse_fen(fen: &str) -> Result<ChessPosition, EunnError> {
        let bad = |reason: &str| EunnError::Fen(format!("{reason}: {fen:?}"));
        let mut fields = fen.split_whitespace();
        let placement = fields.next().ok_or_else(|| bad("missing placement"))?;
        let active = fields.next().unwrap_or("w");
        let mut squares = [None; 64];
        let ranks: Vec<&str> = placement.split('/').collect();
        if ranks.len() != 8 {
            return Err(bad("placement needs 8 ranks"));
        }
        for (row, rank_str) in ranks.iter().enumerate() {
            let rank = 7 - row as u8;
            let mut file = 0u8;
            for c in rank_str.chars() {
                if let Some(skip) = c.to_digit(10) {
                    file += skip as u8;
                } else {
                    let (kind, color) =
                        PieceKind::from_fen_char(c).ok_or_else(|| bad("bad piece char"))?;
                    if file >= 8 {
                        return Err(bad("rank overflow"));
                    }
                    squares[(rank * 8 + file) as usize] = Some(Piece { color, kind });
                    file += 1;
                }
            }
            if file != 8 {
                return Err(bad("rank too short"));
            }
        }
        let side_to_move = match active {
            "w" => Color::White,
            "b" => Color::Black,
            _ => return Err(bad("active color must be w or b")),
        };
        ChessPosition::new(squares, side_to_move)
    }

    /// Piece placement and active color in FEN form.
    pub fn to_fen(&self) -> String {
        let mut out = String::new();
        for row in 0..8 {
            let rank = 7 - row;
            let mut empties = 0;
            for file in 0..8 {
                match self.squares[(rank * 8 + file) as usize] {
                    Some(p) => {
                        if empties > 0 {
                            out.push_str(&empties.to_string());
                            empties = 0;
                        }
                        out.push(p.kind.fen_char(p.color));
                    }
                    None => empties += 1,
                }
            }
            if empties > 0 {
                out.push_str(&empties.to_string());
            }
            if row < 7 {
                out.push('/');
            }
        }
        out.push(' ');
        out.push(match self.side_to_move {
            Color::White => 'w',
            Color::Black => 'b',
        });
        out
    }
}

impl fmt::Debug for ChessPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChessPosition({})", self.to_fen())
    }
}

/// Synthetic position generator: two kings on distinct squares, up to 14
/// other pieces uniformly over colored kinds and empty squares, pawns kept
/// off the back ranks, random side to move.
pub fn random_position(rng: &mut ChaCha8Rng) -> ChessPosition {
    let mut squares: [Option<Piece>; 64] = [None; 64];
    let wk = rng.gen_range(0..64u8);
    let bk = loop {
        let sq = rng.gen_range(0..64u8);
        if sq != wk {
            break sq;
        }
    };
    squares[wk as usize] = Some(Piece { color: Color::White, kind: PieceKind::King });
    squares[bk as usize] = Some(Piece { color: Color::Black, kind: PieceKind::King });
    let extra = rng.gen_range(0..=14usize);
    for _ in 0..extra {
        let color = if rng.gen_bool(0.5) { Color::White } else { Color::Black };
        let kind = PieceKind::NON_KING[rng.gen_range(0..PieceKind::NON_KING.len())];
        // draw squares until one fits the piece
        for _ in 0..64 {
            let sq = rng.gen_range(0..64u8);
            if squares[sq as usize].is_some() {
                continue;
            }
            let rank = square_rank(sq);
            if kind == PieceKind::Pawn && (rank == 0 || rank == 7) {
                continue;
            }
            squares[sq as usize] = Some(Piece { color, kind });
            break;
        }
    }
    let side_to_move = if rng.gen_bool(0.5) { Color::White } else { Color::Black };
    ChessPosition::new(squares, side_to_move).expect("generator respects invariants")
}

/// Draws a random pseudo-legal move for the side to move: any own piece to
/// any square not occupied by an own piece or a king, pawns promoting on the
/// last rank and never landing on a back rank otherwise.
pub fn random_move(position: &ChessPosition, rng: &mut ChaCha8Rng) -> Option<ChessMove> {
    let own: Vec<(u8, Piece)> =
        position.pieces().filter(|(_, p)| p.color == position.side_to_move()).collect();
    // a few attempts per piece is plenty on a 64-square board
    for _ in 0..256 {
        let (from, piece) = own[rng.gen_range(0..own.len())];
        let to = rng.gen_range(0..64u8);
        if to == from {
            continue;
        }
        if let Some(target) = position.piece_at(to) {
            if target.color == piece.color || target.kind == PieceKind::King {
                continue;
            }
        }
        let to_rank = square_rank(to);
        let promotion = if piece.kind == PieceKind::Pawn {
            let last_rank = if piece.color == Color::White { 7 } else { 0 };
            let own_back = if piece.color == Color::White { 0 } else { 7 };
            if to_rank == own_back {
                continue;
            }
            if to_rank == last_rank {
                let kinds =
                    [PieceKind::Knight, PieceKind::Bishop, PieceKind::Rook, PieceKind::Queen];
                Some(kinds[rng.gen_range(0..kinds.len())])
            } else {
                None
            }
        } else {
            None
        };
        return Some(ChessMove { from, to, promotion });
    }
    None
}
