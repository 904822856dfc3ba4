//! Hexapawn rules, state representation and network encodings.
//!
//! # Board layout
//!
//! The board is a flat array of nine cells indexed top-left to bottom-right:
//!
//! ```text
//!   a3=0  b3=1  c3=2
//!   a2=3  b2=4  c2=5
//!   a1=6  b1=7  c1=8
//! ```
//!
//! White pawns start on rank 1 and move towards rank 3 (decreasing index),
//! Black pawns start on rank 3 and move towards rank 1. A pawn moves one
//! square forward onto an empty cell or captures diagonally forward. A player
//! wins by reaching the far rank; a player with no legal move loses. There
//! are no draws.
//!
//! # Network encodings
//!
//! Positions encode to 21 input bits (9 white-pawn bits, 9 black-pawn bits,
//! 3 turn bits) and moves map to a fixed 28-entry policy index: white forward
//! moves 0-5, black forward moves 6-11, white captures 12-19, black captures
//! 20-27.

use std::fmt;

use thiserror::Error;

/// Number of network input bits for a position.
pub const INPUT_SIZE: usize = 21;
/// Number of policy outputs (all moves of both sides).
pub const POLICY_SIZE: usize = 28;

/// Side to move or pawn owner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    White,
    Black,
}

impl Color {
    pub fn opponent(self) -> Color {
        match self {
            Color::White => Color::Black,
            Color::Black => Color::White,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Color::White => write!(f, "White"),
            Color::Black => write!(f, "Black"),
        }
    }
}

/// Contents of a single board cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    Empty,
    White,
    Black,
}

impl Cell {
    pub fn pawn_of(color: Color) -> Cell {
        match color {
            Color::White => Cell::White,
            Color::Black => Cell::Black,
        }
    }

    pub fn color(self) -> Option<Color> {
        match self {
            Cell::Empty => None,
            Cell::White => Some(Color::White),
            Cell::Black => Some(Color::Black),
        }
    }
}

/// A move as a (source, target) pair of square indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    pub from: u8,
    pub to: u8,
}

impl Move {
    pub fn new(from: u8, to: u8) -> Move {
        Move { from, to }
    }

    /// Parses algebraic square-pair notation such as `"a1a2"`.
    pub fn parse(s: &str) -> Result<Move, ParseMoveError> {
        let b = s.as_bytes();
        if b.len() != 4 {
            return Err(ParseMoveError(s.to_string()));
        }
        let from = parse_square(&s[0..2]).ok_or_else(|| ParseMoveError(s.to_string()))?;
        let to = parse_square(&s[2..4]).ok_or_else(|| ParseMoveError(s.to_string()))?;
        Ok(Move { from, to })
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", square_name(self.from), square_name(self.to))
    }
}

/// Name of a square index, e.g. index 6 is `"a1"`.
pub fn square_name(idx: u8) -> &'static str {
    const NAMES: [&str; 9] = ["a3", "b3", "c3", "a2", "b2", "c2", "a1", "b1", "c1"];
    NAMES[idx as usize]
}

/// Parses a square name like `"b2"` into its cell index.
pub fn parse_square(s: &str) -> Option<u8> {
    let b = s.as_bytes();
    if b.len() != 2 {
        return None;
    }
    let file = b[0].checked_sub(b'a')?;
    let rank = b[1].checked_sub(b'1')?;
    if file > 2 || rank > 2 {
        return None;
    }
    Some((2 - rank) * 3 + file)
}

#[derive(Debug, Error)]
#[error("invalid move notation: {0:?}")]
pub struct ParseMoveError(pub String);

/// Result of terminal detection. A winner exists iff the game is over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ongoing,
    Won(Color),
}

impl Outcome {
    pub fn is_terminal(self) -> bool {
        matches!(self, Outcome::Won(_))
    }

    pub fn winner(self) -> Option<Color> {
        match self {
            Outcome::Ongoing => None,
            Outcome::Won(c) => Some(c),
        }
    }
}

/// 21-bit network input: 9 white-pawn bits, 9 black-pawn bits, 3 turn bits
/// (all ones iff White to move).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NetInput {
    pub bits: [u8; INPUT_SIZE],
}

impl NetInput {
    pub fn to_f64(&self) -> [f64; INPUT_SIZE] {
        let mut out = [0.0; INPUT_SIZE];
        for (o, &b) in out.iter_mut().zip(self.bits.iter()) {
            *o = f64::from(b);
        }
        out
    }

    /// The bits as a compact string, e.g. `"000010101011100000111"`.
    pub fn bit_string(&self) -> String {
        self.bits.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect()
    }
}

#[derive(Debug, Error)]
#[error("illegal move {mv} in position\n{board}")]
pub struct IllegalMove {
    pub board: Board,
    pub mv: Move,
}

#[derive(Debug, Error)]
#[error("move {0} is not a Hexapawn move")]
pub struct UnknownMove(pub Move);

#[derive(Debug, Error)]
#[error("cannot parse board text: {0}")]
pub struct ParseBoardError(pub String);

// Capture target squares per source square, exactly the tables the move
// generator is specified against.
const WHITE_PAWN_CAPTURES: [&[u8]; 9] =
    [&[], &[], &[], &[1], &[0, 2], &[1], &[4], &[3, 5], &[4]];
const BLACK_PAWN_CAPTURES: [&[u8]; 9] =
    [&[4], &[3, 5], &[4], &[7], &[6, 8], &[7], &[], &[], &[]];

/// Full Hexapawn game state: nine cells plus side to move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Board {
    cells: [Cell; 9],
    turn: Color,
}

impl Board {
    /// The initial position: Black pawns on rank 3, White pawns on rank 1,
    /// White to move.
    pub fn starting_position() -> Board {
        Board {
            cells: [
                Cell::Black,
                Cell::Black,
                Cell::Black,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::White,
                Cell::White,
                Cell::White,
            ],
            turn: Color::White,
        }
    }

    pub fn from_cells(cells: [Cell; 9], turn: Color) -> Board {
        Board { cells, turn }
    }

    pub fn cells(&self) -> &[Cell; 9] {
        &self.cells
    }

    pub fn cell(&self, idx: u8) -> Cell {
        self.cells[idx as usize]
    }

    pub fn turn(&self) -> Color {
        self.turn
    }

    /// All legal moves for the side to move, in deterministic order:
    /// ascending source square, forward move before captures, captures in
    /// table order.
    pub fn generate_moves(&self) -> Vec<Move> {
        let mut moves = Vec::new();
        let own = Cell::pawn_of(self.turn);
        let enemy = Cell::pawn_of(self.turn.opponent());
        for from in 0..9u8 {
            if self.cells[from as usize] != own {
                continue;
            }
            let (forward, captures) = match self.turn {
                Color::White => (from.checked_sub(3), WHITE_PAWN_CAPTURES[from as usize]),
                Color::Black => {
                    let to = from + 3;
                    (if to < 9 { Some(to) } else { None }, BLACK_PAWN_CAPTURES[from as usize])
                }
            };
            if let Some(to) = forward {
                if self.cells[to as usize] == Cell::Empty {
                    moves.push(Move { from, to });
                }
            }
            for &to in captures {
                if self.cells[to as usize] == enemy {
                    moves.push(Move { from, to });
                }
            }
        }
        moves
    }

    /// Applies a legal move, returning the resulting position.
    /// The original board is never mutated.
    pub fn apply_move(&self, m: Move) -> Result<Board, IllegalMove> {
        if !self.generate_moves().contains(&m) {
            return Err(IllegalMove { board: *self, mv: m });
        }
        Ok(self.apply_unchecked(m))
    }

    pub(crate) fn apply_unchecked(&self, m: Move) -> Board {
        let mut next = *self;
        next.cells[m.to as usize] = next.cells[m.from as usize];
        next.cells[m.from as usize] = Cell::Empty;
        next.turn = next.turn.opponent();
        next
    }

    /// Terminal detection. Black wins with a pawn on rank 1, White wins with
    /// a pawn on rank 3, and a side to move without a legal move loses.
    pub fn outcome(&self) -> Outcome {
        for idx in 6..9 {
            if self.cells[idx] == Cell::Black {
                return Outcome::Won(Color::Black);
            }
        }
        for idx in 0..3 {
            if self.cells[idx] == Cell::White {
                return Outcome::Won(Color::White);
            }
        }
        if self.generate_moves().is_empty() {
            return Outcome::Won(self.turn.opponent());
        }
        Outcome::Ongoing
    }

    pub fn is_terminal(&self) -> bool {
        self.outcome().is_terminal()
    }

    /// Encodes the position as the 21-bit network input.
    pub fn to_network_input(&self) -> NetInput {
        let mut bits = [0u8; INPUT_SIZE];
        for (bit, cell) in bits.iter_mut().zip(self.cells.iter()) {
            if *cell == Cell::White {
                *bit = 1;
            }
        }
        for (bit, cell) in bits[9..18].iter_mut().zip(self.cells.iter()) {
            if *cell == Cell::Black {
                *bit = 1;
            }
        }
        if self.turn == Color::White {
            bits[18] = 1;
            bits[19] = 1;
            bits[20] = 1;
        }
        NetInput { bits }
    }

    /// Left-right reflection (swaps the a and c files). Legal move sets map
    /// onto each other under the same reflection.
    pub fn mirror_horizontal(&self) -> Board {
        let mut cells = self.cells;
        for row in 0..3 {
            cells.swap(row * 3, row * 3 + 2);
        }
        Board { cells, turn: self.turn }
    }

    /// Color-swapped vertical mirror with the turn flipped. Exhaustive search
    /// values change sign under this transform.
    pub fn mirror_colors(&self) -> Board {
        let mut cells = [Cell::Empty; 9];
        for idx in 0..9 {
            let flipped = (2 - idx / 3) * 3 + idx % 3;
            cells[flipped] = match self.cells[idx] {
                Cell::Empty => Cell::Empty,
                Cell::White => Cell::Black,
                Cell::Black => Cell::White,
            };
        }
        Board { cells, turn: self.turn.opponent() }
    }

    /// Parses the text rendering produced by [`Board::to_text`]: three rows
    /// of `{., W, B}` top-to-bottom, separated by newlines or `/`, optionally
    /// followed by a side-to-move marker `w` or `b` (default White).
    pub fn parse_text(s: &str) -> Result<Board, ParseBoardError> {
        let err = || ParseBoardError(s.to_string());
        let mut cells = Vec::with_capacity(9);
        let mut turn = None;
        for token in s.split(|c: char| c == '/' || c.is_whitespace()) {
            if token.is_empty() {
                continue;
            }
            if cells.len() == 9 {
                turn = match token {
                    "w" | "W" => Some(Color::White),
                    "b" | "B" => Some(Color::Black),
                    _ => return Err(err()),
                };
                continue;
            }
            for ch in token.chars() {
                let cell = match ch {
                    '.' => Cell::Empty,
                    'W' => Cell::White,
                    'B' => Cell::Black,
                    _ => return Err(err()),
                };
                if cells.len() == 9 {
                    return Err(err());
                }
                cells.push(cell);
            }
        }
        if cells.len() != 9 {
            return Err(err());
        }
        let mut arr = [Cell::Empty; 9];
        arr.copy_from_slice(&cells);
        Ok(Board { cells: arr, turn: turn.unwrap_or(Color::White) })
    }

    /// Three-row text rendering, ranks 3 down to 1.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(12);
        for row in 0..3 {
            for col in 0..3 {
                s.push(match self.cells[row * 3 + col] {
                    Cell::Empty => '.',
                    Cell::White => 'W',
                    Cell::Black => 'B',
                });
            }
            if row < 2 {
                s.push('\n');
            }
        }
        s
    }
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

/// Fixed policy-output index of a move, matching the 28-entry enumeration:
/// white forward 0-5, black forward 6-11, white captures 12-19, black
/// captures 20-27.
pub fn output_index(m: Move) -> Result<usize, UnknownMove> {
    let idx = match (m.from, m.to) {
        // white forward moves
        (6, 3) => 0,
        (7, 4) => 1,
        (8, 5) => 2,
        (3, 0) => 3,
        (4, 1) => 4,
        (5, 2) => 5,
        // black forward moves
        (0, 3) => 6,
        (1, 4) => 7,
        (2, 5) => 8,
        (3, 6) => 9,
        (4, 7) => 10,
        (5, 8) => 11,
        // white captures
        (6, 4) => 12,
        (7, 3) => 13,
        (7, 5) => 14,
        (8, 4) => 15,
        (3, 1) => 16,
        (4, 0) => 17,
        (4, 2) => 18,
        (5, 1) => 19,
        // black captures
        (0, 4) => 20,
        (1, 3) => 21,
        (1, 5) => 22,
        (2, 4) => 23,
        (3, 7) => 24,
        (4, 6) => 25,
        (4, 8) => 26,
        (5, 7) => 27,
        _ => return Err(UnknownMove(m)),
    };
    Ok(idx)
}
