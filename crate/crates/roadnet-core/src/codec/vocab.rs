//! Shared integer vocabulary for every sequence format.
//!
//! One contiguous id space covers all formats so a single embedding
//! table can serve them interchangeably:
//!
//! | range    | meaning                         |
//! |----------|---------------------------------|
//! | 0..200   | vertex coordinate cell          |
//! | 200..250 | vertex category                 |
//! | 250..350 | clause or vertex index          |
//! | 350..570 | curve control-point bin         |
//! | 570      | noise filler                    |
//! | 571      | end of sequence                 |
//! | 572      | start of sequence               |
//! | 573      | empty slot                      |
//! | 574      | end of vertex list              |
//! | 575      | end of one adjacency group      |
//! | 576      | end of edge list                |
//!
//! Only category codes 0 to 3 are meaningful; 4 to 49 are reserved and
//! rejected on decode.

use std::fmt;

use crate::forest::VertexCategory;

pub const COORD_BASE: u16 = 0;
pub const COORD_RANGE: u16 = 200;
pub const CATEGORY_BASE: u16 = 200;
pub const CATEGORY_RANGE: u16 = 50;
pub const INDEX_BASE: u16 = 250;
pub const INDEX_RANGE: u16 = 100;
pub const CURVE_BASE: u16 = 350;
pub const CURVE_RANGE: u16 = 220;

pub const NOISE: Token = Token(570);
pub const EOS: Token = Token(571);
pub const START: Token = Token(572);
pub const NA: Token = Token(573);
pub const EOV: Token = Token(574);
pub const SPLIT: Token = Token(575);
pub const EOE: Token = Token(576);

pub const VOCAB_SIZE: u16 = 577;

/// Which slot of the vocabulary a token id falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Coord,
    Category,
    Index,
    Curve,
    Noise,
    Eos,
    Start,
    Na,
    Eov,
    Split,
    Eoe,
    Invalid,
}

/// One integer of a serialized sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(pub u16);

impl Token {
    pub fn coord(cell: u16) -> Token {
        debug_assert!(cell < COORD_RANGE);
        Token(COORD_BASE + cell)
    }

    pub fn category(cat: VertexCategory) -> Token {
        Token(CATEGORY_BASE + cat.code())
    }

    /// Index-reference token, or `None` when `i` exceeds the hundred
    /// addresses the vocabulary reserves.
    pub fn index(i: usize) -> Option<Token> {
        (i < INDEX_RANGE as usize).then(|| Token(INDEX_BASE + i as u16))
    }

    pub fn curve(bin: u16) -> Token {
        debug_assert!(bin < CURVE_RANGE);
        Token(CURVE_BASE + bin)
    }

    pub fn kind(self) -> TokenKind {
        match self.0 {
            v if v < CATEGORY_BASE => TokenKind::Coord,
            v if v < INDEX_BASE => TokenKind::Category,
            v if v < CURVE_BASE => TokenKind::Index,
            v if v < NOISE.0 => TokenKind::Curve,
            570 => TokenKind::Noise,
            571 => TokenKind::Eos,
            572 => TokenKind::Start,
            573 => TokenKind::Na,
            574 => TokenKind::Eov,
            575 => TokenKind::Split,
            576 => TokenKind::Eoe,
            _ => TokenKind::Invalid,
        }
    }

    pub fn as_coord(self) -> Option<u16> {
        (self.kind() == TokenKind::Coord).then(|| self.0 - COORD_BASE)
    }

    /// The category a token names; reserved category codes yield `None`
    /// just like non-category tokens.
    pub fn as_category(self) -> Option<VertexCategory> {
        if self.kind() != TokenKind::Category {
            return None;
        }
        VertexCategory::from_code(self.0 - CATEGORY_BASE)
    }

    pub fn as_index(self) -> Option<usize> {
        (self.kind() == TokenKind::Index).then(|| (self.0 - INDEX_BASE) as usize)
    }

    pub fn as_curve_bin(self) -> Option<u16> {
        (self.kind() == TokenKind::Curve).then(|| self.0 - CURVE_BASE)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
