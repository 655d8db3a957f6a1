//! The embedding game: finite exact solving, a symbolic backend for
//! equivalence structures with infinite classes, and interactive play.

pub mod finite;
pub mod play;
pub mod symbolic;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::structure::Structure;

pub use finite::{
    duplicator_survives, duplicator_survives_with, min_distinguishing_round, verify_outcome,
    DistinguishingRound, FiniteWitness, GameConfig, GameOutcome, Position, SpoilerNode,
};
pub use play::{play_interactive, replay, GameInstance, Player, Transcript};
pub use symbolic::{
    sym_embedding_exists, sym_game, sym_game_with, verify_sym_outcome, ClassGroup, SymCard,
    SymConfig, SymEqStructure, SymGameOutcome, SymPin, SymWitness,
};

/// Which embedding a move concerns: left is f: A → B, right is g: B → A.
/// Spoiler's elements on the left side come from A, on the right from B.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }

    pub fn arrow(self) -> &'static str {
        match self {
            Side::Left => "f: A -> B",
            Side::Right => "g: B -> A",
        }
    }

    /// (source, target) of this side's embedding.
    pub fn pick<'a>(self, a: &'a Structure, b: &'a Structure) -> (&'a Structure, &'a Structure) {
        match self {
            Side::Left => (a, b),
            Side::Right => (b, a),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
