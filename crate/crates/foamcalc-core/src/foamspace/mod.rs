//! The movie calculus: elementary web cobordisms that compile to
//! pre-foams, the state spaces they generate, and the linear algebra of
//! the resulting Gram pairings.
//!
//! Moves reference the current frame: half-edges by their index in the
//! frame web (seniority order: surviving half-edges keep their relative
//! order, fresh ones append), free loops by their position in the frame's
//! loop list (a split replaces its loop in place, a merge lands at the
//! smaller position, births append).

pub mod compile;
pub mod linalg;
pub mod relsites;
pub mod spaces;

pub use relsites::{movie_relation_instances, vertexed_random_foam};

use crate::web::{HalfEdge, Web};
use std::fmt;

/// A strand in the current frame: an edge (by half-edge index) or a free
/// loop (by loop position).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strand {
    Edge(HalfEdge),
    Loop(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    /// A circle is born (appended to the loop list). Degree -2.
    Birth,
    /// A circle dies. Degree -2.
    Death(usize),
    /// Saddle merging two circles. Degree +2.
    SaddleLoops(usize, usize),
    /// Saddle splitting one circle in two. Degree +2.
    SaddleLoopSplit(usize),
    /// Saddle absorbing a circle into an edge strand. Degree +2.
    SaddleLoopEdge(usize, HalfEdge),
    /// Saddle pinching a circle off an edge strand. Degree +2.
    SaddlePinch(HalfEdge),
    /// Saddle reconnecting two edge strands: the named halves become
    /// partners, as do their old partners. Degree +2.
    SaddleEdges(HalfEdge, HalfEdge),
    /// Zip two strands together, creating two vertices joined by a bar;
    /// the first strand lies on the left of the bar, and for an edge
    /// strand the named half's side attaches at the bar's tail. Degree +1.
    Zip(Strand, Strand),
    /// Unzip the bar containing this half-edge, splicing the four legs in
    /// parallel. Degree +1.
    Unzip(HalfEdge),
    /// Rotate the bar containing this half-edge through a seam vertex
    /// (the I-to-H cobordism). Degree +1.
    Vtx(HalfEdge),
    /// Replace the vertex at this half-edge by a triangle (the cone over
    /// the tetrahedral web); the half marks the first leg. Degree 0.
    Blowup(HalfEdge),
    /// Collapse the triangle face containing this half-edge back to a
    /// vertex. Degree 0.
    Blowdown(HalfEdge),
    /// Decorations on the sheet swept by a strand.
    Dot(Strand),
    Triangle(Strand),
    Square(Strand),
}

impl Move {
    pub fn degree(&self) -> i64 {
        match self {
            Move::Birth | Move::Death(_) => -2,
            Move::SaddleLoops(..)
            | Move::SaddleLoopSplit(_)
            | Move::SaddleLoopEdge(..)
            | Move::SaddlePinch(_)
            | Move::SaddleEdges(..) => 2,
            Move::Zip(..) | Move::Unzip(_) | Move::Vtx(_) => 1,
            Move::Blowup(_) | Move::Blowdown(_) => 0,
            Move::Dot(_) => 2,
            Move::Triangle(_) => -2,
            Move::Square(_) => -4,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

/// A movie of web cobordisms. Movies that build state-space generators
/// start at the empty web; reflected movies may start anywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Movie {
    pub initial: Web,
    pub moves: Vec<Move>,
}

impl Movie {
    /// A movie from the empty web.
    pub fn new(moves: Vec<Move>) -> Self {
        Movie { initial: Web::empty(), moves }
    }

    pub fn from_web(initial: Web, moves: Vec<Move>) -> Self {
        Movie { initial, moves }
    }

    pub fn empty() -> Self {
        Movie::new(Vec::new())
    }

    pub fn degree(&self) -> i64 {
        self.moves.iter().map(|m| m.degree()).sum()
    }

    /// Append further moves (sites relative to this movie's final frame).
    pub fn then(&self, suffix: &[Move]) -> Movie {
        let mut moves = self.moves.clone();
        moves.extend_from_slice(suffix);
        Movie { initial: self.initial.clone(), moves }
    }

    pub fn final_web(&self) -> Result<Web, crate::eval::EvalError> {
        Ok(compile::Compiler::run(self)?.final_frame())
    }

    /// The time-reversed movie (reflection through the middle plane).
    pub fn reflect(&self) -> Result<Movie, crate::eval::EvalError> {
        compile::Compiler::run(self)?.reflected_movie()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrees_add() {
        let m = Movie::new(vec![Move::Birth, Move::Dot(Strand::Loop(0)), Move::Death(0)]);
        assert_eq!(m.degree(), -2 + 2 - 2);
    }
}
