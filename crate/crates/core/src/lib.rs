//! Self-similar groups given by finite invertible transducers.

pub mod automaton;
pub mod ball;
pub mod chain;
pub mod checks;
pub mod elements;
pub mod expr;
pub mod quotient;
pub mod solver;
pub mod spectra;
pub mod stochastic;
pub mod thompson;
pub mod unrooted;
pub mod word;
pub mod wreath;
