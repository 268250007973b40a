//! Certified exponential growth rates for regular languages, free groups and
//! their finitely generated subgroups.
//!
//! The pipeline runs from weighted automata ([`automaton`]) through exact
//! Perron–Frobenius enclosures ([`spectral`]) to the free-group machinery:
//! short-lex automata ([`freegroup`]), Stallings core graphs ([`stallings`]),
//! the monoid extension that certifies `λ_H < λ_G` ([`extension`]), and the
//! large-girth cover experiment showing subgroup growth rates accumulate at
//! `λ_G` ([`covers`]).
//!
//! Core types are generic over [`Scalar`]; the aliases below fix the exact
//! rational instantiation used for certification.

pub mod automaton;
pub mod cli;
pub mod covers;
pub mod extension;
pub mod freegroup;
pub mod scalar;
pub mod spectral;
pub mod stallings;

use thiserror::Error;

pub use automaton::{Alphabet, AutomatonError, CensusTable, Transition, WeightedAutomaton};
pub use freegroup::{Letter, ReducedWord};
pub use scalar::Scalar;
pub use spectral::{SpectralEnclosure, TransitionMatrix};
pub use stallings::{CoreGraph, SubgroupRecord};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;

pub type Automaton = WeightedAutomaton<Rational>;
pub type Census = CensusTable<Rational>;
pub type Matrix = TransitionMatrix<Rational>;
pub type Enclosure = SpectralEnclosure<Rational>;
pub type GrowthReport = spectral::GrowthReport<Rational>;

pub type FloatAutomaton = WeightedAutomaton<f64>;
pub type FloatMatrix = TransitionMatrix<f64>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Spectral(#[from] spectral::SpectralError),
    #[error(transparent)]
    FreeGroup(#[from] freegroup::FreeGroupError),
    #[error(transparent)]
    Stallings(#[from] stallings::StallingsError),
    #[error(transparent)]
    Extension(#[from] extension::ExtensionError),
    #[error(transparent)]
    Covers(#[from] covers::CoversError),
    #[error("line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json { line: e.line(), column: e.column(), message: e.to_string() }
    }
}
