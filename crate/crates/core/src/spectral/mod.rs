//! Perron–Frobenius analysis of non-negative matrices: condensation into
//! strongly connected blocks, periods, certified spectral-radius enclosures,
//! growth rates of automata, strict domination and the census fit.

mod enclosure;
mod matrix;
mod polyfit;
mod scc;

use serde_json::{json, Value};
use thiserror::Error;

pub use enclosure::{pf_enclosure, spectral_radius, SpectralAnalysis, SpectralEnclosure, MAX_ITERATIONS};
pub use matrix::TransitionMatrix;
pub use polyfit::{polyexp_fit, polyexp_fit_window, PolyFitReport, ResidueFit};
pub use scc::{is_irreducible, period, scc_condense, SccDecomposition};

use crate::automaton::{CensusTable, WeightedAutomaton};
use crate::scalar::{partial_max, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectralError {
    #[error("block has no cycle")]
    NoCycle,
    #[error("the [0] block has spectral radius 0")]
    ZeroBlock,
    #[error("matrix is not irreducible")]
    NotIrreducible,
    #[error("tolerance must be positive")]
    BadTolerance,
    #[error("matrix entry ({row}, {col}) is negative")]
    NegativeEntry { row: usize, col: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrices are not entrywise comparable")]
    NotComparable,
    #[error("enclosures still overlap after refinement: upper {smaller_upper} vs lower {larger_lower}")]
    SeparationFailed { smaller_upper: String, larger_lower: String },
    #[error("language is empty")]
    EmptyLanguage,
    #[error("census has {have} terms, need {need}")]
    InsufficientData { have: usize, need: usize },
    #[error("spectral radius is zero; nothing to normalize by")]
    ZeroRadius,
    #[error("every residue class fits the zero polynomial")]
    VanishingFit,
    #[error("witness vector could not be represented")]
    NumericFailure,
}

/// Per-block summary carried by a [`GrowthReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSummary<W> {
    pub states: Vec<usize>,
    pub lower: W,
    pub upper: W,
    pub period: usize,
}

/// Growth rate `λ = max(ρ, 1)` of an automaton's language.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport<W> {
    pub rho: SpectralEnclosure<W>,
    pub lambda_lower: W,
    pub lambda_upper: W,
    pub census_used: CensusTable<W>,
    pub polyfit: Option<PolyFitReport>,
    pub blocks: Vec<BlockSummary<W>>,
    pub maximal_blocks: Vec<usize>,
}

impl<W: Scalar> GrowthReport<W> {
    pub fn lambda(&self) -> SpectralEnclosure<W> {
        SpectralEnclosure {
            lower: self.lambda_lower.clone(),
            upper: self.lambda_upper.clone(),
            witness: Vec::new(),
            ..self.rho.clone()
        }
    }

    /// JSON report: `rho`, `period`, `lambda`, `blocks`, `polyfit`.
    pub fn to_json(&self) -> Value {
        json!({
            "rho": interval_json(&self.rho.lower, &self.rho.upper),
            "period": self.rho.period,
            "lambda": interval_json(&self.lambda_lower, &self.lambda_upper),
            "blocks": self.blocks.iter().map(|b| json!({
                "states": b.states,
                "lower": b.lower.to_string(),
                "upper": b.upper.to_string(),
                "period": b.period,
            })).collect::<Vec<_>>(),
            "polyfit": self.polyfit.as_ref().map(|p| p.classes.iter().map(|c| json!({
                "residue": c.residue,
                "degree": c.degree,
                "leading_coefficient": c.leading_coefficient,
                "decay_factor": c.decay_factor,
                "decaying": c.decaying,
            })).collect::<Vec<_>>()).unwrap_or_default(),
        })
    }
}

pub(crate) fn interval_json<W: Scalar>(lower: &W, upper: &W) -> Value {
    json!({ "lower": lower.to_string(), "upper": upper.to_string() })
}

/// Certified growth rate of a nonempty language.
pub fn growth_rate<W: Scalar>(g: &WeightedAutomaton<W>, tol: &W) -> Result<GrowthReport<W>, SpectralError> {
    if g.is_empty_language() {
        return Err(SpectralError::EmptyLanguage);
    }
    let a = TransitionMatrix::from_automaton(g);
    let analysis = spectral_radius(&a, tol)?;
    let rho = analysis.enclosure.clone();
    let n_census = (8 * rho.period).clamp(32, 256);
    let census_used = g.census(n_census);
    let polyfit = if rho.lower.is_positive() { polyexp_fit(&census_used, &rho).ok() } else { None };
    let blocks = analysis
        .decomposition
        .blocks
        .iter()
        .zip(&analysis.block_enclosures)
        .map(|(states, e)| BlockSummary {
            states: states.clone(),
            lower: e.lower.clone(),
            upper: e.upper.clone(),
            period: e.period,
        })
        .collect();
    Ok(GrowthReport {
        lambda_lower: partial_max(&rho.lower, &W::one()),
        lambda_upper: partial_max(&rho.upper, &W::one()),
        rho,
        census_used,
        polyfit,
        blocks,
        maximal_blocks: analysis.decomposition.maximal_blocks,
    })
}

/// Outcome of comparing `ρ_A` and `ρ_B` for `A ≤ B`.
#[derive(Debug, Clone, PartialEq)]
pub enum Domination<W> {
    Equal,
    /// Certified `ρ_A ≤ smaller.upper < larger.lower ≤ ρ_B`.
    StrictlyLess { smaller: SpectralEnclosure<W>, larger: SpectralEnclosure<W> },
    /// `B` is reducible, so only `ρ_A ≤ ρ_B` is known.
    LessOrEqual { smaller: SpectralEnclosure<W>, larger: SpectralEnclosure<W> },
}

const REFINEMENT_ROUNDS: usize = 3;

/// Strict domination for `A ≤ B`, `A ≠ B`, `B` irreducible.
pub fn dominates<W: Scalar>(
    a: &TransitionMatrix<W>,
    b: &TransitionMatrix<W>,
    tol: &W,
) -> Result<Domination<W>, SpectralError> {
    if a.dim() != b.dim() {
        return Err(SpectralError::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    if !a.entrywise_le(b) {
        return Err(SpectralError::NotComparable);
    }
    if a == b {
        return Ok(Domination::Equal);
    }
    if !is_irreducible(b) {
        let smaller = spectral_radius(a, tol)?.enclosure;
        let larger = spectral_radius(b, tol)?.enclosure;
        return Ok(Domination::LessOrEqual { smaller, larger });
    }
    let mut t = tol.clone();
    let shrink = W::from_ratio(1, 1000);
    let mut last = None;
    for _ in 0..REFINEMENT_ROUNDS {
        let smaller = spectral_radius(a, &t)?.enclosure;
        let larger = pf_enclosure(b, &t)?;
        if smaller.upper < larger.lower {
            return Ok(Domination::StrictlyLess { smaller, larger });
        }
        last = Some((smaller.upper, larger.lower));
        t = t * shrink.clone();
    }
    let (su, ll) = last.expect("at least one refinement round");
    Err(SpectralError::SeparationFailed { smaller_upper: su.to_string(), larger_lower: ll.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Alphabet, Rational, Transition};

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn tol() -> Rational {
        q(1, 1_000_000_000)
    }

    fn dense(rows: &[&[i64]]) -> TransitionMatrix<Rational> {
        TransitionMatrix::from_dense(rows.iter().map(|r| r.iter().map(|&x| q(x, 1)).collect()).collect()).unwrap()
    }

    #[test]
    fn domination_cases() {
        assert_eq!(dominates(&dense(&[&[2]]), &dense(&[&[2]]), &tol()), Ok(Domination::Equal));
        let b = dense(&[&[1, 1], &[1, 1]]);
        let a = dense(&[&[1, 1], &[1, 0]]);
        match dominates(&a, &b, &tol()).unwrap() {
            Domination::StrictlyLess { smaller, larger } => {
                assert!(smaller.upper < q(17, 10));
                assert_eq!(larger.lower, q(2, 1));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(dominates(&b, &a, &tol()), Err(SpectralError::NotComparable));
        let red = dense(&[&[1, 1], &[0, 1]]);
        assert!(matches!(dominates(&dense(&[&[1, 0], &[0, 1]]), &red, &tol()), Ok(Domination::LessOrEqual { .. })));
    }

    #[test]
    fn finite_language_has_unit_growth() {
        let alpha = Alphabet::free_group(1);
        let g = WeightedAutomaton::new(
            alpha,
            3,
            0,
            [0, 1, 2],
            [
                Transition { from: 0, letter: 0, to: 1, weight: q(1, 1) },
                Transition { from: 1, letter: 0, to: 2, weight: q(1, 1) },
            ],
        )
        .unwrap();
        let r = growth_rate(&g, &tol()).unwrap();
        assert_eq!((r.rho.lower.clone(), r.rho.upper.clone()), (q(0, 1), q(0, 1)));
        assert_eq!((r.lambda_lower.clone(), r.lambda_upper.clone()), (q(1, 1), q(1, 1)));
        assert!(r.polyfit.is_none());
    }

    #[test]
    fn empty_language_is_an_error() {
        let g = WeightedAutomaton::<Rational>::empty(Alphabet::free_group(1));
        assert_eq!(growth_rate(&g, &tol()), Err(SpectralError::EmptyLanguage));
    }
}
