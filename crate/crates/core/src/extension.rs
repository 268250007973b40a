//! The monoid extension `Γ_M` of a subgroup automaton and the certified
//! strict inequality `λ_H < λ_G` for infinite-index subgroups of `F_r`.
//!
//! `Γ_M` adds, for each accept state of `Γ_H`, an arc spelling a free-factor
//! element `g` back to the start state. Its first letter is primed so the
//! result stays deterministic. `Γ_H` is a proper subgraph of the strongly
//! connected `Γ_M`, which gives `ρ_H < ρ_M`; the language of `Γ_M` injects
//! into `F_r`, which gives `ρ_M ≤ 2r − 1`.

use std::collections::HashMap;

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::automaton::{Transition, WeightedAutomaton};
use crate::freegroup::{ball_size, Letter, ReducedWord};
use crate::spectral::{
    dominates, growth_rate, interval_json, pf_enclosure, Domination, SpectralEnclosure, SpectralError,
    TransitionMatrix,
};
use crate::stallings::{
    construct_free_factor_element, find_free_factor_element, free_product_certificate, subgroup_automaton,
    StallingsError, SubgroupRecord,
};
use crate::{Automaton, Rational, Scalar};

/// Longest candidate tried by the short-lex search before falling back to
/// the explicit construction.
pub const SEARCH_MAX_LEN: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtensionError {
    #[error("automaton already uses the primed letter `{0}`")]
    DeterminismClash(String),
    #[error("connector element must be nonempty")]
    EmptyConnector,
    #[error("cofactor order must be at least 1")]
    BadCofactorOrder,
    #[error("automaton accepts nothing")]
    EmptyLanguage,
    #[error("connector letter `{0}` is not in the alphabet")]
    UnknownLetter(char),
    #[error("words `{first}` and `{second}` of Γ_M represent the same element")]
    InjectivityViolation { first: String, second: String },
    #[error("Γ_M has {count} words of length <= {n}, more than the {bound} elements of the ball")]
    BallExceeded { n: usize, count: usize, bound: String },
    #[error("subgroup has finite index")]
    FiniteIndexSubgroup,
    #[error("free group rank must be at least 2")]
    RankTooSmall,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Stallings(#[from] StallingsError),
}

/// Attaches to every accept state of `gh` an arc reading `g` back to the
/// start state. The arc's first edge carries the primed letter and weight
/// `1 / cofactor_order`; its other edges weigh 1. Arc states are numbered
/// after those of `gh`.
pub fn gamma_m(gh: &Automaton, g: &ReducedWord, cofactor_order: u64) -> Result<Automaton, ExtensionError> {
    if g.is_empty() {
        return Err(ExtensionError::EmptyConnector);
    }
    if cofactor_order == 0 {
        return Err(ExtensionError::BadCofactorOrder);
    }
    if gh.is_empty_language() {
        return Err(ExtensionError::EmptyLanguage);
    }
    let alphabet = gh.alphabet();
    let letter_index = |x: Letter| {
        alphabet.index_of(&x.to_char().to_string()).ok_or(ExtensionError::UnknownLetter(x.to_char()))
    };
    let letters: Vec<usize> = g.letters().iter().map(|&x| letter_index(x)).collect::<Result<_, _>>()?;
    let primed_name = format!("{}'", alphabet.name(alphabet.base(letters[0])));
    if alphabet.index_of(&primed_name).is_some() {
        return Err(ExtensionError::DeterminismClash(primed_name));
    }
    let (alphabet, primed) = alphabet.with_prime(letters[0]);

    let one = Rational::one();
    let first_weight = Rational::new(1.into(), cofactor_order.into());
    let mut transitions: Vec<Transition<Rational>> = gh.transitions().collect();
    let mut states = gh.num_states();
    for v in gh.accept_states() {
        let mut cur = v;
        for (i, &l) in letters.iter().enumerate() {
            let to = if i + 1 == letters.len() {
                gh.start()
            } else {
                states += 1;
                states - 1
            };
            let (letter, weight) = if i == 0 { (primed, first_weight.clone()) } else { (l, one.clone()) };
            transitions.push(Transition { from: cur, letter, to, weight });
            cur = to;
        }
    }
    Ok(WeightedAutomaton::new(alphabet, states, gh.start(), gh.accept_states(), transitions)
        .expect("arcs start with a fresh letter, so determinism is preserved"))
}

/// Outcome of enumerating `Γ_M` and mapping its words to `F_r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InjectivityReport {
    pub n: usize,
    /// Number of accepted words of each length `0..=n`.
    pub per_length: Vec<usize>,
    /// `f_M(k)` and `f_{F_r}(k)` for `k = 0..=n`.
    pub cumulative: Vec<(usize, usize)>,
}

/// Checks that accepted words of `gm` of length at most `n` map to distinct
/// elements of `F_r` (primes projected away, then freely reduced), and that
/// `f_M(k) ≤ f_{F_r}(k)` for every `k ≤ n`.
pub fn monoid_injectivity_check(
    gm: &Automaton,
    rec: &SubgroupRecord,
    g: &ReducedWord,
    n: usize,
) -> Result<InjectivityReport, ExtensionError> {
    let _ = g;
    let r = rec.free_rank();
    let alphabet = gm.alphabet();
    let mut seen: HashMap<ReducedWord, Vec<usize>> = HashMap::new();
    let mut per_length = vec![0usize; n + 1];
    for (word, _) in gm.accepted_words(n) {
        per_length[word.len()] += 1;
        let element = ReducedWord::reduce(word.iter().map(|&l| letter_of(alphabet.name(alphabet.base(l)))));
        if let Some(prev) = seen.insert(element, word.clone()) {
            return Err(ExtensionError::InjectivityViolation {
                first: alphabet.format_word(&prev),
                second: alphabet.format_word(&word),
            });
        }
    }
    let mut cumulative = Vec::with_capacity(n + 1);
    let mut total = 0usize;
    for (k, &c) in per_length.iter().enumerate() {
        total += c;
        let bound = ball_size(r, k);
        if num_bigint::BigInt::from(total) > bound {
            return Err(ExtensionError::BallExceeded { n: k, count: total, bound: bound.to_string() });
        }
        cumulative.push((total, usize::try_from(bound).unwrap_or(usize::MAX)));
    }
    Ok(InjectivityReport { n, per_length, cumulative })
}

fn letter_of(name: &str) -> Letter {
    let mut chars = name.chars();
    Letter::from_char(chars.next().expect("nonempty letter name")).expect("free group alphabet")
}

/// Certified comparison of `λ_H` with `λ_G = 2r − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthVerdict {
    pub lambda_h: SpectralEnclosure<Rational>,
    pub rho_h: SpectralEnclosure<Rational>,
    pub rho_m: SpectralEnclosure<Rational>,
    pub lambda_g: Rational,
    /// `λ_G − λ_H.upper`.
    pub margin: Rational,
    /// `λ_H.upper < ρ_M.lower` and `ρ_M.upper ≤ λ_G`, with `ρ_H < ρ_M`
    /// certified by domination.
    pub chain_certified: bool,
    /// `λ_H.upper < λ_G`.
    pub certified: bool,
    pub g_used: ReducedWord,
    /// Largest row sum of `Γ_M`, a cruder upper bound on `ρ_M`.
    pub row_sum_bound: Rational,
    pub gamma_m_states: usize,
    pub diagnostics: Vec<String>,
}

impl GrowthVerdict {
    pub fn to_json(&self) -> Value {
        json!({
            "lambda_H": interval_json(&self.lambda_h.lower, &self.lambda_h.upper),
            "rho_H": interval_json(&self.rho_h.lower, &self.rho_h.upper),
            "rho_M": interval_json(&self.rho_m.lower, &self.rho_m.upper),
            "lambda_G": self.lambda_g.to_string(),
            "g": self.g_used.compact(),
            "chain_certified": self.chain_certified,
            "certified": self.certified,
            "margin": self.margin.to_string(),
            "diagnostics": self.diagnostics,
        })
    }
}

/// Connector element: short-lex search, then the explicit construction.
pub fn connector(rec: &SubgroupRecord) -> Result<ReducedWord, StallingsError> {
    match find_free_factor_element(rec, SEARCH_MAX_LEN) {
        Err(StallingsError::NotFound { .. }) => construct_free_factor_element(rec),
        other => other,
    }
}

/// Certifies `λ_H < 2r − 1` for an infinite-index subgroup of `F_r`.
pub fn strict_growth_verdict(rec: &SubgroupRecord, r: usize, tol: &Rational) -> Result<GrowthVerdict, ExtensionError> {
    if r < 2 {
        return Err(ExtensionError::RankTooSmall);
    }
    if rec.finite_index {
        return Err(ExtensionError::FiniteIndexSubgroup);
    }
    let lambda_g = Rational::from_integer((2 * r as i64 - 1).into());
    let gh = subgroup_automaton(rec);
    let g = connector(rec)?;
    let mut diagnostics = Vec::new();
    if !free_product_certificate(rec, &g).is_certified() {
        diagnostics.push(format!("free product certificate failed for g = {}", g.compact()));
    }
    let gm = gamma_m(&gh, &g, 1)?;
    let lambda_h = growth_rate(&gh, tol)?.lambda();

    let a = TransitionMatrix::from_automaton(&gh).padded(gm.num_states());
    let b = TransitionMatrix::from_automaton(&gm);
    let row_sum_bound = b.row_sums().into_iter().fold(Rational::zero(), |m, s| if s > m { s } else { m });
    let (rho_h, rho_m, strict) = match dominates(&a, &b, tol) {
        Ok(Domination::StrictlyLess { smaller, larger }) => (smaller, larger, true),
        Ok(other) => {
            diagnostics.push(format!("domination returned {}", domination_name(&other)));
            let rho_h = crate::spectral::spectral_radius(&a, tol)?.enclosure;
            (rho_h, pf_enclosure(&b, tol)?, false)
        }
        Err(SpectralError::SeparationFailed { smaller_upper, larger_lower }) => {
            diagnostics.push(format!("rho_H < rho_M not separated: {smaller_upper} vs {larger_lower}"));
            let rho_h = crate::spectral::spectral_radius(&a, tol)?.enclosure;
            (rho_h, pf_enclosure(&b, tol)?, false)
        }
        Err(e) => return Err(e.into()),
    };
    if rho_m.upper > lambda_g {
        diagnostics.push(format!("rho_M upper bound {} exceeds lambda_G", rho_m.upper));
    }
    let chain_certified = strict && lambda_h.upper < rho_m.lower && rho_m.upper <= lambda_g;
    let certified = lambda_h.upper < lambda_g;
    if certified && !chain_certified {
        diagnostics.push("lambda_H < lambda_G certified directly from the enclosure".to_string());
    }
    Ok(GrowthVerdict {
        margin: lambda_g.clone() - lambda_h.upper.clone(),
        lambda_h,
        rho_h,
        rho_m,
        lambda_g,
        chain_certified,
        certified,
        g_used: g,
        row_sum_bound,
        gamma_m_states: gm.num_states(),
        diagnostics,
    })
}

fn domination_name<W: Scalar>(d: &Domination<W>) -> &'static str {
    match d {
        Domination::Equal => "Equal",
        Domination::StrictlyLess { .. } => "StrictlyLess",
        Domination::LessOrEqual { .. } => "LessOrEqual",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::scc_condense;
    use crate::stallings::build_core;

    fn w(s: &str) -> ReducedWord {
        ReducedWord::parse(s).unwrap()
    }

    fn rec(gens: &[&str]) -> SubgroupRecord {
        build_core(&gens.iter().map(|g| w(g)).collect::<Vec<_>>(), 2).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn tol() -> Rational {
        q(1, 1_000_000_000)
    }

    #[test]
    fn cyclic_subgroup_extension() {
        let h = rec(&["a"]);
        let gh = subgroup_automaton(&h);
        let gm = gamma_m(&gh, &w("b"), 1).unwrap();
        assert_eq!(gm.num_states(), gh.num_states());
        assert_eq!(gm.num_transitions(), gh.num_transitions() + gh.accept_states().count());
        assert_eq!(scc_condense(&TransitionMatrix::from_automaton(&gm)).len(), 1);
        // the start state loops through the arc too; a symmetric eigenvector
        // gives ρ² = 2ρ + 1
        let rho = pf_enclosure(&TransitionMatrix::from_automaton(&gm), &tol()).unwrap();
        let f = |x: &Rational| x * x - q(2, 1) * x - q(1, 1);
        assert!(f(&rho.lower) <= q(0, 1) && f(&rho.upper) >= q(0, 1));
    }

    #[test]
    fn trivial_subgroup_extension_is_a_cycle() {
        let gh = subgroup_automaton(&build_core(&[], 2).unwrap());
        assert_eq!(gh.num_states(), 1);
        let gm = gamma_m(&gh, &w("ab"), 1).unwrap();
        assert_eq!(gm.num_states(), 2);
        let rho = pf_enclosure(&TransitionMatrix::from_automaton(&gm), &tol()).unwrap();
        assert_eq!((rho.lower, rho.upper, rho.period), (q(1, 1), q(1, 1), 2));
    }

    #[test]
    fn cofactor_weight_on_first_arc_edge() {
        let gh = subgroup_automaton(&rec(&["a"]));
        let gm = gamma_m(&gh, &w("bb"), 3).unwrap();
        for (word, weight) in gm.accepted_words(6) {
            let primes = word.iter().filter(|&&l| gm.alphabet().is_primed(l)).count();
            assert_eq!(weight, num_traits::pow(q(1, 3), primes));
        }
    }

    #[test]
    fn primed_letter_clash() {
        let gh = subgroup_automaton(&rec(&["a"]));
        let gm = gamma_m(&gh, &w("b"), 1).unwrap();
        assert_eq!(gamma_m(&gm, &w("b"), 1), Err(ExtensionError::DeterminismClash("b'".into())));
        assert_eq!(gamma_m(&gh, &ReducedWord::identity(), 1), Err(ExtensionError::EmptyConnector));
    }

    #[test]
    fn injectivity_holds_for_certified_connector() {
        let h = rec(&["a"]);
        let gm = gamma_m(&subgroup_automaton(&h), &w("b"), 1).unwrap();
        let report = monoid_injectivity_check(&gm, &h, &w("b"), 4).unwrap();
        assert_eq!(report.cumulative[4].1, 161);
        assert!(report.cumulative.iter().all(|(m, g)| m <= g));

        let t = build_core(&[], 2).unwrap();
        let gm = gamma_m(&subgroup_automaton(&t), &w("a"), 1).unwrap();
        let report = monoid_injectivity_check(&gm, &t, &w("a"), 5).unwrap();
        assert_eq!(report.per_length, vec![1; 6]);
    }

    #[test]
    fn injectivity_fails_for_commensurable_connector() {
        let h = rec(&["a"]);
        let gm = gamma_m(&subgroup_automaton(&h), &w("aa"), 1).unwrap();
        assert!(matches!(
            monoid_injectivity_check(&gm, &h, &w("aa"), 3),
            Err(ExtensionError::InjectivityViolation { .. })
        ));
    }

    #[test]
    fn verdict_for_cyclic_subgroup() {
        let v = strict_growth_verdict(&rec(&["a"]), 2, &tol()).unwrap();
        assert_eq!((v.lambda_h.lower.clone(), v.lambda_h.upper.clone()), (q(1, 1), q(1, 1)));
        assert_eq!(v.lambda_g, q(3, 1));
        assert_eq!(v.g_used, w("b"));
        assert!(v.chain_certified && v.certified);
        assert!(v.margin >= q(2, 1) - tol());
        assert_eq!(v.to_json()["g"], "b");
    }

    #[test]
    fn verdict_for_index_infinite_rank_two() {
        let h = rec(&["aa", "b"]);
        assert!(!h.finite_index);
        let v = strict_growth_verdict(&h, 2, &tol()).unwrap();
        assert!(v.chain_certified);
        assert!(v.lambda_h.upper < q(3, 1));
        // growth ratio of the census agrees with the enclosure
        let census = subgroup_automaton(&h).census(26);
        let ratio = (census.per_length[26].clone() / census.per_length[24].clone()).to_f64().sqrt();
        assert!((ratio - v.lambda_h.lower.to_f64()).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn verdict_refuses_finite_index() {
        assert_eq!(strict_growth_verdict(&rec(&["a", "b"]), 2, &tol()), Err(ExtensionError::FiniteIndexSubgroup));
    }
}
