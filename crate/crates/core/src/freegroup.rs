//! Words in the free group `F_r` on generators `a, b, c, …`.
//!
//! Text form writes one character per letter with uppercase for inverses
//! (`A = a⁻¹`); letters may be separated by whitespace. The global letter
//! order is `a < A < b < B < …`, which is also the index order of
//! [`Alphabet::free_group`].

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::automaton::{Alphabet, Transition, WeightedAutomaton};
use crate::{Automaton, Census, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FreeGroupError {
    #[error("`{0}` is not a generator letter")]
    BadLetter(char),
    #[error("letter `{letter}` is outside rank {rank}")]
    RankExceeded { letter: char, rank: usize },
    #[error("word `{0}` is not freely reduced")]
    NotReduced(String),
    #[error("enumeration and closed form disagree at length {0}")]
    OracleMismatch(usize),
}

/// Generator or inverse generator; index `2g` is `g`, `2g + 1` is `g⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u8);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        assert!(generator < 26);
        Letter((2 * generator + usize::from(inverse)) as u8)
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < 52);
        Letter(index as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn generator(self) -> usize {
        (self.0 / 2) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 % 2 == 1
    }

    pub fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }

    pub fn from_char(c: char) -> Result<Self, FreeGroupError> {
        if c.is_ascii_lowercase() {
            Ok(Letter::new((c as u8 - b'a') as usize, false))
        } else if c.is_ascii_uppercase() {
            Ok(Letter::new((c as u8 - b'A') as usize, true))
        } else {
            Err(FreeGroupError::BadLetter(c))
        }
    }

    pub fn to_char(self) -> char {
        let c = (b'a' + self.generator() as u8) as char;
        if self.is_inverse() {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }

    /// All `2r` letters in order.
    pub fn all(rank: usize) -> impl Iterator<Item = Letter> {
        (0..2 * rank).map(Letter::from_index)
    }
}

/// Parses letters, ignoring whitespace; no reduction is performed.
pub fn parse_letters(text: &str) -> Result<Vec<Letter>, FreeGroupError> {
    text.chars().filter(|c| !c.is_whitespace()).map(Letter::from_char).collect()
}

/// Freely reduced word. Ordered short-lex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ReducedWord(Vec<Letter>);

impl ReducedWord {
    pub fn identity() -> Self {
        Self(Vec::new())
    }

    /// Freely reduces any sequence of letters.
    pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut stack: Vec<Letter> = Vec::new();
        for l in letters {
            if stack.last() == Some(&l.inverse()) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Self(stack)
    }

    /// Accepts only text that is already reduced.
    pub fn parse(text: &str) -> Result<Self, FreeGroupError> {
        let letters = parse_letters(text)?;
        let w = Self::reduce(letters.iter().copied());
        if w.len() != letters.len() {
            return Err(FreeGroupError::NotReduced(text.trim().to_string()));
        }
        Ok(w)
    }

    /// Parses and reduces.
    pub fn parse_reducing(text: &str) -> Result<Self, FreeGroupError> {
        Ok(Self::reduce(parse_letters(text)?))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn concat(&self, other: &Self) -> Self {
        Self::reduce(self.0.iter().chain(&other.0).copied())
    }

    /// Highest generator index used plus one.
    pub fn rank_needed(&self) -> usize {
        self.0.iter().map(|l| l.generator() + 1).max().unwrap_or(0)
    }

    pub fn check_rank(&self, rank: usize) -> Result<(), FreeGroupError> {
        match self.0.iter().find(|l| l.generator() >= rank) {
            Some(l) => Err(FreeGroupError::RankExceeded { letter: l.to_char(), rank }),
            None => Ok(()),
        }
    }

    /// Letter indices in [`Alphabet::free_group`].
    pub fn indices(&self) -> Vec<usize> {
        self.0.iter().map(|l| l.index()).collect()
    }

    /// Compact text without separators, e.g. `"abA"`.
    pub fn compact(&self) -> String {
        self.0.iter().map(|l| l.to_char()).collect()
    }
}

impl From<ReducedWord> for Vec<Letter> {
    fn from(w: ReducedWord) -> Self {
        w.0
    }
}

impl Ord for ReducedWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ReducedWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Space-separated letters, e.g. `"a b A"`.
impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_char().to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Short-lex geodesic automaton of `F_r`: a start state plus one state per
/// last letter read. Geodesics in the tree are exactly the reduced words, so
/// every state accepts.
pub fn shortlex_automaton(rank: usize) -> Automaton {
    let alphabet = Alphabet::free_group(rank);
    let one = Rational::from_integer(1.into());
    let mut transitions = Vec::new();
    for x in Letter::all(rank) {
        transitions.push(Transition { from: 0, letter: x.index(), to: 1 + x.index(), weight: one.clone() });
        for y in Letter::all(rank) {
            if y != x.inverse() {
                transitions.push(Transition { from: 1 + x.index(), letter: y.index(), to: 1 + y.index(), weight: one.clone() });
            }
        }
    }
    let states = 2 * rank + 1;
    WeightedAutomaton::new(alphabet, states, 0, 0..states, transitions).expect("short-lex automaton is valid")
}

/// Reduced words of length `≤ max_len`, in short-lex order.
pub fn enumerate_reduced(rank: usize, max_len: usize) -> Vec<ReducedWord> {
    let mut out = vec![ReducedWord::identity()];
    let mut layer = vec![Vec::<Letter>::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for x in Letter::all(rank) {
                if w.last() != Some(&x.inverse()) {
                    let mut v = w.clone();
                    v.push(x);
                    next.push(v);
                }
            }
        }
        out.extend(next.iter().cloned().map(ReducedWord));
        layer = next;
    }
    out
}

/// Number of reduced words of each length `0..=n`, counted by walking the
/// Cayley tree.
fn sphere_counts_by_enumeration(rank: usize, n: usize) -> Vec<u64> {
    fn walk(rank: usize, last: Option<Letter>, depth: usize, n: usize, counts: &mut [u64]) {
        counts[depth] += 1;
        if depth == n {
            return;
        }
        for x in Letter::all(rank) {
            if last != Some(x.inverse()) {
                walk(rank, Some(x), depth + 1, n, counts);
            }
        }
    }
    let mut counts = vec![0u64; n + 1];
    walk(rank, None, 0, n, &mut counts);
    counts
}

/// `|S(k)| = 2r (2r−1)^{k−1}` for `k ≥ 1`.
pub fn sphere_size(rank: usize, k: usize) -> BigInt {
    if k == 0 {
        return BigInt::from(1);
    }
    BigInt::from(2 * rank) * num_traits::pow(BigInt::from(2 * rank - 1), k - 1)
}

/// `f_{F_r}(n)`, closed form.
pub fn ball_size(rank: usize, n: usize) -> BigInt {
    (0..=n).map(|k| sphere_size(rank, k)).sum()
}

/// Growth function of `F_r` up to radius `n`, by tree enumeration,
/// cross-checked against the closed form.
pub fn ball_census(rank: usize, n: usize) -> Result<Census, FreeGroupError> {
    let counts = sphere_counts_by_enumeration(rank, n);
    for (k, &c) in counts.iter().enumerate() {
        if BigInt::from(c) != sphere_size(rank, k) {
            return Err(FreeGroupError::OracleMismatch(k));
        }
    }
    Ok(Census::from_per_length(counts.into_iter().map(|c| Rational::from_integer(c.into())).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> ReducedWord {
        ReducedWord::parse_reducing(s).unwrap()
    }

    /// Repeatedly deletes the leftmost adjacent cancelling pair.
    fn pairwise_cancel(mut v: Vec<Letter>) -> Vec<Letter> {
        while let Some(i) = v.windows(2).position(|p| p[0] == p[1].inverse()) {
            v.drain(i..i + 2);
        }
        v
    }

    #[test]
    fn reduction_examples() {
        assert_eq!(w("a b B a").compact(), "aa");
        assert!(w("a A").is_empty());
        let raw = parse_letters("b A a B b").unwrap();
        let expected = pairwise_cancel(raw.clone());
        assert_eq!(ReducedWord::reduce(raw).letters(), &expected[..]);
        assert_eq!(w("b A a B b").compact(), "b");
    }

    #[test]
    fn parse_rejects_unreduced_and_bad_letters() {
        assert_eq!(ReducedWord::parse("aA"), Err(FreeGroupError::NotReduced("aA".into())));
        assert_eq!(ReducedWord::parse("a1"), Err(FreeGroupError::BadLetter('1')));
        assert!(w("c").check_rank(2).is_err());
    }

    #[test]
    fn shortlex_order() {
        let words = enumerate_reduced(2, 2);
        let mut sorted = words.clone();
        sorted.sort();
        assert_eq!(words, sorted);
        assert_eq!(words[1].compact(), "a");
        assert_eq!(words[2].compact(), "A");
        assert_eq!(words[3].compact(), "b");
        assert_eq!(words.len(), 17);
    }

    #[test]
    fn shortlex_automaton_censuses() {
        let q = |n: i64| Rational::from_integer(n.into());
        let g2 = shortlex_automaton(2);
        assert_eq!(g2.num_states(), 5);
        assert_eq!(g2.census(3).per_length, [1, 4, 12, 36].map(q).to_vec());
        assert_eq!(g2.census(3).cumulative[3], q(53));
        let g1 = shortlex_automaton(1);
        assert_eq!(g1.num_states(), 3);
        assert_eq!(g1.census(4).per_length, [1, 2, 2, 2, 2].map(q).to_vec());
        assert_eq!(shortlex_automaton(3).census(3).per_length, [1, 6, 30, 150].map(q).to_vec());
    }

    #[test]
    fn acceptance_on_shortlex() {
        let g = shortlex_automaton(2);
        assert_eq!(g.accepts(&w("a b").indices()), Some(Rational::from_integer(1.into())));
        assert_eq!(g.accepts(&[0, 1]), None);
        assert!(g.accepts(&[]).is_some());
    }

    #[test]
    fn ball_sizes() {
        let q = |n: i64| Rational::from_integer(n.into());
        assert_eq!(ball_census(2, 3).unwrap().cumulative[3], q(53));
        assert_eq!(ball_census(1, 5).unwrap().cumulative[5], q(11));
        assert_eq!(ball_census(2, 6).unwrap().cumulative[6], q(1457));
        assert_eq!(ball_size(2, 6), BigInt::from(2 * 729 - 1));
    }

    #[test]
    fn enumeration_agrees_with_closed_form() {
        for r in 1..=3 {
            for n in 0..=8 {
                assert_eq!(
                    BigInt::from(enumerate_reduced(r, n).len()),
                    ball_size(r, n),
                    "rank {r}, radius {n}"
                );
            }
        }
    }
}
