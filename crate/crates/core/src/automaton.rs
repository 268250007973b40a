//! Deterministic weighted finite-state automata over symmetric alphabets.
//!
//! An automaton reads words letter by letter along its unique path; a word is
//! accepted when that path exists and ends in an accept state, and its weight
//! is the product of the traversed edge weights. The census of an automaton
//! is the total accepted weight per word length.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{parse_rational, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("state {state} has two outgoing transitions labelled `{letter}`")]
    NondeterministicTransition { state: usize, letter: String },
    #[error("transition {from} --{letter}--> {to} has non-positive weight")]
    NonpositiveWeight { from: usize, letter: String, to: usize },
    #[error("reference to state {state}, but the automaton has {states} states")]
    DanglingStateReference { state: usize, states: usize },
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("cannot parse weight `{0}`")]
    BadWeight(String),
    #[error("automaton must have at least one state")]
    NoStates,
}

/// Letters with a partial inverse pairing and optional primed copies.
///
/// Letters are referred to by index; the index order is the total order used
/// for short-lex comparisons. Undecorated letters come first (in declaration
/// order), primed letters after them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    inverse: Vec<Option<usize>>,
    base: Vec<usize>,
    primed: Vec<bool>,
}

impl Alphabet {
    /// Builds an alphabet from undecorated letters, inverse pairs and a map
    /// `primed name -> base name`.
    pub fn new<S: AsRef<str>>(
        letters: &[S],
        involution: &[(S, S)],
        primes: &BTreeMap<String, String>,
    ) -> Result<Self, AutomatonError> {
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        for l in letters {
            let l = l.as_ref();
            if primes.contains_key(l) {
                continue;
            }
            if l.is_empty() || index.insert(l.to_string(), names.len()).is_some() {
                return Err(AutomatonError::InvalidAlphabet(format!("duplicate or empty letter `{l}`")));
            }
            names.push(l.to_string());
        }
        let undecorated = names.len();
        let mut inverse = vec![None; undecorated];
        for (x, y) in involution {
            let (x, y) = (x.as_ref(), y.as_ref());
            let i = *index.get(x).ok_or_else(|| AutomatonError::UnknownLetter(x.to_string()))?;
            let j = *index.get(y).ok_or_else(|| AutomatonError::UnknownLetter(y.to_string()))?;
            if i == j {
                return Err(AutomatonError::InvalidAlphabet(format!("`{x}` paired with itself")));
            }
            if inverse[i].is_some() || inverse[j].is_some() {
                return Err(AutomatonError::InvalidAlphabet(format!("`{x}`/`{y}` paired twice")));
            }
            inverse[i] = Some(j);
            inverse[j] = Some(i);
        }
        let mut base: Vec<usize> = (0..undecorated).collect();
        let mut primed = vec![false; undecorated];
        for (p, b) in primes {
            let bi = *index
                .get(b)
                .filter(|&&bi| bi < undecorated)
                .ok_or_else(|| AutomatonError::InvalidAlphabet(format!("prime `{p}` maps to unknown `{b}`")))?;
            if p.is_empty() || index.insert(p.clone(), names.len()).is_some() {
                return Err(AutomatonError::InvalidAlphabet(format!("prime `{p}` clashes")));
            }
            names.push(p.clone());
            inverse.push(None);
            base.push(bi);
            primed.push(true);
        }
        Ok(Self { names, inverse, base, primed })
    }

    /// `a, A, b, B, …` for a free group of the given rank; uppercase is the
    /// inverse of lowercase.
    pub fn free_group(rank: usize) -> Self {
        assert!((1..=26).contains(&rank), "free group rank must be in 1..=26");
        let mut names = Vec::with_capacity(2 * rank);
        let mut inverse = Vec::with_capacity(2 * rank);
        for g in 0..rank {
            let c = (b'a' + g as u8) as char;
            names.push(c.to_string());
            names.push(c.to_ascii_uppercase().to_string());
            inverse.push(Some(2 * g + 1));
            inverse.push(Some(2 * g));
        }
        let n = names.len();
        Self { names, inverse, base: (0..n).collect(), primed: vec![false; n] }
    }

    /// Returns a copy with a primed version of `base_letter` and its index.
    /// If the primed letter already exists, the alphabet is returned as is.
    pub fn with_prime(&self, base_letter: usize) -> (Self, usize) {
        let b = self.base[base_letter];
        let name = format!("{}'", self.names[b]);
        if let Some(i) = self.index_of(&name) {
            return (self.clone(), i);
        }
        let mut out = self.clone();
        out.names.push(name);
        out.inverse.push(None);
        out.base.push(b);
        out.primed.push(true);
        let idx = out.names.len() - 1;
        (out, idx)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, letter: usize) -> &str {
        &self.names[letter]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn inverse(&self, letter: usize) -> Option<usize> {
        self.inverse[letter]
    }

    /// The undecorated letter a (possibly primed) letter stands for.
    pub fn base(&self, letter: usize) -> usize {
        self.base[letter]
    }

    pub fn is_primed(&self, letter: usize) -> bool {
        self.primed[letter]
    }

    /// True when `next` cancels `prev` once primes are projected away.
    pub fn cancels(&self, prev: usize, next: usize) -> bool {
        self.inverse[self.base[prev]] == Some(self.base[next])
    }

    /// Parses a whitespace-separated word such as `"a b A"`.
    pub fn parse_word(&self, text: &str) -> Result<Vec<usize>, AutomatonError> {
        text.split_whitespace()
            .map(|t| self.index_of(t).ok_or_else(|| AutomatonError::UnknownLetter(t.to_string())))
            .collect()
    }

    pub fn format_word(&self, word: &[usize]) -> String {
        word.iter().map(|&l| self.names[l].as_str()).collect::<Vec<_>>().join(" ")
    }
}

/// One labelled, weighted edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<W> {
    pub from: usize,
    pub letter: usize,
    pub to: usize,
    pub weight: W,
}

/// Deterministic automaton with positive edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAutomaton<W> {
    alphabet: Alphabet,
    start: usize,
    accepts: Vec<bool>,
    // per state: letter -> (target, weight)
    edges: Vec<BTreeMap<usize, (usize, W)>>,
}

/// Exact per-length and cumulative accepted weight.
#[derive(Debug, Clone, PartialEq)]
pub struct CensusTable<W> {
    pub per_length: Vec<W>,
    pub cumulative: Vec<W>,
}

impl<W: Scalar> CensusTable<W> {
    pub fn from_per_length(per_length: Vec<W>) -> Self {
        let mut acc = W::zero();
        let cumulative = per_length
            .iter()
            .map(|w| {
                acc = acc.clone() + w.clone();
                acc.clone()
            })
            .collect();
        Self { per_length, cumulative }
    }

    pub fn len(&self) -> usize {
        self.per_length.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_length.is_empty()
    }
}

impl<W: Scalar> WeightedAutomaton<W> {
    /// Validates and builds an automaton.
    pub fn new(
        alphabet: Alphabet,
        states: usize,
        start: usize,
        accepts: impl IntoIterator<Item = usize>,
        transitions: impl IntoIterator<Item = Transition<W>>,
    ) -> Result<Self, AutomatonError> {
        if states == 0 {
            return Err(AutomatonError::NoStates);
        }
        let dangling = |state: usize| AutomatonError::DanglingStateReference { state, states };
        if start >= states {
            return Err(dangling(start));
        }
        let mut accept_flags = vec![false; states];
        for a in accepts {
            *accept_flags.get_mut(a).ok_or_else(|| dangling(a))? = true;
        }
        let mut edges = vec![BTreeMap::new(); states];
        for t in transitions {
            if t.from >= states {
                return Err(dangling(t.from));
            }
            if t.to >= states {
                return Err(dangling(t.to));
            }
            if t.letter >= alphabet.len() {
                return Err(AutomatonError::UnknownLetter(format!("#{}", t.letter)));
            }
            if !t.weight.is_positive() {
                return Err(AutomatonError::NonpositiveWeight {
                    from: t.from,
                    letter: alphabet.name(t.letter).to_string(),
                    to: t.to,
                });
            }
            if edges[t.from].insert(t.letter, (t.to, t.weight)).is_some() {
                return Err(AutomatonError::NondeterministicTransition {
                    state: t.from,
                    letter: alphabet.name(t.letter).to_string(),
                });
            }
        }
        Ok(Self { alphabet, start, accepts: accept_flags, edges })
    }

    /// The distinguished automaton with empty language: a lone, rejecting start.
    pub fn empty(alphabet: Alphabet) -> Self {
        Self { alphabet, start: 0, accepts: vec![false], edges: vec![BTreeMap::new()] }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.edges.len()
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn is_accept(&self, state: usize) -> bool {
        self.accepts[state]
    }

    pub fn accept_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.accepts.iter().enumerate().filter(|(_, &a)| a).map(|(i, _)| i)
    }

    /// Outgoing edges of `state` as `(letter, target, weight)`, by letter.
    pub fn out_edges(&self, state: usize) -> impl Iterator<Item = (usize, usize, &W)> + '_ {
        self.edges[state].iter().map(|(&l, (t, w))| (l, *t, w))
    }

    pub fn step(&self, state: usize, letter: usize) -> Option<(usize, &W)> {
        self.edges[state].get(&letter).map(|(t, w)| (*t, w))
    }

    pub fn transitions(&self) -> impl Iterator<Item = Transition<W>> + '_ {
        self.edges.iter().enumerate().flat_map(|(from, m)| {
            m.iter().map(move |(&letter, (to, w))| Transition { from, letter, to: *to, weight: w.clone() })
        })
    }

    pub fn num_transitions(&self) -> usize {
        self.edges.iter().map(BTreeMap::len).sum()
    }

    /// True if no word is accepted.
    pub fn is_empty_language(&self) -> bool {
        let live = self.coreachable();
        !live[self.start]
    }

    /// Follows `word` from the start; returns the final state and path weight.
    pub fn read(&self, word: &[usize]) -> Option<(usize, W)> {
        let mut state = self.start;
        let mut weight = W::one();
        for &l in word {
            let (next, w) = self.step(state, l)?;
            weight = weight * w.clone();
            state = next;
        }
        Some((state, weight))
    }

    /// `Some(weight)` if `word` is accepted, `None` otherwise.
    pub fn accepts(&self, word: &[usize]) -> Option<W> {
        self.read(word).filter(|(s, _)| self.accepts[*s]).map(|(_, w)| w)
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::from([self.start]);
        seen[self.start] = true;
        while let Some(s) = queue.pop_front() {
            for (_, t, _) in self.out_edges(s) {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    fn coreachable(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut rev = vec![Vec::new(); n];
        for (s, m) in self.edges.iter().enumerate() {
            for (t, _) in m.values() {
                rev[*t].push(s);
            }
        }
        let mut seen = self.accepts.clone();
        let mut queue: VecDeque<usize> = self.accept_states().collect();
        while let Some(s) = queue.pop_front() {
            for &p in &rev[s] {
                if !seen[p] {
                    seen[p] = true;
                    queue.push_back(p);
                }
            }
        }
        seen
    }

    /// Removes every state that is not on a start-to-accept path. States keep
    /// their relative order. An empty language yields [`Self::empty`].
    pub fn prune(&self) -> Self {
        let fwd = self.reachable();
        let bwd = self.coreachable();
        let keep: Vec<bool> = fwd.iter().zip(&bwd).map(|(a, b)| *a && *b).collect();
        if !keep[self.start] {
            return Self::empty(self.alphabet.clone());
        }
        let mut renumber = vec![usize::MAX; self.num_states()];
        let mut next = 0;
        for (i, &k) in keep.iter().enumerate() {
            if k {
                renumber[i] = next;
                next += 1;
            }
        }
        let mut edges = vec![BTreeMap::new(); next];
        let mut accepts = vec![false; next];
        for (s, m) in self.edges.iter().enumerate() {
            if !keep[s] {
                continue;
            }
            accepts[renumber[s]] = self.accepts[s];
            for (&l, (t, w)) in m {
                if keep[*t] {
                    edges[renumber[s]].insert(l, (renumber[*t], w.clone()));
                }
            }
        }
        Self { alphabet: self.alphabet.clone(), start: renumber[self.start], accepts, edges }
    }

    /// Exact accepted weight for every length `0..=n_max`, by pushing the
    /// state-weight vector through the transitions `n_max` times.
    pub fn census(&self, n_max: usize) -> CensusTable<W> {
        let n = self.num_states();
        let mut vec = vec![W::zero(); n];
        vec[self.start] = W::one();
        let mut per_length = Vec::with_capacity(n_max + 1);
        for len in 0..=n_max {
            let total = self
                .accept_states()
                .fold(W::zero(), |acc, s| acc + vec[s].clone());
            per_length.push(total);
            if len == n_max {
                break;
            }
            let mut next = vec![W::zero(); n];
            for (s, m) in self.edges.iter().enumerate() {
                if vec[s].is_zero() {
                    continue;
                }
                for (t, w) in m.values() {
                    next[*t] = next[*t].clone() + vec[s].clone() * w.clone();
                }
            }
            vec = next;
        }
        CensusTable::from_per_length(per_length)
    }

    /// All accepted words of length at most `max_len` with their weights, in
    /// short-lex order.
    pub fn accepted_words(&self, max_len: usize) -> Vec<(Vec<usize>, W)> {
        let mut layer = vec![(Vec::new(), self.start, W::one())];
        let mut out = Vec::new();
        for len in 0..=max_len {
            for (word, s, w) in &layer {
                if self.accepts[*s] {
                    out.push((word.clone(), w.clone()));
                }
            }
            if len == max_len {
                break;
            }
            let mut next = Vec::new();
            for (word, s, w) in &layer {
                for (l, t, ew) in self.out_edges(*s) {
                    let mut wd = word.clone();
                    wd.push(l);
                    next.push((wd, t, w.clone() * ew.clone()));
                }
            }
            layer = next;
        }
        out
    }

    /// Product with last-letter memory that rejects any word containing a
    /// cancelling pair `x x⁻¹` (primes projected to their base letters).
    /// The result is pruned.
    pub fn reduced_word_product(&self) -> Self {
        let mut index: HashMap<(usize, Option<usize>), usize> = HashMap::new();
        let mut order = vec![(self.start, None)];
        index.insert((self.start, None), 0);
        let mut transitions = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let (q, last) = order[i];
            for (l, t, w) in self.out_edges(q) {
                if last.is_some_and(|p| self.alphabet.cancels(p, l)) {
                    continue;
                }
                let key = (t, Some(l));
                let to = *index.entry(key).or_insert_with(|| {
                    order.push(key);
                    order.len() - 1
                });
                transitions.push(Transition { from: i, letter: l, to, weight: w.clone() });
            }
            i += 1;
        }
        let accepts: Vec<usize> = order
            .iter()
            .enumerate()
            .filter(|(_, (q, _))| self.accepts[*q])
            .map(|(i, _)| i)
            .collect();
        Self::new(self.alphabet.clone(), order.len(), 0, accepts, transitions)
            .expect("product of a valid automaton is valid")
            .prune()
    }
}

/// Serialized automaton (see README for the format).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomatonFile {
    pub alphabet: Vec<String>,
    #[serde(default)]
    pub involution: Vec<(String, String)>,
    #[serde(default)]
    pub primes: BTreeMap<String, String>,
    pub states: usize,
    pub start: usize,
    pub accepts: Vec<usize>,
    pub transitions: Vec<TransitionFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionFile {
    pub from: usize,
    pub label: String,
    pub to: usize,
    pub weight: String,
}

impl WeightedAutomaton<BigRational> {
    pub fn from_file(file: &AutomatonFile) -> Result<Self, AutomatonError> {
        let alphabet = Alphabet::new(&file.alphabet, &file.involution, &file.primes)?;
        let transitions = file
            .transitions
            .iter()
            .map(|t| {
                let letter = alphabet
                    .index_of(&t.label)
                    .ok_or_else(|| AutomatonError::UnknownLetter(t.label.clone()))?;
                let weight = parse_rational(&t.weight)
                    .filter(|_| !t.weight.contains(['.', 'e', 'E']))
                    .ok_or_else(|| AutomatonError::BadWeight(t.weight.clone()))?;
                Ok(Transition { from: t.from, letter, to: t.to, weight })
            })
            .collect::<Result<Vec<_>, AutomatonError>>()?;
        Self::new(alphabet, file.states, file.start, file.accepts.iter().copied(), transitions)
    }

    /// Canonical file form: undecorated letters in alphabet order, inverse
    /// pairs listed once, transitions sorted by `(from, letter)`.
    pub fn to_file(&self) -> AutomatonFile {
        let a = &self.alphabet;
        let undecorated: Vec<usize> = (0..a.len()).filter(|&l| !a.is_primed(l)).collect();
        let involution = undecorated
            .iter()
            .filter_map(|&l| a.inverse(l).filter(|&m| m > l).map(|m| (a.name(l).to_string(), a.name(m).to_string())))
            .collect();
        let primes = (0..a.len())
            .filter(|&l| a.is_primed(l))
            .map(|l| (a.name(l).to_string(), a.name(a.base(l)).to_string()))
            .collect();
        AutomatonFile {
            alphabet: undecorated.iter().map(|&l| a.name(l).to_string()).collect(),
            involution,
            primes,
            states: self.num_states(),
            start: self.start,
            accepts: self.accept_states().collect(),
            transitions: self
                .transitions()
                .map(|t| TransitionFile {
                    from: t.from,
                    label: a.name(t.letter).to_string(),
                    to: t.to,
                    weight: t.weight.to_string(),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, crate::Error> {
        let file: AutomatonFile = serde_json::from_str(text)?;
        Ok(Self::from_file(&file)?)
    }

    /// Canonical compact JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("automaton file serializes")
    }
}
