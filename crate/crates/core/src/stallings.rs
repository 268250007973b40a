//! Stallings core graphs of finitely generated subgroups of `F_r`.
//!
//! A subgroup is represented by the folded, trimmed graph obtained from a
//! wedge of loops reading its generators. Reduced words in the subgroup are
//! exactly the reduced loops at the basepoint, which makes membership, rank,
//! index and the subgroup language all directly computable.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton::{Alphabet, Transition, WeightedAutomaton};
use crate::freegroup::{enumerate_reduced, FreeGroupError, Letter, ReducedWord};
use crate::{Automaton, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StallingsError {
    #[error("subgroup has finite index; no free factor can be added")]
    FiniteIndexSubgroup,
    #[error("no certified free-product element of length <= {max_len}")]
    NotFound { max_len: usize },
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error(transparent)]
    Word(#[from] FreeGroupError),
    #[error("edge references vertex {vertex} of {vertices}")]
    BadVertex { vertex: usize, vertices: usize },
}

/// Folded based graph labelled by the generators of `F_r`. Vertex 0 is the
/// basepoint; vertices are numbered in BFS order from it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoreGraph {
    free_rank: usize,
    vertices: usize,
    /// `(origin, generator, terminus)`, sorted.
    edges: Vec<(usize, usize, usize)>,
    /// `adj[v][letter index]`.
    adj: Vec<Vec<Option<usize>>>,
}

/// Union-find folding of labelled graphs.
struct Folder {
    parent: Vec<usize>,
    adj: Vec<BTreeMap<Letter, usize>>,
    pending: Vec<(usize, usize)>,
}

impl Folder {
    fn new() -> Self {
        Self { parent: vec![0], adj: vec![BTreeMap::new()], pending: Vec::new() }
    }

    fn add_vertex(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.adj.push(BTreeMap::new());
        self.parent.len() - 1
    }

    fn find(&mut self, v: usize) -> usize {
        let mut root = v;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = v;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn link(&mut self, u: usize, x: Letter, v: usize) {
        let u = self.find(u);
        match self.adj[u].get(&x) {
            Some(&w) => self.pending.push((w, v)),
            None => {
                self.adj[u].insert(x, v);
            }
        }
    }

    fn add_edge(&mut self, u: usize, x: Letter, v: usize) {
        self.link(u, x, v);
        self.link(v, x.inverse(), u);
        while let Some((p, q)) = self.pending.pop() {
            let (p, q) = (self.find(p), self.find(q));
            if p == q {
                continue;
            }
            let (keep, gone) = (p.min(q), p.max(q));
            self.parent[gone] = keep;
            let moved = std::mem::take(&mut self.adj[gone]);
            for (x, t) in moved {
                self.link(keep, x, t);
            }
        }
    }

    fn add_loop(&mut self, word: &ReducedWord) {
        let letters = word.letters();
        let mut cur = 0;
        for (i, &x) in letters.iter().enumerate() {
            let next = if i + 1 == letters.len() { 0 } else { self.add_vertex() };
            self.add_edge(cur, x, next);
            cur = next;
        }
    }

    fn finish(mut self, free_rank: usize) -> CoreGraph {
        let mut edges = Vec::new();
        for v in 0..self.parent.len() {
            if self.find(v) != v {
                continue;
            }
            let out: Vec<(Letter, usize)> = self.adj[v].iter().map(|(&x, &t)| (x, t)).collect();
            for (x, t) in out {
                if !x.is_inverse() {
                    let t = self.find(t);
                    edges.push((v, x.generator(), t));
                }
            }
        }
        CoreGraph::trimmed(free_rank, self.parent.len(), edges)
    }
}

impl CoreGraph {
    /// Folds and trims an arbitrary labelled graph based at `basepoint`.
    pub fn from_edges(
        free_rank: usize,
        vertices: usize,
        basepoint: usize,
        edges: &[(usize, usize, usize)],
    ) -> Result<Self, StallingsError> {
        if free_rank == 0 {
            return Err(StallingsError::ZeroRank);
        }
        let mut f = Folder::new();
        // vertex 0 of the folder is the basepoint
        let mut map = vec![usize::MAX; vertices];
        if basepoint >= vertices {
            return Err(StallingsError::BadVertex { vertex: basepoint, vertices });
        }
        map[basepoint] = 0;
        for slot in map.iter_mut() {
            if *slot == usize::MAX {
                *slot = f.add_vertex();
            }
        }
        for &(u, g, v) in edges {
            for w in [u, v] {
                if w >= vertices {
                    return Err(StallingsError::BadVertex { vertex: w, vertices });
                }
            }
            if g >= free_rank {
                return Err(FreeGroupError::RankExceeded { letter: Letter::new(g, false).to_char(), rank: free_rank }.into());
            }
            f.add_edge(map[u], Letter::new(g, false), map[v]);
        }
        Ok(f.finish(free_rank))
    }

    /// Removes hanging trees (non-basepoint vertices of degree ≤ 1) and
    /// vertices not connected to the basepoint, then renumbers canonically.
    fn trimmed(free_rank: usize, vertices: usize, mut edges: Vec<(usize, usize, usize)>) -> Self {
        loop {
            let mut degree = vec![0usize; vertices];
            for &(u, _, v) in &edges {
                degree[u] += 1;
                degree[v] += 1;
            }
            let before = edges.len();
            edges.retain(|&(u, _, v)| (u == 0 || degree[u] > 1) && (v == 0 || degree[v] > 1));
            if edges.len() == before {
                break;
            }
        }
        Self::canonical(free_rank, vertices, &edges)
    }

    /// BFS renumbering from the basepoint, letters in order `a, A, b, B, …`.
    fn canonical(free_rank: usize, vertices: usize, edges: &[(usize, usize, usize)]) -> Self {
        let mut adj = vec![vec![None; 2 * free_rank]; vertices];
        for &(u, g, v) in edges {
            adj[u][2 * g] = Some(v);
            adj[v][2 * g + 1] = Some(u);
        }
        let mut id = vec![usize::MAX; vertices];
        id[0] = 0;
        let mut order = vec![0];
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for t in adj[u].iter().flatten() {
                if id[*t] == usize::MAX {
                    id[*t] = order.len();
                    order.push(*t);
                    queue.push_back(*t);
                }
            }
        }
        let n = order.len();
        let mut new_edges: Vec<(usize, usize, usize)> = edges
            .iter()
            .filter(|(u, _, _)| id[*u] != usize::MAX)
            .map(|&(u, g, v)| (id[u], g, id[v]))
            .collect();
        new_edges.sort_unstable();
        let mut new_adj = vec![vec![None; 2 * free_rank]; n];
        for &(u, g, v) in &new_edges {
            new_adj[u][2 * g] = Some(v);
            new_adj[v][2 * g + 1] = Some(u);
        }
        Self { free_rank, vertices: n, edges: new_edges, adj: new_adj }
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize, usize)] {
        &self.edges
    }

    /// Rank of the represented subgroup, `|E| − |V| + 1`.
    pub fn rank(&self) -> usize {
        self.edges.len() + 1 - self.vertices
    }

    pub fn target(&self, v: usize, x: Letter) -> Option<usize> {
        self.adj[v][x.index()]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].iter().flatten().count()
    }

    /// Every vertex has all `2r` edge-ends: the graph covers the bouquet.
    pub fn is_covering(&self) -> bool {
        self.adj.iter().all(|a| a.iter().all(Option::is_some))
    }

    /// End vertex of the path reading `letters` from the basepoint.
    pub fn read(&self, letters: &[Letter]) -> Option<usize> {
        letters.iter().try_fold(0, |v, &x| self.target(v, x))
    }

    pub fn contains(&self, w: &ReducedWord) -> bool {
        self.read(w.letters()) == Some(0)
    }

    /// Free basis from a BFS spanning tree: one generator per non-tree edge.
    pub fn basis(&self) -> Vec<ReducedWord> {
        let mut path: Vec<Option<Vec<Letter>>> = vec![None; self.vertices];
        let mut tree_edge = vec![false; self.edges.len()];
        path[0] = Some(Vec::new());
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for x in Letter::all(self.free_rank) {
                if let Some(t) = self.target(u, x) {
                    if path[t].is_none() {
                        let mut p = path[u].clone().expect("visited");
                        p.push(x);
                        path[t] = Some(p);
                        queue.push_back(t);
                        let e = if x.is_inverse() { (t, x.generator(), u) } else { (u, x.generator(), t) };
                        let idx = self.edges.binary_search(&e).expect("edge exists");
                        tree_edge[idx] = true;
                    }
                }
            }
        }
        self.edges
            .iter()
            .zip(&tree_edge)
            .filter(|(_, &t)| !t)
            .map(|(&(u, g, v), _)| {
                let pu = path[u].as_ref().expect("connected");
                let pv = path[v].as_ref().expect("connected");
                ReducedWord::reduce(
                    pu.iter().copied().chain([Letter::new(g, false)]).chain(pv.iter().rev().map(|l| l.inverse())),
                )
            })
            .collect()
    }

    /// Core graph of `⟨H, g⟩`: attach a loop reading `g` and refold.
    pub fn with_loop(&self, g: &ReducedWord) -> Self {
        let mut f = Folder::new();
        for _ in 1..self.vertices {
            f.add_vertex();
        }
        for &(u, gen, v) in &self.edges {
            f.add_edge(u, Letter::new(gen, false), v);
        }
        f.add_loop(g);
        f.finish(self.free_rank)
    }

    pub fn to_file(&self) -> CoreGraphFile {
        CoreGraphFile {
            rank: self.free_rank,
            vertices: self.vertices,
            basepoint: 0,
            edges: self
                .edges
                .iter()
                .map(|&(u, g, v)| CoreEdgeFile { from: u, label: Letter::new(g, false).to_char().to_string(), to: v })
                .collect(),
        }
    }

    pub fn from_file(file: &CoreGraphFile) -> Result<Self, StallingsError> {
        let edges = file
            .edges
            .iter()
            .map(|e| {
                let mut chars = e.label.chars();
                let (Some(c), None) = (chars.next(), chars.next()) else {
                    return Err(StallingsError::Word(FreeGroupError::NotReduced(e.label.clone())));
                };
                let l = Letter::from_char(c)?;
                Ok(if l.is_inverse() { (e.to, l.generator(), e.from) } else { (e.from, l.generator(), e.to) })
            })
            .collect::<Result<Vec<_>, StallingsError>>()?;
        Self::from_edges(file.rank, file.vertices, file.basepoint, &edges)
    }
}

/// Serialized core graph; edges sorted by `(from, label)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreGraphFile {
    pub rank: usize,
    pub vertices: usize,
    pub basepoint: usize,
    pub edges: Vec<CoreEdgeFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreEdgeFile {
    pub from: usize,
    pub label: String,
    pub to: usize,
}

/// A finitely generated subgroup together with its core graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupRecord {
    pub generators: Vec<ReducedWord>,
    pub core: CoreGraph,
    pub finite_index: bool,
    pub rank: usize,
}

impl SubgroupRecord {
    /// Record for the subgroup represented by `core`, with a free basis read
    /// off a spanning tree.
    pub fn from_core(core: CoreGraph) -> Self {
        Self { generators: core.basis(), finite_index: core.is_covering(), rank: core.rank(), core }
    }

    pub fn free_rank(&self) -> usize {
        self.core.free_rank()
    }

    /// Index in `F_r` when finite.
    pub fn index(&self) -> Option<usize> {
        self.finite_index.then_some(self.core.num_vertices())
    }

    pub fn contains(&self, w: &ReducedWord) -> bool {
        self.core.contains(w)
    }

    pub fn is_trivial(&self) -> bool {
        self.rank == 0
    }
}

/// Folds the wedge of generator loops into the core graph of `⟨gens⟩ ≤ F_r`.
pub fn build_core(gens: &[ReducedWord], free_rank: usize) -> Result<SubgroupRecord, StallingsError> {
    if free_rank == 0 {
        return Err(StallingsError::ZeroRank);
    }
    let mut kept = Vec::new();
    let mut f = Folder::new();
    for g in gens {
        g.check_rank(free_rank)?;
        let g = ReducedWord::reduce(g.letters().iter().copied());
        if g.is_empty() {
            continue;
        }
        f.add_loop(&g);
        kept.push(g);
    }
    let core = f.finish(free_rank);
    Ok(SubgroupRecord { generators: kept, finite_index: core.is_covering(), rank: core.rank(), core })
}

pub fn contains(rec: &SubgroupRecord, w: &ReducedWord) -> bool {
    rec.contains(w)
}

/// Automaton accepting exactly the reduced words in `H`: the core graph
/// crossed with last-letter memory, started and accepting at the basepoint.
pub fn subgroup_automaton(rec: &SubgroupRecord) -> Automaton {
    let core = &rec.core;
    let r = core.free_rank();
    let one = Rational::from_integer(1.into());
    let mut index: HashMap<(usize, Option<Letter>), usize> = HashMap::from([((0, None), 0)]);
    let mut order: Vec<(usize, Option<Letter>)> = vec![(0, None)];
    let mut transitions = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let (v, last) = order[i];
        for x in Letter::all(r) {
            if last == Some(x.inverse()) {
                continue;
            }
            if let Some(t) = core.target(v, x) {
                let key = (t, Some(x));
                let to = *index.entry(key).or_insert_with(|| {
                    order.push(key);
                    order.len() - 1
                });
                transitions.push(Transition { from: i, letter: x.index(), to, weight: one.clone() });
            }
        }
        i += 1;
    }
    let accepts: Vec<usize> = order.iter().enumerate().filter(|(_, (v, _))| *v == 0).map(|(i, _)| i).collect();
    WeightedAutomaton::new(Alphabet::free_group(r), order.len(), 0, accepts, transitions)
        .expect("folded core gives a deterministic automaton")
        .prune()
}

/// Whether `⟨H, g⟩ ≅ H ∗ ⟨g⟩`, decided by the rank of the folded graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FreeProductVerdict {
    /// Rank went up by exactly one; free groups are Hopfian, so the natural
    /// surjection from the free product is an isomorphism.
    Certified { rank_before: usize, rank_after: usize },
    Failed { rank_before: usize, rank_after: usize },
    /// `g` is trivial.
    Degenerate,
}

impl FreeProductVerdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, FreeProductVerdict::Certified { .. })
    }
}

pub fn free_product_certificate(rec: &SubgroupRecord, g: &ReducedWord) -> FreeProductVerdict {
    let g = ReducedWord::reduce(g.letters().iter().copied());
    if g.is_empty() {
        return FreeProductVerdict::Degenerate;
    }
    let joined = rec.core.with_loop(&g);
    let (rank_before, rank_after) = (rec.rank, joined.rank());
    if rank_after == rank_before + 1 {
        FreeProductVerdict::Certified { rank_before, rank_after }
    } else {
        FreeProductVerdict::Failed { rank_before, rank_after }
    }
}

/// Short-lex least `g` with a certified free product `⟨H, g⟩ ≅ H ∗ ⟨g⟩`.
pub fn find_free_factor_element(rec: &SubgroupRecord, max_len: usize) -> Result<ReducedWord, StallingsError> {
    if rec.finite_index {
        return Err(StallingsError::FiniteIndexSubgroup);
    }
    enumerate_reduced(rec.free_rank(), max_len)
        .into_iter()
        .skip(1)
        .find(|g| free_product_certificate(rec, g).is_certified())
        .ok_or(StallingsError::NotFound { max_len })
}

/// Explicit free-factor element `p x y x⁻¹ p⁻¹`, where `p` is a tree path to
/// a vertex missing the edge-end `x` and `y` is a letter of another
/// generator. Needs rank at least 2.
pub fn construct_free_factor_element(rec: &SubgroupRecord) -> Result<ReducedWord, StallingsError> {
    if rec.finite_index {
        return Err(StallingsError::FiniteIndexSubgroup);
    }
    let core = &rec.core;
    let r = core.free_rank();
    if r < 2 {
        // in rank 1 the only infinite-index subgroup is trivial
        return Ok(ReducedWord::reduce([Letter::new(0, false)]));
    }
    let mut path: Vec<Option<Vec<Letter>>> = vec![None; core.num_vertices()];
    path[0] = Some(Vec::new());
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        let p = path[u].clone().expect("visited");
        if let Some(x) = Letter::all(r).find(|&x| core.target(u, x).is_none()) {
            let y = Letter::new((x.generator() + 1) % r, false);
            let word = ReducedWord::reduce(
                p.iter().copied().chain([x, y, x.inverse()]).chain(p.iter().rev().map(|l| l.inverse())),
            );
            debug_assert!(free_product_certificate(rec, &word).is_certified());
            return Ok(word);
        }
        for x in Letter::all(r) {
            if let Some(t) = core.target(u, x) {
                if path[t].is_none() {
                    let mut q = p.clone();
                    q.push(x);
                    path[t] = Some(q);
                    queue.push_back(t);
                }
            }
        }
    }
    Err(StallingsError::FiniteIndexSubgroup)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> ReducedWord {
        ReducedWord::parse(s).unwrap()
    }

    fn rec(gens: &[&str]) -> SubgroupRecord {
        build_core(&gens.iter().map(|g| w(g)).collect::<Vec<_>>(), 2).unwrap()
    }

    #[test]
    fn cyclic_subgroup() {
        let h = rec(&["a"]);
        assert_eq!((h.core.num_vertices(), h.core.num_edges(), h.rank), (1, 1, 1));
        assert!(!h.finite_index);
        assert!(h.contains(&w("aaa")));
        assert!(!h.contains(&w("b")));
        assert!(h.contains(&ReducedWord::identity()));
    }

    #[test]
    fn conjugate_has_hair() {
        let h = rec(&["abA"]);
        assert_eq!(h.core.num_vertices(), 2);
        assert_eq!(h.core.edges(), &[(0, 0, 1), (1, 1, 1)]);
        assert_eq!(h.rank, 1);
        assert!(h.contains(&w("abbA")));
        assert!(!h.contains(&w("b")));
    }

    #[test]
    fn whole_group() {
        let h = rec(&["a", "b"]);
        assert_eq!((h.core.num_vertices(), h.rank), (1, 2));
        assert!(h.finite_index);
        assert_eq!(h.index(), Some(1));
    }

    #[test]
    fn folding_collapses_redundant_generators() {
        let h = rec(&["ab", "abab", "a"]);
        assert_eq!(h.rank, 2);
        assert!(h.finite_index);
        let t = build_core(&[], 2).unwrap();
        assert_eq!((t.core.num_vertices(), t.rank), (1, 0));
    }

    #[test]
    fn index_two_subgroup() {
        // ⟨a², b, a b a⁻¹⟩ has index 2 and rank 3
        let h = rec(&["aa", "b", "abA"]);
        assert!(h.finite_index);
        assert_eq!(h.index(), Some(2));
        assert_eq!(h.rank, 3);
    }

    #[test]
    fn subgroup_automaton_censuses() {
        let q = |n: i64| Rational::from_integer(n.into());
        let cyc = subgroup_automaton(&rec(&["a"]));
        assert_eq!(cyc.census(4).per_length, [1, 2, 2, 2, 2].map(q).to_vec());
        let h = subgroup_automaton(&rec(&["aa", "b"]));
        let c = h.census(2);
        assert_eq!(c.per_length, [1, 2, 4].map(q).to_vec());
        assert_eq!(c.cumulative[2], q(7));
        let g = subgroup_automaton(&rec(&["a", "b"]));
        assert_eq!(g.census(6), crate::freegroup::shortlex_automaton(2).census(6));
    }

    #[test]
    fn free_product_certificates() {
        let a = rec(&["a"]);
        assert_eq!(free_product_certificate(&a, &w("b")), FreeProductVerdict::Certified { rank_before: 1, rank_after: 2 });
        assert!(!free_product_certificate(&a, &w("aa")).is_certified());
        assert_eq!(free_product_certificate(&a, &ReducedWord::identity()), FreeProductVerdict::Degenerate);
        // ⟨a b a⁻¹, b a b⁻¹⟩ is free of rank 2
        assert!(free_product_certificate(&rec(&["abA"]), &w("baB")).is_certified());
    }

    #[test]
    fn free_factor_search() {
        assert_eq!(find_free_factor_element(&rec(&["a"]), 4).unwrap(), w("b"));
        assert_eq!(find_free_factor_element(&rec(&["a", "b"]), 4), Err(StallingsError::FiniteIndexSubgroup));
        let sq = rec(&["aa", "bb"]);
        let g = find_free_factor_element(&sq, 3).unwrap();
        assert!(g.len() <= 3);
        assert!(free_product_certificate(&sq, &g).is_certified());
    }

    #[test]
    fn constructed_free_factor_is_certified() {
        for gens in [&["a"][..], &["aa", "bb"], &["abA", "baB"], &["ab", "ba"]] {
            let h = rec(gens);
            let g = construct_free_factor_element(&h).unwrap();
            assert!(free_product_certificate(&h, &g).is_certified(), "{gens:?} -> {g}");
        }
    }

    #[test]
    fn basis_regenerates_the_same_core() {
        let h = rec(&["abAB", "baa", "bbb"]);
        let again = build_core(&h.core.basis(), 2).unwrap();
        assert_eq!(again.core, h.core);
        assert_eq!(h.core.basis().len(), h.rank);
    }

    #[test]
    fn json_round_trip() {
        let h = rec(&["abA", "bab"]);
        let file = h.core.to_file();
        assert!(file.edges.windows(2).all(|e| (e[0].from, &e[0].label) <= (e[1].from, &e[1].label)));
        assert_eq!(CoreGraph::from_file(&file).unwrap(), h.core);
    }
}
