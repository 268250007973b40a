//! Finite covers of the bouquet of circles with large girth, the punctured
//! covers `A_k`, and the experiment showing that the growth rates of the
//! infinite-index subgroups `H_k = π₁(A_k)` approach `λ_G = 3`.

use std::collections::VecDeque;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::format_decimal;
use crate::spectral::{growth_rate, SpectralEnclosure, SpectralError};
use crate::stallings::{subgroup_automaton, CoreGraph, StallingsError, SubgroupRecord};
use crate::{Letter, Rational};

/// Largest degree tried by [`find_girth_cover`].
pub const MAX_DEGREE: usize = 1 << 14;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoversError {
    #[error("cover graph is disconnected")]
    Disconnected,
    #[error("no cover of girth >= {target} within the attempt cap; best girth {best}")]
    AttemptCapExceeded { target: usize, best: usize },
    #[error("the a-edge at the basepoint is a loop")]
    LoopAtBasepoint,
    #[error("permutation {letter} is not a permutation of 0..{degree}")]
    InvalidPermutation { letter: usize, degree: usize },
    #[error("k must be at least 1")]
    BadK,
    #[error(transparent)]
    Stallings(#[from] StallingsError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Degree-`N` cover of the rank-`r` bouquet given by one permutation of the
/// sheets `0..N` per generator. Sheet 0 is the basepoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermCover {
    pub degree: usize,
    pub perms: Vec<Vec<usize>>,
    pub girth: usize,
}

impl PermCover {
    /// Validates the permutations and computes the girth.
    pub fn new(perms: Vec<Vec<usize>>) -> Result<Self, CoversError> {
        let degree = perms.first().map_or(0, Vec::len);
        for (letter, p) in perms.iter().enumerate() {
            let mut seen = vec![false; degree];
            if p.len() != degree || degree == 0 {
                return Err(CoversError::InvalidPermutation { letter, degree });
            }
            for &t in p {
                if t >= degree || std::mem::replace(&mut seen[t], true) {
                    return Err(CoversError::InvalidPermutation { letter, degree });
                }
            }
        }
        let girth = girth_of(&perms)?;
        Ok(Self { degree, perms, girth })
    }

    pub fn rank(&self) -> usize {
        self.perms.len()
    }

    /// Edges `(sheet, generator, perms[generator][sheet])`.
    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::with_capacity(self.degree * self.rank());
        for (g, p) in self.perms.iter().enumerate() {
            out.extend(p.iter().enumerate().map(|(v, &t)| (v, g, t)));
        }
        out
    }

    /// The finite-index subgroup `π₁(B)` of `F_r`.
    pub fn subgroup(&self) -> Result<SubgroupRecord, CoversError> {
        let core = CoreGraph::from_edges(self.rank(), self.degree, 0, &self.edges())?;
        Ok(SubgroupRecord::from_core(core))
    }
}

/// Incident edge-ends of every vertex as `(edge id, other end)`, where edge
/// `g·N + v` runs from `v` to `perms[g][v]`. Loops appear twice.
fn incidence(perms: &[Vec<usize>]) -> Vec<Vec<(usize, usize)>> {
    let n = perms.first().map_or(0, Vec::len);
    let mut inc = vec![Vec::with_capacity(2 * perms.len()); n];
    for (g, p) in perms.iter().enumerate() {
        for (v, &t) in p.iter().enumerate() {
            inc[v].push((g * n + v, t));
            inc[t].push((g * n + v, v));
        }
    }
    inc
}

/// Shortest cycle through the BFS tree rooted at `s`, reporting the closing
/// edge, limited to cycles shorter than `limit`.
fn short_cycle_from(inc: &[Vec<(usize, usize)>], s: usize, limit: usize) -> Option<(usize, usize)> {
    let n = inc.len();
    let mut dist = vec![usize::MAX; n];
    let mut via = vec![usize::MAX; n];
    dist[s] = 0;
    let mut queue = VecDeque::from([s]);
    let mut best: Option<(usize, usize)> = None;
    while let Some(u) = queue.pop_front() {
        if 2 * dist[u] + 1 >= best.map_or(limit, |b| b.0) {
            break;
        }
        for &(e, w) in &inc[u] {
            if e == via[u] {
                continue;
            }
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                via[w] = e;
                queue.push_back(w);
            } else {
                let len = dist[u] + dist[w] + 1;
                if len < best.map_or(limit, |b| b.0) {
                    best = Some((len, e));
                }
            }
        }
    }
    best
}

fn girth_of(perms: &[Vec<usize>]) -> Result<usize, CoversError> {
    let inc = incidence(perms);
    if !connected(&inc) {
        return Err(CoversError::Disconnected);
    }
    let mut best = usize::MAX;
    for s in 0..inc.len() {
        if let Some((len, _)) = short_cycle_from(&inc, s, best) {
            best = len;
        }
    }
    Ok(best)
}

fn connected(inc: &[Vec<(usize, usize)>]) -> bool {
    let mut seen = vec![false; inc.len()];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &(_, w) in &inc[u] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == inc.len()
}

/// Exact girth by BFS from every vertex. Loops have length 1 and parallel
/// edges length 2.
pub fn girth(c: &PermCover) -> Result<usize, CoversError> {
    girth_of(&c.perms)
}

/// Whether edge `e` (now present) lies on a cycle of length `< target`:
/// bounded BFS between its endpoints avoiding `e` itself.
fn edge_on_short_cycle(perms: &[Vec<usize>], e: usize, target: usize) -> bool {
    let n = perms[0].len();
    let (g, v) = (e / n, e % n);
    let t = perms[g][v];
    if t == v {
        return true;
    }
    // distance from t to v in the graph minus e must be >= target - 1
    let inv: Vec<Vec<usize>> = perms.iter().map(|p| invert(p)).collect();
    let mut frontier = vec![(t, usize::MAX)];
    let mut seen = std::collections::HashSet::from([t]);
    for _ in 1..target.saturating_sub(1) {
        let mut next = Vec::new();
        for &(u, came) in &frontier {
            for (h, (p, q)) in perms.iter().zip(&inv).enumerate() {
                let out_e = h * n + u;
                let in_e = h * n + q[u];
                for (edge, w) in [(out_e, p[u]), (in_e, q[u])] {
                    if edge == e || edge == came {
                        continue;
                    }
                    if w == v {
                        return true;
                    }
                    if seen.insert(w) {
                        next.push((w, edge));
                    }
                }
            }
        }
        frontier = next;
    }
    false
}

fn invert(p: &[usize]) -> Vec<usize> {
    let mut q = vec![0; p.len()];
    for (i, &t) in p.iter().enumerate() {
        q[t] = i;
    }
    q
}

/// Removes short cycles from random permutations by swapping targets of
/// same-labelled edges. A swap is kept only if neither new edge lies on a
/// cycle shorter than `target`, so the number of short cycles never grows.
fn repair(perms: &mut [Vec<usize>], target: usize, rng: &mut ChaCha8Rng, budget: usize) -> bool {
    let n = perms[0].len();
    let mut tries = 0;
    loop {
        let inc = incidence(perms);
        let bad = (0..n).find_map(|s| short_cycle_from(&inc, s, target));
        let Some((_, e)) = bad else { return true };
        let mut fixed = false;
        while tries < budget {
            tries += 1;
            let g = e / n;
            let v = e % n;
            let u = rng.gen_range(0..n);
            if u == v {
                continue;
            }
            perms[g].swap(v, u);
            let e2 = g * n + u;
            if !edge_on_short_cycle(perms, e, target) && !edge_on_short_cycle(perms, e2, target) {
                fixed = true;
                break;
            }
            perms[g].swap(v, u);
        }
        if !fixed {
            return false;
        }
    }
}

/// Seeded search for a connected cover of the rank-2 bouquet with girth at
/// least `2k + 1`. Each attempt draws random permutations and repairs their
/// short cycles; the degree starts at `2^(2k+1)` and doubles after a failed
/// attempt. The girth of the result is recomputed from scratch.
pub fn find_girth_cover(k: usize, seed: u64, attempt_cap: usize) -> Result<PermCover, CoversError> {
    if k == 0 {
        return Err(CoversError::BadK);
    }
    let target = 2 * k + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degree = 1usize << target.min(20);
    let mut best = 0;
    for _ in 0..attempt_cap {
        let mut perms: Vec<Vec<usize>> = (0..2)
            .map(|_| {
                let mut p: Vec<usize> = (0..degree).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect();
        let repaired = repair(&mut perms, target, &mut rng, 50 * degree);
        match PermCover::new(perms) {
            Ok(c) if repaired && c.girth >= target => return Ok(c),
            Ok(c) => best = best.max(c.girth),
            Err(CoversError::Disconnected) => {}
            Err(e) => return Err(e),
        }
        degree = (degree * 2).min(MAX_DEGREE);
    }
    Err(CoversError::AttemptCapExceeded { target, best })
}

/// `A_k`: the cover with the `a`-edge at the basepoint removed, cored at
/// the basepoint.
pub fn puncture(c: &PermCover) -> Result<SubgroupRecord, CoversError> {
    if c.perms[0][0] == 0 {
        return Err(CoversError::LoopAtBasepoint);
    }
    let edges: Vec<_> = c.edges().into_iter().filter(|&(v, g, _)| !(v == 0 && g == 0)).collect();
    let core = CoreGraph::from_edges(c.rank(), c.degree, 0, &edges)?;
    Ok(SubgroupRecord::from_core(core))
}

/// Minimum number of leaves of a `k`-tree, `2·3^(k−1)`.
pub fn ktree_leaf_bound(k: usize) -> BigInt {
    assert!(k >= 1, "k-trees need k >= 1");
    BigInt::from(2) * num_traits::pow(BigInt::from(3), k - 1)
}

/// Checks that in the universal cover of `core`, rooted at the basepoint and
/// directed away from it, every depth-`k` subtree is a `k`-tree: below depth
/// `k` every vertex has 3 children, except at most one with 2.
pub fn has_ktree_subtrees(core: &CoreGraph, k: usize) -> bool {
    let r = core.free_rank();
    let mut roots: Vec<(usize, Option<Letter>)> = vec![(0, None)];
    for v in 0..core.num_vertices() {
        for x in Letter::all(r) {
            if core.target(v, x.inverse()).is_some() {
                roots.push((v, Some(x)));
            }
        }
    }
    roots.into_iter().all(|root| {
        let mut twos = 0;
        let mut layer = vec![root];
        for _ in 0..k {
            let mut next = Vec::new();
            for (v, last) in layer {
                let children: Vec<_> = Letter::all(r)
                    .filter(|&x| last != Some(x.inverse()))
                    .filter_map(|x| core.target(v, x).map(|t| (t, Some(x))))
                    .collect();
                match children.len() {
                    3 => {}
                    2 => twos += 1,
                    _ => return false,
                }
                next.extend(children);
            }
            layer = next;
        }
        twos <= 1
    })
}

/// Rational bracket `[lo, hi]` of `3·(2/3)^(1/k)`, the positive root of
/// `x^k = 2·3^(k−1)`, of width at most `2^-bits`.
pub fn tree_growth_bound(k: usize, bits: u32) -> (Rational, Rational) {
    assert!(k >= 1);
    let target = Rational::from_integer(ktree_leaf_bound(k));
    let mut lo = Rational::from_integer(2.into());
    let mut hi = Rational::from_integer(3.into());
    let two = Rational::from_integer(2.into());
    for _ in 0..bits {
        let mid = (&lo + &hi) / &two;
        if num_traits::pow(mid.clone(), k) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// One row of the non-uniformity table.
#[derive(Debug, Clone, PartialEq)]
pub struct NonUniformRow {
    pub k: usize,
    pub degree: usize,
    pub girth: usize,
    pub lambda: SpectralEnclosure<Rational>,
    pub bound: (Rational, Rational),
    /// `3·(2/3)^(1/k) ≤ λ.upper` and `λ.upper < 3`, decided exactly.
    pub certified: bool,
    /// The stronger `3·(2/3)^(1/k) ≤ λ.lower`.
    pub lower_above_bound: bool,
    /// `3 − λ.upper`.
    pub gap_to_three: Rational,
    pub ktree_subtrees: bool,
    /// Rank of `π₁(B_k)` equals `N + 1`.
    pub schreier_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonUniformReport {
    pub rows: Vec<NonUniformRow>,
}

impl NonUniformReport {
    pub fn all_certified(&self) -> bool {
        self.rows.iter().all(|r| r.certified)
    }

    /// CSV with header `k,degree,girth,lambda_lower,lambda_upper,bound_lower,certified`.
    /// Bounds are rounded outward to 12 decimal places.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,degree,girth,lambda_lower,lambda_upper,bound_lower,certified\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.k,
                r.degree,
                r.girth,
                format_decimal(&r.lambda.lower, 12, false),
                format_decimal(&r.lambda.upper, 12, true),
                format_decimal(&r.bound.0, 12, false),
                r.certified
            ));
        }
        out
    }
}

/// For each `k ≤ k_max`: find a cover of girth `≥ 2k+1`, puncture it, and
/// enclose `λ_{H_k}`.
pub fn nonuniform_experiment(
    k_max: usize,
    tol: &Rational,
    seed: u64,
    attempt_cap: usize,
) -> Result<NonUniformReport, CoversError> {
    if k_max == 0 {
        return Err(CoversError::BadK);
    }
    let three = Rational::from_integer(3.into());
    let mut rows = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let cover = find_girth_cover(k, seed.wrapping_add(k as u64), attempt_cap)?;
        debug_assert_eq!(girth(&cover)?, cover.girth);
        let whole = cover.subgroup()?;
        let schreier_ok = whole.finite_index && whole.index() == Some(cover.degree) && whole.rank == cover.degree + 1;
        let h = puncture(&cover)?;
        let lambda = growth_rate(&subgroup_automaton(&h), tol)?.lambda();
        let bound_target = Rational::from_integer(ktree_leaf_bound(k));
        let upper_ok = num_traits::pow(lambda.upper.clone(), k) >= bound_target;
        let lower_above_bound = num_traits::pow(lambda.lower.clone(), k) >= bound_target;
        rows.push(NonUniformRow {
            k,
            degree: cover.degree,
            girth: cover.girth,
            certified: upper_ok && lambda.upper < three,
            lower_above_bound,
            gap_to_three: &three - &lambda.upper,
            bound: tree_growth_bound(k, 64),
            ktree_subtrees: has_ktree_subtrees(&h.core, k),
            schreier_ok,
            lambda,
        });
    }
    Ok(NonUniformReport { rows })
}

/// Default number of search attempts per `k`.
pub const DEFAULT_ATTEMPT_CAP: usize = 8;
