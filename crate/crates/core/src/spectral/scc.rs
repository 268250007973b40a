use std::collections::{BTreeSet, VecDeque};

use num_integer::Integer;

use super::{SpectralError, TransitionMatrix};
use crate::scalar::Scalar;

/// Strongly connected components in topological order.
///
/// Every edge between distinct blocks goes from a lower to a higher block
/// index, so permuting the states block by block makes the matrix block
/// upper-triangular.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccDecomposition {
    pub blocks: Vec<Vec<usize>>,
    /// Block index of every state.
    pub block_of: Vec<usize>,
    /// States listed block by block.
    pub permutation: Vec<usize>,
    pub dag_edges: BTreeSet<(usize, usize)>,
    /// Blocks whose spectral radius may attain the maximum; filled in by
    /// [`super::spectral_radius`].
    pub maximal_blocks: Vec<usize>,
}

impl SccDecomposition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// A single state without a self-loop: the `[0]` block.
    pub fn is_trivial<W: Scalar>(&self, a: &TransitionMatrix<W>, block: usize) -> bool {
        let states = &self.blocks[block];
        states.len() == 1 && a.get(states[0], states[0]).is_zero()
    }
}

/// Tarjan's algorithm, iterative.
pub fn scc_condense<W: Scalar>(a: &TransitionMatrix<W>) -> SccDecomposition {
    let n = a.dim();
    let succ: Vec<Vec<usize>> = (0..n).map(|i| a.successors(i).collect()).collect();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut counter = 0;
    let mut found: Vec<Vec<usize>> = Vec::new();

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(top) = call.last_mut() {
            let v = top.0;
            if let Some(&w) = succ[v].get(top.1) {
                top.1 += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    found.push(comp);
                }
            }
        }
    }

    // Tarjan emits sinks first.
    found.reverse();
    let mut block_of = vec![0; n];
    for (b, comp) in found.iter().enumerate() {
        for &v in comp {
            block_of[v] = b;
        }
    }
    let dag_edges = a
        .entries()
        .map(|(i, j, _)| (block_of[i], block_of[j]))
        .filter(|(x, y)| x != y)
        .collect();
    let permutation = found.iter().flatten().copied().collect();
    SccDecomposition { blocks: found, block_of, permutation, dag_edges, maximal_blocks: Vec::new() }
}

/// True when the digraph of `a` is strongly connected (the `[0]` matrix
/// counts as irreducible).
pub fn is_irreducible<W: Scalar>(a: &TransitionMatrix<W>) -> bool {
    a.dim() > 0 && scc_condense(a).len() == 1
}

/// Period of an irreducible block: gcd of its cycle lengths, computed from a
/// BFS layering as the gcd of `level(u) + 1 - level(v)` over all edges.
pub fn period<W: Scalar>(block: &TransitionMatrix<W>) -> Result<usize, SpectralError> {
    let n = block.dim();
    if n == 0 || block.is_zero() {
        return Err(SpectralError::NoCycle);
    }
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for v in block.successors(u) {
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    if level.contains(&usize::MAX) {
        return Err(SpectralError::NotIrreducible);
    }
    let mut g = 0usize;
    for (u, v, _) in block.entries() {
        let d = (level[u] as i64 + 1 - level[v] as i64).unsigned_abs() as usize;
        g = g.gcd(&d);
    }
    if g == 0 {
        // Only possible without cycles, which an irreducible nonzero block cannot be.
        return Err(SpectralError::NotIrreducible);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn m(n: usize, edges: &[(usize, usize)]) -> TransitionMatrix<Rational> {
        TransitionMatrix::from_entries(n, edges.iter().map(|&(i, j)| (i, j, Rational::from_integer(1.into()))))
            .unwrap()
    }

    #[test]
    fn dag_gives_singletons_in_topological_order() {
        let a = m(3, &[(0, 1), (0, 2), (1, 2)]);
        let d = scc_condense(&a);
        assert_eq!(d.blocks, vec![vec![0], vec![1], vec![2]]);
        assert!(d.dag_edges.iter().all(|(x, y)| x < y));
        assert!((0..3).all(|b| d.is_trivial(&a, b)));
    }

    #[test]
    fn four_cycle_is_one_block() {
        let a = m(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let d = scc_condense(&a);
        assert_eq!(d.len(), 1);
        assert_eq!(d.blocks[0], vec![0, 1, 2, 3]);
    }

    #[test]
    fn permuted_matrix_is_block_upper_triangular() {
        // two 2-cycles joined by a bridge, listed in scrambled order
        let a = m(5, &[(3, 1), (1, 3), (1, 4), (4, 0), (0, 4), (2, 2), (2, 3)]);
        let d = scc_condense(&a);
        for (i, j, _) in a.entries() {
            assert!(d.block_of[i] <= d.block_of[j]);
        }
        assert_eq!(d.permutation.len(), 5);
    }

    #[test]
    fn periods() {
        assert_eq!(period(&m(3, &[(0, 1), (1, 2), (2, 0)])).unwrap(), 3);
        assert_eq!(period(&m(3, &[(0, 1), (1, 2), (2, 0), (1, 0)])).unwrap(), 1);
        // a 2-cycle and a 4-cycle through state 0
        let a = m(5, &[(0, 1), (1, 0), (0, 2), (2, 3), (3, 4), (4, 0)]);
        assert_eq!(period(&a).unwrap(), 2);
        assert_eq!(period(&m(1, &[])), Err(SpectralError::NoCycle));
    }
}
