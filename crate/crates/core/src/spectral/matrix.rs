use std::collections::BTreeMap;

use super::SpectralError;
use crate::automaton::WeightedAutomaton;
use crate::scalar::Scalar;

/// Sparse non-negative square matrix; entry `(i, j)` is the total weight of
/// edges `i -> j`. Zero entries are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<W> {
    rows: Vec<BTreeMap<usize, W>>,
}

impl<W: Scalar> TransitionMatrix<W> {
    pub fn zeros(dim: usize) -> Self {
        Self { rows: vec![BTreeMap::new(); dim] }
    }

    /// Sums repeated `(i, j)` entries; rejects negative values.
    pub fn from_entries(
        dim: usize,
        entries: impl IntoIterator<Item = (usize, usize, W)>,
    ) -> Result<Self, SpectralError> {
        let mut m = Self::zeros(dim);
        for (i, j, w) in entries {
            if i >= dim || j >= dim {
                return Err(SpectralError::IndexOutOfRange { index: i.max(j), dim });
            }
            if w < W::zero() {
                return Err(SpectralError::NegativeEntry { row: i, col: j });
            }
            m.add(i, j, w);
        }
        Ok(m)
    }

    pub fn from_dense(rows: Vec<Vec<W>>) -> Result<Self, SpectralError> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(SpectralError::DimensionMismatch { left: dim, right: bad.len() });
        }
        Self::from_entries(
            dim,
            rows.into_iter()
                .enumerate()
                .flat_map(|(i, r)| r.into_iter().enumerate().map(move |(j, w)| (i, j, w))),
        )
    }

    /// Adjacency matrix of an automaton; parallel edges with different labels
    /// are merged by summing their weights.
    pub fn from_automaton(g: &WeightedAutomaton<W>) -> Self {
        let mut m = Self::zeros(g.num_states());
        for t in g.transitions() {
            m.add(t.from, t.to, t.weight);
        }
        m
    }

    fn add(&mut self, i: usize, j: usize, w: W) {
        if w.is_zero() {
            return;
        }
        let slot = self.rows[i].entry(j).or_insert_with(W::zero);
        *slot = slot.clone() + w;
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> W {
        self.rows[i].get(&j).cloned().unwrap_or_else(W::zero)
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, &W)> + '_ {
        self.rows[i].iter().map(|(&j, w)| (j, w))
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &W)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |(&j, w)| (i, j, w)))
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.nnz() == 0
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[i].keys().copied()
    }

    /// Principal submatrix on `indices` (in the given order).
    pub fn submatrix(&self, indices: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.dim()];
        for (k, &i) in indices.iter().enumerate() {
            pos[i] = k;
        }
        let rows = indices
            .iter()
            .map(|&i| {
                self.rows[i]
                    .iter()
                    .filter(|(j, _)| pos[**j] != usize::MAX)
                    .map(|(j, w)| (pos[*j], w.clone()))
                    .collect()
            })
            .collect();
        Self { rows }
    }

    /// Embeds the matrix in the top-left corner of a larger zero matrix.
    pub fn padded(&self, dim: usize) -> Self {
        assert!(dim >= self.dim(), "cannot pad to a smaller dimension");
        let mut rows = self.rows.clone();
        rows.resize(dim, BTreeMap::new());
        Self { rows }
    }

    /// Entrywise `self <= other`.
    pub fn entrywise_le(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.entries().all(|(i, j, w)| *w <= other.get(i, j))
    }

    /// `(A x)_i`.
    pub fn mul_vec(&self, x: &[W]) -> Vec<W> {
        self.rows
            .iter()
            .map(|r| r.iter().fold(W::zero(), |acc, (j, w)| acc + w.clone() * x[*j].clone()))
            .collect()
    }

    /// `(xᵀ A)_j`.
    pub fn vec_mul(&self, x: &[W]) -> Vec<W> {
        let mut out = vec![W::zero(); self.dim()];
        for (i, r) in self.rows.iter().enumerate() {
            if x[i].is_zero() {
                continue;
            }
            for (j, w) in r {
                out[*j] = out[*j].clone() + x[i].clone() * w.clone();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut acc: BTreeMap<usize, W> = BTreeMap::new();
                for (k, a) in r {
                    for (j, b) in &other.rows[*k] {
                        let slot = acc.entry(*j).or_insert_with(W::zero);
                        *slot = slot.clone() + a.clone() * b.clone();
                    }
                }
                acc.retain(|_, w| !w.is_zero());
                acc
            })
            .collect();
        Self { rows }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity(self.dim());
        for _ in 0..k {
            acc = acc.matmul(self);
        }
        acc
    }

    pub fn identity(dim: usize) -> Self {
        Self { rows: (0..dim).map(|i| BTreeMap::from([(i, W::one())])).collect() }
    }

    /// Total weight of length-`n` paths from `i` to `j`, i.e. `(Aⁿ)_{ij}`.
    pub fn power_count(&self, i: usize, j: usize, n: usize) -> W {
        let mut v = vec![W::zero(); self.dim()];
        v[i] = W::one();
        for _ in 0..n {
            v = self.vec_mul(&v);
        }
        v[j].clone()
    }

    pub fn row_sums(&self) -> Vec<W> {
        self.rows
            .iter()
            .map(|r| r.values().fold(W::zero(), |acc, w| acc + w.clone()))
            .collect()
    }

    pub(crate) fn float_rows(&self) -> Vec<Vec<(usize, f64)>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|(&j, w)| (j, w.to_f64())).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Alphabet, Rational, Transition};

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn dense(rows: &[&[i64]]) -> TransitionMatrix<Rational> {
        TransitionMatrix::from_dense(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()).unwrap()
    }

    #[test]
    fn loops_with_two_labels_sum() {
        let alpha = Alphabet::free_group(1);
        let g = WeightedAutomaton::new(
            alpha,
            1,
            0,
            [0],
            [
                Transition { from: 0, letter: 0, to: 0, weight: q(1) },
                Transition { from: 0, letter: 1, to: 0, weight: q(1) },
            ],
        )
        .unwrap();
        assert_eq!(TransitionMatrix::from_automaton(&g), dense(&[&[2]]));
    }

    #[test]
    fn path_counts() {
        assert_eq!(dense(&[&[2]]).power_count(0, 0, 3), q(8));
        let cycle = dense(&[&[0, 1, 0], &[0, 0, 1], &[1, 0, 0]]);
        assert_eq!(cycle.power_count(0, 0, 3), q(1));
        assert_eq!(cycle.power_count(0, 0, 2), q(0));
        let fib = dense(&[&[1, 1], &[1, 0]]);
        assert_eq!(fib.power_count(0, 0, 5), q(8));
    }

    #[test]
    fn power_count_matches_matrix_power() {
        let m = dense(&[&[1, 2, 0], &[0, 1, 3], &[1, 0, 0]]);
        let p = m.pow(6);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.power_count(i, j, 6), p.get(i, j));
            }
        }
    }

    #[test]
    fn rejects_negative_and_ragged() {
        assert!(matches!(
            TransitionMatrix::from_dense(vec![vec![q(-1)]]),
            Err(SpectralError::NegativeEntry { .. })
        ));
        assert!(TransitionMatrix::from_dense(vec![vec![q(1), q(1)]]).is_err());
    }

    #[test]
    fn padding_and_comparison() {
        let a = dense(&[&[1]]);
        let b = dense(&[&[1, 1], &[1, 0]]);
        assert!(a.padded(2).entrywise_le(&b));
        assert!(!b.entrywise_le(&a.padded(2)));
        assert!(!a.entrywise_le(&b));
    }
}
